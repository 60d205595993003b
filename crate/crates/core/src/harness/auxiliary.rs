//! Operator concavity of the logarithm, entropy under coarse-graining, Klein's
//! inequality and support propagation on random instances.

use rand::Rng;
use rayon::prelude::*;

use crate::channels::{pinching, MapRecipe};
use crate::divergences::{klein_gap, off_support_weight, support_contained, von_neumann_entropy};
use crate::extended::ExtendedReal;
use crate::io::{ChannelRepresentation, MatrixFile, RunConfig};
use crate::linalg::{c, Projector, PsdOperator};
use crate::random::{
    proper_rank, random_density, random_density_in, random_projector, random_pure_state, trial_rng,
    SeededRng,
};
use crate::{Result, ToleranceConfig};

use super::dpi::{sample_recipe, MapFamily};
use super::step2::log_concavity_gap;
use super::{CheckKind, CheckReport, ReportBuilder, Witness};

pub const LOG_CONCAVITY_TOLERANCE: f64 = 1e-8;
pub const ENTROPY_TOLERANCE: f64 = 1e-9;
pub const KLEIN_TOLERANCE: f64 = 1e-9;

/// Share of trials whose pinching commutes with `sigma`, where (a) and (b) are equalities.
const COMMUTING_FRACTION: f64 = 0.25;

const SUPPORT_FAMILIES: [MapFamily; 5] = [
    MapFamily::RandomCptp,
    MapFamily::TransposeCptp,
    MapFamily::Reduction,
    MapFamily::Pinching,
    MapFamily::Halving,
];

/// Projector spanned by `rank` eigenvectors of `sigma`, so that it commutes with `sigma`.
fn commuting_projector(sigma: &PsdOperator, rank: usize, rng: &mut SeededRng) -> Projector {
    let d = sigma.dim();
    let mut cols: Vec<usize> = (0..d).collect();
    for i in (1..d).rev() {
        cols.swap(i, rng.random_range(0..=i));
    }
    Projector::from_columns(&sigma.eigen().vectors, cols.into_iter().take(rank))
}

fn trial(index: usize, config: &RunConfig) -> Result<Vec<Witness>> {
    let cfg: &ToleranceConfig = &config.tolerance;
    let mut rng = trial_rng(config.seed, index as u64);
    let d = config.dims[rng.random_range(0..config.dims.len())].max(2);
    let sigma = PsdOperator::new(random_density(d, &mut rng), cfg)?;
    let rank = proper_rank(d, &mut rng);
    let commuting = rng.random::<f64>() < COMMUTING_FRACTION;
    let p = if commuting {
        commuting_projector(&sigma, rank, &mut rng)
    } else {
        random_projector(d, rank, &mut rng)
    };
    let pi = pinching(&p);
    let tag = if commuting { "commuting" } else { "generic" };
    let mut out = Vec::with_capacity(4);

    // (a) log is operator concave: log Pi(sigma) >= Pi(log sigma).
    out.push(
        Witness::finite(
            format!("trial {index} ({tag}, d = {d}): lambda_min(log Pi(sigma) - Pi(log sigma))"),
            CheckKind::LogConcavity,
            log_concavity_gap(&pi, &sigma, cfg)?,
            0.0,
            LOG_CONCAVITY_TOLERANCE,
        )
        .with_map(ChannelRepresentation::family(MapRecipe::pinching(&p))),
    );

    // (b) Entropy does not decrease under pinching; pure inputs in half the trials.
    let rho = if rng.random::<bool>() {
        random_pure_state(d, &mut rng)
    } else {
        random_density(d, &mut rng)
    };
    let rho = PsdOperator::new(if commuting { sigma.matrix().clone() } else { rho }, cfg)?;
    let s_before = von_neumann_entropy(&rho, cfg);
    let s_after = von_neumann_entropy(&pi.apply_psd(&rho, cfg)?, cfg);
    out.push(Witness::finite(
        format!("trial {index} ({tag}, d = {d}): S(Pi(rho)) >= S(rho)"),
        CheckKind::EntropyCoarseGraining,
        s_after,
        s_before,
        ENTROPY_TOLERANCE,
    ));

    // (c) Klein's inequality on unnormalized PSD pairs with nested supports.
    let r = random_projector(d, proper_rank(d, &mut rng), &mut rng);
    let scale_a: f64 = rng.random_range(0.1..3.0);
    let scale_b: f64 = rng.random_range(0.1..3.0);
    let b_op = (random_density_in(&r, &mut rng) + random_density(d, &mut rng) * c(rng.random::<f64>(), 0.0)) * c(scale_b, 0.0);
    let a_op = random_density_in(&r, &mut rng) * c(scale_a, 0.0);
    let (a, b) = (PsdOperator::new(a_op, cfg)?, PsdOperator::new(b_op, cfg)?);
    out.push(
        Witness::new(
            format!("trial {index}: D(A||B) + tr[B - A] >= 0"),
            CheckKind::Klein,
            klein_gap(&a, &b, cfg)?,
            ExtendedReal::Finite(0.0),
            KLEIN_TOLERANCE,
        )
        .with_states(MatrixFile::psd(&a), MatrixFile::psd(&b)),
    );

    // (d) supp(rho) ⊆ supp(sigma) survives any positive map.
    let s = random_projector(d, proper_rank(d, &mut rng), &mut rng);
    let sigma_low = PsdOperator::new(random_density_in(&s, &mut rng), cfg)?;
    let rho_low = PsdOperator::new(random_density_in(&s, &mut rng), cfg)?;
    debug_assert!(support_contained(&rho_low, &sigma_low, cfg));
    let family = SUPPORT_FAMILIES[rng.random_range(0..SUPPORT_FAMILIES.len())];
    let recipe = sample_recipe(family, d, &mut rng);
    let phi = recipe.build(cfg)?;
    let (phi_rho, phi_sigma) = (phi.apply_psd(&rho_low, cfg)?, phi.apply_psd(&sigma_low, cfg)?);
    let weight = off_support_weight(&phi_rho, &phi_sigma, cfg);
    out.push(
        Witness::finite(
            format!("trial {index}: supp(phi(rho)) ⊆ supp(phi(sigma)) under {}", recipe.name()),
            CheckKind::SupportInclusion,
            cfg.containment_tolerance * phi_rho.trace(),
            weight,
            0.0,
        )
        .with_map(ChannelRepresentation::family(recipe))
        .with_states(MatrixFile::psd(&rho_low), MatrixFile::psd(&sigma_low)),
    );
    Ok(out)
}

pub fn auxiliary_inequality_suite(config: &RunConfig) -> Result<CheckReport> {
    let per_trial: Vec<Vec<Witness>> = (0..config.trials)
        .into_par_iter()
        .map(|i| trial(i, config))
        .collect::<Result<_>>()?;
    let mut b = ReportBuilder::new("auxiliary", config);
    for w in per_trial.into_iter().flatten() {
        b.record(w);
    }
    Ok(b.finish())
}
