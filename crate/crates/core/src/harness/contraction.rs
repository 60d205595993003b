//! Contraction of `Psi = Gamma_{phi(sigma)}^{-1} ∘ phi ∘ Gamma_sigma` in the weighted norms.

use rand::Rng;
use rayon::prelude::*;

use crate::channels::{norm_probe, MapRecipe, SuperOperator};
use crate::divergences::weighted_p_norm;
use crate::io::{ChannelRepresentation, MatrixFile, RunConfig};
use crate::linalg::{identity, max_abs_entry, PsdOperator};
use crate::random::{random_density, sub_seed, trial_rng};
use crate::{Error, Result, ToleranceConfig};

use super::dpi::{sample_recipe, MapFamily};
use super::{CheckKind, CheckReport, ReportBuilder, Witness};

/// Allowed excess of a norm ratio over 1.
pub const RATIO_SLACK: f64 = 1e-8;
/// `Psi(1) = 1` residual bound.
pub const UNIT_TOLERANCE: f64 = 1e-9;
/// `||phi^*(1)||_inf <= 1` slack.
pub const ONE_TO_ONE_SLACK: f64 = 1e-10;

/// `Gamma_{phi(sigma)}^{-1} ∘ phi ∘ Gamma_sigma` as a superoperator.
pub fn normalized_map(phi: &SuperOperator, sigma: &PsdOperator, cfg: &ToleranceConfig) -> Result<(SuperOperator, PsdOperator)> {
    if !sigma.is_full_rank(cfg) {
        return Err(Error::domain("sigma must be full rank"));
    }
    let out = phi.apply_psd(sigma, cfg)?;
    if !out.is_full_rank(cfg) {
        return Err(Error::domain("phi(sigma) must be full rank"));
    }
    let gamma = SuperOperator::from_kraus(vec![sigma.eigen().function_on_support(cfg, f64::sqrt)])?;
    let gamma_inv = SuperOperator::from_kraus(vec![out.eigen().function_on_support(cfg, |v| v.powf(-0.5))])?;
    Ok((gamma_inv.compose(&phi.compose(&gamma)?)?, out))
}

/// Records the ratio and endpoint checks for one `(phi, sigma)` instance.
#[allow(clippy::too_many_arguments)]
pub fn norm_contraction_check(
    builder: &mut ReportBuilder,
    label: &str,
    phi: &SuperOperator,
    map: Option<&ChannelRepresentation>,
    sigma: &PsdOperator,
    alpha_grid: &[f64],
    trials: usize,
    seed: u64,
    cfg: &ToleranceConfig,
) -> Result<()> {
    if !phi.certificate().is_positive() {
        return Err(Error::precondition("norm contraction needs a positivity certificate"));
    }
    let behavior = phi.trace_behavior()?;
    if !behavior.is_nonincreasing() {
        return Err(Error::precondition("norm contraction needs a trace-nonincreasing map"));
    }
    let (psi, out) = normalized_map(phi, sigma, cfg)?;
    let d = phi.dim_in();
    let attach = |w: Witness| {
        let w = w.with_states(MatrixFile::psd(sigma), MatrixFile::psd(&out));
        match map {
            Some(m) => w.with_map(m.clone()),
            None => w,
        }
    };

    let mut grid: Vec<f64> = alpha_grid.to_vec();
    grid.push(f64::INFINITY);
    let ratios: Vec<(usize, f64, f64)> = (0..trials)
        .into_par_iter()
        .flat_map_iter(|k| grid.iter().map(move |&p| (k, p)))
        .map(|(k, p)| {
            let x = norm_probe(d, seed, k);
            let den = weighted_p_norm(&x, sigma, p, cfg)?;
            let num = weighted_p_norm(&psi.apply(&x)?, &out, p, cfg)?;
            Ok((k, p, if den > 0.0 { num / den } else { 0.0 }))
        })
        .collect::<Result<_>>()?;
    for (k, p, ratio) in ratios {
        builder.record(Witness::finite(
            format!("{label}: probe {k}, p = {p}: ratio {ratio:.17e}"),
            CheckKind::NormContraction,
            1.0,
            ratio,
            RATIO_SLACK,
        ));
    }

    let unit_residual = max_abs_entry(&(psi.apply(&identity(d))? - identity(phi.dim_out())));
    builder.record(attach(Witness::finite(
        format!("{label}: Psi(1) = 1"),
        CheckKind::Endpoint,
        0.0,
        unit_residual,
        UNIT_TOLERANCE,
    )));
    let one_to_one = phi.one_to_one_norm_positive()?;
    builder.record(attach(Witness::finite(
        format!("{label}: ||phi^*(1)||_inf <= 1 ({:?})", behavior.tag),
        CheckKind::Endpoint,
        1.0,
        one_to_one,
        ONE_TO_ONE_SLACK,
    )));
    Ok(())
}

/// Single-instance suite.
pub fn norm_contraction_suite(
    sigma: &PsdOperator,
    phi: &SuperOperator,
    map: Option<&ChannelRepresentation>,
    config: &RunConfig,
) -> Result<CheckReport> {
    let mut b = ReportBuilder::new("contraction", config);
    norm_contraction_check(
        &mut b,
        "instance",
        phi,
        map,
        sigma,
        &config.alpha_grid,
        config.trials,
        config.seed,
        &config.tolerance,
    )?;
    Ok(b.finish())
}

/// Families cycled through by the batch suite; half are positive but not CP.
pub const CONTRACTION_FAMILIES: [MapFamily; 6] = [
    MapFamily::RandomCptp,
    MapFamily::TransposeCptp,
    MapFamily::Reduction,
    MapFamily::RandomPositiveNoncp,
    MapFamily::Depolarizing,
    MapFamily::Pinching,
];

/// `config.instances` seeded `(phi, sigma)` pairs with `config.trials` probes each.
pub fn norm_contraction_batch(config: &RunConfig) -> Result<CheckReport> {
    let cfg = &config.tolerance;
    let mut b = ReportBuilder::new("contraction", config);
    for i in 0..config.instances {
        let mut rng = trial_rng(config.seed, i as u64);
        let family = CONTRACTION_FAMILIES[i % CONTRACTION_FAMILIES.len()];
        let mut d = config.dims[rng.random_range(0..config.dims.len())];
        if family == MapFamily::Reduction {
            d = d.max(2);
        }
        let recipe: MapRecipe = sample_recipe(family, d, &mut rng);
        let phi = recipe.build(cfg)?;
        let sigma = PsdOperator::new(random_density(d, &mut rng), cfg)?;
        let label = format!("instance {i} ({}, d = {d})", recipe.name());
        norm_contraction_check(
            &mut b,
            &label,
            &phi,
            Some(&ChannelRepresentation::family(recipe)),
            &sigma,
            &config.alpha_grid,
            config.trials,
            sub_seed(config.seed, i as u64),
            cfg,
        )?;
    }
    Ok(b.finish())
}
