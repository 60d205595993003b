//! Randomized data-processing checks over map families, dimensions and divergences.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channels::{MapRecipe, SuperOperator, TraceTag};
use crate::divergences::DivergenceFamily;
use crate::io::{ChannelRepresentation, RunConfig};
use crate::linalg::{eig_hermitian_matrix, Projector, PsdOperator};
use crate::random::{
    drop_smallest_eigenvalue, proper_rank, random_density, random_density_in, random_projector, trial_rng,
    SeededRng,
};
use crate::{Error, Result, ToleranceConfig};

use super::{monotonicity_check, replay_monotonicity, CheckKind, CheckReport, ReportBuilder, Witness};

/// Map families sampled by the randomized suite.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MapFamily {
    RandomCptp,
    TransposeCptp,
    RandomPositiveNoncp,
    Reduction,
    Pinching,
    Depolarizing,
    Truncation,
    Halving,
    Counterexample,
    SubspaceDamping,
}

/// Which divergence the suite checks, and on which states.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DpiMode {
    /// Relative entropy under positive maps.
    RelativeEntropy,
    /// Sandwiched Rényi divergences on the alpha grid.
    Sandwiched,
    /// Relative entropy under trace-nonincreasing maps, with `rho` supported
    /// where the map preserves trace.
    TraceCondition,
}

impl DpiMode {
    pub fn default_families(self) -> Vec<MapFamily> {
        use MapFamily::*;
        match self {
            DpiMode::RelativeEntropy => vec![RandomCptp, TransposeCptp, Reduction, Pinching, Depolarizing],
            DpiMode::Sandwiched => vec![
                RandomCptp,
                TransposeCptp,
                Reduction,
                Pinching,
                Depolarizing,
                Halving,
                Counterexample,
                SubspaceDamping,
                Truncation,
            ],
            DpiMode::TraceCondition => vec![Counterexample, SubspaceDamping, Truncation],
        }
    }

    pub fn divergences(self, alpha_grid: &[f64]) -> Result<Vec<DivergenceFamily>> {
        match self {
            DpiMode::RelativeEntropy | DpiMode::TraceCondition => Ok(vec![DivergenceFamily::Umegaki]),
            DpiMode::Sandwiched => {
                if alpha_grid.is_empty() || alpha_grid.iter().any(|&a| !(a > 1.0)) {
                    return Err(Error::domain("sandwiched mode needs a nonempty alpha grid inside (1, inf)"));
                }
                Ok(alpha_grid
                    .iter()
                    .map(|&alpha| DivergenceFamily::SandwichedRenyi { alpha })
                    .collect())
            }
        }
    }
}

fn random_cptp_recipe(d: usize, rng: &mut SeededRng) -> MapRecipe {
    MapRecipe::RandomCptp {
        dim_in: d,
        dim_out: d,
        kraus_rank: rng.random_range(1..=d),
        seed: rng.random(),
    }
}

/// Draws a map of `family` on `C^d` (the counterexample family ignores `d`).
pub fn sample_recipe(family: MapFamily, d: usize, rng: &mut SeededRng) -> MapRecipe {
    match family {
        MapFamily::RandomCptp => random_cptp_recipe(d, rng),
        MapFamily::TransposeCptp => MapRecipe::compose(MapRecipe::Transpose { dim: d }, random_cptp_recipe(d, rng)),
        MapFamily::RandomPositiveNoncp => MapRecipe::RandomPositiveNoncp { dim: d, seed: rng.random() },
        MapFamily::Reduction => MapRecipe::Reduction { dim: d },
        MapFamily::Pinching => {
            let rank = proper_rank(d, rng);
            MapRecipe::pinching(&random_projector(d, rank, rng))
        }
        MapFamily::Depolarizing => MapRecipe::Depolarizing {
            dim: d,
            lambda: rng.random::<f64>(),
        },
        MapFamily::Truncation => {
            let base = if rng.random::<bool>() {
                random_cptp_recipe(d, rng)
            } else {
                MapRecipe::compose(MapRecipe::Transpose { dim: d }, random_cptp_recipe(d, rng))
            };
            let rank_in = rng.random_range(1..=d);
            let rank_out = rng.random_range(1..=d);
            let p_in = random_projector(d, rank_in, rng);
            let p_out = random_projector(d, rank_out, rng);
            MapRecipe::truncation(base, &p_in, &p_out)
        }
        MapFamily::Halving => MapRecipe::Scaling { dim: d, factor: 0.5 },
        MapFamily::Counterexample => MapRecipe::Counterexample,
        MapFamily::SubspaceDamping => {
            let rank = proper_rank(d, rng);
            let q = random_projector(d, rank, rng);
            MapRecipe::subspace_damping(&q, rng.random::<f64>())
        }
    }
}

/// Eigenspace of `Phi^*(1)` at eigenvalue 1: inputs supported there keep their trace.
pub fn trace_preserved_subspace(phi: &SuperOperator) -> Result<Projector> {
    let e = eig_hermitian_matrix(phi.adjoint_unit().matrix())?;
    let cols: Vec<usize> = (0..e.dim())
        .filter(|&k| (e.values[k] - 1.0).abs() <= crate::channels::TRACE_BEHAVIOR_TOLERANCE)
        .collect();
    Ok(Projector::from_columns(&e.vectors, cols))
}

/// Fraction of trials drawing a full-rank pair; the rest split evenly between
/// rank-deficient `sigma` with generic `rho` and pairs nested in a common subspace.
const FULL_RANK_FRACTION: f64 = 0.7;
const VACUOUS_FRACTION: f64 = 0.15;

struct Trial {
    witness: Witness,
    sigma_rank_deficient: bool,
}

fn sample_states(
    phi: &SuperOperator,
    d: usize,
    keep_trace: bool,
    rng: &mut SeededRng,
    cfg: &ToleranceConfig,
) -> Result<(PsdOperator, PsdOperator)> {
    let u: f64 = rng.random();
    let (rho, sigma) = if keep_trace {
        let q = trace_preserved_subspace(phi)?;
        if q.rank() == 0 {
            return Err(Error::precondition(
                "map preserves trace on no input state; it cannot be checked in relative-entropy mode",
            ));
        }
        let rho = random_density_in(&q, rng);
        let sigma = if u < FULL_RANK_FRACTION {
            random_density(d, rng)
        } else if u < FULL_RANK_FRACTION + VACUOUS_FRACTION {
            drop_smallest_eigenvalue(&random_density(d, rng))
        } else {
            (&rho + random_density_in(&q, rng)) * crate::linalg::c(0.5, 0.0)
        };
        (rho, sigma)
    } else if u < FULL_RANK_FRACTION {
        (random_density(d, rng), random_density(d, rng))
    } else if u < FULL_RANK_FRACTION + VACUOUS_FRACTION {
        (random_density(d, rng), drop_smallest_eigenvalue(&random_density(d, rng)))
    } else {
        let rank = proper_rank(d, rng);
        let r = random_projector(d, rank, rng);
        let sigma = random_density_in(&r, rng);
        (random_density_in(&r, rng), sigma)
    };
    Ok((PsdOperator::new(rho, cfg)?, PsdOperator::new(sigma, cfg)?))
}

fn run_trial(config: &RunConfig, divergences: &[DivergenceFamily], index: usize) -> Result<Trial> {
    let cfg = &config.tolerance;
    let mut rng = trial_rng(config.seed, index as u64);
    let family = config.families[rng.random_range(0..config.families.len())];
    let divergence = divergences[rng.random_range(0..divergences.len())];
    let mut d = config.dims[rng.random_range(0..config.dims.len())];
    if family == MapFamily::Counterexample {
        d = 2;
    }
    if family == MapFamily::Reduction && d < 2 {
        return Err(Error::domain("the reduction family needs dimensions >= 2"));
    }
    let recipe = sample_recipe(family, d, &mut rng);
    let phi = recipe.build(cfg)?;
    let keep_trace =
        divergence == DivergenceFamily::Umegaki && phi.trace_behavior()?.tag != TraceTag::Preserving;
    let (rho, sigma) = sample_states(&phi, d, keep_trace, &mut rng, cfg)?;
    let sigma_rank_deficient = !sigma.is_full_rank(cfg);
    let mut witness = monotonicity_check(&phi, &rho, &sigma, &divergence, cfg)?
        .with_map(ChannelRepresentation::family(recipe));
    witness.label = format!("trial {index}: {} under {}", witness.label, family_label(family));
    Ok(Trial {
        witness,
        sigma_rank_deficient,
    })
}

fn family_label(family: MapFamily) -> String {
    serde_json::to_value(family)
        .ok()
        .and_then(|v| v.as_str().map(str::to_owned))
        .unwrap_or_default()
}

/// Smallest share of trials that must use a rank-deficient `sigma`.
pub const MIN_RANK_DEFICIENT_SHARE: f64 = 0.05;

/// Below this many trials the rank-deficiency share is not checked.
const COVERAGE_MIN_TRIALS: usize = 100;

/// Randomized monotonicity checks. Trials run in parallel; every trial draws
/// from its own counter-derived generator, so the report depends only on the config.
pub fn randomized_dpi_suite(config: &RunConfig) -> Result<CheckReport> {
    if config.families.is_empty() {
        return Err(Error::domain("no map families selected"));
    }
    let divergences = config.mode.divergences(&config.alpha_grid)?;
    let cfg = config.tolerance;
    let trials: Vec<Trial> = (0..config.trials)
        .into_par_iter()
        .map(|i| run_trial(config, &divergences, i))
        .collect::<Result<_>>()?;

    let suite_name = match config.mode {
        DpiMode::RelativeEntropy => "dpi/relative-entropy",
        DpiMode::Sandwiched => "dpi/sandwiched",
        DpiMode::TraceCondition => "dpi/trace-condition",
    };
    let mut builder = ReportBuilder::new(suite_name, config);
    let deficient = trials.iter().filter(|t| t.sigma_rank_deficient).count();
    for t in trials {
        builder.record_with_replay(t.witness, |w| replay_monotonicity(w, &cfg))?;
    }
    if config.trials > 0 {
        let share = deficient as f64 / config.trials as f64;
        builder.note(format!("rank-deficient sigma in {deficient} of {} trials", config.trials));
        if config.trials >= COVERAGE_MIN_TRIALS {
            builder.record(Witness::finite(
                "share of trials with rank-deficient sigma",
                CheckKind::Coverage,
                share,
                MIN_RANK_DEFICIENT_SHARE,
                0.0,
            ));
        }
    }
    Ok(builder.finish())
}
