//! Convergence of the sandwiched divergence to the relative entropy as `alpha -> 1`.

use rand::Rng;

use crate::divergences::{relative_entropy, sandwiched_renyi};
use crate::extended::ExtendedReal;
use crate::io::{MatrixFile, RunConfig};
use crate::linalg::PsdOperator;
use crate::random::{random_density, trial_rng};
use crate::{Error, Result};

use super::{CheckKind, CheckReport, ReportBuilder, Witness};

/// Allowed growth of the gap between consecutive epsilons.
pub const NOISE_TOLERANCE: f64 = 1e-9;
/// Largest acceptable gap at the smallest epsilon.
pub const FINAL_GAP_BOUND: f64 = 1e-3;
/// `|tr[rho] - 1|` accepted as density-normalized.
const TRACE_TOLERANCE: f64 = 1e-9;

/// `|D_{1+eps}(rho||sigma) - D(rho||sigma)|` for each `eps`.
pub fn limit_gaps(rho: &PsdOperator, sigma: &PsdOperator, eps_grid: &[f64], cfg: &crate::ToleranceConfig) -> Result<Vec<f64>> {
    let target = relative_entropy(rho, sigma, cfg)?;
    let ExtendedReal::Finite(target) = target else {
        return Err(Error::domain("the relative entropy is infinite; sigma must contain the support of rho"));
    };
    eps_grid
        .iter()
        .map(|&eps| {
            let v = sandwiched_renyi(rho, sigma, 1.0 + eps, cfg)?;
            Ok((v.to_f64() - target).abs())
        })
        .collect()
}

/// Checks each pair along `config.epsilon_grid` (which should decrease).
pub fn alpha_limit_suite(pairs: &[(PsdOperator, PsdOperator)], config: &RunConfig) -> Result<CheckReport> {
    let cfg = &config.tolerance;
    let eps = &config.epsilon_grid;
    if eps.is_empty() {
        return Err(Error::domain("epsilon grid is empty"));
    }
    let mut b = ReportBuilder::new("alpha-limit", config);
    for (i, (rho, sigma)) in pairs.iter().enumerate() {
        if (rho.trace() - 1.0).abs() > TRACE_TOLERANCE {
            return Err(Error::precondition(format!("pair {i}: rho has trace {}", rho.trace())));
        }
        let gaps = limit_gaps(rho, sigma, eps, cfg)?;
        let attach = |w: Witness| w.with_states(MatrixFile::psd(rho), MatrixFile::psd(sigma));
        for k in 1..gaps.len() {
            b.record(attach(Witness::finite(
                format!("pair {i}: gap at eps = {} ({:.3e}) <= gap at eps = {}", eps[k], gaps[k], eps[k - 1]),
                CheckKind::AlphaLimit,
                gaps[k - 1],
                gaps[k],
                NOISE_TOLERANCE,
            )));
        }
        let last = *gaps.last().unwrap();
        b.record(attach(Witness::finite(
            format!("pair {i}: final gap {last:.3e} <= {FINAL_GAP_BOUND}"),
            CheckKind::AlphaLimit,
            FINAL_GAP_BOUND,
            last,
            0.0,
        )));
    }
    Ok(b.finish())
}

/// `config.trials` random pairs, full-rank `sigma`, dimensions from `config.dims`.
pub fn alpha_limit_random(config: &RunConfig) -> Result<CheckReport> {
    let cfg = &config.tolerance;
    let pairs = (0..config.trials)
        .map(|i| {
            let mut rng = trial_rng(config.seed, i as u64);
            let d = config.dims[rng.random_range(0..config.dims.len())];
            let rho = PsdOperator::new(random_density(d, &mut rng), cfg)?;
            let sigma = PsdOperator::new(random_density(d, &mut rng), cfg)?;
            Ok((rho, sigma))
        })
        .collect::<Result<Vec<_>>>()?;
    alpha_limit_suite(&pairs, config)
}
