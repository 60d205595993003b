//! Search for channels and state pairs where the sandwiched divergence with
//! `alpha < 1/2` increases under a CPTP map.
//!
//! Random search over Stinespring isometries and state generators, followed by
//! hill-climbing from the best random instance. Finding nothing is reported as
//! inconclusive.

use rand::Rng;
use rayon::prelude::*;

use crate::channels::SuperOperator;
use crate::divergences::{sandwiched_renyi, DivergenceFamily};
use crate::extended::{ExtendedReal, Gap};
use crate::io::{from_json, to_canonical_json, ChannelRepresentation, MatrixFile, MatrixKind, RunConfig};
use crate::linalg::{c, ComplexMatrix, PsdOperator};
use crate::random::{ginibre, orthonormalize, trial_rng, SeededRng};
use crate::{Error, Result, ToleranceConfig};

use super::oracle::{sandwiched_renyi_svd, sandwiched_rounding_bound};
use super::{monotonicity_check, CheckKind, CheckReport, Outcome, ReportBuilder, Witness};

/// A violation counts when `D(phi rho||phi sigma) - D(rho||sigma)` exceeds this.
pub const VIOLATION_THRESHOLD: f64 = 1e-6;
/// Independent re-evaluation must reproduce the stored gap to this accuracy,
/// plus the rounding bound of the witness.
pub const REVERIFY_TOLERANCE: f64 = 1e-9;
/// Order at which the stored witness is replayed and must be monotone.
pub const REPLAY_ALPHA: f64 = 2.0;

const INITIAL_STEP: f64 = 0.2;
const MIN_STEP: f64 = 1e-4;
const PATIENCE: usize = 50;

/// Stinespring isometry plus state generators `G` with `rho = G G^dagger / tr`.
#[derive(Clone)]
struct Instance {
    d: usize,
    isometry: ComplexMatrix,
    g_rho: ComplexMatrix,
    g_sigma: ComplexMatrix,
}

fn normalized_state(g: &ComplexMatrix) -> ComplexMatrix {
    let m = g * g.adjoint();
    let t = m.trace().re;
    m * c(1.0 / t, 0.0)
}

impl Instance {
    fn sample(dims: &[usize], rng: &mut SeededRng) -> Self {
        let d = dims[rng.random_range(0..dims.len())];
        let rank = rng.random_range(1..=2 * d);
        let rho_cols = if rng.random::<bool>() { 1 } else { d };
        let sigma_cols = if rng.random::<f64>() < 0.3 { 1 } else { d };
        Self {
            d,
            isometry: orthonormalize(ginibre(rank * d, d, rng)),
            g_rho: ginibre(d, rho_cols, rng),
            g_sigma: ginibre(d, sigma_cols, rng),
        }
    }

    fn perturb(&self, step: f64, rng: &mut SeededRng) -> Self {
        let s = c(step, 0.0);
        let (r, cols) = self.isometry.shape();
        Self {
            d: self.d,
            isometry: orthonormalize(&self.isometry + ginibre(r, cols, rng) * s),
            g_rho: &self.g_rho + ginibre(self.d, self.g_rho.ncols(), rng) * s,
            g_sigma: &self.g_sigma + ginibre(self.d, self.g_sigma.ncols(), rng) * s,
        }
    }

    fn kraus(&self) -> Vec<ComplexMatrix> {
        let d = self.d;
        (0..self.isometry.nrows() / d)
            .map(|i| self.isometry.rows(i * d, d).into_owned())
            .collect()
    }

    fn map(&self) -> Result<SuperOperator> {
        SuperOperator::from_kraus(self.kraus())
    }

    fn states(&self, cfg: &ToleranceConfig) -> Result<(PsdOperator, PsdOperator)> {
        Ok((
            PsdOperator::new(normalized_state(&self.g_rho), cfg)?,
            PsdOperator::new(normalized_state(&self.g_sigma), cfg)?,
        ))
    }

    /// `D(phi rho||phi sigma) - D(rho||sigma)` when both sides are finite.
    fn violation(&self, alpha: f64, cfg: &ToleranceConfig) -> Option<f64> {
        let eval = || -> Result<Option<f64>> {
            let phi = self.map()?;
            let (rho, sigma) = self.states(cfg)?;
            let before = sandwiched_renyi(&rho, &sigma, alpha, cfg)?;
            let after = sandwiched_renyi(&phi.apply_psd(&rho, cfg)?, &phi.apply_psd(&sigma, cfg)?, alpha, cfg)?;
            Ok(match (before, after) {
                (ExtendedReal::Finite(b), ExtendedReal::Finite(a)) => Some(a - b),
                _ => None,
            })
        };
        eval().ok().flatten()
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 0.5) {
        return Err(Error::domain(format!(
            "the violation search needs alpha in (0, 1/2), got {alpha}; larger orders are monotone"
        )));
    }
    Ok(())
}

/// The best witness as a serializable record: Kraus map, states and both divergences.
fn witness_of(inst: &Instance, alpha: f64, cfg: &ToleranceConfig) -> Result<Witness> {
    let phi = inst.map()?;
    let (rho, sigma) = inst.states(cfg)?;
    let lhs = sandwiched_renyi(&rho, &sigma, alpha, cfg)?;
    let rhs = sandwiched_renyi(&phi.apply_psd(&rho, cfg)?, &phi.apply_psd(&sigma, cfg)?, alpha, cfg)?;
    Ok(violation_witness("best witness", lhs, rhs)
        .with_map(ChannelRepresentation::kraus(&inst.kraus()))
        .with_divergence(DivergenceFamily::SandwichedRenyi { alpha })
        .with_states(
            MatrixFile::new(rho.matrix(), MatrixKind::Density),
            MatrixFile::new(sigma.matrix(), MatrixKind::Density),
        ))
}

/// Violation witnesses pass when the monotonicity gap is below `-VIOLATION_THRESHOLD`.
fn violation_witness(label: &str, lhs: ExtendedReal, rhs: ExtendedReal) -> Witness {
    let mut w = Witness::new(label, CheckKind::Violation, lhs, rhs, VIOLATION_THRESHOLD);
    w.passed = w.gap.sort_key() < -VIOLATION_THRESHOLD;
    w
}

/// Rebuilds a witness from its JSON text and re-evaluates both sides with the
/// singular-value route. Returns the recomputed gap.
pub fn reverify(witness_json: &str, cfg: &ToleranceConfig) -> Result<Gap> {
    let w: Witness = from_json(witness_json)?;
    let missing = |what: &str| Error::Format(format!("witness has no {what}"));
    let phi = w.map.as_ref().ok_or_else(|| missing("map"))?.build_inferred(cfg)?;
    let rho = w.rho.as_ref().ok_or_else(|| missing("rho"))?.to_psd(cfg)?;
    let sigma = w.sigma.as_ref().ok_or_else(|| missing("sigma"))?.to_psd(cfg)?;
    let alpha = w
        .divergence
        .and_then(|f| f.alpha())
        .ok_or_else(|| missing("sandwiched divergence"))?;
    let lhs = sandwiched_renyi_svd(&rho, &sigma, alpha, cfg)?;
    let rhs = sandwiched_renyi_svd(&phi.apply_psd(&rho, cfg)?, &phi.apply_psd(&sigma, cfg)?, alpha, cfg)?;
    Ok(Gap::between(lhs, rhs))
}

pub fn violation_search(config: &RunConfig) -> Result<CheckReport> {
    let alpha = config.alpha;
    check_alpha(alpha)?;
    let cfg = &config.tolerance;
    let mut b = ReportBuilder::new("violation", config);
    if config.trials == 0 {
        b.note("no trials requested");
        return Ok(b.finish_with(Outcome::Inconclusive));
    }

    let scored: Vec<(f64, usize)> = (0..config.trials)
        .into_par_iter()
        .filter_map(|i| {
            let inst = Instance::sample(&config.dims, &mut trial_rng(config.seed, i as u64));
            inst.violation(alpha, cfg).map(|v| (v, i))
        })
        .collect();
    let violating = scored.iter().filter(|(v, _)| *v > VIOLATION_THRESHOLD).count();
    b.note(format!(
        "random search: {} trials, {} finite, {violating} violating",
        config.trials,
        scored.len()
    ));
    let Some(&(mut best, best_index)) = scored
        .iter()
        .max_by(|a, b| a.0.total_cmp(&b.0).then(b.1.cmp(&a.1)))
    else {
        b.note("no trial produced finite divergences");
        return Ok(b.finish_with(Outcome::Inconclusive));
    };
    let mut current = Instance::sample(&config.dims, &mut trial_rng(config.seed, best_index as u64));
    b.note(format!("best random trial {best_index}: violation {best:.6e}"));

    let mut rng = trial_rng(config.seed, u64::MAX);
    let mut step = INITIAL_STEP;
    let mut rejections = 0;
    for _ in 0..config.hill_climb_steps {
        let candidate = current.perturb(step, &mut rng);
        match candidate.violation(alpha, cfg) {
            Some(v) if v > best => {
                best = v;
                current = candidate;
                rejections = 0;
            }
            _ => {
                rejections += 1;
                if rejections >= PATIENCE {
                    step = (step * 0.5).max(MIN_STEP);
                    rejections = 0;
                }
            }
        }
    }
    b.note(format!("after {} hill-climbing steps: violation {best:.6e}", config.hill_climb_steps));

    let witness = witness_of(&current, alpha, cfg)?;
    if !witness.passed {
        b.feature(witness);
        b.note("no violation above threshold; result is inconclusive");
        return Ok(b.finish_with(Outcome::Inconclusive));
    }

    // Re-verify from the serialized form with the independent route.
    let text = to_canonical_json(&witness)?;
    let replayed = reverify(&text, cfg)?;
    let agreement = (replayed.sort_key() - witness.gap.sort_key()).abs();
    let phi = current.map()?;
    let (rho, sigma) = current.states(cfg)?;
    let conditioning = sandwiched_rounding_bound(&rho, &sigma, alpha, cfg)?
        + sandwiched_rounding_bound(&phi.apply_psd(&rho, cfg)?, &phi.apply_psd(&sigma, cfg)?, alpha, cfg)?;
    b.record(Witness::finite(
        format!("independent re-evaluation reproduces the gap ({agreement:.2e}, rounding bound {conditioning:.2e})"),
        CheckKind::ExactValue,
        0.0,
        if agreement.is_nan() { f64::INFINITY } else { agreement },
        REVERIFY_TOLERANCE + conditioning,
    ));
    let mut confirmed = violation_witness("re-verified violation", witness.lhs, witness.rhs);
    confirmed.gap = replayed;
    confirmed.passed = replayed.sort_key() < -VIOLATION_THRESHOLD;
    b.record(confirmed);

    // The same instance at alpha = 2 must be monotone.
    let family = DivergenceFamily::SandwichedRenyi { alpha: REPLAY_ALPHA };
    let mut replay = monotonicity_check(&phi, &rho, &sigma, &family, cfg)?
        .with_map(ChannelRepresentation::kraus(&current.kraus()));
    replay.label = format!("witness replayed at alpha = {REPLAY_ALPHA}");
    b.feature(witness);
    b.record_featured(replay);
    Ok(b.finish())
}
