use crate::channels::{SuperOperator, TraceBehavior, TRACE_BEHAVIOR_TOLERANCE};
use crate::divergences::DivergenceFamily;
use crate::extended::Gap;
use crate::io::MatrixFile;
use crate::linalg::PsdOperator;
use crate::{Error, Result, ToleranceConfig};

use super::{CheckKind, Witness};

/// Checks that a monotonicity statement applies to `(phi, rho, family)`:
///
/// * Umegaki: `phi` positive and trace-preserving, or trace-nonincreasing with
///   `|tr[phi(rho)] - tr[rho]| <= 1e-9`;
/// * sandwiched Rényi with `alpha > 1`: `phi` positive and trace-nonincreasing.
///
/// Everything else (old Rényi, `alpha < 1`) has no monotonicity guarantee here.
pub fn monotonicity_preconditions(
    phi: &SuperOperator,
    rho: &PsdOperator,
    family: &DivergenceFamily,
    _cfg: &ToleranceConfig,
) -> Result<TraceBehavior> {
    if !phi.certificate().is_positive() {
        return Err(Error::precondition(format!(
            "monotonicity needs a positivity certificate, map has {:?}",
            phi.certificate()
        )));
    }
    let trace = phi.trace_behavior()?;
    match family {
        DivergenceFamily::Umegaki => {
            if trace.is_preserving() {
                return Ok(trace);
            }
            if !trace.is_nonincreasing() {
                return Err(Error::precondition("relative-entropy monotonicity needs a trace-nonincreasing map"));
            }
            let out = phi.apply(rho.matrix())?;
            let drift = (out.trace().re - rho.trace()).abs();
            if drift > TRACE_BEHAVIOR_TOLERANCE {
                return Err(Error::precondition(format!(
                    "map is not trace-preserving and |tr[phi(rho)] - tr[rho]| = {drift:e} exceeds 1e-9"
                )));
            }
            Ok(trace)
        }
        DivergenceFamily::SandwichedRenyi { alpha } if *alpha > 1.0 => {
            if !trace.is_nonincreasing() {
                return Err(Error::precondition("sandwiched monotonicity needs a trace-nonincreasing map"));
            }
            Ok(trace)
        }
        other => Err(Error::precondition(format!(
            "no monotonicity guarantee for {} with alpha {:?}",
            other.name(),
            other.alpha()
        ))),
    }
}

/// `D(rho||sigma) >= D(phi(rho)||phi(sigma))` after checking preconditions.
pub fn monotonicity_check(
    phi: &SuperOperator,
    rho: &PsdOperator,
    sigma: &PsdOperator,
    family: &DivergenceFamily,
    cfg: &ToleranceConfig,
) -> Result<Witness> {
    monotonicity_preconditions(phi, rho, family, cfg)?;
    evaluate_monotonicity(phi, rho, sigma, family, cfg)
}

/// Evaluates both sides without checking that monotonicity should hold.
pub fn evaluate_monotonicity(
    phi: &SuperOperator,
    rho: &PsdOperator,
    sigma: &PsdOperator,
    family: &DivergenceFamily,
    cfg: &ToleranceConfig,
) -> Result<Witness> {
    let lhs = family.evaluate(rho, sigma, cfg)?;
    let rhs = family.evaluate(&phi.apply_psd(rho, cfg)?, &phi.apply_psd(sigma, cfg)?, cfg)?;
    let label = match family.alpha() {
        Some(a) => format!("{}(alpha={a}) monotonicity", family.name()),
        None => format!("{} monotonicity", family.name()),
    };
    Ok(Witness::new(label, CheckKind::Monotonicity, lhs, rhs, cfg.monotonicity_slack)
        .with_divergence(*family)
        .with_states(MatrixFile::psd(rho), MatrixFile::psd(sigma)))
}

/// Recomputes a monotonicity witness from its serialized map, states and divergence.
pub fn replay_monotonicity(w: &Witness, cfg: &ToleranceConfig) -> Result<Gap> {
    let missing = |what: &str| Error::Format(format!("witness {:?} has no {what}", w.label));
    let phi = w.map.as_ref().ok_or_else(|| missing("map"))?.build_inferred(cfg)?;
    let rho = w.rho.as_ref().ok_or_else(|| missing("rho"))?.to_psd(cfg)?;
    let sigma = w.sigma.as_ref().ok_or_else(|| missing("sigma"))?.to_psd(cfg)?;
    let family = w.divergence.ok_or_else(|| missing("divergence"))?;
    Ok(evaluate_monotonicity(&phi, &rho, &sigma, &family, cfg)?.gap)
}
