//! The qubit pair and trace-nonincreasing map on which relative-entropy
//! monotonicity fails, with the checks showing which hypothesis it lacks.

use std::f64::consts::LN_2;

use crate::channels::{counterexample_map, pinching, MapRecipe, TraceTag};
use crate::divergences::{relative_entropy, DivergenceFamily};
use crate::io::{ChannelRepresentation, RunConfig};
use crate::linalg::{eig_hermitian_matrix, Projector, PsdOperator};
use crate::{Error, Result};

use super::{evaluate_monotonicity, monotonicity_check, CheckKind, CheckReport, ReportBuilder, Witness};

/// Closed-form values match to this tolerance.
pub const EXACT_TOLERANCE: f64 = 1e-10;

/// Expected gap `ln2/3 - ln2/2`.
pub fn expected_gap() -> f64 {
    LN_2 / 3.0 - LN_2 / 2.0
}

fn equality(label: &str, value: f64, expected: f64, tol: f64) -> Witness {
    Witness::finite(
        format!("{label}: got {value:.17e}, expected {expected:.17e}"),
        CheckKind::ExactValue,
        0.0,
        (value - expected).abs(),
        tol,
    )
}

pub fn counterexample_suite(config: &RunConfig) -> Result<CheckReport> {
    let cfg = &config.tolerance;
    let mut b = ReportBuilder::new("counterexample", config);
    let phi = counterexample_map();
    let map_desc = ChannelRepresentation::family(MapRecipe::Counterexample);
    let rho = PsdOperator::from_diagonal(&[1.0 / 3.0, 2.0 / 3.0], cfg)?;
    let sigma = PsdOperator::from_diagonal(&[2.0 / 3.0, 1.0 / 3.0], cfg)?;

    let d_in = relative_entropy(&rho, &sigma, cfg)?.to_f64();
    let d_out = relative_entropy(&phi.apply_psd(&rho, cfg)?, &phi.apply_psd(&sigma, cfg)?, cfg)?.to_f64();
    b.record(equality("D(rho||sigma) = ln2/3", d_in, LN_2 / 3.0, EXACT_TOLERANCE));
    b.record(equality("D(phi(rho)||phi(sigma)) = ln2/2", d_out, LN_2 / 2.0, EXACT_TOLERANCE));

    // The monotonicity inequality itself fails; record that as the expected outcome.
    let violation = evaluate_monotonicity(&phi, &rho, &sigma, &DivergenceFamily::Umegaki, cfg)?.with_map(map_desc.clone());
    let gap = violation.gap.sort_key();
    b.record(equality("monotonicity gap", gap, expected_gap(), EXACT_TOLERANCE));
    b.record(Witness::finite("monotonicity fails (gap < 0)", CheckKind::ExpectedViolation, -gap, 0.0, 0.0).with_map(map_desc.clone()));
    b.feature(violation);

    let choi_min = phi.choi_min_eigenvalue()?;
    b.record(Witness::finite("completely positive (Choi min eigenvalue)", CheckKind::Certificate, choi_min, 0.0, cfg.psd_tolerance));
    let behavior = phi.trace_behavior()?;
    let unit = eig_hermitian_matrix(behavior.adjoint_unit.matrix())?;
    b.record(Witness::finite(
        "trace-nonincreasing (max eigenvalue of phi^*(1) <= 1)",
        CheckKind::Certificate,
        1.0,
        unit.max_value(),
        crate::channels::TRACE_BEHAVIOR_TOLERANCE,
    ));
    b.record(Witness::finite(
        "not trace-preserving (distance of phi^*(1) from 1)",
        CheckKind::Certificate,
        1.0 - unit.min_value(),
        crate::channels::TRACE_BEHAVIOR_TOLERANCE,
        0.0,
    ));
    let rejected = matches!(
        monotonicity_check(&phi, &rho, &sigma, &DivergenceFamily::Umegaki, cfg),
        Err(Error::Precondition(_))
    );
    b.record(Witness::finite(
        "relative-entropy precondition rejects the pair",
        CheckKind::Certificate,
        f64::from(u8::from(rejected)),
        1.0,
        0.0,
    ));
    b.note(format!("trace behavior: {:?}", behavior.tag));
    debug_assert_eq!(behavior.tag, TraceTag::Nonincreasing);

    // rho' = diag(0, 1) sits where the map keeps trace, so monotonicity applies.
    let rho_kept = PsdOperator::from_diagonal(&[0.0, 1.0], cfg)?;
    let kept = monotonicity_check(&phi, &rho_kept, &sigma, &DivergenceFamily::Umegaki, cfg)?.with_map(map_desc.clone());
    b.record_featured(Witness {
        tolerance: 1e-9,
        passed: kept.gap.satisfies(1e-9),
        label: "trace-condition state diag(0,1)".into(),
        ..kept
    });

    // Sandwiched divergences above alpha = 1 stay monotone under this map.
    for &alpha in &config.alpha_grid {
        if alpha > 1.0 {
            let family = DivergenceFamily::SandwichedRenyi { alpha };
            b.record(monotonicity_check(&phi, &rho, &sigma, &family, cfg)?.with_map(map_desc.clone()));
        }
    }

    // The same diagonal pair under the trace-preserving pinching onto diagonals.
    let diag = Projector::coordinate(2, &[0]);
    let pinch = pinching(&diag);
    let w = monotonicity_check(&pinch, &rho, &sigma, &DivergenceFamily::Umegaki, cfg)?
        .with_map(ChannelRepresentation::family(MapRecipe::pinching(&diag)));
    b.record(equality("pinching gap", w.gap.sort_key(), 0.0, EXACT_TOLERANCE));

    Ok(b.finish())
}
