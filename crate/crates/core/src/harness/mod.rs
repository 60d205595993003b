//! Seeded verification suites. Each suite returns a [`CheckReport`] whose
//! witnesses carry enough data (map recipe, states, divergence) to replay
//! every check exactly.

pub mod alpha_limit;
pub mod auxiliary;
pub mod contraction;
pub mod counterexample;
pub mod dpi;
mod monotonicity;
pub mod oracle;
mod report;
pub mod step2;
pub mod violation;

pub use monotonicity::{evaluate_monotonicity, monotonicity_check, monotonicity_preconditions, replay_monotonicity};
pub use report::{CheckKind, CheckReport, Outcome, ReportBuilder, Witness, ESCALATION_FACTOR, FEATURED_LIMIT};

use crate::io::{RunConfig, SuiteName};
use crate::Result;

/// Runs the suite named in `config`.
pub fn run_suite(config: &RunConfig) -> Result<CheckReport> {
    config.validate()?;
    match config.suite {
        SuiteName::Counterexample => counterexample::counterexample_suite(config),
        SuiteName::Dpi => dpi::randomized_dpi_suite(config),
        SuiteName::Contraction => contraction::norm_contraction_batch(config),
        SuiteName::Step2 => step2::step2_default(config),
        SuiteName::Auxiliary => auxiliary::auxiliary_inequality_suite(config),
        SuiteName::AlphaLimit => alpha_limit::alpha_limit_random(config),
        SuiteName::Violation => violation::violation_search(config),
    }
}
