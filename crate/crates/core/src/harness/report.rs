use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::divergences::DivergenceFamily;
use crate::extended::{ExtendedReal, Gap};
use crate::io::{ChannelRepresentation, MatrixFile, RunConfig, SCHEMA_VERSION};
use crate::Result;

/// Replay runs at this multiple of the witness tolerance.
pub const ESCALATION_FACTOR: f64 = 10.0;

/// Cap on featured (non-failing) witnesses kept in a report.
pub const FEATURED_LIMIT: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckKind {
    Monotonicity,
    NormContraction,
    Endpoint,
    ExactValue,
    Certificate,
    ExpectedViolation,
    TruncationResidual,
    Klein,
    Pinching,
    Additivity,
    LogConcavity,
    EntropyCoarseGraining,
    SupportInclusion,
    TraceIdentity,
    AlphaLimit,
    Coverage,
    Violation,
}

/// One checked inequality `lhs >= rhs - tolerance`, with enough data to replay it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub label: String,
    pub kind: CheckKind,
    pub map: Option<ChannelRepresentation>,
    pub divergence: Option<DivergenceFamily>,
    pub rho: Option<MatrixFile>,
    pub sigma: Option<MatrixFile>,
    pub lhs: ExtendedReal,
    pub rhs: ExtendedReal,
    pub gap: Gap,
    #[serde(with = "crate::io::float")]
    pub tolerance: f64,
    pub passed: bool,
    pub escalated: bool,
}

impl Witness {
    pub fn new(label: impl Into<String>, kind: CheckKind, lhs: ExtendedReal, rhs: ExtendedReal, tolerance: f64) -> Self {
        let gap = Gap::between(lhs, rhs);
        Self {
            label: label.into(),
            kind,
            map: None,
            divergence: None,
            rho: None,
            sigma: None,
            lhs,
            rhs,
            gap,
            tolerance,
            passed: gap.satisfies(tolerance),
            escalated: false,
        }
    }

    /// `lhs >= rhs - tolerance` for plain floats.
    pub fn finite(label: impl Into<String>, kind: CheckKind, lhs: f64, rhs: f64, tolerance: f64) -> Self {
        Self::new(label, kind, ExtendedReal::new(lhs), ExtendedReal::new(rhs), tolerance)
    }

    pub fn with_map(mut self, map: ChannelRepresentation) -> Self {
        self.map = Some(map);
        self
    }

    pub fn with_states(mut self, rho: MatrixFile, sigma: MatrixFile) -> Self {
        self.rho = Some(rho);
        self.sigma = Some(sigma);
        self
    }

    pub fn with_divergence(mut self, family: DivergenceFamily) -> Self {
        self.divergence = Some(family);
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Pass,
    Fail,
    Inconclusive,
}

/// Result of one suite run. `passes + failures.len() == trials` always holds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub schema_version: String,
    pub suite_name: String,
    pub seed: u64,
    pub outcome: Outcome,
    pub trials: usize,
    pub passes: usize,
    pub escalations: usize,
    pub min_gap: Option<Gap>,
    pub failures: Vec<Witness>,
    pub witnesses: Vec<Witness>,
    pub notes: Vec<String>,
    pub config: RunConfig,
    pub runtime_ms: u64,
}

impl CheckReport {
    pub fn failure_count(&self) -> usize {
        self.failures.len()
    }

    pub fn passed(&self) -> bool {
        self.outcome == Outcome::Pass
    }

    /// Passes, failures, featured witnesses, ... as a short multi-line summary.
    pub fn summary(&self) -> String {
        let gap = match self.min_gap {
            Some(Gap::Finite(g)) => format!("{g:.3e}"),
            Some(Gap::PositiveInfinity) => "+inf".into(),
            Some(Gap::NegativeInfinity) => "-inf".into(),
            Some(Gap::BothInfinite) => "both-infinite".into(),
            None => "n/a".into(),
        };
        let mut s = format!(
            "suite {}: {:?} ({} / {} checks passed, {} failures, {} escalations, min gap {gap}, {} ms)",
            self.suite_name,
            self.outcome,
            self.passes,
            self.trials,
            self.failures.len(),
            self.escalations,
            self.runtime_ms
        );
        for note in &self.notes {
            s.push_str("\n  ");
            s.push_str(note);
        }
        s
    }
}

/// Accumulates witnesses into a [`CheckReport`].
pub struct ReportBuilder {
    suite_name: String,
    config: RunConfig,
    started: Instant,
    trials: usize,
    passes: usize,
    escalations: usize,
    min_gap: Option<Gap>,
    failures: Vec<Witness>,
    witnesses: Vec<Witness>,
    notes: Vec<String>,
}

impl ReportBuilder {
    pub fn new(suite_name: impl Into<String>, config: &RunConfig) -> Self {
        Self {
            suite_name: suite_name.into(),
            config: config.clone(),
            started: Instant::now(),
            trials: 0,
            passes: 0,
            escalations: 0,
            min_gap: None,
            failures: Vec::new(),
            witnesses: Vec::new(),
            notes: Vec::new(),
        }
    }

    fn track_gap(&mut self, gap: Gap) {
        let better = match self.min_gap {
            None => true,
            Some(current) => gap.sort_key() < current.sort_key(),
        };
        if better {
            self.min_gap = Some(gap);
        }
    }

    /// Records a check. Failing witnesses are replayed with `replay` and
    /// accepted if the replayed gap clears `ESCALATION_FACTOR * tolerance`.
    pub fn record_with_replay(&mut self, mut w: Witness, replay: impl FnOnce(&Witness) -> Result<Gap>) -> Result<()> {
        if !w.passed {
            let gap = replay(&w)?;
            if gap.satisfies(ESCALATION_FACTOR * w.tolerance) {
                w.passed = true;
                w.escalated = true;
                self.escalations += 1;
            }
        }
        self.record(w);
        Ok(())
    }

    pub fn record(&mut self, w: Witness) {
        self.trials += 1;
        self.track_gap(w.gap);
        if w.passed {
            self.passes += 1;
            if w.escalated && self.witnesses.len() < FEATURED_LIMIT {
                self.witnesses.push(w);
            }
        } else {
            self.failures.push(w);
        }
    }

    /// Keeps `w` in the report's featured list regardless of the cap.
    pub fn feature(&mut self, w: Witness) {
        self.witnesses.push(w);
    }

    /// Records the check and features it.
    pub fn record_featured(&mut self, w: Witness) {
        self.feature(w.clone());
        self.record(w);
    }

    pub fn note(&mut self, note: impl Into<String>) {
        self.notes.push(note.into());
    }

    pub fn finish(self) -> CheckReport {
        let outcome = if self.failures.is_empty() { Outcome::Pass } else { Outcome::Fail };
        self.finish_with(outcome)
    }

    pub fn finish_with(self, outcome: Outcome) -> CheckReport {
        CheckReport {
            schema_version: SCHEMA_VERSION.into(),
            suite_name: self.suite_name,
            seed: self.config.seed,
            outcome,
            trials: self.trials,
            passes: self.passes,
            escalations: self.escalations,
            min_gap: self.min_gap,
            failures: self.failures,
            witnesses: self.witnesses,
            notes: self.notes,
            config: self.config,
            runtime_ms: self.started.elapsed().as_millis() as u64,
        }
    }
}
