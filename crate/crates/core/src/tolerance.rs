use serde::{Deserialize, Serialize};

/// Every numerical threshold used by the library, in one place.
///
/// `support_cutoff` and `containment_tolerance` are relative (to the largest
/// eigenvalue and to the trace, respectively); the rest are absolute.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ToleranceConfig {
    /// Eigenvalues `<= support_cutoff * lambda_max` are treated as off-support.
    pub support_cutoff: f64,
    /// Smallest eigenvalue accepted for a positive semidefinite operator.
    pub psd_tolerance: f64,
    /// Slack allowed before a monotonicity gap counts as a violation.
    pub monotonicity_slack: f64,
    /// Max-entry asymmetry accepted for a Hermitian operator.
    pub hermiticity_tolerance: f64,
    /// `supp(rho) ⊆ supp(sigma)` holds when the weight of `rho` outside the
    /// support of `sigma` is at most `containment_tolerance * tr[rho]`.
    pub containment_tolerance: f64,
}

impl Default for ToleranceConfig {
    fn default() -> Self {
        Self {
            support_cutoff: 1e-12,
            psd_tolerance: 1e-10,
            monotonicity_slack: 1e-8,
            hermiticity_tolerance: 1e-10,
            containment_tolerance: 1e-10,
        }
    }
}

impl ToleranceConfig {
    pub fn validate(&self) -> crate::Result<()> {
        let fields = [
            ("support_cutoff", self.support_cutoff),
            ("psd_tolerance", self.psd_tolerance),
            ("monotonicity_slack", self.monotonicity_slack),
            ("hermiticity_tolerance", self.hermiticity_tolerance),
            ("containment_tolerance", self.containment_tolerance),
        ];
        for (name, value) in fields {
            if !(value >= 0.0 && value.is_finite()) {
                return Err(crate::Error::domain(format!(
                    "tolerance {name} must be a finite nonnegative number, got {value}"
                )));
            }
        }
        Ok(())
    }

    /// Projector idempotence residual accepted by [`crate::linalg::Projector`].
    pub fn projector_tolerance(&self) -> f64 {
        1e-9
    }

    /// Reconstruction residual accepted for cached eigendecompositions.
    pub fn reconstruction_tolerance(&self) -> f64 {
        1e-9
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        let cfg = ToleranceConfig::default();
        cfg.validate().unwrap();
        assert_eq!(cfg.support_cutoff, 1e-12);
        assert_eq!(cfg.monotonicity_slack, 1e-8);
    }

    #[test]
    fn negative_tolerance_is_rejected() {
        let cfg = ToleranceConfig {
            psd_tolerance: -1.0,
            ..Default::default()
        };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn partial_json_takes_defaults() {
        let cfg: ToleranceConfig = serde_json::from_str(r#"{"psd_tolerance": 1e-6}"#).unwrap();
        assert_eq!(cfg.psd_tolerance, 1e-6);
        assert_eq!(cfg.support_cutoff, 1e-12);
    }
}
