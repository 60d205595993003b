//! Linear maps on matrix spaces.
//!
//! A [`SuperOperator`] stores the `d'^2 x d^2` matrix acting on column-stacked
//! inputs: `vec(A)[i + j*d] = A[i, j]`. The Choi matrix is the unnormalized
//! `C = sum_ij Phi(E_ij) ⊗ E_ij`.
//!
//! Positivity of a general map cannot be decided efficiently, so certificates
//! only come from two sources: the construction rule of a family, or an exact
//! Choi-matrix test for complete positivity. Random sampling can only falsify.

mod families;

pub use families::*;

use nalgebra::DVector;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::linalg::{
    check_same_dim, check_square, eig_hermitian_matrix, identity, max_abs_entry, outer,
    ComplexMatrix, Complex64, HermitianOperator, PsdOperator,
};
use crate::random::{gaussian_complex, random_hermitian, random_unit_vector, trial_rng};
use crate::{divergences, Error, Result, ToleranceConfig};

/// Tolerance deciding trace preservation / nonincrease from `Phi^*(1)`.
pub const TRACE_BEHAVIOR_TOLERANCE: f64 = 1e-9;

/// Why a map is (or is not) known to be positive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "tag", rename_all = "snake_case")]
pub enum PositivityCertificate {
    CompletelyPositive,
    PositiveByConstruction { family: String },
    Unverified,
    /// `witness` is a unit vector with `lambda_min(Phi(psi psi^dagger)) = min_eigenvalue`.
    Falsified {
        #[serde(with = "crate::io::float::complex_vec")]
        witness: Vec<Complex64>,
        #[serde(with = "crate::io::float")]
        min_eigenvalue: f64,
    },
}

impl PositivityCertificate {
    pub fn by_construction(family: impl Into<String>) -> Self {
        PositivityCertificate::PositiveByConstruction {
            family: family.into(),
        }
    }

    /// Completely positive or positive by construction.
    pub fn is_positive(&self) -> bool {
        matches!(
            self,
            PositivityCertificate::CompletelyPositive | PositivityCertificate::PositiveByConstruction { .. }
        )
    }

    fn family_name(&self) -> Option<&str> {
        match self {
            PositivityCertificate::PositiveByConstruction { family } => Some(family),
            PositivityCertificate::CompletelyPositive => Some("cp"),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TraceTag {
    Preserving,
    Nonincreasing,
    Neither,
}

/// Trace behavior read off the adjoint unit `Phi^*(1)`.
#[derive(Debug, Clone)]
pub struct TraceBehavior {
    pub tag: TraceTag,
    pub adjoint_unit: HermitianOperator,
}

impl TraceBehavior {
    pub fn is_preserving(&self) -> bool {
        self.tag == TraceTag::Preserving
    }

    /// Preserving maps are also nonincreasing.
    pub fn is_nonincreasing(&self) -> bool {
        matches!(self.tag, TraceTag::Preserving | TraceTag::Nonincreasing)
    }

    /// Eigenvalues of `Phi^*(1)`, ascending.
    pub fn adjoint_unit_spectrum(&self) -> Result<Vec<f64>> {
        Ok(eig_hermitian_matrix(self.adjoint_unit.matrix())?.values)
    }
}

/// Outcome of [`SuperOperator::classify`].
#[derive(Debug, Clone)]
pub struct Classification {
    pub certificate: PositivityCertificate,
    pub trace: TraceBehavior,
    pub choi_min_eigenvalue: f64,
    /// Smallest `lambda_min(Phi(psi psi^dagger))` seen during falsification sampling.
    pub sampled_min_eigenvalue: Option<f64>,
}

/// Linear map `T(C^d) -> T(C^d')`.
#[derive(Debug, Clone)]
pub struct SuperOperator {
    dim_in: usize,
    dim_out: usize,
    matrix: ComplexMatrix,
    kraus: Option<Vec<ComplexMatrix>>,
    certificate: PositivityCertificate,
}

pub(crate) fn vectorize(a: &ComplexMatrix) -> DVector<Complex64> {
    DVector::from_column_slice(a.as_slice())
}

pub(crate) fn unvectorize(v: &[Complex64], d: usize) -> ComplexMatrix {
    ComplexMatrix::from_column_slice(d, d, v)
}

/// `L_X S`, where `L_X vec(M) = vec(X M X^dagger)`, computed column by column.
pub(crate) fn conjugate_columns(s: &ComplexMatrix, x: &ComplexMatrix) -> ComplexMatrix {
    let d_in = x.ncols();
    let d_out = x.nrows();
    let mut out = ComplexMatrix::zeros(d_out * d_out, s.ncols());
    let x_dag = x.adjoint();
    for k in 0..s.ncols() {
        let col: Vec<Complex64> = s.column(k).iter().copied().collect();
        let m = unvectorize(&col, d_in);
        let y = x * m * &x_dag;
        out.column_mut(k).copy_from_slice(y.as_slice());
    }
    out
}

impl SuperOperator {
    pub fn from_matrix(
        dim_in: usize,
        dim_out: usize,
        matrix: ComplexMatrix,
        certificate: PositivityCertificate,
    ) -> Result<Self> {
        if dim_in == 0 || dim_out == 0 {
            return Err(Error::domain("map dimensions must be positive"));
        }
        if matrix.nrows() != dim_out * dim_out || matrix.ncols() != dim_in * dim_in {
            return Err(Error::Format(format!(
                "superoperator matrix must be {}x{}, got {}x{}",
                dim_out * dim_out,
                dim_in * dim_in,
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        Ok(Self {
            dim_in,
            dim_out,
            matrix,
            kraus: None,
            certificate,
        })
    }

    /// `X -> sum_i K_i X K_i^dagger`; completely positive by construction.
    pub fn from_kraus(ops: Vec<ComplexMatrix>) -> Result<Self> {
        let first = ops.first().ok_or_else(|| Error::domain("empty Kraus list"))?;
        let (dim_out, dim_in) = first.shape();
        let mut matrix = ComplexMatrix::zeros(dim_out * dim_out, dim_in * dim_in);
        for k in &ops {
            if k.shape() != (dim_out, dim_in) {
                return Err(Error::Format("Kraus operators must share one shape".into()));
            }
            matrix += k.conjugate().kronecker(k);
        }
        let mut op = Self::from_matrix(dim_in, dim_out, matrix, PositivityCertificate::CompletelyPositive)?;
        op.kraus = Some(ops);
        Ok(op)
    }

    /// Map with the given unnormalized Choi matrix. The certificate is `Unverified`
    /// until [`SuperOperator::classify`] runs.
    pub fn from_choi(choi: &ComplexMatrix, dim_in: usize, dim_out: usize) -> Result<Self> {
        let n = dim_in * dim_out;
        if choi.shape() != (n, n) {
            return Err(Error::Format(format!(
                "Choi matrix must be {n}x{n}, got {}x{}",
                choi.nrows(),
                choi.ncols()
            )));
        }
        let mut matrix = ComplexMatrix::zeros(dim_out * dim_out, dim_in * dim_in);
        for a in 0..dim_out {
            for b in 0..dim_out {
                for i in 0..dim_in {
                    for j in 0..dim_in {
                        matrix[(a + b * dim_out, i + j * dim_in)] = choi[(a * dim_in + i, b * dim_in + j)];
                    }
                }
            }
        }
        Self::from_matrix(dim_in, dim_out, matrix, PositivityCertificate::Unverified)
    }

    pub fn dim_in(&self) -> usize {
        self.dim_in
    }

    pub fn dim_out(&self) -> usize {
        self.dim_out
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn kraus(&self) -> Option<&[ComplexMatrix]> {
        self.kraus.as_deref()
    }

    pub fn certificate(&self) -> &PositivityCertificate {
        &self.certificate
    }

    pub(crate) fn with_certificate(mut self, certificate: PositivityCertificate) -> Self {
        self.certificate = certificate;
        self
    }

    pub fn apply(&self, a: &ComplexMatrix) -> Result<ComplexMatrix> {
        let d = check_square(a)?;
        check_same_dim(self.dim_in, d)?;
        let out = &self.matrix * vectorize(a);
        Ok(unvectorize(out.as_slice(), self.dim_out))
    }

    /// Applies the map to a PSD operator and re-validates the output as PSD.
    pub fn apply_psd(&self, a: &PsdOperator, cfg: &ToleranceConfig) -> Result<PsdOperator> {
        PsdOperator::new(self.apply(a.matrix())?, cfg)
    }

    /// Dual map under `tr[B^dagger Phi(A)] = tr[Phi^*(B)^dagger A]`.
    pub fn adjoint(&self) -> SuperOperator {
        let certificate = match &self.certificate {
            PositivityCertificate::Falsified { .. } => PositivityCertificate::Unverified,
            other => other.clone(),
        };
        SuperOperator {
            dim_in: self.dim_out,
            dim_out: self.dim_in,
            matrix: self.matrix.adjoint(),
            kraus: self.kraus.as_ref().map(|ks| ks.iter().map(|k| k.adjoint()).collect()),
            certificate,
        }
    }

    /// `Phi^*(1)`.
    pub fn adjoint_unit(&self) -> HermitianOperator {
        let unit = vectorize(&identity(self.dim_out));
        let v = self.matrix.adjoint() * unit;
        HermitianOperator::from_hermitian_part(&unvectorize(v.as_slice(), self.dim_in))
    }

    pub fn choi_matrix(&self) -> ComplexMatrix {
        let (d, dp) = (self.dim_in, self.dim_out);
        let n = d * dp;
        let mut c = ComplexMatrix::zeros(n, n);
        for a in 0..dp {
            for b in 0..dp {
                for i in 0..d {
                    for j in 0..d {
                        c[(a * d + i, b * d + j)] = self.matrix[(a + b * dp, i + j * d)];
                    }
                }
            }
        }
        c
    }

    /// Choi matrix; errors for maps that do not preserve Hermiticity.
    pub fn choi(&self, cfg: &ToleranceConfig) -> Result<HermitianOperator> {
        HermitianOperator::new(self.choi_matrix(), cfg)
    }

    pub fn choi_min_eigenvalue(&self) -> Result<f64> {
        Ok(eig_hermitian_matrix(&self.choi_matrix())?.min_value())
    }

    pub fn trace_behavior(&self) -> Result<TraceBehavior> {
        let adjoint_unit = self.adjoint_unit();
        let d = self.dim_in;
        let deviation = eig_hermitian_matrix(&(adjoint_unit.matrix() - identity(d)))?;
        let tag = if deviation.values.iter().all(|v| v.abs() <= TRACE_BEHAVIOR_TOLERANCE) {
            TraceTag::Preserving
        } else if deviation.max_value() <= TRACE_BEHAVIOR_TOLERANCE {
            // 1 - Phi^*(1) >= -tol
            TraceTag::Nonincreasing
        } else {
            TraceTag::Neither
        };
        Ok(TraceBehavior { tag, adjoint_unit })
    }

    /// Decides complete positivity exactly (Choi spectrum) and trace behavior
    /// exactly (`Phi^*(1)`); for maps that are not CP, tries to falsify
    /// positivity on `sample_count` random pure states.
    pub fn classify(&self, cfg: &ToleranceConfig, sample_count: usize, seed: u64) -> Result<Classification> {
        let trace = self.trace_behavior()?;
        let choi_min = self.choi_min_eigenvalue()?;
        if choi_min >= -cfg.psd_tolerance {
            return Ok(Classification {
                certificate: PositivityCertificate::CompletelyPositive,
                trace,
                choi_min_eigenvalue: choi_min,
                sampled_min_eigenvalue: None,
            });
        }
        let base = match &self.certificate {
            PositivityCertificate::PositiveByConstruction { .. } => self.certificate.clone(),
            _ => PositivityCertificate::Unverified,
        };
        let sampled = self.falsification_search(sample_count, seed)?;
        let (certificate, sampled_min) = match sampled {
            Some((value, psi)) if value < -cfg.psd_tolerance => (
                PositivityCertificate::Falsified {
                    witness: psi,
                    min_eigenvalue: value,
                },
                Some(value),
            ),
            Some((value, _)) => (base, Some(value)),
            None => (base, None),
        };
        Ok(Classification {
            certificate,
            trace,
            choi_min_eigenvalue: choi_min,
            sampled_min_eigenvalue: sampled_min,
        })
    }

    /// Smallest `lambda_min(Phi(psi psi^dagger))` over seeded random unit vectors,
    /// with the minimizing vector. Deterministic for a given `(samples, seed)`.
    pub fn falsification_search(&self, samples: usize, seed: u64) -> Result<Option<(f64, Vec<Complex64>)>> {
        let results: Vec<(f64, usize)> = (0..samples)
            .into_par_iter()
            .map(|k| {
                let psi = random_unit_vector(self.dim_in, &mut trial_rng(seed, k as u64));
                let out = self.apply(&outer(psi.as_slice(), psi.as_slice()))?;
                Ok((eig_hermitian_matrix(&out)?.min_value(), k))
            })
            .collect::<Result<_>>()?;
        let best = results
            .into_iter()
            .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        Ok(best.map(|(value, k)| {
            let psi = random_unit_vector(self.dim_in, &mut trial_rng(seed, k as u64));
            (value, psi.as_slice().to_vec())
        }))
    }

    /// `Phi2 ∘ Phi1` where `self = Phi2`.
    pub fn compose(&self, inner: &SuperOperator) -> Result<SuperOperator> {
        check_same_dim(self.dim_in, inner.dim_out)?;
        let matrix = &self.matrix * &inner.matrix;
        use PositivityCertificate::*;
        let certificate = match (&self.certificate, &inner.certificate) {
            (CompletelyPositive, CompletelyPositive) => CompletelyPositive,
            (a, b) if a.is_positive() && b.is_positive() => PositiveByConstruction {
                family: format!(
                    "{}∘{}",
                    a.family_name().unwrap_or("positive"),
                    b.family_name().unwrap_or("positive")
                ),
            },
            _ => Unverified,
        };
        let kraus = match (&self.kraus, &inner.kraus) {
            (Some(outer_ops), Some(inner_ops)) => Some(
                outer_ops
                    .iter()
                    .flat_map(|a| inner_ops.iter().map(move |b| a * b))
                    .collect(),
            ),
            _ => None,
        };
        Ok(SuperOperator {
            dim_in: inner.dim_in,
            dim_out: self.dim_out,
            matrix,
            kraus,
            certificate,
        })
    }

    /// `||Phi||_{1->1} = ||Phi^*(1)||_inf`, valid for positive maps only.
    pub fn one_to_one_norm_positive(&self) -> Result<f64> {
        if !self.certificate.is_positive() {
            return Err(Error::precondition(
                "the 1->1 norm formula needs a positivity certificate",
            ));
        }
        Ok(eig_hermitian_matrix(self.adjoint_unit().matrix())?.max_value())
    }
}

/// Probe matrix for induced-norm estimation: identity first, then alternating
/// Gaussian Hermitian and random rank-one `psi phi^dagger` inputs.
pub fn norm_probe(d: usize, seed: u64, index: usize) -> ComplexMatrix {
    if index == 0 {
        return identity(d);
    }
    let mut rng = trial_rng(seed, index as u64);
    if index % 2 == 1 {
        random_hermitian(d, &mut rng)
    } else {
        let psi: Vec<Complex64> = (0..d).map(|_| gaussian_complex(&mut rng)).collect();
        let phi: Vec<Complex64> = (0..d).map(|_| gaussian_complex(&mut rng)).collect();
        outer(&psi, &phi)
    }
}

/// Lower bound on `||Psi||_{(p,sigma) -> (p,sigma_out)}`: the largest ratio
/// `||Psi(X)||_{p,sigma_out} / ||X||_{p,sigma}` over `trials` seeded probes.
pub fn induced_weighted_norm_lower_bound(
    psi: &SuperOperator,
    sigma: &PsdOperator,
    sigma_out: &PsdOperator,
    p: f64,
    trials: usize,
    seed: u64,
    cfg: &ToleranceConfig,
) -> Result<f64> {
    check_same_dim(psi.dim_in(), sigma.dim())?;
    check_same_dim(psi.dim_out(), sigma_out.dim())?;
    if !sigma.is_full_rank(cfg) || !sigma_out.is_full_rank(cfg) {
        return Err(Error::domain("induced weighted norms need full-rank weights"));
    }
    let ratios: Vec<f64> = (0..trials)
        .into_par_iter()
        .map(|k| {
            let x = norm_probe(psi.dim_in(), seed, k);
            let num = divergences::weighted_p_norm(&psi.apply(&x)?, sigma_out, p, cfg)?;
            let den = divergences::weighted_p_norm(&x, sigma, p, cfg)?;
            Ok(if den > 0.0 { num / den } else { 0.0 })
        })
        .collect::<Result<_>>()?;
    Ok(ratios.into_iter().fold(0.0, f64::max))
}

/// Max-entry distance between two maps' representation matrices.
pub fn representation_distance(a: &SuperOperator, b: &SuperOperator) -> f64 {
    if a.matrix.shape() != b.matrix.shape() {
        return f64::INFINITY;
    }
    max_abs_entry(&(&a.matrix - &b.matrix))
}

#[cfg(test)]
mod tests;
