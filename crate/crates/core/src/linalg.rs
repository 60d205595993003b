//! Dense complex Hermitian linear algebra.
//!
//! Everything spectral in the crate goes through [`hermitian_eig`]; matrix
//! functions use the support convention: eigenvalues at or below
//! `support_cutoff * lambda_max` are mapped to zero, whatever the function.

use nalgebra::{DMatrix, SymmetricEigen, SVD};
pub use num_complex::Complex64;

use crate::{Error, Result, ToleranceConfig};

/// Dense complex matrix. Storage is column-major, so `as_slice()` is the
/// column-stacked vectorization used by [`crate::channels::SuperOperator`].
pub type ComplexMatrix = DMatrix<Complex64>;

const EIG_EPS: f64 = 1e-15;
const EIG_MAX_ITER: usize = 10_000;

pub(crate) const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub(crate) const ONE: Complex64 = Complex64::new(1.0, 0.0);

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn identity(d: usize) -> ComplexMatrix {
    ComplexMatrix::identity(d, d)
}

pub fn diagonal(entries: &[f64]) -> ComplexMatrix {
    let d = entries.len();
    ComplexMatrix::from_fn(d, d, |i, j| if i == j { c(entries[i], 0.0) } else { ZERO })
}

/// Builds a matrix from nested rows of real entries.
pub fn real_matrix(rows: &[&[f64]]) -> ComplexMatrix {
    let r = rows.len();
    let cols = rows.first().map_or(0, |row| row.len());
    ComplexMatrix::from_fn(r, cols, |i, j| c(rows[i][j], 0.0))
}

pub fn outer(u: &[Complex64], v: &[Complex64]) -> ComplexMatrix {
    ComplexMatrix::from_fn(u.len(), v.len(), |i, j| u[i] * v[j].conj())
}

pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.kronecker(b)
}

pub fn max_abs_entry(m: &ComplexMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

pub fn real_trace(m: &ComplexMatrix) -> f64 {
    m.trace().re
}

pub(crate) fn check_square(m: &ComplexMatrix) -> Result<usize> {
    if m.nrows() != m.ncols() {
        return Err(Error::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    Ok(m.nrows())
}

pub(crate) fn check_same_dim(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::DimensionMismatch { expected, got });
    }
    Ok(())
}

pub(crate) fn hermitian_part(m: &ComplexMatrix) -> ComplexMatrix {
    (m + m.adjoint()) * c(0.5, 0.0)
}

/// Eigendecomposition of a Hermitian matrix, eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct Eigen {
    pub values: Vec<f64>,
    /// Unitary; column `k` is the eigenvector for `values[k]`.
    pub vectors: ComplexMatrix,
}

impl Eigen {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn max_value(&self) -> f64 {
        self.values.last().copied().unwrap_or(0.0)
    }

    pub fn min_value(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }

    /// `V diag(f(lambda)) V^dagger`.
    pub fn reconstruct_with(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let d = self.dim();
        let mut scaled = self.vectors.clone();
        for k in 0..d {
            let w = f(self.values[k]);
            scaled.column_mut(k).scale_mut(w);
        }
        &scaled * self.vectors.adjoint()
    }

    pub fn reconstruct(&self) -> ComplexMatrix {
        self.reconstruct_with(|x| x)
    }

    /// Eigenvalue threshold of the support: strictly above it is on-support.
    pub fn support_threshold(&self, cfg: &ToleranceConfig) -> f64 {
        cfg.support_cutoff * self.max_value().max(0.0)
    }

    pub fn on_support(&self, k: usize, cfg: &ToleranceConfig) -> bool {
        let lambda = self.values[k];
        lambda > 0.0 && lambda > self.support_threshold(cfg)
    }

    pub fn support_rank(&self, cfg: &ToleranceConfig) -> usize {
        (0..self.dim()).filter(|&k| self.on_support(k, cfg)).count()
    }

    /// Applies `f` on the support and zero elsewhere.
    pub fn function_on_support(&self, cfg: &ToleranceConfig, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let threshold = self.support_threshold(cfg);
        self.reconstruct_with(|lambda| {
            if lambda > 0.0 && lambda > threshold {
                f(lambda)
            } else {
                0.0
            }
        })
    }
}

/// Eigendecomposition of a matrix assumed Hermitian (its Hermitian part is used).
pub(crate) fn eig_hermitian_matrix(m: &ComplexMatrix) -> Result<Eigen> {
    let d = check_square(m)?;
    if d == 0 {
        return Ok(Eigen {
            values: Vec::new(),
            vectors: ComplexMatrix::zeros(0, 0),
        });
    }
    let sym = hermitian_part(m);
    let eig = SymmetricEigen::try_new(sym, EIG_EPS, EIG_MAX_ITER)
        .ok_or(Error::EigenNonConvergence { dim: d })?;
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = ComplexMatrix::from_fn(d, d, |i, j| eig.eigenvectors[(i, order[j])]);
    Ok(Eigen { values, vectors })
}

/// Self-adjoint operator. The stored matrix is exactly Hermitian (symmetrized on entry).
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianOperator {
    matrix: ComplexMatrix,
}

impl HermitianOperator {
    pub fn new(matrix: ComplexMatrix, cfg: &ToleranceConfig) -> Result<Self> {
        check_square(&matrix)?;
        let asym = max_abs_entry(&(&matrix - matrix.adjoint()));
        // Scale-aware so large-norm inputs are not rejected for rounding noise.
        let scale = max_abs_entry(&matrix).max(1.0);
        if !(asym <= cfg.hermiticity_tolerance * scale) {
            return Err(Error::NotHermitian(asym));
        }
        Ok(Self {
            matrix: hermitian_part(&matrix),
        })
    }

    /// Wraps the Hermitian part of `matrix` without checking the residual.
    pub(crate) fn from_hermitian_part(matrix: &ComplexMatrix) -> Self {
        Self {
            matrix: hermitian_part(matrix),
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn trace(&self) -> f64 {
        real_trace(&self.matrix)
    }
}

/// Positive semidefinite operator with its eigendecomposition cached at construction.
#[derive(Debug, Clone)]
pub struct PsdOperator {
    base: HermitianOperator,
    eigen: Eigen,
}

impl PsdOperator {
    pub fn new(matrix: ComplexMatrix, cfg: &ToleranceConfig) -> Result<Self> {
        Self::from_hermitian(HermitianOperator::new(matrix, cfg)?, cfg)
    }

    pub fn from_hermitian(base: HermitianOperator, cfg: &ToleranceConfig) -> Result<Self> {
        let eigen = eig_hermitian_matrix(base.matrix())?;
        if eigen.dim() > 0 && eigen.min_value() < -cfg.psd_tolerance {
            return Err(Error::NotPsd(eigen.min_value()));
        }
        Ok(Self { base, eigen })
    }

    pub fn from_diagonal(entries: &[f64], cfg: &ToleranceConfig) -> Result<Self> {
        Self::new(diagonal(entries), cfg)
    }

    pub fn zero(d: usize) -> Self {
        Self {
            base: HermitianOperator {
                matrix: ComplexMatrix::zeros(d, d),
            },
            eigen: Eigen {
                values: vec![0.0; d],
                vectors: identity(d),
            },
        }
    }

    pub fn dim(&self) -> usize {
        self.base.dim()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        self.base.matrix()
    }

    pub fn hermitian(&self) -> &HermitianOperator {
        &self.base
    }

    pub fn eigen(&self) -> &Eigen {
        &self.eigen
    }

    pub fn trace(&self) -> f64 {
        self.base.trace()
    }

    /// All eigenvalues are at or below zero (within the PSD tolerance).
    pub fn is_zero(&self, cfg: &ToleranceConfig) -> bool {
        self.eigen.max_value() <= cfg.psd_tolerance
    }

    pub fn is_full_rank(&self, cfg: &ToleranceConfig) -> bool {
        self.eigen.support_rank(cfg) == self.dim()
    }

    /// `self / tr[self]`.
    pub fn normalized(&self, cfg: &ToleranceConfig) -> Result<Self> {
        let t = self.trace();
        if !(t > 0.0) {
            return Err(Error::domain("cannot normalize an operator with zero trace"));
        }
        Self::new(self.matrix() * c(1.0 / t, 0.0), cfg)
    }

    pub fn scaled(&self, factor: f64, cfg: &ToleranceConfig) -> Result<Self> {
        Self::new(self.matrix() * c(factor, 0.0), cfg)
    }

    /// Conjugation `U rho U^dagger`.
    pub fn conjugated(&self, u: &ComplexMatrix, cfg: &ToleranceConfig) -> Result<Self> {
        Self::new(u * self.matrix() * u.adjoint(), cfg)
    }
}

/// Orthogonal projector.
#[derive(Debug, Clone, PartialEq)]
pub struct Projector {
    base: HermitianOperator,
    rank: usize,
}

impl Projector {
    pub fn new(matrix: ComplexMatrix, cfg: &ToleranceConfig) -> Result<Self> {
        let base = HermitianOperator::new(matrix, cfg)?;
        let tol = cfg.projector_tolerance();
        let m = base.matrix();
        let residual = max_abs_entry(&(m * m - m));
        if !(residual <= tol) {
            return Err(Error::NotProjector(residual));
        }
        let eigen = eig_hermitian_matrix(m)?;
        let mut rank = 0;
        for &lambda in &eigen.values {
            if (lambda - 1.0).abs() <= tol {
                rank += 1;
            } else if lambda.abs() > tol {
                return Err(Error::NotProjector(lambda));
            }
        }
        Ok(Self { base, rank })
    }

    /// Projector onto the span of the given orthonormal columns of `basis`.
    pub fn from_columns(basis: &ComplexMatrix, columns: impl IntoIterator<Item = usize>) -> Self {
        let d = basis.nrows();
        let mut m = ComplexMatrix::zeros(d, d);
        let mut rank = 0;
        for k in columns {
            let v = basis.column(k);
            m += v * v.adjoint();
            rank += 1;
        }
        Self {
            base: HermitianOperator::from_hermitian_part(&m),
            rank,
        }
    }

    pub fn zero(d: usize) -> Self {
        Self {
            base: HermitianOperator {
                matrix: ComplexMatrix::zeros(d, d),
            },
            rank: 0,
        }
    }

    pub fn identity(d: usize) -> Self {
        Self {
            base: HermitianOperator { matrix: identity(d) },
            rank: d,
        }
    }

    /// Coordinate projector onto the listed basis vectors.
    pub fn coordinate(d: usize, indices: &[usize]) -> Self {
        Self::from_columns(&identity(d), indices.iter().copied())
    }

    pub fn complement(&self) -> Self {
        let d = self.dim();
        Self {
            base: HermitianOperator::from_hermitian_part(&(identity(d) - self.matrix())),
            rank: d - self.rank,
        }
    }

    pub fn dim(&self) -> usize {
        self.base.dim()
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        self.base.matrix()
    }

    /// `P X P`.
    pub fn compress(&self, x: &ComplexMatrix) -> ComplexMatrix {
        self.matrix() * x * self.matrix()
    }
}

/// Scalar function applied spectrally by [`matrix_function_on_support`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MatrixFunction {
    Log,
    Power(f64),
}

impl MatrixFunction {
    fn eval(self, x: f64) -> f64 {
        match self {
            MatrixFunction::Log => x.ln(),
            MatrixFunction::Power(t) => x.powf(t),
        }
    }
}

pub fn hermitian_eig(a: &HermitianOperator) -> Result<Eigen> {
    eig_hermitian_matrix(a.matrix())
}

pub fn min_eigenvalue(a: &HermitianOperator) -> Result<f64> {
    Ok(hermitian_eig(a)?.min_value())
}

/// Projector onto the eigenvectors whose eigenvalue exceeds `support_cutoff * lambda_max`.
pub fn support_projector(a: &PsdOperator, cfg: &ToleranceConfig) -> Projector {
    let eigen = a.eigen();
    Projector::from_columns(&eigen.vectors, (0..eigen.dim()).filter(|&k| eigen.on_support(k, cfg)))
}

pub fn matrix_function_on_support(
    a: &PsdOperator,
    f: MatrixFunction,
    cfg: &ToleranceConfig,
) -> HermitianOperator {
    HermitianOperator::from_hermitian_part(&a.eigen().function_on_support(cfg, |x| f.eval(x)))
}

pub fn singular_values(x: &ComplexMatrix) -> Result<Vec<f64>> {
    let (rows, cols) = x.shape();
    if rows == 0 || cols == 0 {
        return Ok(Vec::new());
    }
    let svd = SVD::try_new(x.clone(), false, false, EIG_EPS, EIG_MAX_ITER)
        .ok_or(Error::SvdNonConvergence { rows, cols })?;
    Ok(svd.singular_values.iter().copied().collect())
}

/// Schatten `p`-norm; pass `f64::INFINITY` for the operator norm.
pub fn schatten_norm(x: &ComplexMatrix, p: f64) -> Result<f64> {
    if p.is_nan() || p < 1.0 {
        return Err(Error::domain(format!("Schatten index must satisfy p >= 1, got {p}")));
    }
    check_square(x)?;
    let s = singular_values(x)?;
    Ok(p_sum(&s, p))
}

/// `(sum s_i^p)^(1/p)`, scaled by the largest entry to avoid overflow at large `p`.
pub(crate) fn p_sum(s: &[f64], p: f64) -> f64 {
    let top = s.iter().fold(0.0f64, |acc, &v| acc.max(v.abs()));
    if top == 0.0 {
        return 0.0;
    }
    if p.is_infinite() {
        return top;
    }
    let sum: f64 = s.iter().map(|&v| (v.abs() / top).powf(p)).sum();
    top * sum.powf(1.0 / p)
}
