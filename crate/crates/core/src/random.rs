//! Seeded samplers for states, unitaries, isometries, and projectors.
//!
//! All randomness flows through [`ChaCha8Rng`] so results are reproducible
//! across platforms. Per-trial generators come from [`trial_rng`], which
//! derives independent sub-seeds from `(seed, counter)`; a trial's samples
//! therefore do not depend on how trials are scheduled across threads.

use nalgebra::{DVector, QR};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::linalg::{c, outer, ComplexMatrix, Complex64, Projector};

pub type SeededRng = ChaCha8Rng;

/// SplitMix64 finalizer over `seed` and `counter`.
pub fn sub_seed(seed: u64, counter: u64) -> u64 {
    let mut z = seed ^ counter.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn rng_from_seed(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn trial_rng(seed: u64, counter: u64) -> SeededRng {
    rng_from_seed(sub_seed(seed, counter))
}

pub fn gaussian_complex(rng: &mut impl Rng) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    c(re, im)
}

/// Matrix of i.i.d. standard complex Gaussian entries.
pub fn ginibre(rows: usize, cols: usize, rng: &mut impl Rng) -> ComplexMatrix {
    // from_fn walks column-major; draw in a fixed order independent of layout
    let entries: Vec<Complex64> = (0..rows * cols).map(|_| gaussian_complex(rng)).collect();
    ComplexMatrix::from_fn(rows, cols, |i, j| entries[i * cols + j])
}

pub fn random_unit_vector(d: usize, rng: &mut impl Rng) -> DVector<Complex64> {
    let v = DVector::from_fn(d, |_, _| gaussian_complex(rng));
    let n = v.norm();
    v / c(n, 0.0)
}

/// Random Hermitian matrix `(G + G^dagger) / 2`.
pub fn random_hermitian(d: usize, rng: &mut impl Rng) -> ComplexMatrix {
    let g = ginibre(d, d, rng);
    (&g + g.adjoint()) * c(0.5, 0.0)
}

/// Columns of a `rows x cols` isometry (`rows >= cols`) from QR of a Gaussian matrix,
/// with the phases of `R`'s diagonal absorbed so the distribution is unitarily invariant.
pub fn random_isometry(rows: usize, cols: usize, rng: &mut impl Rng) -> ComplexMatrix {
    assert!(rows >= cols, "isometry needs rows >= cols");
    orthonormalize(ginibre(rows, cols, rng))
}

/// Thin QR orthonormalization of the columns of `m` with the phase convention of
/// [`random_isometry`].
pub fn orthonormalize(m: ComplexMatrix) -> ComplexMatrix {
    let cols = m.ncols();
    let qr = QR::new(m);
    let mut q = qr.q();
    let r = qr.r();
    for k in 0..cols {
        let diag = r[(k, k)];
        let n = diag.norm();
        if n > 0.0 {
            let phase = diag / c(n, 0.0);
            for i in 0..q.nrows() {
                q[(i, k)] *= phase;
            }
        }
    }
    q
}

pub fn random_unitary(d: usize, rng: &mut impl Rng) -> ComplexMatrix {
    random_isometry(d, d, rng)
}

/// Normalized Wishart state `G G^dagger / tr`, `G` square Gaussian.
pub fn random_density(d: usize, rng: &mut impl Rng) -> ComplexMatrix {
    let g = ginibre(d, d, rng);
    let w = &g * g.adjoint();
    let t = w.trace().re;
    crate::linalg::hermitian_part(&(w / c(t, 0.0)))
}

/// Normalized Wishart state of rank at most `rank`.
pub fn random_density_of_rank(d: usize, rank: usize, rng: &mut impl Rng) -> ComplexMatrix {
    let g = ginibre(d, rank.max(1), rng);
    let w = &g * g.adjoint();
    let t = w.trace().re;
    crate::linalg::hermitian_part(&(w / c(t, 0.0)))
}

pub fn random_pure_state(d: usize, rng: &mut impl Rng) -> ComplexMatrix {
    let v = random_unit_vector(d, rng);
    outer(v.as_slice(), v.as_slice())
}

/// Zeroes the smallest eigenvalue of a state and renormalizes.
pub fn drop_smallest_eigenvalue(rho: &ComplexMatrix) -> ComplexMatrix {
    let eigen = crate::linalg::eig_hermitian_matrix(rho).expect("Hermitian input");
    let m = eigen.reconstruct_with(|x| x.max(0.0));
    let smallest = eigen.vectors.column(0);
    let cut = m - (smallest * smallest.adjoint()) * c(eigen.values[0].max(0.0), 0.0);
    let t = cut.trace().re;
    crate::linalg::hermitian_part(&(cut / c(t, 0.0)))
}

/// Random density matrix supported inside the range of `p` (`P G G^dagger P / tr`).
pub fn random_density_in(p: &Projector, rng: &mut impl Rng) -> ComplexMatrix {
    let d = p.dim();
    let g = ginibre(d, d, rng);
    let w = p.compress(&(&g * g.adjoint()));
    let t = w.trace().re;
    crate::linalg::hermitian_part(&(w / c(t, 0.0)))
}

/// Projector of the given rank onto a Haar-random subspace.
pub fn random_projector(d: usize, rank: usize, rng: &mut impl Rng) -> Projector {
    if rank == 0 {
        return Projector::zero(d);
    }
    if rank >= d {
        return Projector::identity(d);
    }
    let v = random_isometry(d, rank, rng);
    Projector::from_columns(&v, 0..rank)
}

/// Uniform rank in `1..d` (a proper, nonzero subspace); 1 when `d < 2`.
pub fn proper_rank(d: usize, rng: &mut impl Rng) -> usize {
    rng.random_range(1..d.max(2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_abs_entry;

    #[test]
    fn sub_seeds_differ() {
        assert_ne!(sub_seed(1, 0), sub_seed(1, 1));
        assert_ne!(sub_seed(1, 0), sub_seed(2, 0));
        assert_eq!(sub_seed(7, 3), sub_seed(7, 3));
    }

    #[test]
    fn isometry_is_orthonormal() {
        let mut rng = rng_from_seed(3);
        let v = random_isometry(6, 3, &mut rng);
        let vtv = v.adjoint() * &v;
        assert!(max_abs_entry(&(vtv - crate::linalg::identity(3))) < 1e-12);
    }

    #[test]
    fn density_has_unit_trace_and_is_psd() {
        let mut rng = rng_from_seed(4);
        let rho = random_density(4, &mut rng);
        assert!((rho.trace().re - 1.0).abs() < 1e-12);
        let e = crate::linalg::eig_hermitian_matrix(&rho).unwrap();
        assert!(e.min_value() > 0.0);
    }

    #[test]
    fn dropping_eigenvalue_reduces_rank() {
        let mut rng = rng_from_seed(5);
        let rho = drop_smallest_eigenvalue(&random_density(3, &mut rng));
        let e = crate::linalg::eig_hermitian_matrix(&rho).unwrap();
        assert!(e.values[0].abs() < 1e-14);
        assert!((rho.trace().re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn same_seed_same_samples() {
        let a = random_density(3, &mut trial_rng(9, 4));
        let b = random_density(3, &mut trial_rng(9, 4));
        assert_eq!(a, b);
    }
}
