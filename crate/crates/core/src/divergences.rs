//! Relative entropy, sandwiched and "old" Rényi divergences, weighted
//! non-commutative `L_p` norms, and the conjugation map `Gamma_sigma`.
//!
//! Logarithms are natural. All matrix functions use the support convention of
//! [`crate::linalg`]: eigenvalues at or below the support cutoff contribute zero.

use serde::{Deserialize, Serialize};

use crate::extended::ExtendedReal;
use crate::linalg::{
    check_same_dim, check_square, max_abs_entry, p_sum, real_trace, schatten_norm,
    support_projector, ComplexMatrix, PsdOperator,
};
use crate::{Error, Result, ToleranceConfig};

/// Which divergence to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum DivergenceFamily {
    Umegaki,
    SandwichedRenyi {
        #[serde(with = "crate::io::float")]
        alpha: f64,
    },
    OldRenyi {
        #[serde(with = "crate::io::float")]
        alpha: f64,
    },
}

impl DivergenceFamily {
    pub fn alpha(&self) -> Option<f64> {
        match *self {
            DivergenceFamily::Umegaki => None,
            DivergenceFamily::SandwichedRenyi { alpha } | DivergenceFamily::OldRenyi { alpha } => {
                Some(alpha)
            }
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            DivergenceFamily::Umegaki => "umegaki",
            DivergenceFamily::SandwichedRenyi { .. } => "sandwiched_renyi",
            DivergenceFamily::OldRenyi { .. } => "old_renyi",
        }
    }

    pub fn evaluate(
        &self,
        rho: &PsdOperator,
        sigma: &PsdOperator,
        cfg: &ToleranceConfig,
    ) -> Result<ExtendedReal> {
        match *self {
            DivergenceFamily::Umegaki => relative_entropy(rho, sigma, cfg),
            DivergenceFamily::SandwichedRenyi { alpha } => sandwiched_renyi(rho, sigma, alpha, cfg),
            DivergenceFamily::OldRenyi { alpha } => old_renyi(rho, sigma, alpha, cfg),
        }
    }
}

/// A fully specified divergence evaluation.
#[derive(Debug, Clone)]
pub struct DivergenceRequest {
    pub rho: PsdOperator,
    pub sigma: PsdOperator,
    pub family: DivergenceFamily,
    pub cfg: ToleranceConfig,
}

impl DivergenceRequest {
    pub fn new(
        rho: PsdOperator,
        sigma: PsdOperator,
        family: DivergenceFamily,
        cfg: ToleranceConfig,
    ) -> Result<Self> {
        check_same_dim(rho.dim(), sigma.dim())?;
        if let Some(alpha) = family.alpha() {
            check_alpha(alpha)?;
        }
        cfg.validate()?;
        Ok(Self {
            rho,
            sigma,
            family,
            cfg,
        })
    }

    pub fn evaluate(&self) -> Result<ExtendedReal> {
        self.family.evaluate(&self.rho, &self.sigma, &self.cfg)
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha.is_finite() && alpha > 0.0) || alpha == 1.0 {
        return Err(Error::domain(format!(
            "Renyi parameter must lie in (0, 1) or (1, inf), got {alpha}"
        )));
    }
    Ok(())
}

/// `Re tr[A B]` without forming the product.
pub(crate) fn trace_of_product(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    let d = a.nrows();
    let mut acc = 0.0;
    for i in 0..d {
        for j in 0..d {
            acc += (a[(i, j)] * b[(j, i)]).re;
        }
    }
    acc
}

/// Weight of `rho` outside the support of `sigma`: `tr[(1 - P) rho (1 - P)]`.
pub fn off_support_weight(rho: &PsdOperator, sigma: &PsdOperator, cfg: &ToleranceConfig) -> f64 {
    let q = support_projector(sigma, cfg).complement();
    real_trace(&q.compress(rho.matrix())).max(0.0)
}

/// `supp(rho) ⊆ supp(sigma)`, decided by the trace-weighted test.
pub fn support_contained(rho: &PsdOperator, sigma: &PsdOperator, cfg: &ToleranceConfig) -> bool {
    off_support_weight(rho, sigma, cfg) <= cfg.containment_tolerance * rho.trace().max(0.0)
}

/// `supp(rho) ⊥ supp(sigma)`: the weight of `rho` inside the support of `sigma`
/// is at most `containment_tolerance * tr[rho]`. For `alpha < 1` the Rényi traces
/// then vanish exactly; rounding would otherwise leave a tiny positive value.
pub fn supports_orthogonal(rho: &PsdOperator, sigma: &PsdOperator, cfg: &ToleranceConfig) -> bool {
    let inside = real_trace(&support_projector(sigma, cfg).compress(rho.matrix())).max(0.0);
    inside <= cfg.containment_tolerance * rho.trace().max(0.0)
}

/// `sum_i f(lambda_i)` over the on-support eigenvalues.
fn spectral_sum(a: &PsdOperator, cfg: &ToleranceConfig, f: impl Fn(f64) -> f64) -> f64 {
    let e = a.eigen();
    (0..e.dim())
        .filter(|&k| e.on_support(k, cfg))
        .map(|k| f(e.values[k]))
        .sum()
}

/// Umegaki relative entropy `tr[rho (ln rho - ln sigma)]`, `+inf` unless
/// `supp(rho) ⊆ supp(sigma)`. Accepts unnormalized operators; `rho = 0` gives 0.
pub fn relative_entropy(
    rho: &PsdOperator,
    sigma: &PsdOperator,
    cfg: &ToleranceConfig,
) -> Result<ExtendedReal> {
    check_same_dim(rho.dim(), sigma.dim())?;
    if rho.is_zero(cfg) {
        return Ok(ExtendedReal::Finite(0.0));
    }
    if !support_contained(rho, sigma, cfg) {
        return Ok(ExtendedReal::PositiveInfinity);
    }
    let rho_log_rho = spectral_sum(rho, cfg, |x| x * x.ln());
    let log_sigma = sigma.eigen().function_on_support(cfg, f64::ln);
    let rho_log_sigma = trace_of_product(rho.matrix(), &log_sigma);
    Ok(ExtendedReal::Finite(rho_log_rho - rho_log_sigma))
}

fn renyi_preconditions(rho: &PsdOperator, sigma: &PsdOperator, alpha: f64, cfg: &ToleranceConfig) -> Result<()> {
    check_same_dim(rho.dim(), sigma.dim())?;
    check_alpha(alpha)?;
    if rho.is_zero(cfg) {
        return Err(Error::domain("Renyi divergences are undefined for rho = 0"));
    }
    Ok(())
}

fn renyi_from_trace(trace: f64, alpha: f64) -> ExtendedReal {
    if !(trace > 0.0) {
        // Only reachable for alpha < 1: ln 0 / (alpha - 1) = +inf.
        return ExtendedReal::PositiveInfinity;
    }
    ExtendedReal::new(trace.ln() / (alpha - 1.0))
}

/// Sandwiched Rényi divergence
/// `1/(alpha-1) ln tr[(sigma^g rho sigma^g)^alpha]`, `g = (1-alpha)/(2 alpha)`.
///
/// Defined for `alpha > 1` with the usual `+inf` on support violation; the
/// same formula is exposed for `alpha in (0, 1)`, where no support condition applies.
pub fn sandwiched_renyi(
    rho: &PsdOperator,
    sigma: &PsdOperator,
    alpha: f64,
    cfg: &ToleranceConfig,
) -> Result<ExtendedReal> {
    renyi_preconditions(rho, sigma, alpha, cfg)?;
    if alpha > 1.0 && !support_contained(rho, sigma, cfg) || alpha < 1.0 && supports_orthogonal(rho, sigma, cfg) {
        return Ok(ExtendedReal::PositiveInfinity);
    }
    let g = (1.0 - alpha) / (2.0 * alpha);
    let s = sigma.eigen().function_on_support(cfg, |x| x.powf(g));
    let sandwich = &s * rho.matrix() * &s;
    let e = crate::linalg::eig_hermitian_matrix(&sandwich)?;
    let threshold = e.support_threshold(cfg);
    let trace: f64 = e.values.iter().filter(|&&x| x > threshold).map(|&x| x.powf(alpha)).sum();
    Ok(renyi_from_trace(trace, alpha))
}

/// "Old" (Petz) Rényi divergence `1/(alpha-1) ln tr[rho^alpha sigma^(1-alpha)]`.
pub fn old_renyi(
    rho: &PsdOperator,
    sigma: &PsdOperator,
    alpha: f64,
    cfg: &ToleranceConfig,
) -> Result<ExtendedReal> {
    renyi_preconditions(rho, sigma, alpha, cfg)?;
    if alpha > 1.0 && !support_contained(rho, sigma, cfg) || alpha < 1.0 && supports_orthogonal(rho, sigma, cfg) {
        return Ok(ExtendedReal::PositiveInfinity);
    }
    let rho_pow = rho.eigen().function_on_support(cfg, |x| x.powf(alpha));
    let sigma_pow = sigma.eigen().function_on_support(cfg, |x| x.powf(1.0 - alpha));
    Ok(renyi_from_trace(trace_of_product(&rho_pow, &sigma_pow), alpha))
}

fn require_full_rank(sigma: &PsdOperator, cfg: &ToleranceConfig) -> Result<()> {
    if !sigma.is_full_rank(cfg) {
        return Err(Error::domain(
            "weight operator is not full rank; restrict both operators to its support first",
        ));
    }
    Ok(())
}

/// Weighted norm `||X||_{p,sigma} = tr[|sigma^(1/2p) X sigma^(1/2p)|^p]^(1/p)`;
/// `p = inf` gives the operator norm of `X`.
pub fn weighted_p_norm(
    x: &ComplexMatrix,
    sigma: &PsdOperator,
    p: f64,
    cfg: &ToleranceConfig,
) -> Result<f64> {
    if p.is_nan() || p < 1.0 {
        return Err(Error::domain(format!("norm index must satisfy p >= 1, got {p}")));
    }
    check_same_dim(sigma.dim(), check_square(x)?)?;
    require_full_rank(sigma, cfg)?;
    if p.is_infinite() {
        return schatten_norm(x, p);
    }
    let w = sigma.eigen().function_on_support(cfg, |v| v.powf(1.0 / (2.0 * p)));
    let s = crate::linalg::singular_values(&(&w * x * &w))?;
    Ok(p_sum(&s, p))
}

/// `Gamma_sigma(X) = sigma^(1/2) X sigma^(1/2)`.
pub fn gamma_map(sigma: &PsdOperator, x: &ComplexMatrix, cfg: &ToleranceConfig) -> Result<ComplexMatrix> {
    check_same_dim(sigma.dim(), check_square(x)?)?;
    let r = sigma.eigen().function_on_support(cfg, f64::sqrt);
    Ok(&r * x * &r)
}

/// `Gamma_sigma^{-1}(X) = sigma^(-1/2) X sigma^(-1/2)` with the inverse taken on the
/// support of `sigma`. Rejects `X` with components off that support.
pub fn gamma_inverse(sigma: &PsdOperator, x: &ComplexMatrix, cfg: &ToleranceConfig) -> Result<ComplexMatrix> {
    check_same_dim(sigma.dim(), check_square(x)?)?;
    let p = support_projector(sigma, cfg);
    let off = max_abs_entry(&(x - p.compress(x)));
    let scale = max_abs_entry(x).max(1.0);
    if off > cfg.hermiticity_tolerance * scale {
        return Err(Error::domain(format!(
            "operator has components off the support of sigma (residual {off:e})"
        )));
    }
    let r = sigma.eigen().function_on_support(cfg, |v| v.powf(-0.5));
    Ok(&r * x * &r)
}

/// Sandwiched Rényi divergence through the weighted norm:
/// `1/(alpha-1) ln ||Gamma_sigma^{-1}(rho)||_{alpha,sigma}^alpha`, `alpha > 1`, `sigma` full rank.
pub fn renyi_via_norm(
    rho: &PsdOperator,
    sigma: &PsdOperator,
    alpha: f64,
    cfg: &ToleranceConfig,
) -> Result<f64> {
    renyi_preconditions(rho, sigma, alpha, cfg)?;
    if alpha < 1.0 {
        return Err(Error::domain("the norm representation needs alpha > 1"));
    }
    require_full_rank(sigma, cfg)?;
    let x = gamma_inverse(sigma, rho.matrix(), cfg)?;
    let norm = weighted_p_norm(&x, sigma, alpha, cfg)?;
    Ok(alpha * norm.ln() / (alpha - 1.0))
}

/// `-tr[rho ln rho]` with `0 ln 0 = 0`.
pub fn von_neumann_entropy(rho: &PsdOperator, cfg: &ToleranceConfig) -> f64 {
    -spectral_sum(rho, cfg, |x| x * x.ln())
}

/// `D(A||B) + tr[B - A]`, nonnegative for all PSD `A`, `B`.
pub fn klein_gap(a: &PsdOperator, b: &PsdOperator, cfg: &ToleranceConfig) -> Result<ExtendedReal> {
    Ok(relative_entropy(a, b, cfg)?.add_finite(b.trace() - a.trace()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, diagonal, identity, outer, real_matrix};
    use approx::assert_abs_diff_eq;
    use std::f64::consts::LN_2;

    fn cfg() -> ToleranceConfig {
        ToleranceConfig::default()
    }

    fn diag(v: &[f64]) -> PsdOperator {
        PsdOperator::from_diagonal(v, &cfg()).unwrap()
    }

    fn fin(x: ExtendedReal) -> f64 {
        x.finite().expect("finite value")
    }

    #[test]
    fn relative_entropy_of_identical_states_vanishes() {
        let rho = diag(&[0.2, 0.3, 0.5]);
        assert_abs_diff_eq!(fin(relative_entropy(&rho, &rho, &cfg()).unwrap()), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn relative_entropy_counterexample_input_pair() {
        let rho = diag(&[1.0 / 3.0, 2.0 / 3.0]);
        let sigma = diag(&[2.0 / 3.0, 1.0 / 3.0]);
        let d = fin(relative_entropy(&rho, &sigma, &cfg()).unwrap());
        assert_abs_diff_eq!(d, LN_2 / 3.0, epsilon = 1e-12);
    }

    #[test]
    fn relative_entropy_counterexample_output_pair() {
        // Unnormalized rho with trace 5/6.
        let rho = diag(&[1.0 / 6.0, 2.0 / 3.0]);
        let sigma = diag(&[1.0 / 3.0, 1.0 / 3.0]);
        let d = fin(relative_entropy(&rho, &sigma, &cfg()).unwrap());
        assert_abs_diff_eq!(d, LN_2 / 2.0, epsilon = 1e-12);
    }

    #[test]
    fn disjoint_supports_give_infinity() {
        let rho = diag(&[1.0, 0.0]);
        let sigma = diag(&[0.0, 1.0]);
        assert!(relative_entropy(&rho, &sigma, &cfg()).unwrap().is_infinite());
        assert!(sandwiched_renyi(&rho, &sigma, 2.0, &cfg()).unwrap().is_infinite());
        assert!(old_renyi(&rho, &sigma, 2.0, &cfg()).unwrap().is_infinite());
    }

    #[test]
    fn zero_rho_is_zero_for_umegaki_and_rejected_for_renyi() {
        let zero = PsdOperator::zero(2);
        let sigma = diag(&[0.5, 0.5]);
        assert_eq!(relative_entropy(&zero, &sigma, &cfg()).unwrap(), ExtendedReal::Finite(0.0));
        assert!(matches!(sandwiched_renyi(&zero, &sigma, 2.0, &cfg()), Err(Error::Domain(_))));
        assert!(matches!(old_renyi(&zero, &sigma, 0.5, &cfg()), Err(Error::Domain(_))));
    }

    #[test]
    fn renyi_rejects_bad_alpha_and_dims() {
        let rho = diag(&[0.5, 0.5]);
        for alpha in [0.0, 1.0, -2.0, f64::NAN] {
            assert!(matches!(sandwiched_renyi(&rho, &rho, alpha, &cfg()), Err(Error::Domain(_))));
        }
        let other = diag(&[0.2, 0.3, 0.5]);
        assert!(matches!(
            relative_entropy(&rho, &other, &cfg()),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn sandwiched_identical_states_vanish() {
        let rho = diag(&[0.1, 0.9]);
        assert_abs_diff_eq!(fin(sandwiched_renyi(&rho, &rho, 2.0, &cfg()).unwrap()), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn sandwiched_pure_against_maximally_mixed() {
        let rho = diag(&[1.0, 0.0]);
        let sigma = diag(&[0.5, 0.5]);
        assert_abs_diff_eq!(fin(sandwiched_renyi(&rho, &sigma, 2.0, &cfg()).unwrap()), LN_2, epsilon = 1e-13);
        assert_abs_diff_eq!(fin(old_renyi(&rho, &sigma, 2.0, &cfg()).unwrap()), LN_2, epsilon = 1e-13);
    }

    #[test]
    fn weighted_norm_of_identity_is_trace_power() {
        let sigma = diag(&[0.2, 0.3, 0.5]);
        for p in [1.0, 1.5, 2.0, 4.0] {
            assert_abs_diff_eq!(weighted_p_norm(&identity(3), &sigma, p, &cfg()).unwrap(), 1.0, epsilon = 1e-13);
        }
    }

    #[test]
    fn weighted_norm_with_unit_weight_is_schatten() {
        let sigma = PsdOperator::new(identity(2), &cfg()).unwrap();
        let x = real_matrix(&[&[1.0, 2.0], &[-0.5, 3.0]]);
        for p in [1.0, 2.0, 3.5, f64::INFINITY] {
            assert_abs_diff_eq!(
                weighted_p_norm(&x, &sigma, p, &cfg()).unwrap(),
                schatten_norm(&x, p).unwrap(),
                epsilon = 1e-12
            );
        }
    }

    #[test]
    fn weighted_two_norm_with_maximally_mixed_weight() {
        let sigma = diag(&[0.5, 0.5]);
        let x = real_matrix(&[&[1.0, 2.0], &[2.0, -1.0]]);
        let tr_x2 = 1.0 + 4.0 + 4.0 + 1.0;
        assert_abs_diff_eq!(
            weighted_p_norm(&x, &sigma, 2.0, &cfg()).unwrap(),
            (tr_x2 / 2.0f64).sqrt(),
            epsilon = 1e-13
        );
    }

    #[test]
    fn weighted_norm_rejects_singular_weight() {
        let sigma = diag(&[1.0, 0.0]);
        assert!(matches!(weighted_p_norm(&identity(2), &sigma, 2.0, &cfg()), Err(Error::Domain(_))));
        let full = diag(&[0.5, 0.5]);
        assert!(matches!(weighted_p_norm(&identity(2), &full, 0.9, &cfg()), Err(Error::Domain(_))));
    }

    #[test]
    fn gamma_map_examples() {
        let sigma = diag(&[4.0, 1.0]);
        let x = real_matrix(&[&[0.0, 1.0], &[1.0, 0.0]]);
        let y = gamma_map(&sigma, &x, &cfg()).unwrap();
        assert!(max_abs_entry(&(&y - real_matrix(&[&[0.0, 2.0], &[2.0, 0.0]]))) < 1e-14);
        let back = gamma_inverse(&sigma, &y, &cfg()).unwrap();
        assert!(max_abs_entry(&(back - x)) < 1e-14);

        let unit = PsdOperator::new(identity(2), &cfg()).unwrap();
        let z = real_matrix(&[&[1.0, 2.0], &[3.0, 4.0]]);
        assert!(max_abs_entry(&(gamma_map(&unit, &z, &cfg()).unwrap() - &z)) < 1e-14);
        assert!(max_abs_entry(&(gamma_inverse(&unit, &z, &cfg()).unwrap() - &z)) < 1e-14);
    }

    #[test]
    fn gamma_inverse_rejects_off_support_input() {
        let sigma = diag(&[1.0, 0.0]);
        let x = real_matrix(&[&[1.0, 1.0], &[1.0, 1.0]]);
        assert!(matches!(gamma_inverse(&sigma, &x, &cfg()), Err(Error::Domain(_))));
        let inside = diagonal(&[3.0, 0.0]);
        assert!(gamma_inverse(&sigma, &inside, &cfg()).is_ok());
    }

    #[test]
    fn norm_route_matches_direct_route_on_counterexample_pair() {
        let rho = diag(&[1.0 / 3.0, 2.0 / 3.0]);
        let sigma = diag(&[2.0 / 3.0, 1.0 / 3.0]);
        let direct = fin(sandwiched_renyi(&rho, &sigma, 2.0, &cfg()).unwrap());
        let via = renyi_via_norm(&rho, &sigma, 2.0, &cfg()).unwrap();
        assert_abs_diff_eq!(direct, via, epsilon = 1e-10);
        assert_abs_diff_eq!(renyi_via_norm(&rho, &rho, 3.0, &cfg()).unwrap(), 0.0, epsilon = 1e-13);
    }

    #[test]
    fn entropy_examples() {
        let s = 1.0 / 2f64.sqrt();
        let psi = [c(s, 0.0), c(0.0, s)];
        let pure = PsdOperator::new(outer(&psi, &psi), &cfg()).unwrap();
        assert_abs_diff_eq!(von_neumann_entropy(&pure, &cfg()), 0.0, epsilon = 1e-13);
        assert_abs_diff_eq!(von_neumann_entropy(&diag(&[0.25; 4]), &cfg()), 4f64.ln(), epsilon = 1e-13);
        let expected = -(1.0 / 3.0) * (1.0f64 / 3.0).ln() - (2.0 / 3.0) * (2.0f64 / 3.0).ln();
        assert_abs_diff_eq!(von_neumann_entropy(&diag(&[1.0 / 3.0, 2.0 / 3.0]), &cfg()), expected, epsilon = 1e-14);
        assert_abs_diff_eq!(expected, 0.636514, epsilon = 1e-6);
    }

    #[test]
    fn klein_gap_examples() {
        let a = diag(&[0.3, 0.7]);
        assert_abs_diff_eq!(fin(klein_gap(&a, &a, &cfg()).unwrap()), 0.0, epsilon = 1e-15);
        let a = diag(&[0.5, 0.0]);
        let b = diag(&[1.0, 0.0]);
        let expected = 0.5 * 0.5f64.ln() + 0.5;
        assert_abs_diff_eq!(fin(klein_gap(&a, &b, &cfg()).unwrap()), expected, epsilon = 1e-14);
        assert_abs_diff_eq!(expected, 0.153426, epsilon = 1e-6);
        let a = diag(&[1.0, 0.0]);
        let b = diag(&[0.0, 1.0]);
        assert!(klein_gap(&a, &b, &cfg()).unwrap().is_infinite());
    }

    #[test]
    fn request_validates() {
        let rho = diag(&[0.5, 0.5]);
        let bad = DivergenceRequest::new(
            rho.clone(),
            rho.clone(),
            DivergenceFamily::SandwichedRenyi { alpha: 1.0 },
            cfg(),
        );
        assert!(bad.is_err());
        let ok = DivergenceRequest::new(rho.clone(), rho, DivergenceFamily::Umegaki, cfg()).unwrap();
        assert_eq!(ok.evaluate().unwrap(), ExtendedReal::Finite(0.0));
    }

    #[test]
    fn rotated_orthogonal_pair_is_infinite_below_one() {
        let u = crate::random::random_unitary(3, &mut crate::random::trial_rng(2, 0));
        let rot = |v: &[f64]| PsdOperator::new(&u * diagonal(v) * u.adjoint(), &cfg()).unwrap();
        let (rho, sigma) = (rot(&[0.4, 0.6, 0.0]), rot(&[0.0, 0.0, 1.0]));
        for alpha in [0.3, 0.5, 0.8] {
            assert!(sandwiched_renyi(&rho, &sigma, alpha, &cfg()).unwrap().is_infinite());
            assert!(old_renyi(&rho, &sigma, alpha, &cfg()).unwrap().is_infinite());
        }
    }
}
