//! Second implementations used to re-verify stored witnesses.

use crate::divergences::{support_contained, supports_orthogonal};
use crate::extended::ExtendedReal;
use crate::linalg::{eig_hermitian_matrix, singular_values, PsdOperator};
use crate::{Error, Result, ToleranceConfig};

/// Sandwiched Rényi divergence through singular values:
/// `tr[(sigma^g rho sigma^g)^alpha] = sum_i s_i^(2 alpha)` with `s` the
/// singular values of `sigma^g rho^(1/2)`, `g = (1-alpha)/(2 alpha)`.
pub fn sandwiched_renyi_svd(
    rho: &PsdOperator,
    sigma: &PsdOperator,
    alpha: f64,
    cfg: &ToleranceConfig,
) -> Result<ExtendedReal> {
    if !(alpha > 0.0 && alpha.is_finite()) || alpha == 1.0 {
        return Err(Error::domain(format!("alpha must lie in (0, 1) or (1, inf), got {alpha}")));
    }
    if rho.is_zero(cfg) {
        return Err(Error::domain("rho = 0"));
    }
    if alpha > 1.0 && !support_contained(rho, sigma, cfg) || alpha < 1.0 && supports_orthogonal(rho, sigma, cfg) {
        return Ok(ExtendedReal::PositiveInfinity);
    }
    let g = (1.0 - alpha) / (2.0 * alpha);
    let s_pow = sigma.eigen().function_on_support(cfg, |x| x.powf(g));
    let rho_half = rho.eigen().function_on_support(cfg, f64::sqrt);
    let s = singular_values(&(s_pow * rho_half))?;
    let largest = s.iter().fold(0.0f64, |m, &x| m.max(x * x));
    let total: f64 = s
        .iter()
        .map(|x| x * x)
        .filter(|&x| x > cfg.support_cutoff * largest)
        .map(|x| x.powf(alpha))
        .sum();
    if !(total > 0.0) {
        return Ok(ExtendedReal::PositiveInfinity);
    }
    Ok(ExtendedReal::new(total.ln() / (alpha - 1.0)))
}

/// First-order rounding error of the sandwiched divergence.
///
/// Each eigenvalue `l` of the sandwich carries an absolute error of about
/// `d eps ||sigma^g||^2 ||rho||`; its term `l^alpha` moves by `alpha l^(alpha-1)`
/// times that, which is large for tiny `l` when `alpha < 1`. Two correct
/// evaluations of an ill-conditioned pair can differ by this much.
pub fn sandwiched_rounding_bound(
    rho: &PsdOperator,
    sigma: &PsdOperator,
    alpha: f64,
    cfg: &ToleranceConfig,
) -> Result<f64> {
    const SAFETY: f64 = 4.0;
    let g = (1.0 - alpha) / (2.0 * alpha);
    let s_pow = sigma.eigen().function_on_support(cfg, |x| x.powf(g));
    let e = eig_hermitian_matrix(&(&s_pow * rho.matrix() * &s_pow))?;
    let s_norm = sigma
        .eigen()
        .values
        .iter()
        .enumerate()
        .filter(|&(k, _)| sigma.eigen().on_support(k, cfg))
        .fold(0.0f64, |m, (_, &x)| m.max(x.powf(g)));
    let delta = SAFETY * rho.dim() as f64 * f64::EPSILON * s_norm * s_norm * rho.eigen().max_value();
    let threshold = e.support_threshold(cfg);
    let kept = e.values.iter().filter(|&&x| x > threshold);
    let q: f64 = kept.clone().map(|&x| x.powf(alpha)).sum();
    let dq: f64 = kept.map(|&x| alpha * x.powf(alpha - 1.0) * delta).sum();
    Ok(dq / (q * (alpha - 1.0).abs()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::divergences::sandwiched_renyi;
    use crate::random::{random_density, random_pure_state, trial_rng};

    #[test]
    fn agrees_with_the_eigenvalue_route() {
        let cfg = ToleranceConfig::default();
        for k in 0..20u64 {
            let mut rng = trial_rng(9, k);
            let d = 2 + (k as usize % 3);
            let rho = PsdOperator::new(
                if k % 2 == 0 { random_density(d, &mut rng) } else { random_pure_state(d, &mut rng) },
                &cfg,
            )
            .unwrap();
            let sigma = PsdOperator::new(random_density(d, &mut rng), &cfg).unwrap();
            for alpha in [0.3, 0.7, 1.5, 3.0] {
                let a = sandwiched_renyi(&rho, &sigma, alpha, &cfg).unwrap().to_f64();
                let b = sandwiched_renyi_svd(&rho, &sigma, alpha, &cfg).unwrap().to_f64();
                assert!((a - b).abs() < 1e-10, "alpha {alpha}: {a} vs {b}");
                assert!(sandwiched_rounding_bound(&rho, &sigma, alpha, &cfg).unwrap() < 1e-6);
            }
        }
    }
}
