//! Truncation of a map on a large space by growing projector sequences, with
//! the entropy inequalities used to pass from the truncations to the map.

use crate::channels::{pinching, random_cptp, transpose_map, truncation, MapRecipe, SuperOperator};
use crate::divergences::{klein_gap, relative_entropy, DivergenceFamily};
use crate::extended::ExtendedReal;
use crate::io::{ChannelRepresentation, RunConfig};
use crate::linalg::{eig_hermitian_matrix, max_abs_entry, schatten_norm, Projector, PsdOperator};
use crate::random::{random_density, sub_seed, trial_rng};
use crate::{Error, Result, ToleranceConfig};

use super::{monotonicity_check, CheckKind, CheckReport, ReportBuilder, Witness};

/// Residual and Klein tolerance.
pub const STEP2_TOLERANCE: f64 = 1e-9;
/// Tolerance of the pinching, additivity and log-concavity checks.
pub const ENTROPY_TOLERANCE: f64 = 1e-8;
/// `||P rho - rho P||` bound for projectors said to commute with `rho`.
pub const COMMUTATION_TOLERANCE: f64 = 1e-9;

/// Projector onto the eigenvectors of the `rank` largest eigenvalues.
pub fn top_eigenprojector(a: &PsdOperator, rank: usize) -> Projector {
    let e = a.eigen();
    let d = e.dim();
    Projector::from_columns(&e.vectors, (d - rank.min(d))..d)
}

/// `lambda_min(log Pi(sigma) - Pi(log sigma))` for full-rank `sigma`.
pub fn log_concavity_gap(pi: &SuperOperator, sigma: &PsdOperator, cfg: &ToleranceConfig) -> Result<f64> {
    let log_sigma = sigma.eigen().function_on_support(cfg, f64::ln);
    let pinched = pi.apply_psd(sigma, cfg)?;
    let log_pinched = pinched.eigen().function_on_support(cfg, f64::ln);
    let diff = log_pinched - pi.apply(&log_sigma)?;
    Ok(eig_hermitian_matrix(&crate::linalg::hermitian_part(&diff))?.min_value())
}

fn finite(v: ExtendedReal) -> Result<f64> {
    v.finite()
        .ok_or_else(|| Error::domain("expected a finite divergence; sigma must contain the support of rho"))
}

pub fn step2_suite(
    phi: &SuperOperator,
    map: Option<&ChannelRepresentation>,
    rho: &PsdOperator,
    sigma: &PsdOperator,
    config: &RunConfig,
) -> Result<CheckReport> {
    let cfg = &config.tolerance;
    let n_seq = &config.n_sequence;
    let d = phi.dim_in();
    let dp = phi.dim_out();
    if n_seq.is_empty() || n_seq.windows(2).any(|w| w[0] >= w[1]) || *n_seq.last().unwrap() != d {
        return Err(Error::domain(format!("n_sequence must be strictly ascending and end at d = {d}")));
    }
    if n_seq[0] == 0 {
        return Err(Error::domain("n_sequence entries must be positive"));
    }
    if !phi.certificate().is_positive() || !phi.trace_behavior()?.is_preserving() {
        return Err(Error::precondition("the truncation study needs a positive trace-preserving map"));
    }
    let mut b = ReportBuilder::new("step2", config);
    let d_full = finite(relative_entropy(rho, sigma, cfg)?)?;
    let phi_rho = phi.apply(rho.matrix())?;
    let phi_sigma = phi.apply(sigma.matrix())?;
    let out_sum = PsdOperator::new(&phi_rho + &phi_sigma, cfg)?;
    let sigma_full_rank = sigma.is_full_rank(cfg);

    let mut previous: Option<[f64; 2]> = None;
    for &n in n_seq {
        let p = top_eigenprojector(rho, n);
        let commutator = max_abs_entry(&(p.matrix() * rho.matrix() - rho.matrix() * p.matrix()));
        if commutator > COMMUTATION_TOLERANCE {
            return Err(Error::domain(format!("P_{n} does not commute with rho (residual {commutator:e})")));
        }
        let rank_out = if n == d { dp } else { (n * dp).div_ceil(d).clamp(1, dp) };
        let p_out = top_eigenprojector(&out_sum, rank_out);
        let phi_n = truncation(phi, &p, &p_out)?;

        // Strong convergence on the test set {rho, sigma}.
        let residuals = [
            schatten_norm(&(phi_n.apply(rho.matrix())? - &phi_rho), 1.0)?,
            schatten_norm(&(phi_n.apply(sigma.matrix())? - &phi_sigma), 1.0)?,
        ];
        for (name, &r) in ["rho", "sigma"].iter().zip(&residuals) {
            if let Some(prev) = previous {
                let k = usize::from(*name == "sigma");
                b.record(Witness::finite(
                    format!("n = {n}: residual on {name} {r:.3e} <= previous {:.3e}", prev[k]),
                    CheckKind::TruncationResidual,
                    prev[k],
                    r,
                    STEP2_TOLERANCE,
                ));
            }
            if n == d {
                b.record(Witness::finite(
                    format!("n = d: residual on {name} vanishes"),
                    CheckKind::TruncationResidual,
                    0.0,
                    r,
                    STEP2_TOLERANCE,
                ));
            }
        }
        b.note(format!("n = {n}: residuals {:.3e} (rho), {:.3e} (sigma)", residuals[0], residuals[1]));
        previous = Some(residuals);

        // The finite-dimensional statement applied to the truncated map.
        let rho_n = PsdOperator::new(p.compress(rho.matrix()), cfg)?;
        let sigma_n = PsdOperator::new(p.compress(sigma.matrix()), cfg)?;
        let out_trace = phi_n.apply(rho_n.matrix())?.trace().re;
        b.record(Witness::finite(
            format!("n = {n}: tr[phi_n(P rho P)] = tr[P rho P]"),
            CheckKind::TraceIdentity,
            0.0,
            (out_trace - rho_n.trace()).abs(),
            STEP2_TOLERANCE,
        ));
        let mut w = monotonicity_check(&phi_n, &rho_n, &sigma_n, &DivergenceFamily::Umegaki, cfg)?;
        w.label = format!("n = {n}: {}", w.label);
        if let Some(ChannelRepresentation::Family { recipe }) = map {
            w = w.with_map(ChannelRepresentation::family(MapRecipe::truncation(recipe.clone(), &p, &p_out)));
        }
        b.record(w);

        // Generalized Klein inequality on the complement blocks.
        let q = p.complement();
        let rho_perp = PsdOperator::new(q.compress(rho.matrix()), cfg)?;
        let sigma_perp = PsdOperator::new(q.compress(sigma.matrix()), cfg)?;
        b.record(Witness::new(
            format!("n = {n}: Klein gap of the complement blocks"),
            CheckKind::Klein,
            klein_gap(&rho_perp, &sigma_perp, cfg)?,
            ExtendedReal::Finite(0.0),
            STEP2_TOLERANCE,
        ));

        // Pinching chain.
        let pi = pinching(&p);
        let d_pinched = relative_entropy(&pi.apply_psd(rho, cfg)?, &pi.apply_psd(sigma, cfg)?, cfg)?;
        b.record(Witness::new(
            format!("n = {n}: D(Pi rho || Pi sigma) <= D(rho || sigma)"),
            CheckKind::Pinching,
            ExtendedReal::Finite(d_full),
            d_pinched,
            ENTROPY_TOLERANCE,
        ));
        let blocks = relative_entropy(&rho_n, &sigma_n, cfg)?.to_f64() + relative_entropy(&rho_perp, &sigma_perp, cfg)?.to_f64();
        let diff = (d_pinched.to_f64() - blocks).abs();
        b.record(Witness::finite(
            format!("n = {n}: pinched divergence splits over the blocks"),
            CheckKind::Additivity,
            0.0,
            if diff.is_nan() { f64::INFINITY } else { diff },
            ENTROPY_TOLERANCE,
        ));
        if sigma_full_rank {
            b.record(Witness::finite(
                format!("n = {n}: lambda_min(log Pi(sigma) - Pi(log sigma)) >= 0"),
                CheckKind::LogConcavity,
                log_concavity_gap(&pi, sigma, cfg)?,
                0.0,
                ENTROPY_TOLERANCE,
            ));
        }
    }
    Ok(b.finish())
}

/// Default instance: `transpose ∘ random_cptp` on `C^d` with random full-rank states.
pub fn step2_default(config: &RunConfig) -> Result<CheckReport> {
    let cfg = &config.tolerance;
    let d = config.dims.first().copied().unwrap_or(32);
    let base = MapRecipe::RandomCptp {
        dim_in: d,
        dim_out: d,
        kraus_rank: 4.min(d),
        seed: sub_seed(config.seed, 0),
    };
    let recipe = MapRecipe::compose(MapRecipe::Transpose { dim: d }, base);
    let cptp = random_cptp(d, d, 4.min(d), sub_seed(config.seed, 0))?;
    let phi = transpose_map(d).compose(&cptp)?;
    let mut rng = trial_rng(config.seed, 1);
    let rho = PsdOperator::new(random_density(d, &mut rng), cfg)?;
    let sigma = PsdOperator::new(random_density(d, &mut rng), cfg)?;
    step2_suite(&phi, Some(&ChannelRepresentation::family(recipe)), &rho, &sigma, config)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::SuiteName;

    #[test]
    fn small_instance_passes() {
        let mut c = RunConfig::defaults(SuiteName::Step2);
        c.dims = vec![8];
        c.n_sequence = vec![2, 4, 6, 8];
        let r = step2_default(&c).unwrap();
        assert!(r.passed(), "{}\n{:#?}", r.summary(), r.failures);
    }

    #[test]
    fn full_truncation_is_the_map() {
        let cfg = ToleranceConfig::default();
        let phi = random_cptp(4, 4, 2, 1).unwrap();
        let rho = PsdOperator::new(random_density(4, &mut trial_rng(1, 1)), &cfg).unwrap();
        let full = truncation(&phi, &top_eigenprojector(&rho, 4), &Projector::identity(4)).unwrap();
        assert!(crate::channels::representation_distance(&phi, &full) < 1e-13);
    }

    #[test]
    fn bad_sequences_are_rejected() {
        let mut c = RunConfig::defaults(SuiteName::Step2);
        c.dims = vec![4];
        c.n_sequence = vec![2, 3];
        assert!(matches!(step2_default(&c), Err(Error::Domain(_))));
    }
}
