use serde::{Deserialize, Serialize};

use super::{conjugate_columns, vectorize, PositivityCertificate, SuperOperator};
use crate::io::MatrixData;
use crate::linalg::{c, check_same_dim, diagonal, identity, ComplexMatrix, Projector, ONE};
use crate::random::{random_isometry, rng_from_seed, sub_seed};
use crate::{Error, Result, ToleranceConfig};
use rand::Rng;

pub fn identity_map(d: usize) -> SuperOperator {
    SuperOperator::from_kraus(vec![identity(d)]).expect("identity Kraus operator")
}

/// `X -> X^T`. Positive and trace-preserving, not completely positive.
pub fn transpose_map(d: usize) -> SuperOperator {
    let mut m = ComplexMatrix::zeros(d * d, d * d);
    for i in 0..d {
        for j in 0..d {
            m[(j + i * d, i + j * d)] = ONE;
        }
    }
    SuperOperator::from_matrix(d, d, m, PositivityCertificate::by_construction("transpose"))
        .expect("square transpose representation")
}

/// `X -> U X U^dagger`.
pub fn unitary_conjugation(u: &ComplexMatrix) -> Result<SuperOperator> {
    SuperOperator::from_kraus(vec![u.clone()])
}

/// `X -> P X P + P^perp X P^perp`.
pub fn pinching(p: &Projector) -> SuperOperator {
    SuperOperator::from_kraus(vec![p.matrix().clone(), p.complement().matrix().clone()])
        .expect("pinching Kraus operators share a shape")
}

/// Compression of `phi` onto finite projections:
/// `Phi_n(A) = P' Phi(P A P) P' + P'/tr[P'] * tr[Phi(P A P)(1 - P')]`.
///
/// Positive and trace-preserving on `T(P C^d)` whenever `phi` is positive and
/// trace-preserving; completely positive whenever `phi` is.
pub fn truncation(phi: &SuperOperator, p_in: &Projector, p_out: &Projector) -> Result<SuperOperator> {
    check_same_dim(phi.dim_in(), p_in.dim())?;
    check_same_dim(phi.dim_out(), p_out.dim())?;
    if p_out.rank() == 0 {
        return Err(Error::domain("truncation needs a nonzero output projector"));
    }
    let (d, dp) = (phi.dim_in(), phi.dim_out());
    // S L_P = (L_P S^dagger)^dagger since L_P is self-adjoint for Hermitian P.
    let s_p = conjugate_columns(&phi.matrix().adjoint(), p_in.matrix()).adjoint();
    let mut matrix = conjugate_columns(&s_p, p_out.matrix());

    // Discarded weight tr[Phi(PAP)(1 - P')] = tr[A M] with M = P Phi^*(1 - P')^dagger P.
    let q_out = p_out.complement();
    let m = p_in.compress(&phi.adjoint().apply(q_out.matrix())?.adjoint());
    let fill = vectorize(p_out.matrix()) * c(1.0 / p_out.rank() as f64, 0.0);
    for i in 0..d {
        for j in 0..d {
            let weight = m[(j, i)];
            if weight != c(0.0, 0.0) {
                let mut col = matrix.column_mut(i + j * d);
                col += &fill * weight;
            }
        }
    }
    debug_assert_eq!(matrix.nrows(), dp * dp);
    let certificate = match phi.certificate() {
        PositivityCertificate::CompletelyPositive => PositivityCertificate::CompletelyPositive,
        cert if cert.is_positive() => PositivityCertificate::by_construction("truncation"),
        _ => PositivityCertificate::Unverified,
    };
    SuperOperator::from_matrix(d, dp, matrix, certificate)
}

/// `X -> (tr[X] 1 - X) / (d - 1)`, `d >= 2`. Positive, trace-preserving, not CP.
pub fn reduction(d: usize) -> Result<SuperOperator> {
    if d < 2 {
        return Err(Error::domain("the reduction map needs d >= 2"));
    }
    let unit = vectorize(&identity(d));
    let m = (&unit * unit.adjoint() - identity(d * d)) * c(1.0 / (d as f64 - 1.0), 0.0);
    SuperOperator::from_matrix(d, d, m, PositivityCertificate::by_construction("reduction"))
}

/// `X -> lambda X + (1 - lambda) tr[X] 1/d`.
pub fn depolarizing(d: usize, lambda: f64) -> Result<SuperOperator> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::domain(format!("depolarizing parameter must lie in [0, 1], got {lambda}")));
    }
    if d == 0 {
        return Err(Error::domain("dimension must be positive"));
    }
    let unit = vectorize(&identity(d));
    let m = identity(d * d) * c(lambda, 0.0) + (&unit * unit.adjoint()) * c((1.0 - lambda) / d as f64, 0.0);
    SuperOperator::from_matrix(d, d, m, PositivityCertificate::CompletelyPositive)
}

/// CPTP map whose Kraus operators are the `d_out x d_in` blocks of a random isometry.
pub fn random_cptp(d_in: usize, d_out: usize, kraus_rank: usize, seed: u64) -> Result<SuperOperator> {
    if d_in == 0 || d_out == 0 || kraus_rank == 0 {
        return Err(Error::domain("random_cptp needs positive dimensions and Kraus rank"));
    }
    if kraus_rank * d_out < d_in {
        return Err(Error::domain("kraus_rank * d_out must be at least d_in"));
    }
    let v = random_isometry(kraus_rank * d_out, d_in, &mut rng_from_seed(seed));
    let ops = (0..kraus_rank)
        .map(|i| v.rows(i * d_out, d_out).into_owned())
        .collect();
    SuperOperator::from_kraus(ops)
}

/// `transpose ∘ cptp` or `cptp ∘ transpose`, chosen by the seed.
pub fn random_positive_noncp(d: usize, seed: u64) -> Result<SuperOperator> {
    let transpose_last: bool = rng_from_seed(seed).random();
    let cptp = random_cptp(d, d, d, sub_seed(seed, 1))?;
    let t = transpose_map(d);
    let composed = if transpose_last { t.compose(&cptp)? } else { cptp.compose(&t)? };
    Ok(composed.with_certificate(PositivityCertificate::by_construction("random_positive_noncp")))
}

/// The qubit map `((v, w), (x, y)) -> ((v/2, 0), (0, y))`: completely positive,
/// trace-nonincreasing, not trace-preserving.
pub fn counterexample_map() -> SuperOperator {
    SuperOperator::from_kraus(vec![diagonal(&[0.5f64.sqrt(), 0.0]), diagonal(&[0.0, 1.0])])
        .expect("diagonal Kraus operators")
}

/// `X -> factor * X`; trace-nonincreasing for `factor <= 1` (`factor = 1/2` is the halving map).
pub fn scaling(d: usize, factor: f64) -> Result<SuperOperator> {
    if !(factor >= 0.0 && factor.is_finite()) {
        return Err(Error::domain(format!("scaling factor must be finite and nonnegative, got {factor}")));
    }
    SuperOperator::from_kraus(vec![identity(d) * c(factor.sqrt(), 0.0)])
}

/// `X -> Q X Q + t Q^perp X Q^perp`: trace is preserved exactly on states supported in `Q`.
pub fn subspace_damping(q: &Projector, factor: f64) -> Result<SuperOperator> {
    if !(0.0..=1.0).contains(&factor) {
        return Err(Error::domain(format!("damping factor must lie in [0, 1], got {factor}")));
    }
    let qp = q.complement().matrix() * c(factor.sqrt(), 0.0);
    SuperOperator::from_kraus(vec![q.matrix().clone(), qp])
}

/// Serializable recipe for every constructible map family. Seeded families
/// store only their seed, so witnesses replay exactly from a few bytes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum MapRecipe {
    Identity { dim: usize },
    Transpose { dim: usize },
    UnitaryConjugation { unitary: MatrixData },
    Pinching { projector: MatrixData },
    Truncation {
        base: Box<MapRecipe>,
        input_projector: MatrixData,
        output_projector: MatrixData,
    },
    Reduction { dim: usize },
    Depolarizing {
        dim: usize,
        #[serde(with = "crate::io::float")]
        lambda: f64,
    },
    RandomCptp {
        dim_in: usize,
        dim_out: usize,
        kraus_rank: usize,
        seed: u64,
    },
    RandomPositiveNoncp { dim: usize, seed: u64 },
    Counterexample,
    Scaling {
        dim: usize,
        #[serde(with = "crate::io::float")]
        factor: f64,
    },
    SubspaceDamping {
        projector: MatrixData,
        #[serde(with = "crate::io::float")]
        factor: f64,
    },
    /// `outer ∘ inner`.
    Compose { outer: Box<MapRecipe>, inner: Box<MapRecipe> },
}

impl MapRecipe {
    pub fn compose(outer: MapRecipe, inner: MapRecipe) -> Self {
        MapRecipe::Compose {
            outer: Box::new(outer),
            inner: Box::new(inner),
        }
    }

    pub fn pinching(p: &Projector) -> Self {
        MapRecipe::Pinching {
            projector: MatrixData::from_matrix(p.matrix()),
        }
    }

    pub fn truncation(base: MapRecipe, p_in: &Projector, p_out: &Projector) -> Self {
        MapRecipe::Truncation {
            base: Box::new(base),
            input_projector: MatrixData::from_matrix(p_in.matrix()),
            output_projector: MatrixData::from_matrix(p_out.matrix()),
        }
    }

    pub fn subspace_damping(q: &Projector, factor: f64) -> Self {
        MapRecipe::SubspaceDamping {
            projector: MatrixData::from_matrix(q.matrix()),
            factor,
        }
    }

    /// Short human-readable family name, e.g. `transpose∘random_cptp`.
    pub fn name(&self) -> String {
        match self {
            MapRecipe::Identity { .. } => "identity".into(),
            MapRecipe::Transpose { .. } => "transpose".into(),
            MapRecipe::UnitaryConjugation { .. } => "unitary_conjugation".into(),
            MapRecipe::Pinching { .. } => "pinching".into(),
            MapRecipe::Truncation { base, .. } => format!("truncation({})", base.name()),
            MapRecipe::Reduction { .. } => "reduction".into(),
            MapRecipe::Depolarizing { .. } => "depolarizing".into(),
            MapRecipe::RandomCptp { .. } => "random_cptp".into(),
            MapRecipe::RandomPositiveNoncp { .. } => "random_positive_noncp".into(),
            MapRecipe::Counterexample => "counterexample".into(),
            MapRecipe::Scaling { .. } => "scaling".into(),
            MapRecipe::SubspaceDamping { .. } => "subspace_damping".into(),
            MapRecipe::Compose { outer, inner } => format!("{}∘{}", outer.name(), inner.name()),
        }
    }

    pub fn build(&self, cfg: &ToleranceConfig) -> Result<SuperOperator> {
        let projector = |data: &MatrixData| Projector::new(data.to_matrix()?, cfg);
        match self {
            MapRecipe::Identity { dim } => Ok(identity_map(*dim)),
            MapRecipe::Transpose { dim } => Ok(transpose_map(*dim)),
            MapRecipe::UnitaryConjugation { unitary } => unitary_conjugation(&unitary.to_matrix()?),
            MapRecipe::Pinching { projector: p } => Ok(pinching(&projector(p)?)),
            MapRecipe::Truncation {
                base,
                input_projector,
                output_projector,
            } => truncation(&base.build(cfg)?, &projector(input_projector)?, &projector(output_projector)?),
            MapRecipe::Reduction { dim } => reduction(*dim),
            MapRecipe::Depolarizing { dim, lambda } => depolarizing(*dim, *lambda),
            MapRecipe::RandomCptp {
                dim_in,
                dim_out,
                kraus_rank,
                seed,
            } => random_cptp(*dim_in, *dim_out, *kraus_rank, *seed),
            MapRecipe::RandomPositiveNoncp { dim, seed } => random_positive_noncp(*dim, *seed),
            MapRecipe::Counterexample => Ok(counterexample_map()),
            MapRecipe::Scaling { dim, factor } => scaling(*dim, *factor),
            MapRecipe::SubspaceDamping { projector: q, factor } => subspace_damping(&projector(q)?, *factor),
            MapRecipe::Compose { outer, inner } => outer.build(cfg)?.compose(&inner.build(cfg)?),
        }
    }
}
