use super::*;
use crate::linalg::{c, diagonal, real_matrix, Projector};
use crate::random::{random_density, random_projector, rng_from_seed};

fn cfg() -> ToleranceConfig {
    ToleranceConfig::default()
}

fn close(a: &ComplexMatrix, b: &ComplexMatrix, tol: f64) -> bool {
    a.shape() == b.shape() && max_abs_entry(&(a - b)) <= tol
}

#[test]
fn identity_and_transpose_apply() {
    let x = real_matrix(&[&[1.0, 2.0], &[3.0, 4.0]]);
    assert_eq!(identity_map(2).apply(&x).unwrap(), x);
    assert_eq!(transpose_map(2).apply(&x).unwrap(), x.transpose());
}

#[test]
fn counterexample_acts_on_diagonals() {
    let phi = counterexample_map();
    let out = phi.apply(&diagonal(&[1.0 / 3.0, 2.0 / 3.0])).unwrap();
    assert!(close(&out, &diagonal(&[1.0 / 6.0, 2.0 / 3.0]), 1e-15));
    let generic = real_matrix(&[&[0.4, 0.3], &[0.3, 0.6]]);
    assert!(close(&phi.apply(&generic).unwrap(), &diagonal(&[0.2, 0.6]), 1e-15));
}

#[test]
fn adjoint_pairing_identity() {
    let phi = random_cptp(3, 2, 2, 5).unwrap();
    let mut rng = rng_from_seed(3);
    let a = random_density(3, &mut rng);
    let b = crate::random::random_hermitian(2, &mut rng);
    let lhs = (b.adjoint() * phi.apply(&a).unwrap()).trace();
    let rhs = (phi.adjoint().apply(&b).unwrap().adjoint() * a).trace();
    assert!((lhs - rhs).norm() < 1e-12);
    let twice = phi.adjoint().adjoint();
    assert_eq!(representation_distance(&phi, &twice), 0.0);
}

#[test]
fn choi_round_trip_and_known_spectra() {
    let phi = random_cptp(2, 3, 2, 9).unwrap();
    let back = SuperOperator::from_choi(&phi.choi_matrix(), 2, 3).unwrap();
    assert_eq!(representation_distance(&phi, &back), 0.0);

    let id = identity_map(2).choi_matrix();
    let e = eig_hermitian_matrix(&id).unwrap();
    assert!((e.max_value() - 2.0).abs() < 1e-12);

    // The transpose map's Choi matrix is the swap operator.
    let t = transpose_map(2).choi_matrix();
    let mut swap = ComplexMatrix::zeros(4, 4);
    for i in 0..2 {
        for j in 0..2 {
            swap[(i * 2 + j, j * 2 + i)] = c(1.0, 0.0);
        }
    }
    assert!(close(&t, &swap, 0.0));
    assert!((transpose_map(2).choi_min_eigenvalue().unwrap() + 1.0).abs() < 1e-12);
}

#[test]
fn classification() {
    let cfg = cfg();
    let cptp = random_cptp(3, 3, 2, 1).unwrap().classify(&cfg, 64, 1).unwrap();
    assert_eq!(cptp.certificate, PositivityCertificate::CompletelyPositive);
    assert!(cptp.trace.is_preserving());

    let t = transpose_map(3).classify(&cfg, 256, 2).unwrap();
    assert!(matches!(t.certificate, PositivityCertificate::PositiveByConstruction { .. }));
    assert!(t.choi_min_eigenvalue < -0.5);
    assert!(t.sampled_min_eigenvalue.unwrap() >= -1e-12);

    let ce = counterexample_map().classify(&cfg, 16, 3).unwrap();
    assert_eq!(ce.certificate, PositivityCertificate::CompletelyPositive);
    assert_eq!(ce.trace.tag, TraceTag::Nonincreasing);
    let spectrum = ce.trace.adjoint_unit_spectrum().unwrap();
    assert!((spectrum[0] - 0.5).abs() < 1e-15 && (spectrum[1] - 1.0).abs() < 1e-15);
}

#[test]
fn non_positive_map_is_falsified() {
    // X -> tr[X] 1/2 - X sends pure states to operators with eigenvalue -1/2.
    let unit = vectorize(&identity(2));
    let m = &unit * unit.adjoint() * c(0.5, 0.0) - identity(4) * c(1.0, 0.0);
    let phi = SuperOperator::from_matrix(2, 2, m, PositivityCertificate::Unverified).unwrap();
    let cls = phi.classify(&cfg(), 32, 4).unwrap();
    match cls.certificate {
        PositivityCertificate::Falsified { witness, min_eigenvalue } => {
            assert!(min_eigenvalue < -0.4);
            assert_eq!(witness.len(), 2);
        }
        other => panic!("expected falsification, got {other:?}"),
    }
    // Phi^*(1) = 0.
    assert_eq!(cls.trace.tag, TraceTag::Nonincreasing);
}

#[test]
fn falsification_search_is_deterministic() {
    let phi = transpose_map(3);
    let a = phi.falsification_search(100, 77).unwrap().unwrap();
    let b = phi.falsification_search(100, 77).unwrap().unwrap();
    assert_eq!(a.0, b.0);
    assert_eq!(a.1, b.1);
}

#[test]
fn one_to_one_norm() {
    assert!((counterexample_map().one_to_one_norm_positive().unwrap() - 1.0).abs() < 1e-15);
    assert!((scaling(3, 0.5).unwrap().one_to_one_norm_positive().unwrap() - 0.5).abs() < 1e-15);
    let unverified = SuperOperator::from_matrix(2, 2, identity(4), PositivityCertificate::Unverified).unwrap();
    assert!(matches!(unverified.one_to_one_norm_positive(), Err(Error::Precondition(_))));
}

#[test]
fn truncation_with_identity_projectors_is_the_map() {
    let phi = random_positive_noncp(3, 12).unwrap();
    let t = truncation(&phi, &Projector::identity(3), &Projector::identity(3)).unwrap();
    assert!(representation_distance(&phi, &t) < 1e-14);
    assert!(matches!(t.certificate(), PositivityCertificate::PositiveByConstruction { .. }));
}

#[test]
fn truncation_preserves_trace_on_compressed_inputs() {
    let cfg = cfg();
    let mut rng = rng_from_seed(21);
    let phi = random_cptp(4, 3, 3, 8).unwrap();
    let p = random_projector(4, 2, &mut rng);
    let q = random_projector(3, 1, &mut rng);
    let t = truncation(&phi, &p, &q).unwrap();
    assert_eq!(t.certificate(), &PositivityCertificate::CompletelyPositive);
    let rho = p.compress(&random_density(4, &mut rng));
    let out = t.apply(&rho).unwrap();
    assert!((out.trace() - rho.trace()).norm() < 1e-12);
    // Output is supported in q.
    assert!(close(&q.compress(&out), &out, 1e-12));
    // Explicit formula.
    let b = phi.apply(&rho).unwrap();
    let discarded = (&b * q.complement().matrix()).trace();
    let expected = q.compress(&b) + q.matrix() * (discarded / q.rank() as f64);
    assert!(close(&out, &expected, 1e-12));
    assert!(t.choi(&cfg).is_ok());
}

#[test]
fn pinching_keeps_blocks() {
    let p = Projector::coordinate(3, &[0]);
    let x = real_matrix(&[&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0], &[7.0, 8.0, 9.0]]);
    let out = pinching(&p).apply(&x).unwrap();
    let expected = real_matrix(&[&[1.0, 0.0, 0.0], &[0.0, 5.0, 6.0], &[0.0, 8.0, 9.0]]);
    assert!(close(&out, &expected, 1e-15));
}

#[test]
fn reduction_and_depolarizing() {
    let r = reduction(2).unwrap();
    assert!(close(&r.apply(&diagonal(&[1.0, 0.0])).unwrap(), &diagonal(&[0.0, 1.0]), 1e-15));
    assert!(r.trace_behavior().unwrap().is_preserving());
    assert!(r.choi_min_eigenvalue().unwrap() < -1e-3 || reduction(3).unwrap().choi_min_eigenvalue().unwrap() < -1e-3);
    assert!(reduction(1).is_err());

    let dep = depolarizing(2, 0.0).unwrap();
    let out = dep.apply(&diagonal(&[1.0, 0.0])).unwrap();
    assert!(close(&out, &diagonal(&[0.5, 0.5]), 1e-15));
    assert!(depolarizing(2, 1.5).is_err());
}

#[test]
fn composition_certificates() {
    let cptp = random_cptp(2, 2, 2, 4).unwrap();
    let t = transpose_map(2);
    assert_eq!(cptp.compose(&cptp).unwrap().certificate(), &PositivityCertificate::CompletelyPositive);
    let tc = t.compose(&cptp).unwrap();
    assert!(tc.certificate().is_positive());
    assert!(tc.kraus().is_none());
    let x = random_density(2, &mut rng_from_seed(2));
    let direct = t.apply(&cptp.apply(&x).unwrap()).unwrap();
    assert!(close(&tc.apply(&x).unwrap(), &direct, 1e-14));
    let unverified = SuperOperator::from_matrix(2, 2, identity(4), PositivityCertificate::Unverified).unwrap();
    assert_eq!(unverified.compose(&cptp).unwrap().certificate(), &PositivityCertificate::Unverified);
}

#[test]
fn recipes_round_trip_through_json() {
    let cfg = cfg();
    let mut rng = rng_from_seed(6);
    let p = random_projector(3, 1, &mut rng);
    let recipe = MapRecipe::compose(
        MapRecipe::Transpose { dim: 3 },
        MapRecipe::truncation(
            MapRecipe::RandomCptp {
                dim_in: 3,
                dim_out: 3,
                kraus_rank: 2,
                seed: 3,
            },
            &Projector::identity(3),
            &p.complement(),
        ),
    );
    let text = crate::io::to_canonical_json(&recipe).unwrap();
    let back: MapRecipe = crate::io::from_json(&text).unwrap();
    assert_eq!(back, recipe);
    let a = recipe.build(&cfg).unwrap();
    let b = back.build(&cfg).unwrap();
    assert_eq!(representation_distance(&a, &b), 0.0);
    assert_eq!(recipe.name(), "transpose∘truncation(random_cptp)");
}

#[test]
fn induced_norm_of_identity_is_one() {
    let cfg = cfg();
    let sigma = PsdOperator::new(random_density(3, &mut rng_from_seed(1)), &cfg).unwrap();
    let bound = induced_weighted_norm_lower_bound(&identity_map(3), &sigma, &sigma, 2.0, 20, 5, &cfg).unwrap();
    assert!((bound - 1.0).abs() < 1e-12);
}
