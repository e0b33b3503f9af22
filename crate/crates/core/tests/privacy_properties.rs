use num_complex::Complex64;
use paulipriv_core::algebra::axioms::{random_matrix, random_state};
use paulipriv_core::algebra::{conditional_expectation, structure_type, Channel, OperatorAlgebra};
use paulipriv_core::constructions::{
    channel_from_subgroup, private_algebra_for_abelian, private_algebra_for_max_abelian, quasiorth_to_diagonal,
    xy_hat_generators,
};
use paulipriv_core::dense::{identity, max_abs_diff, DenseOperator};
use paulipriv_core::error::Error;
use paulipriv_core::group::{random_abelian, random_maximal_abelian, random_subgroup, PauliSubgroup};
use paulipriv_core::privacy::{
    check_private_subsystem, check_privatized_algebra, is_quasiorthogonal, quasiorth_condition_suite,
    PrivacyCertificate,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Pauli algebras are quasiorthogonal exactly when their groups meet only in
/// the identity class, since distinct classes are trace orthogonal.
fn trivial_intersection(a: &PauliSubgroup, b: &PauliSubgroup) -> bool {
    a.elements().iter().filter(|c| b.contains(c)).count() == 1
}

fn random_pair(rng: &mut ChaCha8Rng) -> (PauliSubgroup, PauliSubgroup) {
    let n = rng.random_range(1..=3usize);
    let ga = rng.random_range(0..=n + 1);
    let gb = rng.random_range(0..=n + 1);
    (random_subgroup(2, n, ga, rng).unwrap(), random_subgroup(2, n, gb, rng).unwrap())
}

#[test]
fn condition_suite_agrees_with_intersection_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    let (mut yes, mut no) = (0, 0);
    for i in 0..50 {
        let (ka, kb) = random_pair(&mut rng);
        let (mut a, mut b) = (OperatorAlgebra::from_pauli_subgroup(&ka), OperatorAlgebra::from_pauli_subgroup(&kb));
        if i % 2 == 1 {
            // a common unitary changes nothing
            let u = random_matrix(a.n(), &mut rng).qr().q();
            a = a.conjugate_by(&u);
            b = b.conjugate_by(&u);
        }
        let oracle = trivial_intersection(&ka, &kb);
        let suite = quasiorth_condition_suite(&a, &b).unwrap();
        assert!(suite.consistent, "pair {i}: {:?}", suite.deviations);
        assert_eq!(suite.passed[0], oracle, "pair {i}");
        assert_eq!(is_quasiorthogonal(&a, &b), oracle);
        assert_eq!(is_quasiorthogonal(&b, &a), oracle);
        // Φ_A privatizes B exactly when the pair is quasiorthogonal
        let cert = check_privatized_algebra(&conditional_expectation(&a).unwrap(), &b).unwrap();
        assert_eq!(cert.verdict, oracle, "pair {i}");
        let cert = check_privatized_algebra(&conditional_expectation(&b).unwrap(), &a).unwrap();
        assert_eq!(cert.verdict, oracle, "pair {i}");
        if oracle {
            yes += 1
        } else {
            no += 1
        }
    }
    assert!(yes > 5 && no > 5, "sample too one-sided: {yes} / {no}");
}

/// A passing certificate means every state of `B` is sent to `ρ₀`.
#[test]
fn certificates_are_sound_on_random_states() {
    let mut rng = ChaCha8Rng::seed_from_u64(43);
    for n in 2..=4usize {
        let g = random_maximal_abelian(2, n, &mut rng).unwrap();
        let p = private_algebra_for_max_abelian(&g).unwrap();
        assert!(p.certificate.verdict);
        let phi = channel_from_subgroup(&g).unwrap();
        let rho0 = p.certificate.rho0().unwrap();
        let onto_b = conditional_expectation(&p.algebra).unwrap();
        for _ in 0..100 {
            // Φ_B maps states to states of B
            let rho = onto_b.apply(&random_state(1 << n, &mut rng)).unwrap();
            assert!(max_abs_diff(&phi.apply(&rho).unwrap(), &rho0) < 1e-9);
        }
    }
}

#[test]
fn certificate_json_round_trips_and_hashes_are_stable() {
    let mut rng = ChaCha8Rng::seed_from_u64(47);
    let g = random_maximal_abelian(2, 3, &mut rng).unwrap();
    let p1 = private_algebra_for_max_abelian(&g).unwrap();
    let p2 = private_algebra_for_max_abelian(&g).unwrap();
    assert_eq!(p1.certificate.inputs, p2.certificate.inputs);
    let text = serde_json::to_string(&p1.certificate).unwrap();
    let back: PrivacyCertificate = serde_json::from_str(&text).unwrap();
    assert_eq!(back, p1.certificate);
    assert!(p1.certificate.inputs.iter().all(|r| r.sha256.len() == 64));
}

#[test]
fn failing_certificate_reports_large_deviation() {
    let b = OperatorAlgebra::diagonal(4);
    let cert = check_privatized_algebra(&Channel::identity(4), &b).unwrap();
    assert!(!cert.verdict);
    assert!(cert.max_deviation > 0.1);
}

#[test]
fn xy_hat_products_are_never_diagonal() {
    for n in 2..=6usize {
        let enc = xy_hat_generators(n).unwrap();
        assert_eq!(enc.pairs.len(), n / 2);
        let group = PauliSubgroup::close(2, n, &enc.classes()).unwrap();
        assert_eq!(group.len(), 1 << (2 * (n / 2)));
        for c in group.elements().iter().filter(|c| !c.is_identity()) {
            assert!(c.x().iter().any(|&x| x != 0), "{c} is diagonal");
        }
        for (x, y) in &enc.pairs {
            assert!(!x.commutes_with(y).unwrap());
        }
        if n <= 4 {
            assert!(quasiorth_to_diagonal(&enc.algebra).unwrap());
        }
    }
}

#[test]
fn block_route_disagreement_is_reported() {
    // I_2 ⊗ M_2 has k ≥ q but sits badly against the standard basis diagonal
    let a = OperatorAlgebra::full(2).ampliate(2);
    match quasiorth_to_diagonal(&a) {
        Err(Error::RouteDisagreement(_)) => {}
        other => panic!("expected a route disagreement, got {other:?}"),
    }
}

#[test]
fn private_subsystem_matches_private_algebra() {
    let mut rng = ChaCha8Rng::seed_from_u64(53);
    for n in 2..=4usize {
        let g = random_maximal_abelian(2, n, &mut rng).unwrap();
        let p = private_algebra_for_max_abelian(&g).unwrap();
        let dec = structure_type(&p.algebra).unwrap();
        let [(k, q)] = dec.structure().pairs() else { panic!("one block expected") };
        let phi = channel_from_subgroup(&g).unwrap();
        let sigma = identity(*k).unscale(*k as f64);
        let cert = check_private_subsystem(&phi, &dec.unitary().adjoint(), *k, *q, &sigma).unwrap();
        assert!(cert.verdict, "n={n}: {:e}", cert.max_deviation);
        // the identity channel keeps everything
        let cert = check_private_subsystem(&Channel::identity(1 << n), &dec.unitary().adjoint(), *k, *q, &sigma).unwrap();
        assert!(!cert.verdict);
    }
}

#[test]
fn subsystem_rejects_non_isometry() {
    let v = DenseOperator::from_fn(4, 2, |r, c| Complex64::new(if r == c { 2.0 } else { 0.0 }, 0.0));
    let sigma = identity(1);
    let err = check_private_subsystem(&Channel::identity(4), &v, 1, 2, &sigma).unwrap_err();
    assert!(matches!(err, Error::NotIsometry { .. }));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn quasiorthogonality_is_symmetric(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (ka, kb) = random_pair(&mut rng);
        let u = random_matrix(1 << ka.n(), &mut rng).qr().q();
        let a = OperatorAlgebra::from_pauli_subgroup(&ka).conjugate_by(&u);
        let b = OperatorAlgebra::from_pauli_subgroup(&kb);
        prop_assert_eq!(is_quasiorthogonal(&a, &b), is_quasiorthogonal(&b, &a));
        let s1 = quasiorth_condition_suite(&a, &b).unwrap();
        let s2 = quasiorth_condition_suite(&b, &a).unwrap();
        prop_assert!(s1.consistent && s2.consistent);
        prop_assert_eq!(s1.passed, s2.passed);
    }

    #[test]
    fn max_and_abelian_pipelines_agree(seed in any::<u64>(), n in 2usize..=4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = random_maximal_abelian(2, n, &mut rng).unwrap();
        let p = private_algebra_for_max_abelian(&g).unwrap();
        let q = private_algebra_for_abelian(&g).unwrap();
        prop_assert!(p.certificate.verdict && q.certificate.verdict);
        prop_assert_eq!(p.qubits, q.qubits);
        prop_assert_eq!(p.structure, q.structure);
    }

    #[test]
    fn abelian_pipeline_certifies(seed in any::<u64>(), n in 1usize..=5, k in 0usize..=5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = random_abelian(2, n, k.min(n), &mut rng).unwrap();
        let p = private_algebra_for_abelian(&g).unwrap();
        prop_assert!(p.certificate.verdict, "{:e}", p.certificate.max_deviation);
        prop_assert_eq!(p.qubits, k.min(n) / 2);
    }
}
