use num_complex::Complex64;
use paulipriv_core::algebra::axioms::{check_conditional_expectation, kraus_characterization, random_matrix};
use paulipriv_core::algebra::{
    center, choi_equal, commutant, commutant_dense, conditional_expectation, structure_type,
    structure_type_seeded, Channel, OperatorAlgebra,
};
use paulipriv_core::dense::{identity, kron, max_abs_diff, DenseOperator};
use paulipriv_core::group::{annihilator, random_abelian, random_subgroup, PauliSubgroup};
use paulipriv_core::pauli::PauliClass;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_unitary(n: usize, rng: &mut ChaCha8Rng) -> DenseOperator {
    random_matrix(n, rng).qr().q()
}

/// A Pauli algebra, optionally moved by a random unitary so nothing is axis aligned.
fn random_algebra(rng: &mut ChaCha8Rng, rotate: bool) -> OperatorAlgebra {
    let (d, n) = if rng.random_bool(0.25) { (3u32, 1usize) } else { (2, rng.random_range(1..=3usize)) };
    let gens = rng.random_range(0..=2 * n);
    let a = OperatorAlgebra::from_pauli_subgroup(&random_subgroup(d, n, gens, rng).unwrap());
    if rotate {
        let u = random_unitary(a.n(), rng);
        a.conjugate_by(&u)
    } else {
        a
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn structure_accounts_for_dimensions(seed in any::<u64>(), rotate in any::<bool>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_algebra(&mut rng, rotate);
        let dec = structure_type(&a).unwrap();
        let st = dec.structure();
        prop_assert_eq!(st.size(), a.n());
        prop_assert_eq!(st.algebra_dim(), a.dim());
        let c = commutant_dense(&a).unwrap();
        prop_assert_eq!(st.commutant_dim(), c.dim());
        prop_assert_eq!(center(&a).unwrap().len(), st.pairs().len());
        for _ in 0..3 {
            let x = a.random_element(&mut rng);
            prop_assert!(dec.block_deviation(&x) < 1e-8);
        }
        let u = dec.unitary();
        prop_assert!(max_abs_diff(&(u * u.adjoint()), &identity(a.n())) < 1e-10);
    }

    #[test]
    fn commutative_algebras_have_equal_multiplicities(seed in any::<u64>(), n in 1usize..=4, k in 0usize..=4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = random_abelian(2, n, k.min(n), &mut rng).unwrap();
        let a = OperatorAlgebra::from_pauli_subgroup(&g);
        let st = structure_type(&a).unwrap();
        prop_assert!(st.structure().is_commutative());
        prop_assert!(st.structure().pairs().iter().all(|&(kk, q)| q == 1 && kk == (1 << n) / g.len()));
        prop_assert_eq!(st.structure().pairs().len(), g.len());
    }

    #[test]
    fn double_commutant_returns_the_algebra(seed in any::<u64>(), rotate in any::<bool>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_algebra(&mut rng, rotate);
        prop_assume!(a.n() <= 8);
        let c = commutant(&a).unwrap();
        let cc = commutant(&c).unwrap();
        prop_assert!(cc.same_span(&a, 1e-8));
    }

    #[test]
    fn conditional_expectation_axioms_hold(seed in any::<u64>(), rotate in any::<bool>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_algebra(&mut rng, rotate);
        let phi = conditional_expectation(&a).unwrap();
        prop_assert!(phi.tp_deviation() < 1e-9);
        let rep = check_conditional_expectation(&a, &phi, 3, &mut rng).unwrap();
        prop_assert!(rep.max() < 1e-8, "{:?}", rep);
    }

    #[test]
    fn kraus_operators_span_the_commutant(seed in any::<u64>(), rotate in any::<bool>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_algebra(&mut rng, rotate);
        let phi = conditional_expectation(&a).unwrap();
        let c = commutant_dense(&a).unwrap();
        let rep = kraus_characterization(&phi, &c);
        prop_assert!(rep.outside_commutant < 1e-8);
        prop_assert!(rep.overlap < 1e-8);
        prop_assert_eq!(rep.count, rep.commutant_dim);
        let span = OperatorAlgebra::span_closure_sized(a.n(), phi.kraus()).unwrap();
        prop_assert!(span.same_span(&c, 1e-8));
    }

    #[test]
    fn structure_is_deterministic(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_algebra(&mut rng, true);
        let s = rng.random::<u64>();
        let d1 = structure_type_seeded(&a, s).unwrap();
        let d2 = structure_type_seeded(&a, s).unwrap();
        prop_assert_eq!(d1.structure(), d2.structure());
        prop_assert_eq!(d1.unitary(), d2.unitary());
    }
}

/// For `A = Alg(K)` the conditional expectation is the uniform twirl over
/// `Ann(K)`: Paulis outside `K` anticommute with part of the annihilator and
/// average to zero.
#[test]
fn pauli_conditional_expectation_is_annihilator_twirl() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for _ in 0..20 {
        let n = rng.random_range(1..=3usize);
        let k = random_subgroup(2, n, rng.random_range(0..=2 * n), &mut rng).unwrap();
        let ann = annihilator(&k).unwrap();
        let w = (ann.len() as f64).sqrt();
        let twirl = Channel::new(ann.elements().iter().map(|c| c.to_dense().unscale(w)).collect()).unwrap();
        let phi = conditional_expectation(&OperatorAlgebra::from_pauli_subgroup(&k)).unwrap();
        assert!(choi_equal(&phi, &twirl));
    }
}

#[test]
fn choi_matches_vectorized_kraus() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let a = random_algebra(&mut rng, true);
    let phi = conditional_expectation(&a).unwrap();
    let n = phi.n();
    // J = Σ_K |K⟩⟩⟨⟨K| with |K⟩⟩ = Σ_i |i⟩ ⊗ K|i⟩
    let mut j = DenseOperator::zeros(n * n, n * n);
    for k in phi.kraus() {
        let v = DenseOperator::from_fn(n * n, 1, |r, _| k[(r % n, r / n)]);
        j += &v * v.adjoint();
    }
    assert!(max_abs_diff(&j, &phi.choi()) < 1e-10);
}

#[test]
fn central_elements_need_not_be_hermitian() {
    // center spanned by ω-phase qutrit classes: a real combination of their
    // Hermitian parts can vanish
    let g = PauliSubgroup::close(3, 1, &[PauliClass::parse("X0Z1", 3).unwrap()]).unwrap();
    let a = OperatorAlgebra::from_pauli_subgroup(&g);
    let st = structure_type(&a).unwrap();
    assert_eq!(st.structure().pairs(), [(1, 1), (1, 1), (1, 1)]);
}

#[test]
fn ampliation_and_conjugation() {
    let m2 = OperatorAlgebra::full(2);
    let a = m2.ampliate(3);
    assert_eq!(structure_type(&a).unwrap().structure().pairs(), [(3, 2)]);
    let x = DenseOperator::from_fn(2, 2, |r, c| Complex64::new((r + 2 * c) as f64, 1.0));
    assert!(a.contains(&kron(&identity(3), &x), 1e-10));
    let mut rng = ChaCha8Rng::seed_from_u64(29);
    let u = random_unitary(6, &mut rng);
    let b = a.conjugate_by(&u);
    assert!(b.contains(&(&u * kron(&identity(3), &x) * u.adjoint()), 1e-9));
}

#[test]
fn json_round_trips() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let a = random_algebra(&mut rng, true);
    let text = serde_json::to_string(&a.to_json()).unwrap();
    let back = OperatorAlgebra::from_json(&serde_json::from_str(&text).unwrap()).unwrap();
    assert!(back.same_span(&a, 1e-10));
    let phi = conditional_expectation(&a).unwrap();
    let text = serde_json::to_string(&phi.to_json()).unwrap();
    let back = Channel::from_json(&serde_json::from_str(&text).unwrap()).unwrap();
    assert!(choi_equal(&phi, &back));
}

#[test]
fn cancelling_products_do_not_grow_the_span() {
    // rotated matrix units: E_01·E_01 = 0 only up to rounding
    let mut rng = ChaCha8Rng::seed_from_u64(37);
    let u = random_unitary(8, &mut rng);
    let units: Vec<DenseOperator> = (0..4)
        .flat_map(|r| (0..4).map(move |c| (r, c)))
        .map(|(r, c)| {
            let e = DenseOperator::from_fn(4, 4, |i, j| if (i, j) == (r, c) { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) });
            &u * kron(&e, &identity(2)) * u.adjoint()
        })
        .collect();
    let a = OperatorAlgebra::span_closure(&units).unwrap();
    assert_eq!(a.dim(), 16);
}
