//! Explicit private algebras for channels built from Abelian Pauli subgroups.

use serde::Serialize;

use crate::algebra::{
    simultaneous_diagonalize, structure_type, Channel, OperatorAlgebra, StructureType,
};
use crate::dense::{self, identity, kron, max_abs_diff, root_of_unity, DenseOperator, OperatorJson};
use crate::error::{Error, Result};
use crate::group::{character_matrix, PauliSubgroup};
use crate::pauli::{PauliClass, PauliElement};
use crate::privacy::{
    check_privatized_algebra, is_quasiorthogonal, kraus_mutually_commuting, quasiorth_deviation,
    PrivacyCertificate,
};

/// Pairs `(X̂_i, Ŷ_i)` and the algebra they generate.
#[derive(Debug, Clone)]
pub struct EncodedQubitAlgebra {
    pub n: usize,
    pub pairs: Vec<(PauliElement, PauliElement)>,
    /// Conjugating unitary, when the algebra has been moved by one.
    pub u: Option<DenseOperator>,
    pub algebra: OperatorAlgebra,
}

impl EncodedQubitAlgebra {
    pub fn classes(&self) -> Vec<PauliClass> {
        self.pairs.iter().flat_map(|(x, y)| [x.class(), y.class()]).collect()
    }
}

/// `X̂_i` has `X` on site `2i` and `Ŷ_i` has `Y` on sites `2i−1, 2i`
/// (sites counted from 1), for `i = 1..⌊n/2⌋`.
pub fn xy_hat_generators(n: usize) -> Result<EncodedQubitAlgebra> {
    if n < 2 {
        return Err(Error::Invalid(format!("need at least two qubits, got {n}")));
    }
    let mut pairs = Vec::new();
    for i in 1..=n / 2 {
        let mut xs = vec!['I'; n];
        xs[2 * i - 1] = 'X';
        let mut ys = vec!['I'; n];
        ys[2 * i - 2] = 'Y';
        ys[2 * i - 1] = 'Y';
        let x = PauliElement::parse(&xs.iter().collect::<String>(), 2)?;
        let y = PauliElement::parse(&ys.iter().collect::<String>(), 2)?;
        pairs.push((x, y));
    }
    let classes: Vec<PauliClass> = pairs.iter().flat_map(|(x, y)| [x.class(), y.class()]).collect();
    let algebra = OperatorAlgebra::from_pauli_classes(2, n, &classes)?;
    Ok(EncodedQubitAlgebra { n, pairs, u: None, algebra })
}

/// `ρ ↦ |G|⁻¹ Σ_g g ρ g†` over phase-0 representatives.
pub fn channel_from_subgroup(g: &PauliSubgroup) -> Result<Channel> {
    if !g.is_abelian() {
        return Err(Error::NotAbelian(
            "channels are only built from Abelian subgroups; the given generators do not commute".into(),
        ));
    }
    let w = (g.len() as f64).sqrt();
    Channel::new(g.elements().iter().map(|c| c.to_dense().unscale(w)).collect())
}

pub fn max_private_qubits(n: usize) -> usize {
    n / 2
}

/// A private algebra together with its certificate.
#[derive(Debug, Clone)]
pub struct PrivateAlgebra {
    pub algebra: OperatorAlgebra,
    pub certificate: PrivacyCertificate,
    pub structure: StructureType,
    /// Qubits the algebra encodes.
    pub qubits: usize,
    /// `U` with `U g U†` diagonal for every element of the subgroup.
    pub u: DenseOperator,
}

/// `xy`-hat algebra on `k` qubits, or the scalars when it encodes nothing.
fn encoded_algebra(k: usize) -> Result<OperatorAlgebra> {
    if k < 2 {
        Ok(OperatorAlgebra::scalars(1usize << k))
    } else {
        Ok(xy_hat_generators(k)?.algebra)
    }
}

fn require_qubit_abelian(g: &PauliSubgroup) -> Result<usize> {
    if g.d() != 2 {
        return Err(Error::Invalid(format!("qubit subgroups only, got d={}", g.d())));
    }
    if !g.is_abelian() {
        return Err(Error::NotAbelian("subgroup does not commute".into()));
    }
    Ok(g.len().trailing_zeros() as usize)
}

fn finish(
    g: &PauliSubgroup,
    algebra: OperatorAlgebra,
    u: DenseOperator,
    qubits: usize,
    label: &str,
) -> Result<PrivateAlgebra> {
    let channel = channel_from_subgroup(g)?;
    let structure = structure_type(&algebra)?.structure().clone();
    let gens: Vec<String> = g.minimal_generators().iter().map(|c| c.to_string()).collect();
    let certificate = check_privatized_algebra(&channel, &algebra)?.with_descriptions(
        &format!("uniform Pauli channel over <{}> ({} Kraus operators)", gens.join(","), g.len()),
        &format!("{label} encoding {qubits} qubit(s), structure {structure}"),
    );
    Ok(PrivateAlgebra { algebra, certificate, structure, qubits, u })
}

/// Moves the `xy`-hat algebra into the eigenbasis of a maximal Abelian subgroup.
pub fn private_algebra_for_max_abelian(g: &PauliSubgroup) -> Result<PrivateAlgebra> {
    let n = g.n();
    let k = require_qubit_abelian(g)?;
    if k != n {
        return Err(Error::NotMaximal { size: g.len(), expected: 1 << n });
    }
    let ops: Vec<DenseOperator> = g.elements().iter().map(PauliClass::to_dense).collect();
    let u = simultaneous_diagonalize(&ops)?;
    let algebra = encoded_algebra(n)?.conjugate_by(&u.adjoint());
    finish(g, algebra, u, max_private_qubits(n), "conjugated xy-hat algebra")
}

/// For `|K| = 2^k`: rotates `Alg(K)` to `I_{2^{n−k}} ⊗ Δ_{2^k}` and carries
/// `I ⊗ B_k` back, where `B_k` is the `k`-qubit `xy`-hat algebra.
pub fn private_algebra_for_abelian(kgroup: &PauliSubgroup) -> Result<PrivateAlgebra> {
    let n = kgroup.n();
    let k = require_qubit_abelian(kgroup)?;
    let size = 1usize << n;
    let gens = kgroup.minimal_generators();
    let u = if gens.is_empty() {
        identity(size)
    } else {
        let ops: Vec<DenseOperator> = gens.iter().map(PauliClass::to_dense).collect();
        let u0 = simultaneous_diagonalize(&ops)?;
        // order joint eigenvectors as (multiplicity a, character j) -> a·2^k + j
        let diag: Vec<DenseOperator> = ops.iter().map(|g| &u0 * g * u0.adjoint()).collect();
        let reference: Vec<_> = diag.iter().map(|m| m[(0, 0)]).collect();
        let mut seen = vec![0usize; 1 << k];
        let mut w = DenseOperator::zeros(size, size);
        let w0 = u0.adjoint();
        for r in 0..size {
            let mut j = 0usize;
            for (m, rv) in diag.iter().zip(&reference) {
                let bit = usize::from((m[(r, r)] - rv).norm() > 1e-6);
                j = (j << 1) | bit;
            }
            let a = seen[j];
            seen[j] += 1;
            let dst = a * (1 << k) + j;
            if dst >= size {
                return Err(Error::CheckFailed("character multiplicities are unequal".into()));
            }
            w.set_column(dst, &w0.column(r));
        }
        if seen.iter().any(|&c| c != size >> k) {
            return Err(Error::CheckFailed(format!("character multiplicities {seen:?}")));
        }
        w.adjoint()
    };
    let algebra = encoded_algebra(k)?.ampliate(size >> k).conjugate_by(&u.adjoint());
    finish(kgroup, algebra, u, k / 2, "ampliated xy-hat algebra")
}

/// Whether `A` is quasiorthogonal to the diagonal algebra, decided from its
/// block structure (every `k ≥ q`) and directly; the two must agree.
pub fn quasiorth_to_diagonal(a: &OperatorAlgebra) -> Result<bool> {
    let dec = structure_type(a)?;
    let by_structure = dec.structure().pairs().iter().all(|&(k, q)| k >= q);
    let delta = OperatorAlgebra::diagonal(a.n());
    let direct = is_quasiorthogonal(a, &delta);
    if by_structure != direct {
        return Err(Error::RouteDisagreement(format!(
            "structure {} says {by_structure}, trace condition says {direct} (deviation {:e}); \
             the block criterion holds only up to a unitary change of basis",
            dec.structure(),
            quasiorth_deviation(a, &delta)
        )));
    }
    Ok(direct)
}

/// One numbered check of the qutrit demonstration.
#[derive(Debug, Clone, Serialize)]
pub struct SubCheck {
    pub id: char,
    pub name: String,
    pub passed: bool,
    pub deviation: Option<f64>,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct QutritReport {
    pub checks: Vec<SubCheck>,
    pub rho0: OperatorJson,
    pub structure: String,
    /// Scalar on the block table that made `U` unitary.
    pub normalization: String,
    /// Block replaced in the displayed table, if any.
    pub table_correction: Option<String>,
    pub character_table_matches: bool,
    pub cosets_covered: bool,
    pub perturbed: bool,
}

impl QutritReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn first_failure(&self) -> Option<&SubCheck> {
        self.checks.iter().find(|c| !c.passed)
    }
}

pub const IDENTITY_TOL: f64 = 1e-9;

fn qutrit_x() -> DenseOperator {
    PauliClass::new(3, vec![1], vec![0]).expect("valid").to_dense()
}

fn qutrit_z() -> DenseOperator {
    PauliClass::new(3, vec![0], vec![1]).expect("valid").to_dense()
}

/// `X^a Z^b` as a matrix product.
fn monomial(a: u32, b: u32) -> DenseOperator {
    qutrit_x().pow(a) * qutrit_z().pow(b)
}

fn monomial_name(a: u32, b: u32) -> String {
    let part = |l: &str, e: u32| match e {
        0 => String::new(),
        1 => l.to_string(),
        _ => format!("{l}^{e}"),
    };
    let s = format!("{}{}", part("X", a), part("Z", b));
    if s.is_empty() { "I".into() } else { s }
}

/// Displayed block table, `(a, b)` for `X^a Z^b`, row-major.
const DISPLAYED_BLOCKS: [[(u32, u32); 3]; 3] = [
    [(0, 0), (2, 2), (1, 1)],
    [(1, 2), (0, 1), (2, 0)],
    [(2, 1), (1, 0), (0, 1)],
];

fn assemble(blocks: &[[(u32, u32); 3]; 3], scale: f64) -> DenseOperator {
    let mut u = DenseOperator::zeros(9, 9);
    for (r, row) in blocks.iter().enumerate() {
        for (c, &(a, b)) in row.iter().enumerate() {
            u.view_mut((3 * r, 3 * c), (3, 3)).copy_from(&monomial(a, b).scale(scale));
        }
    }
    u
}

/// Deviations of the two conjugation identities; `omega_power` is the
/// exponent on the first right-hand side (2 in the claim).
fn identity_deviations(u: &DenseOperator, omega_power: i64) -> (f64, f64) {
    let id = identity(3);
    let ud = u.adjoint();
    let lhs1 = u * kron(&id, &qutrit_x()) * &ud;
    let rhs1 = kron(&monomial(1, 2), &qutrit_z()) * root_of_unity(omega_power, 3);
    let lhs2 = u * kron(&id, &qutrit_z()) * &ud;
    let rhs2 = kron(&monomial(2, 0), &qutrit_x());
    (max_abs_diff(&lhs1, &rhs1), max_abs_diff(&lhs2, &rhs2))
}

fn works(u: &DenseOperator) -> bool {
    let (d1, d2) = identity_deviations(u, 2);
    dense::unitarity_defect(u) <= IDENTITY_TOL && d1 <= IDENTITY_TOL && d2 <= IDENTITY_TOL
}

/// Finds the scalar, and if necessary one block replacement, that turns the
/// displayed table into a unitary satisfying both identities.
fn resolve_block_unitary() -> (DenseOperator, String, Option<String>) {
    let scales = [(1.0, "1"), (1.0 / 3f64.sqrt(), "1/sqrt(3)")];
    for &(s, name) in &scales {
        let u = assemble(&DISPLAYED_BLOCKS, s);
        if works(&u) {
            return (u, name.into(), None);
        }
    }
    for &(s, name) in &scales {
        for r in 0..3 {
            for c in 0..3 {
                for a in 0..3 {
                    for b in 0..3 {
                        if (a, b) == DISPLAYED_BLOCKS[r][c] {
                            continue;
                        }
                        let mut blocks = DISPLAYED_BLOCKS;
                        blocks[r][c] = (a, b);
                        let u = assemble(&blocks, s);
                        if works(&u) {
                            let (oa, ob) = DISPLAYED_BLOCKS[r][c];
                            let note = format!(
                                "displayed table is not unitary at scale 1 or 1/sqrt(3); block ({},{}) {} replaced by {}",
                                r + 1,
                                c + 1,
                                monomial_name(oa, ob),
                                monomial_name(a, b)
                            );
                            return (u, name.into(), Some(note));
                        }
                    }
                }
            }
        }
    }
    (assemble(&DISPLAYED_BLOCKS, scales[1].0), "none".into(), Some("no single-block correction found".into()))
}

/// The displayed qutrit character table, entries as powers of `ω`.
const DISPLAYED_F: [[u32; 9]; 9] = [
    [0, 0, 0, 0, 0, 0, 0, 0, 0],
    [0, 0, 0, 1, 1, 1, 2, 2, 2],
    [0, 0, 0, 2, 2, 2, 1, 1, 1],
    [0, 2, 1, 0, 2, 1, 0, 2, 1],
    [0, 2, 1, 1, 0, 2, 2, 1, 0],
    [0, 2, 1, 2, 1, 0, 1, 0, 2],
    [0, 1, 2, 0, 1, 2, 0, 1, 2],
    [0, 1, 2, 1, 2, 0, 2, 0, 1],
    [0, 1, 2, 2, 0, 1, 1, 2, 0],
];

pub fn displayed_qutrit_character_table() -> [[u32; 9]; 9] {
    DISPLAYED_F
}

/// The nine-element subgroup `{X^{2i} Z^i ⊗ X^j Z^j}`.
pub fn qutrit_kraus_subgroup() -> Result<PauliSubgroup> {
    let g1 = PauliClass::new(3, vec![2, 0], vec![1, 0])?;
    let g2 = PauliClass::new(3, vec![0, 1], vec![0, 1])?;
    PauliSubgroup::close(3, 2, &[g1, g2])
}

/// The subgroup generated by `X² ⊗ X` and `XZ² ⊗ Z`.
pub fn qutrit_private_subgroup() -> Result<PauliSubgroup> {
    let g1 = PauliClass::new(3, vec![2, 1], vec![0, 0])?;
    let g2 = PauliClass::new(3, vec![1, 0], vec![2, 1])?;
    PauliSubgroup::close(3, 2, &[g1, g2])
}

/// Runs every check of the two-qutrit example and records the outcome of each.
/// With `perturb`, the first conjugation identity is tested with `ω` in place
/// of `ω²` and must fail.
pub fn run_qutrit_demo(perturb: bool) -> Result<QutritReport> {
    let kgroup = qutrit_kraus_subgroup()?;
    let channel = channel_from_subgroup(&kgroup)?;
    let agroup = qutrit_private_subgroup()?;
    let algebra = OperatorAlgebra::from_pauli_subgroup(&agroup);
    let mut checks = Vec::new();

    let commuting = kraus_mutually_commuting(&channel);
    checks.push(SubCheck {
        id: 'a',
        name: "Kraus operators mutually commute".into(),
        passed: commuting,
        deviation: None,
        detail: format!("{} Kraus operators", channel.kraus().len()),
    });

    let cert = check_privatized_algebra(&channel, &algebra)?;
    let rho0 = cert.rho0()?;
    let rho0_dev = max_abs_diff(&rho0, &identity(9).unscale(9.0));
    checks.push(SubCheck {
        id: 'b',
        name: "algebra privatized with rho0 = I/9".into(),
        passed: cert.verdict && rho0_dev <= cert.tolerance,
        deviation: Some(cert.max_deviation.max(rho0_dev)),
        detail: format!("max deviation {:.3e}, |rho0 - I/9| = {:.3e}", cert.max_deviation, rho0_dev),
    });

    let structure = structure_type(&algebra)?.structure().clone();
    checks.push(SubCheck {
        id: 'c',
        name: "structure type [(3,3)]".into(),
        passed: structure.pairs() == [(3, 3)],
        deviation: None,
        detail: format!("found {structure}"),
    });

    let (u, normalization, table_correction) = resolve_block_unitary();
    let defect = dense::unitarity_defect(&u);
    let (d1, d2) = identity_deviations(&u, if perturb { 1 } else { 2 });
    let first_name = if perturb { "U(I⊗X)U* = ω XZ²⊗Z" } else { "U(I⊗X)U* = ω² XZ²⊗Z" };
    let second_name = "U(I⊗Z)U* = X²⊗X";
    let failing: Vec<&str> = [
        (defect, "U unitary"),
        (d1, first_name),
        (d2, second_name),
    ]
    .iter()
    .filter(|(d, _)| *d > IDENTITY_TOL)
    .map(|(_, n)| *n)
    .collect();
    checks.push(SubCheck {
        id: 'd',
        name: format!("U unitary, {first_name}, {second_name}"),
        passed: failing.is_empty(),
        deviation: Some(defect.max(d1).max(d2)),
        detail: if failing.is_empty() {
            format!("unitarity {defect:.1e}, identities {d1:.1e} and {d2:.1e}")
        } else {
            format!("failed: {} (deviations {defect:.1e}, {d1:.1e}, {d2:.1e})", failing.join("; "))
        },
    });

    let kraus_alg = OperatorAlgebra::from_pauli_subgroup(&kgroup);
    let qo = quasiorth_deviation(&kraus_alg, &algebra);
    checks.push(SubCheck {
        id: 'e',
        name: "Kraus algebra and private algebra quasiorthogonal".into(),
        passed: is_quasiorthogonal(&kraus_alg, &algebra),
        deviation: Some(qo),
        detail: format!("trace condition deviation {qo:.1e}"),
    });

    let table = character_matrix(3, 1)?;
    let character_table_matches = (0..9).all(|r| {
        (0..9).all(|c| table.entry(r, c).as_omega_power() == Some(DISPLAYED_F[r][c]))
    });
    // the private subgroup meets the Kraus subgroup trivially and its cosets fill P_2
    let mut products = std::collections::HashSet::new();
    for a in agroup.elements() {
        for k in kgroup.elements() {
            products.insert(a.mul(k)?);
        }
    }
    let meets_trivially = agroup.elements().iter().filter(|a| kgroup.contains(a)).count() == 1;
    let cosets_covered = meets_trivially && products.len() == 81;

    Ok(QutritReport {
        checks,
        rho0: OperatorJson::from(&rho0),
        structure: structure.to_string(),
        normalization,
        table_correction,
        character_table_matches,
        cosets_covered,
        perturbed: perturb,
    })
}

/// As [`run_qutrit_demo`], but a failed check is an error naming it.
pub fn qutrit_demo_checked(perturb: bool) -> Result<QutritReport> {
    let report = run_qutrit_demo(perturb)?;
    if let Some(f) = report.first_failure() {
        return Err(Error::CheckFailed(format!("({}) {}: {}", f.id, f.name, f.detail)));
    }
    Ok(report)
}

/// One sampled input of the phase-flip reproduction.
#[derive(Debug, Clone, Serialize)]
pub struct PhaseFlipSample {
    /// Coefficients of `IX`, `YY`, `YZ`.
    pub coefficients: [f64; 3],
    pub deviation: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct PhaseFlipReport {
    pub generators: Vec<String>,
    pub samples: Vec<PhaseFlipSample>,
    pub max_deviation: f64,
}

/// Applies the two-qubit phase-flip channel over `<ZI, IZ>` to random states
/// `¼(II + c₁ IX + c₂ YY + c₃ YZ)` with `|c| ≤ 1` and measures `‖Φ(ρ) − I/4‖`.
/// The three Paulis anticommute pairwise, so these are exactly the states of
/// that form.
pub fn phase_flip_reproduction<R: rand::Rng + ?Sized>(samples: usize, rng: &mut R) -> Result<PhaseFlipReport> {
    let gens = crate::group::parse_class_list("ZI,IZ", 2)?;
    let g = PauliSubgroup::close(2, 2, &gens)?;
    let phi = channel_from_subgroup(&g)?;
    let terms: Vec<DenseOperator> =
        ["II", "IX", "YY", "YZ"].iter().map(|s| PauliElement::parse(s, 2).map(|p| p.to_dense())).collect::<Result<_>>()?;
    let target = identity(4).unscale(4.0);
    let mut out = Vec::with_capacity(samples);
    while out.len() < samples {
        let c = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
        if c.iter().map(|v: &f64| v * v).sum::<f64>() > 1.0 {
            continue;
        }
        let rho = (&terms[0] + terms[1].scale(c[0]) + terms[2].scale(c[1]) + terms[3].scale(c[2])).unscale(4.0);
        let deviation = max_abs_diff(&phi.apply(&rho)?, &target);
        out.push(PhaseFlipSample { coefficients: c, deviation });
    }
    let max_deviation = out.iter().fold(0.0f64, |m, s| m.max(s.deviation));
    Ok(PhaseFlipReport { generators: vec!["ZI".into(), "IZ".into()], samples: out, max_deviation })
}
