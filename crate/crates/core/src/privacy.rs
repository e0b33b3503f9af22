//! Quasiorthogonality tests and privacy certificates.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::algebra::{conditional_expectation, Channel, OperatorAlgebra};
use crate::dense::{self, identity, kron, matrix_unit, max_abs, max_abs_diff, DenseOperator, OperatorJson};
use crate::error::{Error, Result};

/// Tolerance for the trace identities defining quasiorthogonality.
pub const QUASIORTH_TOL: f64 = 1e-9;

/// Default tolerance on operator deviations in certificates.
pub const PRIVACY_TOL: f64 = 1e-8;

/// Tolerance for Kraus commutation.
pub const COMMUTE_TOL: f64 = 1e-9;

/// Largest `|tr(ab)/N − tr(a)/N · tr(b)/N|` over basis pairs.
pub fn quasiorth_deviation(a: &OperatorAlgebra, b: &OperatorAlgebra) -> f64 {
    let n = a.n() as f64;
    let mut dev: f64 = 0.0;
    for x in a.basis() {
        let tx = x.trace() / n;
        for y in b.basis() {
            let lhs = (x * y).trace() / n;
            dev = dev.max((lhs - tx * (y.trace() / n)).norm());
        }
    }
    dev
}

/// `tr(ab)/N = tr(a)/N · tr(b)/N` for all basis pairs within `1e-9`.
pub fn is_quasiorthogonal(a: &OperatorAlgebra, b: &OperatorAlgebra) -> bool {
    a.n() == b.n() && quasiorth_deviation(a, b) <= QUASIORTH_TOL
}

/// The four equivalent forms of quasiorthogonality, each evaluated on its own.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConditionReport {
    /// Largest violation of each condition, in order (1)–(4).
    pub deviations: [f64; 4],
    pub passed: [bool; 4],
    pub tolerance: f64,
    /// All four verdicts agree.
    pub consistent: bool,
}

impl ConditionReport {
    pub fn all_pass(&self) -> bool {
        self.passed.iter().all(|&p| p)
    }

    pub fn all_fail(&self) -> bool {
        self.passed.iter().all(|&p| !p)
    }
}

pub fn quasiorth_condition_suite(a: &OperatorAlgebra, b: &OperatorAlgebra) -> Result<ConditionReport> {
    quasiorth_condition_suite_with(a, b, QUASIORTH_TOL)
}

pub fn quasiorth_condition_suite_with(a: &OperatorAlgebra, b: &OperatorAlgebra, tol: f64) -> Result<ConditionReport> {
    if a.n() != b.n() {
        return Err(Error::Mismatch(format!("algebras act on N={} and N={}", a.n(), b.n())));
    }
    let n = a.n();
    let nf = n as f64;
    let id = identity(n);
    let centered = |x: &DenseOperator| x - &id * (x.trace() / nf);

    let mut c1: f64 = 0.0;
    for x in a.basis() {
        let xc = centered(x);
        for y in b.basis() {
            c1 = c1.max((&xc * centered(y)).trace().norm());
        }
    }
    let c2 = quasiorth_deviation(a, b);

    let phi_a = conditional_expectation(a)?;
    let phi_b = conditional_expectation(b)?;
    let mut c3: f64 = 0.0;
    for (phi, other) in [(&phi_a, b), (&phi_b, a)] {
        for y in other.basis() {
            c3 = c3.max(max_abs_diff(&phi.apply(y)?, &(&id * (y.trace() / nf))));
        }
    }

    // superoperator columns are Φ(E_jk), so this compares on every matrix unit
    let vec_id = crate::algebra::linalg::vec_of(&id);
    let depolarize = (&vec_id * vec_id.transpose()).unscale(nf);
    let sa = phi_a.superoperator();
    let sb = phi_b.superoperator();
    let c4 = max_abs_diff(&(&sa * &sb), &depolarize).max(max_abs_diff(&(&sb * &sa), &depolarize));

    let deviations = [c1, c2, c3, c4];
    let passed = deviations.map(|d| d <= tol);
    let consistent = passed.iter().all(|&p| p == passed[0]);
    Ok(ConditionReport { deviations, passed, tolerance: tol, consistent })
}

pub fn kraus_mutually_commuting(phi: &Channel) -> bool {
    let ks = phi.kraus();
    ks.iter()
        .enumerate()
        .all(|(i, a)| ks[i + 1..].iter().all(|b| max_abs(&dense::commutator(a, b)) <= COMMUTE_TOL))
}

/// One checked input: what it is and a hash of its canonical JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputRecord {
    pub role: String,
    pub description: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Deviation {
    pub label: String,
    pub deviation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrivacyCertificate {
    pub inputs: Vec<InputRecord>,
    pub rho0: OperatorJson,
    pub max_deviation: f64,
    pub tolerance: f64,
    pub verdict: bool,
    pub deviations: Vec<Deviation>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub sigma_a: Option<OperatorJson>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub notes: Vec<String>,
}

impl PrivacyCertificate {
    pub fn rho0(&self) -> Result<DenseOperator> {
        DenseOperator::try_from(&self.rho0)
    }

    pub fn with_descriptions(mut self, channel: &str, target: &str) -> Self {
        if let Some(c) = self.inputs.get_mut(0) {
            c.description = channel.to_string();
        }
        if let Some(t) = self.inputs.get_mut(1) {
            t.description = target.to_string();
        }
        self
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.notes.push(note.into());
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn hash_json<T: Serialize>(value: &T) -> String {
    sha256_hex(serde_json::to_string(value).expect("serializable").as_bytes())
}

/// Hash of the shape and the little-endian bytes of every entry, row-major.
fn hash_matrix(m: &DenseOperator) -> String {
    let mut h = Sha256::new();
    h.update((m.nrows() as u64).to_le_bytes());
    h.update((m.ncols() as u64).to_le_bytes());
    for r in 0..m.nrows() {
        for c in 0..m.ncols() {
            h.update(m[(r, c)].re.to_le_bytes());
            h.update(m[(r, c)].im.to_le_bytes());
        }
    }
    hex::encode(h.finalize())
}

fn channel_record(phi: &Channel) -> InputRecord {
    InputRecord {
        role: "channel".into(),
        description: format!("channel on N={} with {} Kraus operators", phi.n(), phi.kraus().len()),
        sha256: hash_json(&phi.to_json()),
    }
}

/// Checks `Φ(b) = tr(b) ρ₀` on a basis of `B`, with `ρ₀ = Φ(I)/N`.
pub fn check_privatized_algebra(phi: &Channel, b: &OperatorAlgebra) -> Result<PrivacyCertificate> {
    check_privatized_algebra_with(phi, b, PRIVACY_TOL)
}

pub fn check_privatized_algebra_with(phi: &Channel, b: &OperatorAlgebra, tol: f64) -> Result<PrivacyCertificate> {
    if phi.n() != b.n() {
        return Err(Error::Mismatch(format!("channel acts on N={}, algebra on N={}", phi.n(), b.n())));
    }
    let n = phi.n();
    let rho0 = phi.apply(&identity(n))?.unscale(n as f64);
    let mut deviations = Vec::with_capacity(b.dim());
    for (i, x) in b.basis().iter().enumerate() {
        let dev = max_abs_diff(&phi.apply(x)?, &(&rho0 * x.trace()));
        deviations.push(Deviation { label: format!("basis[{i}]"), deviation: dev });
    }
    let max_deviation = deviations.iter().fold(0.0f64, |m, d| m.max(d.deviation));
    Ok(PrivacyCertificate {
        inputs: vec![
            channel_record(phi),
            InputRecord {
                role: "algebra".into(),
                description: format!("algebra of dimension {} on N={n}", b.dim()),
                sha256: hash_json(&b.to_json()),
            },
        ],
        rho0: OperatorJson::from(&rho0),
        max_deviation,
        tolerance: tol,
        verdict: max_deviation <= tol,
        deviations,
        sigma_a: None,
        seed: None,
        notes: Vec::new(),
    })
}

/// Checks `Φ(V(σ_A ⊗ E_jk)V†) = δ_jk ρ₀` for every matrix unit of `L(B)`,
/// where `ρ₀ = Φ(V(σ_A ⊗ I/dim B)V†)`.
pub fn check_private_subsystem(
    phi: &Channel,
    v: &DenseOperator,
    dim_a: usize,
    dim_b: usize,
    sigma_a: &DenseOperator,
) -> Result<PrivacyCertificate> {
    check_private_subsystem_with(phi, v, dim_a, dim_b, sigma_a, PRIVACY_TOL)
}

pub fn check_private_subsystem_with(
    phi: &Channel,
    v: &DenseOperator,
    dim_a: usize,
    dim_b: usize,
    sigma_a: &DenseOperator,
    tol: f64,
) -> Result<PrivacyCertificate> {
    let m = dim_a * dim_b;
    if v.nrows() != phi.n() || v.ncols() != m {
        return Err(Error::Mismatch(format!(
            "embedding is {}x{}, expected {}x{m}",
            v.nrows(),
            v.ncols(),
            phi.n()
        )));
    }
    let iso = max_abs_diff(&(v.adjoint() * v), &identity(m));
    if iso > 1e-9 {
        return Err(Error::NotIsometry { deviation: iso });
    }
    dense::ensure_dim(sigma_a, dim_a, "sigma_A").map_err(|e| Error::NotState(e.to_string()))?;
    dense::validate_state(sigma_a, 1e-9)?;

    let vd = v.adjoint();
    let embed = |x: &DenseOperator| v * x * &vd;
    let mixed = identity(dim_b).unscale(dim_b as f64);
    let rho0 = phi.apply(&embed(&kron(sigma_a, &mixed)))?;
    let mut deviations = Vec::with_capacity(dim_b * dim_b);
    for j in 0..dim_b {
        for k in 0..dim_b {
            let out = phi.apply(&embed(&kron(sigma_a, &matrix_unit(dim_b, j, k))))?;
            let expected = if j == k { rho0.clone() } else { DenseOperator::zeros(phi.n(), phi.n()) };
            deviations.push(Deviation { label: format!("E[{j},{k}]"), deviation: max_abs_diff(&out, &expected) });
        }
    }
    let max_deviation = deviations.iter().fold(0.0f64, |acc, d| acc.max(d.deviation));
    Ok(PrivacyCertificate {
        inputs: vec![
            channel_record(phi),
            InputRecord {
                role: "subsystem".into(),
                description: format!("embedding of C^{dim_a} ⊗ C^{dim_b} into C^{}", phi.n()),
                sha256: hash_matrix(v),
            },
        ],
        rho0: OperatorJson::from(&rho0),
        max_deviation,
        tolerance: tol,
        verdict: max_deviation <= tol,
        deviations,
        sigma_a: Some(OperatorJson::from(sigma_a)),
        seed: None,
        notes: Vec::new(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::structure_type;

    fn pauli_alg(list: &str, n: usize) -> OperatorAlgebra {
        let gens = crate::group::parse_class_list(list, 2).unwrap();
        OperatorAlgebra::from_pauli_classes(2, n, &gens).unwrap()
    }

    fn phase_flip() -> Channel {
        conditional_expectation(&OperatorAlgebra::diagonal(4)).unwrap()
    }

    #[test]
    fn quasiorthogonality_examples() {
        assert!(is_quasiorthogonal(&OperatorAlgebra::full(4), &OperatorAlgebra::scalars(4)));
        let d4 = OperatorAlgebra::diagonal(4);
        let b = pauli_alg("IX,YY", 2);
        assert!(is_quasiorthogonal(&d4, &b) && is_quasiorthogonal(&b, &d4));
        assert!(!is_quasiorthogonal(&d4, &d4));
        // a = b = e11: tr(ab)/4 = 1/4, but (1/4)(1/4) = 1/16
        let e11 = matrix_unit(4, 0, 0);
        assert!(((e11.trace() / 4.0).re - 0.25).abs() < 1e-15);
        assert!((quasiorth_deviation(&d4, &d4) - (0.25 - 0.0625)).abs() < 1e-12);
    }

    #[test]
    fn condition_suite_examples() {
        let r = quasiorth_condition_suite(&OperatorAlgebra::full(2), &OperatorAlgebra::scalars(2)).unwrap();
        assert!(r.all_pass() && r.consistent);
        let r = quasiorth_condition_suite(&OperatorAlgebra::diagonal(4), &pauli_alg("IX,YY", 2)).unwrap();
        assert!(r.all_pass(), "{:?}", r.deviations);
        let first = pauli_alg("XI,ZI", 2);
        let r = quasiorth_condition_suite(&first, &first).unwrap();
        assert!(r.all_fail() && r.consistent, "{:?}", r.deviations);
    }

    #[test]
    fn privatized_algebra_examples() {
        let b = pauli_alg("IX,YY", 2);
        let cert = check_privatized_algebra(&phase_flip(), &b).unwrap();
        assert!(cert.verdict);
        assert!(max_abs_diff(&cert.rho0().unwrap(), &identity(4).unscale(4.0)) < 1e-12);
        let cert = check_privatized_algebra(&Channel::identity(4), &b).unwrap();
        assert!(!cert.verdict);
        assert_eq!(cert.deviations.len(), 4);
        assert_eq!(cert.inputs[0].sha256.len(), 64);
    }

    #[test]
    fn private_subsystem_examples() {
        let b = pauli_alg("IX,YY", 2);
        let dec = structure_type(&b).unwrap();
        let v = dec.unitary().adjoint();
        let sigma = identity(2).unscale(2.0);
        let cert = check_private_subsystem(&phase_flip(), &v, 2, 2, &sigma).unwrap();
        assert!(cert.verdict, "{}", cert.max_deviation);

        // dim B = 1 is always private
        let col = v.columns(0, 2).into_owned();
        let cert = check_private_subsystem(&phase_flip(), &col, 2, 1, &sigma).unwrap();
        assert!(cert.verdict);

        let pure = matrix_unit(2, 0, 0);
        let cert = check_private_subsystem(&phase_flip(), &v, 2, 2, &pure).unwrap();
        assert!(cert.max_deviation.is_finite());

        assert!(matches!(
            check_private_subsystem(&phase_flip(), &v.scale(2.0), 2, 2, &sigma),
            Err(Error::NotIsometry { .. })
        ));
        assert!(matches!(
            check_private_subsystem(&phase_flip(), &v, 2, 2, &identity(2)),
            Err(Error::NotState(_))
        ));
    }

    #[test]
    fn kraus_commutation_examples() {
        assert!(kraus_mutually_commuting(&phase_flip()));
        assert!(!kraus_mutually_commuting(&Channel::depolarizing_qubit()));
    }
}
