//! Unital *-subalgebras of `M_N(C)` held as Hilbert–Schmidt orthonormal bases.

pub mod axioms;
mod channel;
mod commutant;
mod diagonalize;
pub mod linalg;
mod structure;

pub use channel::{choi_equal, CHOI_TOL, TP_TOL, choi_from_superoperator, conditional_expectation, conditional_expectation_from, Channel, ChannelJson};
pub use commutant::{commutant, commutant_dense, center};
pub use diagonalize::simultaneous_diagonalize;
pub use structure::{structure_type, structure_type_seeded, Decomposition, StructureType, DEFAULT_SEED};

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dense::{self, hs_inner, kron, DenseOperator, OperatorJson};
use crate::error::{Error, Result};
use crate::group::PauliSubgroup;
use crate::pauli::PauliClass;
use linalg::{fro, orthonormal_extend};

/// Closure tolerance for products and adjoints.
pub const CLOSURE_TOL: f64 = 1e-9;

/// Relative size below which a new product is taken to lie in the span.
const SPAN_REL_TOL: f64 = 1e-8;

#[derive(Debug, Clone)]
pub struct OperatorAlgebra {
    n: usize,
    basis: Vec<DenseOperator>,
    generators: Option<Vec<DenseOperator>>,
}

fn check_ops(ops: &[DenseOperator]) -> Result<usize> {
    let first = ops.first().ok_or_else(|| Error::Invalid("no operators given".into()))?;
    let n = first.nrows();
    for (i, op) in ops.iter().enumerate() {
        dense::ensure_dim(op, n, &format!("operator {i}"))?;
        if op.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Invalid(format!("operator {i} has non-finite entries")));
        }
    }
    Ok(n)
}

impl OperatorAlgebra {
    /// Smallest unital *-algebra containing `ops`.
    pub fn span_closure(ops: &[DenseOperator]) -> Result<Self> {
        let n = check_ops(ops)?;
        Self::span_closure_sized(n, ops)
    }

    /// As [`span_closure`](Self::span_closure) with the size given, so that an
    /// empty list yields the scalars.
    pub fn span_closure_sized(n: usize, ops: &[DenseOperator]) -> Result<Self> {
        if !ops.is_empty() && check_ops(ops)? != n {
            return Err(Error::Mismatch(format!("operators are not {n}x{n}")));
        }
        let mut gens: Vec<DenseOperator> = Vec::new();
        for op in ops {
            gens.push(op.clone());
            gens.push(op.adjoint());
        }
        let mut basis = Vec::new();
        orthonormal_extend(&mut basis, &dense::identity(n), 0.0, SPAN_REL_TOL);
        for g in &gens {
            orthonormal_extend(&mut basis, g, 0.0, SPAN_REL_TOL);
        }
        // every word in the generators is reached by right multiplication
        let mut next = 0;
        while next < basis.len() {
            let b = basis[next].clone();
            for g in &gens {
                orthonormal_extend(&mut basis, &(&b * g), fro(g), SPAN_REL_TOL);
                if basis.len() > n * n {
                    return Err(Error::NonConvergence(format!(
                        "span exceeded {} dimensions",
                        n * n
                    )));
                }
            }
            next += 1;
        }
        Ok(OperatorAlgebra { n, basis, generators: Some(ops.to_vec()) })
    }

    /// Wraps a spanning set, orthonormalizing it and checking that it is a
    /// unital *-algebra.
    pub fn from_spanning_set(ops: &[DenseOperator]) -> Result<Self> {
        let n = check_ops(ops)?;
        let mut basis = Vec::new();
        for op in ops {
            orthonormal_extend(&mut basis, op, 0.0, SPAN_REL_TOL);
        }
        let alg = OperatorAlgebra { n, basis, generators: None };
        alg.validate(CLOSURE_TOL)?;
        Ok(alg)
    }

    /// Trusted constructor for a basis already known to be orthonormal and closed.
    pub(crate) fn from_orthonormal(n: usize, basis: Vec<DenseOperator>, generators: Option<Vec<DenseOperator>>) -> Self {
        OperatorAlgebra { n, basis, generators }
    }

    /// Span of a Pauli subgroup; the classes are already orthogonal.
    pub fn from_pauli_subgroup(k: &PauliSubgroup) -> Self {
        let size = (k.d() as usize).pow(k.n() as u32);
        let scale = (size as f64).sqrt();
        let basis = k.elements().iter().map(|g| g.to_dense().unscale(scale)).collect();
        let generators = k.generators().iter().map(PauliClass::to_dense).collect();
        OperatorAlgebra { n: size, basis, generators: Some(generators) }
    }

    pub fn from_pauli_classes(d: u32, n: usize, classes: &[PauliClass]) -> Result<Self> {
        Ok(Self::from_pauli_subgroup(&PauliSubgroup::close(d, n, classes)?))
    }

    pub fn scalars(n: usize) -> Self {
        let basis = vec![dense::identity(n).unscale((n as f64).sqrt())];
        OperatorAlgebra { n, basis, generators: Some(Vec::new()) }
    }

    pub fn full(n: usize) -> Self {
        let mut basis = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                basis.push(dense::matrix_unit(n, i, j));
            }
        }
        // e_{i,i+1} and their adjoints generate M_N
        let generators = (0..n.saturating_sub(1)).map(|i| dense::matrix_unit(n, i, i + 1)).collect();
        OperatorAlgebra { n, basis, generators: Some(generators) }
    }

    /// Diagonal matrices `Δ_N`.
    pub fn diagonal(n: usize) -> Self {
        let basis = (0..n).map(|i| dense::matrix_unit(n, i, i)).collect();
        OperatorAlgebra { n, basis, generators: None }
    }

    /// Size of the matrices.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[DenseOperator] {
        &self.basis
    }

    pub fn generators(&self) -> Option<&[DenseOperator]> {
        self.generators.as_deref()
    }

    /// A set whose commutant is the commutant of the algebra.
    pub fn commutation_set(&self) -> Vec<DenseOperator> {
        match &self.generators {
            Some(g) => g.iter().flat_map(|x| [x.clone(), x.adjoint()]).collect(),
            None => self.basis.clone(),
        }
    }

    pub fn coefficients(&self, op: &DenseOperator) -> Vec<Complex64> {
        self.basis.iter().map(|b| hs_inner(b, op)).collect()
    }

    /// Orthogonal projection onto the span.
    pub fn project(&self, op: &DenseOperator) -> DenseOperator {
        let mut out = DenseOperator::zeros(self.n, self.n);
        for b in &self.basis {
            out += b * hs_inner(b, op);
        }
        out
    }

    /// Frobenius distance from `op` to the span.
    pub fn residual(&self, op: &DenseOperator) -> f64 {
        fro(&(op - self.project(op)))
    }

    pub fn contains(&self, op: &DenseOperator, tol: f64) -> bool {
        op.nrows() == self.n && self.residual(op) <= tol * fro(op).max(1.0)
    }

    /// Same span as `other`.
    pub fn same_span(&self, other: &OperatorAlgebra, tol: f64) -> bool {
        self.n == other.n
            && self.dim() == other.dim()
            && other.basis.iter().all(|b| self.contains(b, tol))
    }

    pub fn is_commutative(&self, tol: f64) -> bool {
        let set = self.commutation_set();
        set.iter()
            .enumerate()
            .all(|(i, a)| set[i + 1..].iter().all(|b| dense::max_abs(&dense::commutator(a, b)) <= tol))
    }

    /// Checks identity, adjoint and product closure.
    pub fn validate(&self, tol: f64) -> Result<()> {
        let id = dense::identity(self.n);
        let r = self.residual(&id);
        if r > tol * fro(&id) {
            return Err(Error::Invalid(format!("identity is not in the span (residual {r:e})")));
        }
        for (i, a) in self.basis.iter().enumerate() {
            let r = self.residual(&a.adjoint());
            if r > tol {
                return Err(Error::Invalid(format!("not closed under adjoints (residual {r:e})")));
            }
            for b in &self.basis[i..] {
                for p in [a * b, b * a] {
                    let r = self.residual(&p);
                    if r > tol * fro(&p).max(1.0) {
                        return Err(Error::Invalid(format!("not closed under products (residual {r:e})")));
                    }
                }
            }
        }
        Ok(())
    }

    /// `{v a v† : a ∈ A}` for unitary `v`.
    pub fn conjugate_by(&self, v: &DenseOperator) -> Self {
        let vd = v.adjoint();
        OperatorAlgebra {
            n: v.nrows(),
            basis: self.basis.iter().map(|b| v * b * &vd).collect(),
            generators: self.generators.as_ref().map(|g| g.iter().map(|b| v * b * &vd).collect()),
        }
    }

    /// `I_m ⊗ A`.
    pub fn ampliate(&self, m: usize) -> Self {
        let id = dense::identity(m).unscale((m as f64).sqrt());
        OperatorAlgebra {
            n: m * self.n,
            basis: self.basis.iter().map(|b| kron(&id, b)).collect(),
            generators: self
                .generators
                .as_ref()
                .map(|g| g.iter().map(|b| kron(&dense::identity(m), b)).collect()),
        }
    }

    /// Random element with coefficients uniform in the unit square.
    pub fn random_element<R: Rng + ?Sized>(&self, rng: &mut R) -> DenseOperator {
        let mut out = DenseOperator::zeros(self.n, self.n);
        for b in &self.basis {
            let c = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            out += b * c;
        }
        out
    }

    pub fn random_hermitian<R: Rng + ?Sized>(&self, rng: &mut R) -> DenseOperator {
        let a = self.random_element(rng);
        (&a + a.adjoint()).scale(0.5)
    }

    /// Trace of left multiplication `x ↦ a x` on `M_N`.
    pub fn left_regular_trace(&self, a: &DenseOperator) -> Result<Complex64> {
        dense::ensure_dim(a, self.n, "operator")?;
        let r = self.residual(a);
        if r > CLOSURE_TOL * fro(a).max(1.0) {
            return Err(Error::OutsideAlgebra { residual: r });
        }
        // L_a = I ⊗ a on column-stacked M_N
        let l = kron(&dense::identity(self.n), a);
        Ok(l.trace())
    }

    pub fn to_json(&self) -> AlgebraJson {
        AlgebraJson { basis: self.basis.iter().map(OperatorJson::from).collect() }
    }

    pub fn from_json(j: &AlgebraJson) -> Result<Self> {
        let ops = j
            .basis
            .iter()
            .map(DenseOperator::try_from)
            .collect::<Result<Vec<_>>>()?;
        Self::from_spanning_set(&ops)
    }
}

/// Free-function form of [`OperatorAlgebra::span_closure`].
pub fn span_closure(ops: &[DenseOperator]) -> Result<OperatorAlgebra> {
    OperatorAlgebra::span_closure(ops)
}

pub fn left_regular_trace(a_alg: &OperatorAlgebra, a: &DenseOperator) -> Result<Complex64> {
    a_alg.left_regular_trace(a)
}

/// JSON form `{"basis": [operator, ...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlgebraJson {
    pub basis: Vec<OperatorJson>,
}
