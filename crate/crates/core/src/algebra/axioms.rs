//! Numerical checks of the defining properties of a conditional expectation.

use rand::Rng;
use serde::Serialize;

use super::channel::Channel;
use super::linalg::fro;
use super::OperatorAlgebra;
use crate::dense::{hs_inner, max_abs_diff, DenseOperator};
use crate::error::Result;
use num_complex::Complex64;

/// Largest deviation seen for each property.
#[derive(Debug, Clone, Serialize)]
pub struct AxiomReport {
    /// `Φ(a) = a` on the basis.
    pub fixes_algebra: f64,
    /// `Φ(a₁ x a₂) = a₁ Φ(x) a₂` on random samples.
    pub bimodule: f64,
    /// Most negative eigenvalue of `Φ(x)` for random positive `x`, as a positive number.
    pub positivity: f64,
    /// `|tr Φ(x) − tr x|` on random samples.
    pub trace: f64,
    /// Entrywise distance between the Choi matrices of `Φ∘Φ` and `Φ`.
    pub idempotence: f64,
}

impl AxiomReport {
    pub fn max(&self) -> f64 {
        [self.fixes_algebra, self.bimodule, self.positivity, self.trace, self.idempotence]
            .into_iter()
            .fold(0.0, f64::max)
    }
}

pub fn random_matrix<R: Rng + ?Sized>(n: usize, rng: &mut R) -> DenseOperator {
    DenseOperator::from_fn(n, n, |_, _| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
}

/// Random density operator `g g† / tr(g g†)`.
pub fn random_state<R: Rng + ?Sized>(n: usize, rng: &mut R) -> DenseOperator {
    let g = random_matrix(n, rng);
    let p = &g * g.adjoint();
    let t = p.trace().re;
    p.unscale(t)
}

pub fn check_conditional_expectation<R: Rng + ?Sized>(
    a: &OperatorAlgebra,
    phi: &Channel,
    samples: usize,
    rng: &mut R,
) -> Result<AxiomReport> {
    let n = a.n();
    let mut fixes: f64 = 0.0;
    for b in a.basis() {
        fixes = fixes.max(max_abs_diff(&phi.apply(b)?, b));
    }
    let (mut bimodule, mut positivity, mut trace): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for _ in 0..samples {
        let a1 = a.random_element(rng);
        let a2 = a.random_element(rng);
        let x = random_matrix(n, rng);
        let lhs = phi.apply(&(&a1 * &x * &a2))?;
        let rhs = &a1 * phi.apply(&x)? * &a2;
        let scale = fro(&a1) * fro(&a2) * fro(&x);
        bimodule = bimodule.max(max_abs_diff(&lhs, &rhs) / scale.max(1.0));
        let y = phi.apply(&x)?;
        trace = trace.max((y.trace() - x.trace()).norm());
        let rho = random_state(n, rng);
        let out = phi.apply(&rho)?;
        let herm = (&out + out.adjoint()).scale(0.5);
        let min = herm.symmetric_eigenvalues().iter().cloned().fold(f64::INFINITY, f64::min);
        positivity = positivity.max((-min).max(0.0));
        positivity = positivity.max(max_abs_diff(&out, &out.adjoint()));
    }
    let idempotence = max_abs_diff(&phi.compose_choi(phi)?, &phi.choi());
    Ok(AxiomReport { fixes_algebra: fixes, bimodule, positivity, trace, idempotence })
}

/// How the Kraus set sits relative to the commutant: largest residual of a
/// Kraus operator outside `A′`, largest Hilbert–Schmidt overlap between
/// distinct Kraus operators, and whether their number equals `dim A′`.
#[derive(Debug, Clone, Serialize)]
pub struct KrausReport {
    pub outside_commutant: f64,
    pub overlap: f64,
    pub count: usize,
    pub commutant_dim: usize,
}

pub fn kraus_characterization(phi: &Channel, commutant: &OperatorAlgebra) -> KrausReport {
    let mut outside: f64 = 0.0;
    for k in phi.kraus() {
        outside = outside.max(commutant.residual(k));
    }
    let ks = phi.kraus();
    let mut overlap: f64 = 0.0;
    for i in 0..ks.len() {
        for j in i + 1..ks.len() {
            overlap = overlap.max(hs_inner(&ks[i], &ks[j]).norm());
        }
    }
    KrausReport { outside_commutant: outside, overlap, count: ks.len(), commutant_dim: commutant.dim() }
}
