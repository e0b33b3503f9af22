use nalgebra::DVector;
use num_complex::Complex64;

use super::linalg::{fro, kernel_from_gram, unvec};
use super::structure::structure_type;
use super::OperatorAlgebra;
use crate::dense::{commutator, hs_inner, identity, kron, matrix_unit, DenseOperator};
use crate::error::{Error, Result};

/// Largest `N` for which the commutant is found from the `N² × N²` commutator map.
pub const DENSE_COMMUTANT_MAX_N: usize = 16;

/// All `x` with `xa = ax` for every `a` in the algebra.
///
/// Small sizes solve the commutator kernel directly; larger ones read the
/// commutant off the block decomposition.
pub fn commutant(a: &OperatorAlgebra) -> Result<OperatorAlgebra> {
    if a.n() <= DENSE_COMMUTANT_MAX_N {
        commutant_dense(a)
    } else {
        commutant_from_structure(a)
    }
}

/// Kernel of `x ↦ ([b, x])_b` over the commutation set.
pub fn commutant_dense(a: &OperatorAlgebra) -> Result<OperatorAlgebra> {
    let n = a.n();
    if n > DENSE_COMMUTANT_MAX_N {
        return Err(Error::SizeBound(format!(
            "dense commutant limited to N <= {DENSE_COMMUTANT_MAX_N}, got {n}"
        )));
    }
    let set = a.commutation_set();
    let id = identity(n);
    // Σ C_b† C_b with C_b = I ⊗ b − bᵀ ⊗ I acting on column-stacked x
    let mut s1 = DenseOperator::zeros(n, n);
    let mut s2 = DenseOperator::zeros(n, n);
    let mut cross = DenseOperator::zeros(n * n, n * n);
    for b in &set {
        let bt = b.transpose();
        let bc = b.conjugate();
        s1 += b.adjoint() * b;
        s2 += &bc * &bt;
        cross += kron(&bt, &b.adjoint()) + kron(&bc, b);
    }
    let q = kron(&id, &s1) + kron(&s2, &id) - cross;
    let residual = |v: &DVector<Complex64>| {
        let x = unvec(v, n);
        set.iter().map(|b| fro(&commutator(b, &x)).powi(2)).sum::<f64>().sqrt()
    };
    let kernel = kernel_from_gram(&q, commutator_norm_bound(&set), residual, "commutant")?;
    let basis = kernel.iter().map(|v| unvec(v, n)).collect();
    Ok(OperatorAlgebra::from_orthonormal(n, basis, None))
}

/// `U† (⊕ M_k ⊗ I_q) U` from the block decomposition.
fn commutant_from_structure(a: &OperatorAlgebra) -> Result<OperatorAlgebra> {
    let dec = structure_type(a)?;
    let n = a.n();
    let u = dec.unitary();
    let ud = u.adjoint();
    let mut basis = Vec::new();
    for block in dec.blocks() {
        let id_q = identity(block.q).unscale((block.q as f64).sqrt());
        for r in 0..block.k {
            for c in 0..block.k {
                let local = kron(&matrix_unit(block.k, r, c), &id_q);
                let mut full = DenseOperator::zeros(n, n);
                full.view_mut((block.offset, block.offset), (local.nrows(), local.ncols()))
                    .copy_from(&local);
                basis.push(&ud * full * u);
            }
        }
    }
    Ok(OperatorAlgebra::from_orthonormal(n, basis, None))
}

/// `Σ_g ‖[g, ·]‖² ≤ 4 Σ_g ‖g‖²`.
fn commutator_norm_bound(set: &[DenseOperator]) -> f64 {
    4.0 * set.iter().map(|g| fro(g).powi(2)).sum::<f64>()
}

/// Orthonormal basis of the center `A ∩ A′`.
pub fn center(a: &OperatorAlgebra) -> Result<Vec<DenseOperator>> {
    let basis = a.basis();
    let m = basis.len();
    let set = a.commutation_set();
    let mut gram = DenseOperator::zeros(m, m);
    for g in &set {
        let comms: Vec<DenseOperator> = basis.iter().map(|b| commutator(g, b)).collect();
        for i in 0..m {
            for j in i..m {
                let v = hs_inner(&comms[i], &comms[j]);
                gram[(i, j)] += v;
                if i != j {
                    gram[(j, i)] += v.conj();
                }
            }
        }
    }
    let combine = |c: &DVector<Complex64>| {
        let mut z = DenseOperator::zeros(a.n(), a.n());
        for (b, ci) in basis.iter().zip(c.iter()) {
            z += b * *ci;
        }
        z
    };
    let residual = |c: &DVector<Complex64>| {
        let z = combine(c);
        set.iter().map(|g| fro(&commutator(g, &z)).powi(2)).sum::<f64>().sqrt()
    };
    // the basis is orthonormal, so coefficient space is isometric to the span
    let kernel = kernel_from_gram(&gram, commutator_norm_bound(&set), residual, "center")?;
    Ok(kernel.iter().map(combine).collect())
}
