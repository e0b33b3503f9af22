//! Eigen-decomposition, clustering and kernel helpers with explicit
//! ambiguity detection.

use nalgebra::DVector;
use num_complex::Complex64;

use crate::dense::{hs_inner, DenseOperator};
use crate::error::{Error, Result};

/// Relative threshold on singular values for kernel decisions.
pub const KERNEL_REL_TOL: f64 = 1e-9;

/// Relative gap separating eigenvalue clusters.
pub const CLUSTER_REL_TOL: f64 = 1e-7;

/// Eigen-decomposition of the Hermitian part of `m`, eigenvalues ascending.
pub fn eigh(m: &DenseOperator) -> (Vec<f64>, DenseOperator) {
    let h = (m + m.adjoint()).scale(0.5);
    let n = h.nrows();
    let e = h.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| e.eigenvalues[a].total_cmp(&e.eigenvalues[b]));
    let values = order.iter().map(|&i| e.eigenvalues[i]).collect();
    let mut vectors = DenseOperator::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &e.eigenvectors.column(src));
    }
    (values, vectors)
}

/// Groups ascending `values` into runs separated by gaps above `tol`.
///
/// Gaps within a factor 10 of `tol` are reported as ambiguous.
pub fn cluster(values: &[f64], tol: f64) -> Result<Vec<std::ops::Range<usize>>> {
    let mut runs = Vec::new();
    let mut start = 0;
    for i in 1..values.len() {
        let gap = values[i] - values[i - 1];
        if gap > 10.0 * tol {
            runs.push(start..i);
            start = i;
        } else if gap > tol / 10.0 {
            return Err(Error::Ambiguous(format!(
                "eigenvalue gap {gap:e} is within a factor 10 of the cluster tolerance {tol:e}"
            )));
        }
    }
    if !values.is_empty() {
        runs.push(start..values.len());
    }
    Ok(runs)
}

/// Kernel of a linear map given its Gram matrix `M†M` and a function
/// evaluating `‖M v‖` directly.
///
/// The Gram spectrum only nominates candidates; the decision uses the direct
/// residual, which does not lose precision to squaring. `norm_sq` is an upper
/// bound on `‖M‖²` from the inputs, so a map that vanishes up to rounding is
/// not judged against its own rounding noise.
pub fn kernel_from_gram<F>(
    gram: &DenseOperator,
    norm_sq: f64,
    residual: F,
    what: &str,
) -> Result<Vec<DVector<Complex64>>>
where
    F: Fn(&DVector<Complex64>) -> f64,
{
    let (values, vectors) = eigh(gram);
    let lmax = values.last().copied().unwrap_or(0.0).max(0.0);
    let scale = lmax.max(norm_sq);
    if scale <= f64::MIN_POSITIVE {
        return Ok((0..vectors.ncols()).map(|j| vectors.column(j).into_owned()).collect());
    }
    let threshold = KERNEL_REL_TOL * scale.sqrt();
    let mut kernel = Vec::new();
    for (j, &lambda) in values.iter().enumerate() {
        if lambda > 1e-6 * scale {
            break;
        }
        let v = vectors.column(j).into_owned();
        let s = residual(&v);
        if s < threshold / 10.0 {
            kernel.push(v);
        } else if s <= threshold * 10.0 {
            return Err(Error::Ambiguous(format!(
                "{what}: singular value {s:e} is within a factor 10 of the threshold {threshold:e}"
            )));
        }
    }
    Ok(kernel)
}

/// Frobenius norm.
pub fn fro(m: &DenseOperator) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Column-stacked `vec(m)`.
pub fn vec_of(m: &DenseOperator) -> DVector<Complex64> {
    DVector::from_column_slice(m.as_slice())
}

/// Inverse of [`vec_of`].
pub fn unvec(v: &DVector<Complex64>, n: usize) -> DenseOperator {
    DenseOperator::from_column_slice(n, n, v.as_slice())
}

/// Adds the component of `candidate` orthogonal to `basis` if it is larger
/// than `rel_tol · scale`, where `scale` bounds the candidate's size from its
/// origin (a product that cancels to rounding noise must not count). Returns
/// whether the basis grew.
pub fn orthonormal_extend(basis: &mut Vec<DenseOperator>, candidate: &DenseOperator, scale: f64, rel_tol: f64) -> bool {
    let norm0 = fro(candidate);
    if norm0 == 0.0 {
        return false;
    }
    let mut r = candidate.clone();
    for _ in 0..2 {
        for b in basis.iter() {
            let c = hs_inner(b, &r);
            r -= b * c;
        }
    }
    let norm = fro(&r);
    if norm <= rel_tol * scale.max(norm0) {
        return false;
    }
    basis.push(r.unscale(norm));
    true
}

/// Orthonormal columns spanning the range of `m` restricted to the listed columns.
pub fn columns(m: &DenseOperator, range: std::ops::Range<usize>) -> DenseOperator {
    m.columns(range.start, range.len()).into_owned()
}
