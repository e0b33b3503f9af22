use num_complex::Complex64;

use super::linalg::{cluster, columns, eigh, CLUSTER_REL_TOL};
use crate::dense::{commutator, identity, max_abs, DenseOperator};
use crate::error::{Error, Result};

const COMMUTE_TOL: f64 = 1e-9;
const DIAGONAL_TOL: f64 = 1e-8;

/// Unitary `U` with `U op U†` diagonal for every (commuting, normal) input.
///
/// Joint eigenvectors are ordered by the position of their largest component
/// and phased so that component is real and positive; diagonal inputs give a
/// permutation.
pub fn simultaneous_diagonalize(ops: &[DenseOperator]) -> Result<DenseOperator> {
    let first = ops.first().ok_or_else(|| Error::Invalid("no operators to diagonalize".into()))?;
    let n = first.nrows();
    for (i, op) in ops.iter().enumerate() {
        crate::dense::ensure_dim(op, n, &format!("operator {i}"))?;
    }
    let scales: Vec<f64> = ops.iter().map(|op| max_abs(op).max(1.0)).collect();
    for (i, a) in ops.iter().enumerate() {
        let ad = a.adjoint();
        let dev = max_abs(&(a * &ad - &ad * a)) / (scales[i] * scales[i]);
        if dev > COMMUTE_TOL {
            return Err(Error::NotCommuting { deviation: dev });
        }
        for (j, b) in ops.iter().enumerate().skip(i + 1) {
            let dev = max_abs(&commutator(a, b)) / (scales[i] * scales[j]);
            if dev > COMMUTE_TOL {
                return Err(Error::NotCommuting { deviation: dev });
            }
        }
    }

    let mut groups = vec![identity(n)];
    for (op, &scale) in ops.iter().zip(&scales) {
        let mut next = Vec::with_capacity(groups.len());
        for s in groups {
            if s.ncols() == 1 {
                next.push(s);
            } else {
                next.extend(split(&s, op, scale)?);
            }
        }
        groups = next;
    }

    let mut vectors: Vec<Vec<Complex64>> = Vec::with_capacity(n);
    for g in &groups {
        for c in 0..g.ncols() {
            vectors.push(g.column(c).iter().copied().collect());
        }
    }
    let lead = |v: &[Complex64]| {
        let max = v.iter().fold(0.0f64, |m, z| m.max(z.norm()));
        v.iter().position(|z| z.norm() >= max - 1e-12).unwrap_or(0)
    };
    vectors.sort_by_key(|v| lead(v));
    let mut w = DenseOperator::zeros(n, n);
    for (c, v) in vectors.iter().enumerate() {
        let p = v[lead(v)];
        let phase = p / p.norm();
        for (r, z) in v.iter().enumerate() {
            w[(r, c)] = z / phase;
        }
    }
    let u = w.adjoint();
    for (op, &scale) in ops.iter().zip(&scales) {
        let d = &u * op * &w;
        let off = (0..n)
            .flat_map(|r| (0..n).map(move |c| (r, c)))
            .filter(|(r, c)| r != c)
            .fold(0.0f64, |m, (r, c)| m.max(d[(r, c)].norm()));
        if off > DIAGONAL_TOL * scale {
            return Err(Error::CheckFailed(format!("conjugated operator has off-diagonal entry {off:e}")));
        }
    }
    Ok(u)
}

/// Splits the invariant subspace spanned by the columns of `s` into
/// eigenspaces of `op`.
fn split(s: &DenseOperator, op: &DenseOperator, scale: f64) -> Result<Vec<DenseOperator>> {
    let r = s.adjoint() * op * s;
    let m = r.nrows();
    let tol = CLUSTER_REL_TOL * scale;
    let off = (0..m)
        .flat_map(|i| (0..m).map(move |j| (i, j)))
        .filter(|(i, j)| i != j)
        .fold(0.0f64, |acc, (i, j)| acc.max(r[(i, j)].norm()));
    if off <= 1e-12 * scale {
        // keep the given vectors, grouped by value in order of appearance
        let mut reps: Vec<(Complex64, Vec<usize>)> = Vec::new();
        for i in 0..m {
            let v = r[(i, i)];
            match reps.iter_mut().find(|(rep, _)| (rep - v).norm() <= tol) {
                Some((_, idx)) => idx.push(i),
                None => reps.push((v, vec![i])),
            }
        }
        return Ok(reps
            .into_iter()
            .map(|(_, idx)| {
                let mut out = DenseOperator::zeros(s.nrows(), idx.len());
                for (c, &i) in idx.iter().enumerate() {
                    out.set_column(c, &s.column(i));
                }
                out
            })
            .collect());
    }
    let herm = (&r + r.adjoint()).scale(0.5);
    let anti = (&r - r.adjoint()) * Complex64::new(0.0, -0.5);
    let mut out = Vec::new();
    let (vals, vecs) = eigh(&herm);
    for run in cluster(&vals, tol)? {
        let v1 = columns(&vecs, run);
        let (vals2, vecs2) = eigh(&(v1.adjoint() * &anti * &v1));
        for run2 in cluster(&vals2, tol)? {
            out.push(s * &v1 * columns(&vecs2, run2));
        }
    }
    Ok(out)
}
