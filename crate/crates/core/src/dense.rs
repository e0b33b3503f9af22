//! Dense complex matrices and the small toolkit shared by the algebra code.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A square complex matrix acting on `C^N`.
pub type DenseOperator = DMatrix<Complex64>;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// `exp(2πi · num / den)`, exact on multiples of a quarter turn.
pub fn root_of_unity(num: i64, den: i64) -> Complex64 {
    let r = num.rem_euclid(den);
    if (4 * r) % den == 0 {
        return match 4 * r / den {
            0 => ONE,
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        };
    }
    let theta = std::f64::consts::TAU * r as f64 / den as f64;
    Complex64::new(theta.cos(), theta.sin())
}

pub fn identity(n: usize) -> DenseOperator {
    DenseOperator::identity(n, n)
}

/// Largest entrywise modulus.
pub fn max_abs(m: &DenseOperator) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

pub fn max_abs_diff(a: &DenseOperator, b: &DenseOperator) -> f64 {
    debug_assert_eq!(a.shape(), b.shape());
    a.iter()
        .zip(b.iter())
        .fold(0.0, |acc, (x, y)| acc.max((x - y).norm()))
}

pub fn commutator(a: &DenseOperator, b: &DenseOperator) -> DenseOperator {
    a * b - b * a
}

/// Hilbert–Schmidt inner product `tr(a† b)`.
pub fn hs_inner(a: &DenseOperator, b: &DenseOperator) -> Complex64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

pub fn kron(a: &DenseOperator, b: &DenseOperator) -> DenseOperator {
    a.kronecker(b)
}

pub fn trace(a: &DenseOperator) -> Complex64 {
    a.trace()
}

pub fn is_square(a: &DenseOperator) -> bool {
    a.nrows() == a.ncols()
}

pub fn ensure_dim(a: &DenseOperator, n: usize, what: &str) -> Result<()> {
    if a.nrows() != n || a.ncols() != n {
        return Err(Error::Mismatch(format!(
            "{what} is {}x{}, expected {n}x{n}",
            a.nrows(),
            a.ncols()
        )));
    }
    Ok(())
}

/// Matrix unit `|row><col|` of size `n`.
pub fn matrix_unit(n: usize, row: usize, col: usize) -> DenseOperator {
    let mut m = DenseOperator::zeros(n, n);
    m[(row, col)] = ONE;
    m
}

/// Deviation of `u` from being unitary, `max |u u† - I|`.
pub fn unitarity_defect(u: &DenseOperator) -> f64 {
    max_abs_diff(&(u * u.adjoint()), &identity(u.nrows()))
}

/// Checks that `rho` is Hermitian, unit trace and positive semidefinite.
pub fn validate_state(rho: &DenseOperator, tol: f64) -> Result<()> {
    if !is_square(rho) {
        return Err(Error::NotState("matrix is not square".into()));
    }
    let herm = max_abs_diff(rho, &rho.adjoint());
    if herm > tol {
        return Err(Error::NotState(format!("not Hermitian (deviation {herm:e})")));
    }
    let tr = rho.trace();
    if (tr - ONE).norm() > tol {
        return Err(Error::NotState(format!("trace is {tr}")));
    }
    let sym = (rho + rho.adjoint()).scale(0.5);
    let min = sym
        .symmetric_eigenvalues()
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min);
    if min < -tol {
        return Err(Error::NotState(format!("negative eigenvalue {min:e}")));
    }
    Ok(())
}

/// JSON form `{"n": N, "re": [[...]], "im": [[...]]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OperatorJson {
    pub n: usize,
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl From<&DenseOperator> for OperatorJson {
    fn from(m: &DenseOperator) -> Self {
        let n = m.nrows();
        let re = (0..n).map(|i| (0..n).map(|j| m[(i, j)].re).collect()).collect();
        let im = (0..n).map(|i| (0..n).map(|j| m[(i, j)].im).collect()).collect();
        OperatorJson { n, re, im }
    }
}

impl TryFrom<&OperatorJson> for DenseOperator {
    type Error = Error;

    fn try_from(j: &OperatorJson) -> Result<Self> {
        let n = j.n;
        let rows_ok = |rows: &Vec<Vec<f64>>| rows.len() == n && rows.iter().all(|r| r.len() == n);
        if !rows_ok(&j.re) || !rows_ok(&j.im) {
            return Err(Error::Parse(format!("operator arrays are not {n}x{n}")));
        }
        let m = DenseOperator::from_fn(n, n, |r, c| Complex64::new(j.re[r][c], j.im[r][c]));
        if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Parse("operator has non-finite entries".into()));
        }
        Ok(m)
    }
}
