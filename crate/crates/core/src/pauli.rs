//! Exact arithmetic on generalized Pauli operators.
//!
//! An element is stored as `phase · ⊗_k X^{x_k} Z^{z_k}` where the phase is a
//! power of `exp(iπ/d)`. The single-site matrices are the clock and shift
//!
//! ```text
//! X|j> = |j - 1 mod d>,    Z|j> = ω^j |j>,    ω = exp(2πi/d),
//! ```
//!
//! which satisfy `XZ = ω ZX`. For `d = 2` these are the usual Pauli matrices
//! and `Y = i·XZ`.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::dense::{root_of_unity, DenseOperator, ZERO};
use crate::error::{Error, Result};

/// Exponent of `exp(iπ/d)`, kept modulo `2d`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PhaseExponent {
    value: u32,
    d: u32,
}

impl PhaseExponent {
    pub fn new(value: i64, d: u32) -> Self {
        let m = 2 * d as i64;
        PhaseExponent { value: value.rem_euclid(m) as u32, d }
    }

    pub fn one(d: u32) -> Self {
        PhaseExponent { value: 0, d }
    }

    /// `ω^k` with `ω = exp(2πi/d)`.
    pub fn omega_power(k: i64, d: u32) -> Self {
        Self::new(2 * k, d)
    }

    pub fn value(self) -> u32 {
        self.value
    }

    pub fn d(self) -> u32 {
        self.d
    }

    pub fn is_one(self) -> bool {
        self.value == 0
    }

    pub fn inverse(self) -> Self {
        Self::new(-(self.value as i64), self.d)
    }

    pub fn add(self, other: Self) -> Self {
        debug_assert_eq!(self.d, other.d);
        Self::new(self.value as i64 + other.value as i64, self.d)
    }

    /// The exponent of `ω` when the phase is an integer power of it.
    pub fn as_omega_power(self) -> Option<u32> {
        self.value.is_multiple_of(2).then_some(self.value / 2)
    }

    pub fn to_complex(self) -> Complex64 {
        root_of_unity(self.value as i64, 2 * self.d as i64)
    }
}

/// A phased tensor product of generalized Pauli operators.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PauliElement {
    d: u32,
    phase: u32,
    x: Vec<u32>,
    z: Vec<u32>,
}

fn check_d(d: u32) -> Result<()> {
    if !(2..=255).contains(&d) {
        return Err(Error::Invalid(format!("qudit dimension {d} outside 2..=255")));
    }
    Ok(())
}

fn mismatch(a: &PauliElement, b: &PauliElement) -> Error {
    Error::Mismatch(format!(
        "(d={}, n={}) vs (d={}, n={})",
        a.d,
        a.n(),
        b.d,
        b.n()
    ))
}

impl PauliElement {
    pub fn new(d: u32, phase: PhaseExponent, x: Vec<u32>, z: Vec<u32>) -> Result<Self> {
        check_d(d)?;
        if phase.d() != d {
            return Err(Error::Mismatch(format!("phase for d={} on element with d={d}", phase.d())));
        }
        if x.is_empty() || x.len() != z.len() {
            return Err(Error::Invalid(format!(
                "need equal, non-empty x and z vectors (got {} and {})",
                x.len(),
                z.len()
            )));
        }
        if let Some(v) = x.iter().chain(z.iter()).find(|&&v| v >= d) {
            return Err(Error::Invalid(format!("exponent {v} out of range for d={d}")));
        }
        if d > 2 && phase.value() % 2 == 1 {
            return Err(Error::Invalid(format!(
                "phase exponent {} is not a power of ω for d={d}",
                phase.value()
            )));
        }
        Ok(PauliElement { d, phase: phase.value(), x, z })
    }

    pub fn identity(d: u32, n: usize) -> Self {
        PauliElement { d, phase: 0, x: vec![0; n], z: vec![0; n] }
    }

    /// `X^a Z^b` on one site of an `n`-site register.
    pub fn single(d: u32, n: usize, site: usize, a: u32, b: u32) -> Self {
        let mut p = Self::identity(d, n);
        p.x[site] = a % d;
        p.z[site] = b % d;
        p
    }

    pub fn d(&self) -> u32 {
        self.d
    }

    pub fn n(&self) -> usize {
        self.x.len()
    }

    pub fn phase(&self) -> PhaseExponent {
        PhaseExponent { value: self.phase, d: self.d }
    }

    pub fn x(&self) -> &[u32] {
        &self.x
    }

    pub fn z(&self) -> &[u32] {
        &self.z
    }

    pub fn with_phase(mut self, phase: PhaseExponent) -> Self {
        debug_assert_eq!(phase.d(), self.d);
        self.phase = phase.value();
        self
    }

    pub fn class(&self) -> PauliClass {
        PauliClass { d: self.d, z: self.z.clone(), x: self.x.clone() }
    }

    pub fn is_identity_class(&self) -> bool {
        self.x.iter().chain(self.z.iter()).all(|&v| v == 0)
    }

    /// Diagonal in the computational basis.
    pub fn is_diagonal(&self) -> bool {
        self.x.iter().all(|&v| v == 0)
    }

    pub fn mul(&self, other: &PauliElement) -> Result<PauliElement> {
        if self.d != other.d || self.n() != other.n() {
            return Err(mismatch(self, other));
        }
        let d = self.d;
        // Z^b X^c = ω^{-bc} X^c Z^b on each site.
        let swap: i64 = self
            .z
            .iter()
            .zip(&other.x)
            .map(|(&b, &c)| (b * c) as i64)
            .sum();
        let phase = PhaseExponent::new(self.phase as i64 + other.phase as i64 - 2 * swap, d);
        let x = self.x.iter().zip(&other.x).map(|(a, b)| (a + b) % d).collect();
        let z = self.z.iter().zip(&other.z).map(|(a, b)| (a + b) % d).collect();
        Ok(PauliElement { d, phase: phase.value(), x, z })
    }

    pub fn pow(&self, k: u32) -> PauliElement {
        let mut acc = PauliElement::identity(self.d, self.n());
        for _ in 0..k {
            acc = acc.mul(self).expect("same shape");
        }
        acc
    }

    pub fn adjoint(&self) -> PauliElement {
        // (phase · P)^† = P^{d-1} · conj(phase), and P^d is a phase times I.
        let p = PauliElement { phase: 0, ..self.clone() };
        let inv = p.pow(self.d - 1);
        let pd = inv.mul(&p).expect("same shape");
        // inv·p = c·I, so p^{-1} = c^{-1}·inv
        let phase = PhaseExponent::new(inv.phase as i64 - pd.phase as i64 - self.phase as i64, self.d);
        inv.with_phase(phase)
    }

    /// Commutation phase: `self · other = chi · other · self`.
    pub fn chi(&self, other: &PauliElement) -> Result<PhaseExponent> {
        if self.d != other.d || self.n() != other.n() {
            return Err(mismatch(self, other));
        }
        Ok(symplectic_phase(self.d, &self.x, &self.z, &other.x, &other.z))
    }

    pub fn commutes_with(&self, other: &PauliElement) -> Result<bool> {
        Ok(self.chi(other)?.is_one())
    }

    /// Dense `d^n × d^n` realization.
    pub fn to_dense(&self) -> DenseOperator {
        let d = self.d as usize;
        let n = self.n();
        let dim = d.pow(n as u32);
        let mut m = DenseOperator::from_element(dim, dim, ZERO);
        let two_d = 2 * self.d as i64;
        let mut digits = vec![0usize; n];
        for col in 0..dim {
            let mut row = 0usize;
            // phase exponent in units of exp(iπ/d)
            let mut e = self.phase as i64;
            for k in 0..n {
                let j = digits[k];
                e += 2 * (self.z[k] as i64) * (j as i64);
                let r = (j + d - self.x[k] as usize) % d;
                row = row * d + r;
            }
            m[(row, col)] = root_of_unity(e, two_d);
            // increment the little-endian view of the big-endian digit string
            for k in (0..n).rev() {
                digits[k] += 1;
                if digits[k] < d {
                    break;
                }
                digits[k] = 0;
            }
        }
        m
    }

    /// Parses a Pauli string for qudit dimension `d`.
    pub fn parse(text: &str, d: u32) -> Result<Self> {
        check_d(d)?;
        let text = text.trim();
        let (phase, body) = split_phase(text, d)?;
        if body.is_empty() {
            return Err(Error::Parse(format!("no sites in {text:?}")));
        }
        let mut x = Vec::new();
        let mut z = Vec::new();
        let mut phase = phase as i64;
        if d == 2 {
            for ch in body.chars() {
                let (a, b) = match ch {
                    'I' => (0, 0),
                    'X' => (1, 0),
                    'Z' => (0, 1),
                    'Y' => {
                        // Y = i·XZ
                        phase += 1;
                        (1, 1)
                    }
                    _ => return Err(Error::Parse(format!("bad Pauli letter {ch:?} in {text:?}"))),
                };
                x.push(a);
                z.push(b);
            }
        } else {
            for tok in body.split(':') {
                let (a, b) = parse_site_token(tok, d)?;
                x.push(a);
                z.push(b);
            }
        }
        PauliElement::new(d, PhaseExponent::new(phase, d), x, z)
    }

    /// Parses and checks the site count.
    pub fn parse_sized(text: &str, d: u32, n: usize) -> Result<Self> {
        let p = Self::parse(text, d)?;
        if p.n() != n {
            return Err(Error::Parse(format!("{text:?} has {} sites, expected {n}", p.n())));
        }
        Ok(p)
    }

    /// Canonical string form.
    pub fn format(&self) -> String {
        let mut out = String::new();
        if self.d == 2 {
            let ys = self.x.iter().zip(&self.z).filter(|(a, b)| **a == 1 && **b == 1).count();
            let shown = PhaseExponent::new(self.phase as i64 - ys as i64, 2).value();
            out.push_str(["", "+i", "-", "-i"][shown as usize]);
            for (a, b) in self.x.iter().zip(&self.z) {
                out.push(match (a, b) {
                    (0, 0) => 'I',
                    (1, 0) => 'X',
                    (0, 1) => 'Z',
                    _ => 'Y',
                });
            }
        } else {
            let k = self.phase / 2;
            if k != 0 {
                out.push_str(&format!("w{k}."));
            }
            let sites: Vec<String> =
                self.x.iter().zip(&self.z).map(|(a, b)| format!("X{a}Z{b}")).collect();
            out.push_str(&sites.join(":"));
        }
        out
    }
}

fn split_phase(text: &str, d: u32) -> Result<(u32, &str)> {
    if let Some(rest) = text.strip_prefix('w') {
        let dot = rest
            .find('.')
            .ok_or_else(|| Error::Parse(format!("phase prefix without '.' in {text:?}")))?;
        let k: u32 = rest[..dot]
            .parse()
            .map_err(|_| Error::Parse(format!("bad phase exponent in {text:?}")))?;
        if k >= d {
            return Err(Error::Parse(format!("phase exponent {k} out of range for d={d}")));
        }
        return Ok((2 * k, &rest[dot + 1..]));
    }
    if d == 2 {
        for (prefix, e) in [("+i", 1), ("-i", 3), ("+", 0), ("-", 2)] {
            if let Some(rest) = text.strip_prefix(prefix) {
                return Ok((e, rest));
            }
        }
    }
    Ok((0, text))
}

fn parse_site_token(tok: &str, d: u32) -> Result<(u32, u32)> {
    if tok == "I" {
        return Ok((0, 0));
    }
    let bad = || Error::Parse(format!("bad site token {tok:?} (want X<a>Z<b> or I)"));
    let rest = tok.strip_prefix('X').ok_or_else(bad)?;
    let zpos = rest.find('Z').ok_or_else(bad)?;
    let a: u32 = rest[..zpos].parse().map_err(|_| bad())?;
    let b: u32 = rest[zpos + 1..].parse().map_err(|_| bad())?;
    if a >= d || b >= d {
        return Err(Error::Parse(format!("exponent out of range in {tok:?} for d={d}")));
    }
    Ok((a, b))
}

fn symplectic_phase(d: u32, ax: &[u32], az: &[u32], bx: &[u32], bz: &[u32]) -> PhaseExponent {
    let s: i64 = (0..ax.len())
        .map(|k| ax[k] as i64 * bz[k] as i64 - az[k] as i64 * bx[k] as i64)
        .sum();
    PhaseExponent::omega_power(s, d)
}

impl fmt::Display for PauliElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.format())
    }
}

/// A Pauli operator modulo phase, represented by its phase-free element.
///
/// Classes are ordered lexicographically on `(z, x)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PauliClass {
    d: u32,
    z: Vec<u32>,
    x: Vec<u32>,
}

impl PartialOrd for PauliClass {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for PauliClass {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.d, &self.z, &self.x).cmp(&(other.d, &other.z, &other.x))
    }
}

impl PauliClass {
    pub fn new(d: u32, x: Vec<u32>, z: Vec<u32>) -> Result<Self> {
        Ok(PauliElement::new(d, PhaseExponent::one(d), x, z)?.class())
    }

    pub fn identity(d: u32, n: usize) -> Self {
        PauliClass { d, z: vec![0; n], x: vec![0; n] }
    }

    pub fn parse(text: &str, d: u32) -> Result<Self> {
        Ok(PauliElement::parse(text, d)?.class())
    }

    pub fn d(&self) -> u32 {
        self.d
    }

    pub fn n(&self) -> usize {
        self.x.len()
    }

    pub fn x(&self) -> &[u32] {
        &self.x
    }

    pub fn z(&self) -> &[u32] {
        &self.z
    }

    pub fn is_identity(&self) -> bool {
        self.x.iter().chain(self.z.iter()).all(|&v| v == 0)
    }

    /// Canonical phase-0 representative.
    pub fn element(&self) -> PauliElement {
        PauliElement { d: self.d, phase: 0, x: self.x.clone(), z: self.z.clone() }
    }

    pub fn mul(&self, other: &PauliClass) -> Result<PauliClass> {
        if self.d != other.d || self.n() != other.n() {
            return Err(mismatch(&self.element(), &other.element()));
        }
        let d = self.d;
        Ok(PauliClass {
            d,
            z: self.z.iter().zip(&other.z).map(|(a, b)| (a + b) % d).collect(),
            x: self.x.iter().zip(&other.x).map(|(a, b)| (a + b) % d).collect(),
        })
    }

    pub fn inverse(&self) -> PauliClass {
        let d = self.d;
        PauliClass {
            d,
            z: self.z.iter().map(|v| (d - v) % d).collect(),
            x: self.x.iter().map(|v| (d - v) % d).collect(),
        }
    }

    /// The bicharacter: `a·b = chi(a, b)·b·a` for any representatives.
    pub fn chi(&self, other: &PauliClass) -> Result<PhaseExponent> {
        if self.d != other.d || self.n() != other.n() {
            return Err(mismatch(&self.element(), &other.element()));
        }
        Ok(symplectic_phase(self.d, &self.x, &self.z, &other.x, &other.z))
    }

    pub fn commutes_with(&self, other: &PauliClass) -> Result<bool> {
        Ok(self.chi(other)?.is_one())
    }

    pub fn to_dense(&self) -> DenseOperator {
        self.element().to_dense()
    }

    /// Position in the canonical `(z, x)` order, if it fits in a `u64`.
    pub fn index(&self) -> Option<u64> {
        let d = self.d as u64;
        let mut idx: u64 = 0;
        for &v in self.z.iter().chain(self.x.iter()) {
            idx = idx.checked_mul(d)?.checked_add(v as u64)?;
        }
        Some(idx)
    }

    pub fn from_index(d: u32, n: usize, mut index: u64) -> Self {
        let mut digits = vec![0u32; 2 * n];
        for slot in digits.iter_mut().rev() {
            *slot = (index % d as u64) as u32;
            index /= d as u64;
        }
        let x = digits.split_off(n);
        PauliClass { d, z: digits, x }
    }

    /// Number of classes `d^{2n}`, if it fits in a `u64`.
    pub fn count(d: u32, n: usize) -> Option<u64> {
        (d as u64).checked_pow(2 * n as u32)
    }

    /// Every class in canonical order.
    pub fn all(d: u32, n: usize) -> Result<impl Iterator<Item = PauliClass>> {
        let total = Self::count(d, n)
            .ok_or_else(|| Error::SizeBound(format!("d^(2n) overflows for d={d} n={n}")))?;
        Ok((0..total).map(move |i| PauliClass::from_index(d, n, i)))
    }

    /// Site letters or tokens only; classes carry no phase.
    pub fn format(&self) -> String {
        if self.d == 2 {
            self.x
                .iter()
                .zip(&self.z)
                .map(|(a, b)| match (a, b) {
                    (0, 0) => 'I',
                    (1, 0) => 'X',
                    (0, 1) => 'Z',
                    _ => 'Y',
                })
                .collect()
        } else {
            self.element().format()
        }
    }
}

impl fmt::Display for PauliClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.format())
    }
}

impl FromStr for PauliElement {
    type Err = Error;

    /// Qubit strings only; use [`PauliElement::parse`] for other `d`.
    fn from_str(s: &str) -> Result<Self> {
        PauliElement::parse(s, 2)
    }
}
