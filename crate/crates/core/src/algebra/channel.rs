use serde::{Deserialize, Serialize};

use super::structure::{structure_type, Decomposition};
use super::OperatorAlgebra;
use crate::dense::{self, identity, kron, matrix_unit, max_abs_diff, DenseOperator, OperatorJson};
use crate::error::{Error, Result};

/// Trace-preservation tolerance on `Σ K†K − I`.
pub const TP_TOL: f64 = 1e-9;

/// Entrywise tolerance for Choi matrix comparison.
pub const CHOI_TOL: f64 = 1e-8;

/// Completely positive trace-preserving map in Kraus form.
#[derive(Debug, Clone)]
pub struct Channel {
    n: usize,
    kraus: Vec<DenseOperator>,
}

impl Channel {
    pub fn new(kraus: Vec<DenseOperator>) -> Result<Self> {
        let n = kraus
            .first()
            .ok_or_else(|| Error::Invalid("a channel needs at least one Kraus operator".into()))?
            .nrows();
        for (i, k) in kraus.iter().enumerate() {
            dense::ensure_dim(k, n, &format!("Kraus operator {i}"))?;
            if k.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                return Err(Error::Invalid(format!("Kraus operator {i} has non-finite entries")));
            }
        }
        let ch = Channel { n, kraus };
        let dev = ch.tp_deviation();
        if dev > TP_TOL {
            return Err(Error::NotTracePreserving { deviation: dev });
        }
        Ok(ch)
    }

    pub fn identity(n: usize) -> Self {
        Channel { n, kraus: vec![identity(n)] }
    }

    /// `ρ ↦ Σ p_i U_i ρ U_i†`.
    pub fn random_unitary(terms: &[(f64, DenseOperator)]) -> Result<Self> {
        if terms.iter().any(|(p, _)| *p < 0.0) {
            return Err(Error::Invalid("negative probability".into()));
        }
        Self::new(terms.iter().map(|(p, u)| u.scale(p.sqrt())).collect())
    }

    /// `ρ ↦ I/2` written with Kraus operators `{I, X, Y, Z}/2`.
    pub fn depolarizing_qubit() -> Self {
        let ops = ["I", "X", "Y", "Z"]
            .map(|s| (0.25, crate::pauli::PauliClass::parse(s, 2).expect("literal").to_dense()));
        Self::random_unitary(&ops).expect("valid")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn kraus(&self) -> &[DenseOperator] {
        &self.kraus
    }

    pub fn tp_deviation(&self) -> f64 {
        let mut s = DenseOperator::zeros(self.n, self.n);
        for k in &self.kraus {
            s += k.adjoint() * k;
        }
        max_abs_diff(&s, &identity(self.n))
    }

    pub fn apply(&self, rho: &DenseOperator) -> Result<DenseOperator> {
        dense::ensure_dim(rho, self.n, "input")?;
        let mut out = DenseOperator::zeros(self.n, self.n);
        for k in &self.kraus {
            out += k * rho * k.adjoint();
        }
        Ok(out)
    }

    /// `S` with `vec(Φ(ρ)) = S vec(ρ)` for column-stacked `vec`.
    pub fn superoperator(&self) -> DenseOperator {
        let n2 = self.n * self.n;
        let mut s = DenseOperator::zeros(n2, n2);
        for k in &self.kraus {
            s += kron(&k.conjugate(), k);
        }
        s
    }

    /// `Σ |K⟩⟩⟨⟨K|`.
    pub fn choi(&self) -> DenseOperator {
        choi_from_superoperator(&self.superoperator(), self.n)
    }

    /// `self ∘ first` with Kraus products.
    pub fn compose(&self, first: &Channel) -> Result<Channel> {
        if self.n != first.n {
            return Err(Error::Mismatch(format!("cannot compose N={} with N={}", self.n, first.n)));
        }
        let kraus = self
            .kraus
            .iter()
            .flat_map(|a| first.kraus.iter().map(move |b| a * b))
            .collect();
        Ok(Channel { n: self.n, kraus })
    }

    /// Choi matrix of `self ∘ first`, via superoperators.
    pub fn compose_choi(&self, first: &Channel) -> Result<DenseOperator> {
        if self.n != first.n {
            return Err(Error::Mismatch(format!("cannot compose N={} with N={}", self.n, first.n)));
        }
        Ok(choi_from_superoperator(&(self.superoperator() * first.superoperator()), self.n))
    }

    pub fn to_json(&self) -> ChannelJson {
        ChannelJson { kraus: self.kraus.iter().map(OperatorJson::from).collect() }
    }

    pub fn from_json(j: &ChannelJson) -> Result<Self> {
        Self::new(j.kraus.iter().map(DenseOperator::try_from).collect::<Result<Vec<_>>>()?)
    }
}

/// Reorders `S[(k N + i), (l N + j)]` into `J[(i + N j), (k + N l)]`.
pub fn choi_from_superoperator(s: &DenseOperator, n: usize) -> DenseOperator {
    let mut j = DenseOperator::zeros(n * n, n * n);
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                for d in 0..n {
                    j[(a + n * b, c + n * d)] = s[(c * n + a, d * n + b)];
                }
            }
        }
    }
    j
}

/// Equal as maps: Choi matrices agree entrywise within `1e-8`.
pub fn choi_equal(a: &Channel, b: &Channel) -> bool {
    a.n == b.n && max_abs_diff(&a.choi(), &b.choi()) <= CHOI_TOL
}

/// Trace-preserving conditional expectation onto `a`: a normalized partial
/// trace over each multiplicity factor of the block decomposition.
pub fn conditional_expectation(a: &OperatorAlgebra) -> Result<Channel> {
    let dec = structure_type(a)?;
    Ok(conditional_expectation_from(&dec))
}

pub fn conditional_expectation_from(dec: &Decomposition) -> Channel {
    let u = dec.unitary();
    let n = u.nrows();
    let mut kraus = Vec::new();
    for block in dec.blocks() {
        let width = block.k * block.q;
        let rows = u.rows(block.offset, width).into_owned();
        let rows_adj = rows.adjoint();
        let norm = (block.k as f64).sqrt();
        for r in 0..block.k {
            for c in 0..block.k {
                let local = kron(&matrix_unit(block.k, r, c), &identity(block.q)).unscale(norm);
                kraus.push(&rows_adj * local * &rows);
            }
        }
    }
    Channel { n, kraus }
}

/// JSON form `{"kraus": [operator, ...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelJson {
    pub kraus: Vec<OperatorJson>,
}
