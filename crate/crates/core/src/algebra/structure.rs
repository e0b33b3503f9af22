//! Block decomposition `U A U† = ⊕ I_{k_i} ⊗ M_{q_i}`.

use std::fmt;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::commutant::center;
use super::linalg::{cluster, columns, eigh, fro, CLUSTER_REL_TOL};
use super::OperatorAlgebra;
use crate::dense::{identity, unitarity_defect, DenseOperator};
use crate::error::{Error, Result};

pub const DEFAULT_SEED: u64 = 0x5eed_ab1e;

/// Fresh random draws tried before an ambiguity is reported.
const MAX_ATTEMPTS: u64 = 8;

/// Off-block and block-pattern tolerance for normalized basis elements.
const BLOCK_TOL: f64 = 1e-8;

/// Pairs `(k, q)`: a block `I_k ⊗ M_q`, sorted by `(q, k)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct StructureType(pub Vec<(usize, usize)>);

impl StructureType {
    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.0
    }

    /// `Σ k q`, the matrix size.
    pub fn size(&self) -> usize {
        self.0.iter().map(|(k, q)| k * q).sum()
    }

    /// `Σ q²`, the algebra dimension.
    pub fn algebra_dim(&self) -> usize {
        self.0.iter().map(|(_, q)| q * q).sum()
    }

    /// `Σ k²`, the commutant dimension.
    pub fn commutant_dim(&self) -> usize {
        self.0.iter().map(|(k, _)| k * k).sum()
    }

    pub fn is_commutative(&self) -> bool {
        self.0.iter().all(|&(_, q)| q == 1)
    }

    /// Qubits carried by the largest full matrix block, `⌊log2 max q⌋`.
    pub fn encoded_qubits(&self) -> u32 {
        self.0.iter().map(|&(_, q)| q).max().map_or(0, |q| q.ilog2())
    }
}

impl fmt::Display for StructureType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|(k, q)| format!("({k},{q})")).collect();
        write!(f, "[{}]", parts.join(","))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Block {
    pub k: usize,
    pub q: usize,
    /// First row of the block in the rotated basis.
    pub offset: usize,
}

/// Result of [`structure_type`]: the type, the unitary and the seed used.
#[derive(Debug, Clone)]
pub struct Decomposition {
    structure: StructureType,
    u: DenseOperator,
    blocks: Vec<Block>,
    seed: u64,
}

impl Decomposition {
    pub fn structure(&self) -> &StructureType {
        &self.structure
    }

    /// `U` with `U a U†` block diagonal.
    pub fn unitary(&self) -> &DenseOperator {
        &self.u
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    /// Seed of the random draws that succeeded.
    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn block_form(&self, a: &DenseOperator) -> DenseOperator {
        &self.u * a * self.u.adjoint()
    }

    /// Largest departure of `U a U†` from the `⊕ I_k ⊗ M_q` pattern.
    pub fn block_deviation(&self, a: &DenseOperator) -> f64 {
        let b = self.block_form(a);
        let n = b.nrows();
        let mut owner = vec![0usize; n];
        for (i, blk) in self.blocks.iter().enumerate() {
            for r in blk.offset..blk.offset + blk.k * blk.q {
                owner[r] = i;
            }
        }
        let mut dev: f64 = 0.0;
        for r in 0..n {
            for c in 0..n {
                let v = b[(r, c)];
                if owner[r] != owner[c] {
                    dev = dev.max(v.norm());
                    continue;
                }
                let blk = self.blocks[owner[r]];
                let (ra, rj) = ((r - blk.offset) / blk.q, (r - blk.offset) % blk.q);
                let (ca, cj) = ((c - blk.offset) / blk.q, (c - blk.offset) % blk.q);
                if ra != ca {
                    dev = dev.max(v.norm());
                } else {
                    dev = dev.max((v - b[(blk.offset + rj, blk.offset + cj)]).norm());
                }
            }
        }
        dev
    }
}

/// Structure type and block-diagonalizing unitary, seeded with [`DEFAULT_SEED`].
pub fn structure_type(a: &OperatorAlgebra) -> Result<Decomposition> {
    structure_type_seeded(a, DEFAULT_SEED)
}

pub fn structure_type_seeded(a: &OperatorAlgebra, seed: u64) -> Result<Decomposition> {
    let z = center(a)?;
    let mut last = None;
    for attempt in 0..MAX_ATTEMPTS {
        let s = seed.wrapping_add(attempt);
        match decompose(a, &z, s) {
            Ok(d) => return Ok(d),
            Err(e @ (Error::Ambiguous(_) | Error::CheckFailed(_))) => last = Some(e),
            Err(e) => return Err(e),
        }
    }
    Err(last.expect("at least one attempt"))
}

struct RawBlock {
    k: usize,
    q: usize,
    /// Columns ordered `a·q + j`.
    vectors: DenseOperator,
}

fn decompose(a: &OperatorAlgebra, z: &[DenseOperator], seed: u64) -> Result<Decomposition> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = a.n();

    // minimal central projections from one random central element
    let subspaces: Vec<DenseOperator> = if z.len() <= 1 {
        vec![identity(n)]
    } else {
        use rand::Rng;
        let mut c = DenseOperator::zeros(n, n);
        for zi in z {
            c += zi * num_complex::Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        }
        // complex weights: a real weight kills anti-Hermitian basis elements
        let h = (&c + c.adjoint()).scale(0.5);
        let (vals, vecs) = eigh(&h);
        let scale = vals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let runs = cluster(&vals, CLUSTER_REL_TOL * scale)?;
        if runs.len() != z.len() {
            return Err(Error::Ambiguous(format!(
                "random central element split into {} blocks, center has dimension {}",
                runs.len(),
                z.len()
            )));
        }
        runs.into_iter().map(|r| columns(&vecs, r)).collect()
    };

    let mut raw = Vec::with_capacity(subspaces.len());
    for w in &subspaces {
        let m = w.ncols();
        let h = a.random_hermitian(&mut rng);
        let (vals, vecs) = eigh(&(w.adjoint() * &h * w));
        let scale = vals.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
        let runs = cluster(&vals, CLUSTER_REL_TOL * scale)?;
        let q = runs.len();
        let k = runs[0].len();
        if runs.iter().any(|r| r.len() != k) || k * q != m {
            return Err(Error::Ambiguous(format!(
                "eigenvalue multiplicities {:?} in a central block of size {m}",
                runs.iter().map(|r| r.len()).collect::<Vec<_>>()
            )));
        }
        let slots: Vec<DenseOperator> = runs.into_iter().map(|r| w * columns(&vecs, r)).collect();
        // align the multiplicity bases of the slots with matrix units
        let x = a.random_element(&mut rng);
        let reference = fro(&x) / (n as f64).sqrt();
        let mut aligned = vec![slots[0].clone()];
        for slot in &slots[1..] {
            let t = slot.adjoint() * &x * &slots[0];
            let c = fro(&t) / (k as f64).sqrt();
            if c < 1e-6 * reference {
                return Err(Error::Ambiguous("random element nearly misses a matrix unit".into()));
            }
            aligned.push(slot * t.unscale(c));
        }
        let mut vectors = DenseOperator::zeros(n, m);
        for ai in 0..k {
            for (j, s) in aligned.iter().enumerate() {
                vectors.set_column(ai * q + j, &s.column(ai));
            }
        }
        raw.push(RawBlock { k, q, vectors });
    }
    raw.sort_by_key(|b| (b.q, b.k));

    let mut w = DenseOperator::zeros(n, n);
    let mut blocks = Vec::with_capacity(raw.len());
    let mut offset = 0;
    for b in &raw {
        let width = b.k * b.q;
        w.view_mut((0, offset), (n, width)).copy_from(&b.vectors);
        blocks.push(Block { k: b.k, q: b.q, offset });
        offset += width;
    }
    let structure = StructureType(raw.iter().map(|b| (b.k, b.q)).collect());
    let dec = Decomposition { structure, u: w.adjoint(), blocks, seed };

    let defect = unitarity_defect(&dec.u);
    if defect > 1e-10 {
        return Err(Error::CheckFailed(format!("block unitary defect {defect:e}")));
    }
    if dec.structure.algebra_dim() != a.dim() {
        return Err(Error::CheckFailed(format!(
            "structure {} has dimension {}, algebra has {}",
            dec.structure,
            dec.structure.algebra_dim(),
            a.dim()
        )));
    }
    for b in a.basis() {
        let dev = dec.block_deviation(b);
        if dev > BLOCK_TOL {
            return Err(Error::CheckFailed(format!("basis element leaves block form by {dev:e}")));
        }
    }
    Ok(dec)
}
