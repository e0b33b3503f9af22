//! Subgroups of the Pauli group modulo phases.
//!
//! The quotient is the additive group `Z_d^{2n}`; a subgroup is stored as the
//! sorted list of its classes. Commutation of classes is measured by the
//! bicharacter [`PauliClass::chi`].

use std::collections::{HashSet, VecDeque};
use std::fmt::Write as _;

use rand::Rng;

use crate::error::{Error, Result};
use crate::pauli::{PauliClass, PhaseExponent};

/// Largest subgroup `close` will materialize.
pub const MAX_CLOSURE: usize = 1_000_000;

/// Above this many classes the annihilator is found by linear algebra over `Z_d`.
pub const SCAN_LIMIT: u64 = 4096;

/// Largest character matrix side.
pub const MAX_CHARACTER_SIDE: u64 = 10_000;

#[derive(Debug, Clone)]
pub struct PauliSubgroup {
    d: u32,
    n: usize,
    elements: Vec<PauliClass>,
    members: HashSet<PauliClass>,
    gens: Vec<PauliClass>,
}

impl PartialEq for PauliSubgroup {
    fn eq(&self, other: &Self) -> bool {
        self.d == other.d && self.n == other.n && self.elements == other.elements
    }
}

impl Eq for PauliSubgroup {}

fn check_shape(d: u32, n: usize, g: &PauliClass) -> Result<()> {
    if g.d() != d || g.n() != n {
        return Err(Error::Mismatch(format!(
            "class {g} has (d={}, n={}), expected (d={d}, n={n})",
            g.d(),
            g.n()
        )));
    }
    Ok(())
}

impl PauliSubgroup {
    pub fn trivial(d: u32, n: usize) -> Self {
        let id = PauliClass::identity(d, n);
        PauliSubgroup {
            d,
            n,
            elements: vec![id.clone()],
            members: HashSet::from([id]),
            gens: Vec::new(),
        }
    }

    /// Smallest subgroup containing `generators`.
    pub fn close(d: u32, n: usize, generators: &[PauliClass]) -> Result<Self> {
        let mut gens: Vec<PauliClass> = Vec::new();
        for g in generators {
            check_shape(d, n, g)?;
            if !g.is_identity() && !gens.contains(g) {
                gens.push(g.clone());
            }
        }
        let id = PauliClass::identity(d, n);
        let mut members = HashSet::from([id.clone()]);
        let mut queue = VecDeque::from([id]);
        while let Some(e) = queue.pop_front() {
            for g in &gens {
                let p = e.mul(g)?;
                if !members.contains(&p) {
                    if members.len() >= MAX_CLOSURE {
                        return Err(Error::ClosureBound { limit: MAX_CLOSURE });
                    }
                    members.insert(p.clone());
                    queue.push_back(p);
                }
            }
        }
        let mut elements: Vec<_> = members.iter().cloned().collect();
        elements.sort();
        Ok(PauliSubgroup { d, n, elements, members, gens })
    }

    /// Builds a subgroup from a set already known to be closed.
    fn from_closed(d: u32, n: usize, mut elements: Vec<PauliClass>) -> Self {
        elements.sort();
        elements.dedup();
        let members: HashSet<_> = elements.iter().cloned().collect();
        let gens = greedy_generators(&elements);
        PauliSubgroup { d, n, elements, members, gens }
    }

    pub fn d(&self) -> u32 {
        self.d
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Classes in canonical order.
    pub fn elements(&self) -> &[PauliClass] {
        &self.elements
    }

    /// A generating set (not necessarily minimal).
    pub fn generators(&self) -> &[PauliClass] {
        &self.gens
    }

    /// Greedy generating set taken in canonical order; minimal for prime `d`.
    pub fn minimal_generators(&self) -> Vec<PauliClass> {
        greedy_generators(&self.elements)
    }

    pub fn contains(&self, g: &PauliClass) -> bool {
        self.members.contains(g)
    }

    pub fn is_subgroup_of(&self, other: &PauliSubgroup) -> bool {
        self.elements.iter().all(|g| other.contains(g))
    }

    pub fn is_abelian(&self) -> bool {
        self.gens.iter().enumerate().all(|(i, a)| {
            self.gens[i + 1..]
                .iter()
                .all(|b| a.commutes_with(b).expect("same shape"))
        })
    }

    /// True when `g` commutes with every element.
    pub fn centralizes(&self, g: &PauliClass) -> bool {
        self.gens.iter().all(|k| g.commutes_with(k).unwrap_or(false))
    }

    /// Size of a maximal abelian subgroup, `d^n`.
    pub fn maximal_abelian_size(&self) -> usize {
        (self.d as usize).pow(self.n as u32)
    }

    pub fn with_element(&self, g: &PauliClass) -> Result<Self> {
        let mut gens = self.gens.clone();
        gens.push(g.clone());
        Self::close(self.d, self.n, &gens)
    }

    /// Subgroup file: a `d=<d> n=<n>` header then one class per line.
    pub fn to_file_string(&self) -> String {
        let mut out = format!("d={} n={}\n", self.d, self.n);
        for g in &self.elements {
            let _ = writeln!(out, "{g}");
        }
        out
    }

    /// Reads a subgroup file; the listed classes are closed under products.
    pub fn from_file_string(text: &str) -> Result<Self> {
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#'));
        let header = lines.next().ok_or_else(|| Error::Parse("empty subgroup file".into()))?;
        let (d, n) = parse_header(header)?;
        let mut gens = Vec::new();
        for line in lines {
            let g = PauliClass::parse(line, d)?;
            if g.n() != n {
                return Err(Error::Parse(format!("{line:?} has {} sites, header says {n}", g.n())));
            }
            gens.push(g);
        }
        Self::close(d, n, &gens)
    }
}

/// Parses `d=<d> n=<n>`.
pub fn parse_header(line: &str) -> Result<(u32, usize)> {
    let mut d = None;
    let mut n = None;
    for part in line.split_whitespace() {
        if let Some(v) = part.strip_prefix("d=") {
            d = v.parse().ok();
        } else if let Some(v) = part.strip_prefix("n=") {
            n = v.parse().ok();
        } else {
            return Err(Error::Parse(format!("bad header field {part:?}")));
        }
    }
    match (d, n) {
        (Some(d), Some(n)) if d >= 2 && n >= 1 => Ok((d, n)),
        _ => Err(Error::Parse(format!("bad header {line:?}, want \"d=<d> n=<n>\""))),
    }
}

/// Parses a comma-separated list of classes; an empty string is an empty list.
pub fn parse_class_list(text: &str, d: u32) -> Result<Vec<PauliClass>> {
    let text = text.trim();
    if text.is_empty() {
        return Ok(Vec::new());
    }
    let classes = text
        .split(',')
        .map(|s| PauliClass::parse(s, d))
        .collect::<Result<Vec<_>>>()?;
    let n = classes[0].n();
    if let Some(bad) = classes.iter().find(|c| c.n() != n) {
        return Err(Error::Parse(format!("{bad} has {} sites, expected {n}", bad.n())));
    }
    Ok(classes)
}

fn greedy_generators(elements: &[PauliClass]) -> Vec<PauliClass> {
    let Some(first) = elements.first() else {
        return Vec::new();
    };
    let (d, n) = (first.d(), first.n());
    let mut span: HashSet<PauliClass> = HashSet::from([PauliClass::identity(d, n)]);
    let mut gens = Vec::new();
    for g in elements {
        if span.contains(g) {
            continue;
        }
        gens.push(g.clone());
        let mut next = span.clone();
        let mut power = g.clone();
        while !power.is_identity() {
            for s in &span {
                next.insert(s.mul(&power).expect("same shape"));
            }
            power = power.mul(g).expect("same shape");
        }
        span = next;
    }
    gens
}

pub fn is_prime(d: u32) -> bool {
    d >= 2 && (2..d).take_while(|k| k * k <= d).all(|k| !d.is_multiple_of(k))
}

/// All classes commuting with every element of `k`.
pub fn annihilator(k: &PauliSubgroup) -> Result<PauliSubgroup> {
    let total = PauliClass::count(k.d, k.n);
    match total {
        Some(t) if t <= SCAN_LIMIT => annihilator_by_scan(k),
        _ if is_prime(k.d) => annihilator_by_linear_system(k),
        _ => annihilator_by_scan(k),
    }
}

pub fn annihilator_by_scan(k: &PauliSubgroup) -> Result<PauliSubgroup> {
    let total = PauliClass::count(k.d, k.n).unwrap_or(u64::MAX);
    if total > MAX_CLOSURE as u64 {
        return Err(Error::SizeBound(format!("{total} classes to scan")));
    }
    let elements: Vec<_> = PauliClass::all(k.d, k.n)?.filter(|g| k.centralizes(g)).collect();
    Ok(PauliSubgroup::from_closed(k.d, k.n, elements))
}

/// Solves the symplectic system `x·k_z − z·k_x ≡ 0 (mod d)` for prime `d`.
pub fn annihilator_by_linear_system(k: &PauliSubgroup) -> Result<PauliSubgroup> {
    let (d, n) = (k.d, k.n);
    if !is_prime(d) {
        return Err(Error::Invalid(format!("linear annihilator needs prime d, got {d}")));
    }
    let rows: Vec<Vec<u32>> = k
        .gens
        .iter()
        .map(|g| {
            let mut row = Vec::with_capacity(2 * n);
            row.extend(g.z().iter().copied());
            row.extend(g.x().iter().map(|&v| (d - v) % d));
            row
        })
        .collect();
    let basis = nullspace_mod_p(&rows, 2 * n, d);
    let gens = basis
        .into_iter()
        .map(|v| PauliClass::new(d, v[..n].to_vec(), v[n..].to_vec()))
        .collect::<Result<Vec<_>>>()?;
    PauliSubgroup::close(d, n, &gens)
}

fn inv_mod(a: u32, p: u32) -> u32 {
    // Fermat; p is prime and small
    let mut result: u64 = 1;
    let mut base = a as u64 % p as u64;
    let mut e = p - 2;
    while e > 0 {
        if e & 1 == 1 {
            result = result * base % p as u64;
        }
        base = base * base % p as u64;
        e >>= 1;
    }
    result as u32
}

/// Basis of `{v : rows · v ≡ 0 (mod p)}` over `Z_p`.
pub fn nullspace_mod_p(rows: &[Vec<u32>], cols: usize, p: u32) -> Vec<Vec<u32>> {
    let mut m: Vec<Vec<u32>> = rows.iter().map(|r| r.iter().map(|v| v % p).collect()).collect();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        let Some(pr) = (r..m.len()).find(|&i| m[i][c] != 0) else {
            continue;
        };
        m.swap(r, pr);
        let inv = inv_mod(m[r][c], p);
        for v in m[r].iter_mut() {
            *v = (*v as u64 * inv as u64 % p as u64) as u32;
        }
        for i in 0..m.len() {
            if i != r && m[i][c] != 0 {
                let f = m[i][c];
                for j in 0..cols {
                    let sub = (f as u64 * m[r][j] as u64 % p as u64) as u32;
                    m[i][j] = (m[i][j] + p - sub) % p;
                }
            }
        }
        pivots.push(c);
        r += 1;
        if r == m.len() {
            break;
        }
    }
    let free: Vec<usize> = (0..cols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![0u32; cols];
            v[f] = 1;
            for (i, &pc) in pivots.iter().enumerate() {
                v[pc] = (p - m[i][f]) % p;
            }
            v
        })
        .collect()
}

/// Grows an abelian subgroup to size `d^n`, always adding the smallest
/// commuting class not yet present.
pub fn extend_to_maximal(k: &PauliSubgroup) -> Result<PauliSubgroup> {
    if !k.is_abelian() {
        return Err(Error::NotAbelian("cannot extend a non-abelian subgroup".into()));
    }
    let target = k.maximal_abelian_size();
    let mut current = k.clone();
    while current.len() < target {
        let ann = annihilator(&current)?;
        let g = ann
            .elements()
            .iter()
            .find(|g| !current.contains(g))
            .ok_or_else(|| Error::CheckFailed("no commuting class outside a non-maximal subgroup".into()))?
            .clone();
        current = current.with_element(&g)?;
    }
    Ok(current)
}

/// Table of `chi(a, b)` over all classes in canonical order.
#[derive(Debug, Clone, PartialEq)]
pub struct CharacterMatrix {
    d: u32,
    n: usize,
    classes: Vec<PauliClass>,
    table: Vec<Vec<PhaseExponent>>,
}

impl CharacterMatrix {
    pub fn d(&self) -> u32 {
        self.d
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn classes(&self) -> &[PauliClass] {
        &self.classes
    }

    pub fn entry(&self, row: usize, col: usize) -> PhaseExponent {
        self.table[row][col]
    }

    pub fn side(&self) -> usize {
        self.classes.len()
    }

    /// Entries as powers of `ω`.
    pub fn exponents(&self) -> Vec<Vec<u32>> {
        self.table
            .iter()
            .map(|r| r.iter().map(|p| p.as_omega_power().expect("characters are powers of ω")).collect())
            .collect()
    }

    /// CSV with a header row of class strings, then one row of `ω` exponents per class.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let header: Vec<String> = self.classes.iter().map(|c| c.to_string()).collect();
        out.push_str(&header.join(","));
        out.push('\n');
        for row in self.exponents() {
            let cells: Vec<String> = row.iter().map(|e| e.to_string()).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}

pub fn character_matrix(d: u32, n: usize) -> Result<CharacterMatrix> {
    let side = PauliClass::count(d, n).unwrap_or(u64::MAX);
    if side > MAX_CHARACTER_SIDE {
        return Err(Error::SizeBound(format!(
            "character matrix side {side} exceeds {MAX_CHARACTER_SIDE}"
        )));
    }
    let classes: Vec<_> = PauliClass::all(d, n)?.collect();
    let table = classes
        .iter()
        .map(|a| classes.iter().map(|b| a.chi(b)).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()?;
    Ok(CharacterMatrix { d, n, classes, table })
}

pub fn random_class<R: Rng + ?Sized>(d: u32, n: usize, rng: &mut R) -> PauliClass {
    let x = (0..n).map(|_| rng.random_range(0..d)).collect();
    let z = (0..n).map(|_| rng.random_range(0..d)).collect();
    PauliClass::new(d, x, z).expect("in range")
}

/// Subgroup generated by `gens` uniformly random classes.
pub fn random_subgroup<R: Rng + ?Sized>(
    d: u32,
    n: usize,
    gens: usize,
    rng: &mut R,
) -> Result<PauliSubgroup> {
    let g: Vec<_> = (0..gens).map(|_| random_class(d, n, rng)).collect();
    PauliSubgroup::close(d, n, &g)
}

/// Random abelian subgroup of size `d^k` (prime `d`), grown one random
/// commuting class at a time.
pub fn random_abelian<R: Rng + ?Sized>(
    d: u32,
    n: usize,
    k: usize,
    rng: &mut R,
) -> Result<PauliSubgroup> {
    if !is_prime(d) {
        return Err(Error::Invalid(format!("random abelian subgroups need prime d, got {d}")));
    }
    if k > n {
        return Err(Error::Invalid(format!("abelian subgroups have size at most d^{n}")));
    }
    let target = (d as usize).pow(k as u32);
    let mut current = PauliSubgroup::trivial(d, n);
    while current.len() < target {
        let ann = annihilator(&current)?;
        let candidates: Vec<_> = ann.elements().iter().filter(|g| !current.contains(g)).collect();
        let g = candidates[rng.random_range(0..candidates.len())].clone();
        current = current.with_element(&g)?;
    }
    Ok(current)
}

pub fn random_maximal_abelian<R: Rng + ?Sized>(
    d: u32,
    n: usize,
    rng: &mut R,
) -> Result<PauliSubgroup> {
    random_abelian(d, n, n, rng)
}

/// Every subgroup of the `n`-site quotient; only sensible for tiny `d^{2n}`.
pub fn all_subgroups(d: u32, n: usize) -> Result<Vec<PauliSubgroup>> {
    let total = PauliClass::count(d, n).unwrap_or(u64::MAX);
    if total > 256 {
        return Err(Error::SizeBound(format!("{total} classes is too many to enumerate subgroups")));
    }
    let classes: Vec<_> = PauliClass::all(d, n)?.collect();
    let mut seen: HashSet<Vec<PauliClass>> = HashSet::new();
    let mut found = Vec::new();
    let mut queue = VecDeque::from([PauliSubgroup::trivial(d, n)]);
    seen.insert(queue[0].elements.clone());
    while let Some(h) = queue.pop_front() {
        for g in &classes {
            if h.contains(g) {
                continue;
            }
            let bigger = h.with_element(g)?;
            if seen.insert(bigger.elements.clone()) {
                queue.push_back(bigger);
            }
        }
        found.push(h);
    }
    found.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.elements.cmp(&b.elements)));
    Ok(found)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn cls(list: &str, d: u32) -> Vec<PauliClass> {
        parse_class_list(list, d).unwrap()
    }

    fn names(k: &PauliSubgroup) -> Vec<String> {
        k.elements().iter().map(|g| g.to_string()).collect()
    }

    #[test]
    fn close_examples() {
        let t = PauliSubgroup::close(2, 1, &[]).unwrap();
        assert_eq!(names(&t), ["I"]);
        let k = PauliSubgroup::close(2, 2, &cls("ZI,IZ", 2)).unwrap();
        assert_eq!(k.len(), 4);
        let mut got = names(&k);
        got.sort();
        assert_eq!(got, ["II", "IZ", "ZI", "ZZ"]);
    }

    /// Brute-force closure by repeated pairwise products until nothing new.
    fn brute_closure(gens: &[PauliClass]) -> Vec<PauliClass> {
        let (d, n) = (gens[0].d(), gens[0].n());
        let mut set: Vec<PauliClass> = vec![PauliClass::identity(d, n)];
        set.extend(gens.iter().cloned());
        loop {
            let mut grew = false;
            let snapshot = set.clone();
            for a in &snapshot {
                for b in &snapshot {
                    let p = a.mul(b).unwrap();
                    if !set.contains(&p) {
                        set.push(p);
                        grew = true;
                    }
                }
            }
            if !grew {
                break;
            }
        }
        set.sort();
        set
    }

    #[test]
    fn qutrit_subgroup_closure() {
        let gens = cls("X2Z1:X0Z0,X0Z0:X1Z1", 3);
        let k = PauliSubgroup::close(3, 2, &gens).unwrap();
        assert_eq!(k.elements(), &brute_closure(&gens)[..]);
        assert_eq!(k.len(), 9);
        // {X^{2i} Z^i ⊗ X^j Z^j}
        for i in 0..3u32 {
            for j in 0..3u32 {
                let g = PauliClass::new(3, vec![(2 * i) % 3, j], vec![i, j]).unwrap();
                assert!(k.contains(&g));
            }
        }
        assert!(k.is_abelian());
    }

    #[test]
    fn abelian_examples() {
        assert!(PauliSubgroup::close(2, 2, &cls("ZI,IZ", 2)).unwrap().is_abelian());
        assert!(!PauliSubgroup::close(2, 2, &cls("XI,ZI", 2)).unwrap().is_abelian());
        assert!(PauliSubgroup::trivial(2, 3).is_abelian());
    }

    #[test]
    fn annihilator_examples() {
        let all = annihilator(&PauliSubgroup::trivial(2, 2)).unwrap();
        assert_eq!(all.len(), 16);
        let k = PauliSubgroup::close(2, 2, &cls("ZI,IZ", 2)).unwrap();
        let ann = annihilator(&k).unwrap();
        assert_eq!(ann, k);
        assert_eq!(k.len() * ann.len(), 16);
        let z = PauliSubgroup::close(2, 1, &cls("Z", 2)).unwrap();
        assert_eq!(names(&annihilator(&z).unwrap()), ["I", "Z"]);
    }

    #[test]
    fn scan_and_linear_routes_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for (d, n) in [(2, 1), (2, 2), (2, 3), (2, 4), (3, 1), (3, 2), (5, 1)] {
            for gens in 0..=3 {
                let k = random_subgroup(d, n, gens, &mut rng).unwrap();
                let a = annihilator_by_scan(&k).unwrap();
                let b = annihilator_by_linear_system(&k).unwrap();
                assert_eq!(a, b, "d={d} n={n}");
            }
        }
    }

    #[test]
    fn linear_route_handles_large_registers() {
        let k = PauliSubgroup::close(2, 8, &cls("ZIIIIIII,IZIIIIII,XXXXXXXX", 2)).unwrap();
        let ann = annihilator(&k).unwrap();
        assert_eq!(k.len() * ann.len(), 4usize.pow(8));
        assert!(ann.elements().iter().all(|g| k.centralizes(g)));
    }

    #[test]
    fn extend_examples() {
        let k = PauliSubgroup::close(2, 2, &cls("ZI,IZ", 2)).unwrap();
        assert_eq!(extend_to_maximal(&k).unwrap(), k);

        let one = extend_to_maximal(&PauliSubgroup::trivial(2, 1)).unwrap();
        assert_eq!(names(&one), ["I", "X"]);

        let zi = PauliSubgroup::close(2, 2, &cls("ZI", 2)).unwrap();
        let m = extend_to_maximal(&zi).unwrap();
        assert_eq!(m.len(), 4);
        assert!(m.is_abelian() && zi.is_subgroup_of(&m));
        // maximal: no class outside commutes with all of it
        for g in PauliClass::all(2, 2).unwrap() {
            if !m.contains(&g) {
                assert!(!m.centralizes(&g));
            }
        }
        assert!(extend_to_maximal(&PauliSubgroup::close(2, 1, &cls("X,Z", 2)).unwrap()).is_err());
    }

    #[test]
    fn character_matrix_small_cases() {
        let h = character_matrix(2, 1).unwrap();
        let signs: Vec<Vec<i32>> = h
            .exponents()
            .iter()
            .map(|r| r.iter().map(|&e| if e == 0 { 1 } else { -1 }).collect())
            .collect();
        assert_eq!(
            signs,
            vec![vec![1, 1, 1, 1], vec![1, 1, -1, -1], vec![1, -1, 1, -1], vec![1, -1, -1, 1]]
        );
        let csv = h.to_csv();
        assert_eq!(csv.lines().next(), Some("I,X,Z,Y"));
        assert_eq!(csv.lines().nth(2), Some("0,0,1,1"));
        assert!(character_matrix(2, 7).is_err());
    }

    #[test]
    fn subgroup_file_round_trip() {
        let k = PauliSubgroup::close(3, 2, &cls("X2Z1:X0Z0,X0Z0:X1Z1", 3)).unwrap();
        let text = k.to_file_string();
        assert!(text.starts_with("d=3 n=2\n"));
        assert_eq!(PauliSubgroup::from_file_string(&text).unwrap(), k);
        let with_phases = "d=2 n=2\n-iYY\n+ZZ\n";
        let g = PauliSubgroup::from_file_string(with_phases).unwrap();
        assert_eq!(g.len(), 4);
        assert!(PauliSubgroup::from_file_string("d=2 n=3\nXX\n").is_err());
        assert!(PauliSubgroup::from_file_string("n=3\n").is_err());
    }

    #[test]
    fn enumerates_all_subgroups_of_small_quotients() {
        // subspaces of F_2^2 and F_2^4
        assert_eq!(all_subgroups(2, 1).unwrap().len(), 5);
        assert_eq!(all_subgroups(2, 2).unwrap().len(), 67);
    }

    #[test]
    fn nullspace_mod_p_small() {
        // x + y + z = 0 over F_3
        let basis = nullspace_mod_p(&[vec![1, 1, 1]], 3, 3);
        assert_eq!(basis.len(), 2);
        for v in basis {
            assert_eq!(v.iter().sum::<u32>() % 3, 0);
        }
    }
}
