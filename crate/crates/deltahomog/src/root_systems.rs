//! Root systems of the compact simple Lie algebras and the bracket tables
//! they generate.
//!
//! Roots are stored with doubled integer coordinates so that the half-integer
//! f4 roots stay exact. All arithmetic in this module is exact rational: the
//! Jacobi identity, the torus relations and the invariance of the inner
//! product are checked without tolerances.
//!
//! Structure constants are produced deterministically: positive roots are
//! ordered lexicographically, every sum root gets its extraspecial pair a
//! positive constant, and the remaining constants follow from the standard
//! identities. `build_bracket_table` re-validates the Jacobi identity on all
//! basis triples and refuses to return a table that fails it.

use std::collections::{BTreeMap, HashMap};

use num_rational::Rational64;
use num_traits::Zero;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Simple Lie algebra family, in the classical naming.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Family {
    A,
    B,
    C,
    D,
    G2,
    F4,
}

impl Family {
    pub fn parse(s: &str) -> Option<Family> {
        match s.to_ascii_uppercase().as_str() {
            "A" => Some(Family::A),
            "B" => Some(Family::B),
            "C" => Some(Family::C),
            "D" => Some(Family::D),
            "G2" | "G" => Some(Family::G2),
            "F4" | "F" => Some(Family::F4),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Family::A => "A",
            Family::B => "B",
            Family::C => "C",
            Family::D => "D",
            Family::G2 => "G2",
            Family::F4 => "F4",
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum RootSystemError {
    #[error("unsupported rank {rank} for family {family}")]
    UnsupportedRank { family: String, rank: usize },
    #[error("vector is not a root of the system")]
    NotARoot,
    #[error("roots are collinear")]
    CollinearRoots,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("no consistent sign assignment found: {0}")]
    SignConsistencyFailure(String),
    #[error("reflection left the half-integer lattice")]
    NotHalfInteger,
    #[error("malformed document: {0}")]
    BadDocument(String),
}

/// A root (or any vector of the root space), stored as doubled integer
/// coordinates: the actual coordinates are `coords2 / 2`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RootVector {
    pub coords2: Vec<i64>,
}

impl RootVector {
    pub fn new(coords2: Vec<i64>) -> Self {
        RootVector { coords2 }
    }

    /// Builds from integer coordinates (doubling them internally).
    pub fn from_ints(coords: &[i64]) -> Self {
        RootVector {
            coords2: coords.iter().map(|c| 2 * c).collect(),
        }
    }

    pub fn ambient_dim(&self) -> usize {
        self.coords2.len()
    }

    pub fn is_zero(&self) -> bool {
        self.coords2.iter().all(|&c| c == 0)
    }

    pub fn neg(&self) -> RootVector {
        RootVector {
            coords2: self.coords2.iter().map(|c| -c).collect(),
        }
    }

    pub fn add(&self, other: &RootVector) -> RootVector {
        RootVector {
            coords2: self
                .coords2
                .iter()
                .zip(&other.coords2)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn sub(&self, other: &RootVector) -> RootVector {
        RootVector {
            coords2: self
                .coords2
                .iter()
                .zip(&other.coords2)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    /// Four times the Euclidean inner product (an integer).
    pub fn dot4(&self, other: &RootVector) -> i64 {
        self.coords2
            .iter()
            .zip(&other.coords2)
            .map(|(a, b)| a * b)
            .sum()
    }

    /// Exact Euclidean inner product.
    pub fn dot(&self, other: &RootVector) -> Rational64 {
        Rational64::new(self.dot4(other), 4)
    }

    /// Exact squared length.
    pub fn norm2(&self) -> Rational64 {
        self.dot(self)
    }

    /// First nonzero coordinate is positive.
    pub fn is_positive(&self) -> bool {
        for &c in &self.coords2 {
            if c != 0 {
                return c > 0;
            }
        }
        false
    }

    pub fn coords_f64(&self) -> Vec<f64> {
        self.coords2.iter().map(|&c| c as f64 / 2.0).collect()
    }
}

/// The finite set of roots of a compact simple Lie algebra, with the
/// long/short partition by squared length.
#[derive(Clone, Debug, PartialEq)]
pub struct RootSystem {
    pub family: Family,
    pub rank: usize,
    pub ambient_dim: usize,
    /// Sorted lexicographically; membership tests use binary search.
    pub roots: Vec<RootVector>,
    /// Indices into `roots` of the long roots (all roots if one length).
    pub long: Vec<usize>,
    /// Indices into `roots` of the short roots (empty if one length).
    pub short: Vec<usize>,
}

impl RootSystem {
    pub fn contains(&self, v: &RootVector) -> bool {
        self.roots.binary_search(v).is_ok()
    }

    pub fn long_roots(&self) -> Vec<&RootVector> {
        self.long.iter().map(|&i| &self.roots[i]).collect()
    }

    pub fn short_roots(&self) -> Vec<&RootVector> {
        self.short.iter().map(|&i| &self.roots[i]).collect()
    }

    /// Positive roots (first nonzero coordinate positive), lex ascending.
    pub fn positive_roots(&self) -> Vec<RootVector> {
        self.roots
            .iter()
            .filter(|r| r.is_positive())
            .cloned()
            .collect()
    }
}

fn unit2(dim: usize, i: usize, coeff: i64) -> Vec<i64> {
    let mut v = vec![0i64; dim];
    v[i] = coeff;
    v
}

/// Builds the root system of the given family and rank in the usual
/// `e_i` coordinate convention.
pub fn build_root_system(family: Family, rank: usize) -> Result<RootSystem, RootSystemError> {
    let bad = |r: usize| RootSystemError::UnsupportedRank {
        family: family.name().to_string(),
        rank: r,
    };
    if rank < 1 {
        return Err(bad(rank));
    }
    let mut roots: Vec<RootVector> = Vec::new();
    let ambient_dim;
    match family {
        Family::A => {
            // e_i - e_j, i != j, i,j = 0..l  (ambient dimension l + 1)
            ambient_dim = rank + 1;
            for i in 0..=rank {
                for j in 0..=rank {
                    if i != j {
                        let mut c = vec![0i64; ambient_dim];
                        c[i] = 2;
                        c[j] = -2;
                        roots.push(RootVector::new(c));
                    }
                }
            }
        }
        Family::B => {
            ambient_dim = rank;
            for i in 0..rank {
                for s in [2i64, -2] {
                    roots.push(RootVector::new(unit2(rank, i, s)));
                }
            }
            push_pair_roots(&mut roots, rank, 2);
        }
        Family::C => {
            ambient_dim = rank;
            for i in 0..rank {
                for s in [4i64, -4] {
                    roots.push(RootVector::new(unit2(rank, i, s)));
                }
            }
            push_pair_roots(&mut roots, rank, 2);
        }
        Family::D => {
            ambient_dim = rank;
            push_pair_roots(&mut roots, rank, 2);
        }
        Family::G2 => {
            if rank != 2 {
                return Err(bad(rank));
            }
            ambient_dim = 3;
            for i in 0..3 {
                for j in 0..3 {
                    if i != j {
                        let mut c = vec![0i64; 3];
                        c[i] = 2;
                        c[j] = -2;
                        roots.push(RootVector::new(c));
                    }
                }
            }
            for j in 0..3 {
                let mut c = vec![2i64; 3];
                c[j] -= 6;
                roots.push(RootVector::new(c.clone()));
                roots.push(RootVector::new(c.iter().map(|x| -x).collect()));
            }
        }
        Family::F4 => {
            if rank != 4 {
                return Err(bad(rank));
            }
            ambient_dim = 4;
            for i in 0..4 {
                for s in [2i64, -2] {
                    roots.push(RootVector::new(unit2(4, i, s)));
                }
            }
            push_pair_roots(&mut roots, 4, 2);
            // (1/2)(+-e1 +-e2 +-e3 +-e4): doubled coordinates +-1.
            for mask in 0..16u32 {
                let c: Vec<i64> = (0..4)
                    .map(|k| if mask & (1 << k) != 0 { -1 } else { 1 })
                    .collect();
                roots.push(RootVector::new(c));
            }
        }
    }
    roots.sort();
    roots.dedup();

    // Partition by squared length: at most two distinct values.
    let mut lengths: Vec<Rational64> = roots.iter().map(|r| r.norm2()).collect();
    lengths.sort();
    lengths.dedup();
    let (long, short) = match lengths.len() {
        0 => (Vec::new(), Vec::new()),
        1 => ((0..roots.len()).collect(), Vec::new()),
        2 => {
            let lmax = lengths[1];
            let mut long = Vec::new();
            let mut short = Vec::new();
            for (i, r) in roots.iter().enumerate() {
                if r.norm2() == lmax {
                    long.push(i);
                } else {
                    short.push(i);
                }
            }
            (long, short)
        }
        _ => {
            return Err(RootSystemError::SignConsistencyFailure(
                "more than two root lengths".into(),
            ))
        }
    };

    Ok(RootSystem {
        family,
        rank,
        ambient_dim,
        roots,
        long,
        short,
    })
}

fn push_pair_roots(roots: &mut Vec<RootVector>, rank: usize, half: i64) {
    for i in 0..rank {
        for j in (i + 1)..rank {
            for (si, sj) in [(1i64, 1i64), (1, -1), (-1, 1), (-1, -1)] {
                let mut c = vec![0i64; rank];
                c[i] = si * half;
                c[j] = sj * half;
                roots.push(RootVector::new(c));
            }
        }
    }
}

/// Reflection of `v` in the hyperplane orthogonal to the root `alpha`.
pub fn weyl_reflect(
    rs: &RootSystem,
    alpha: &RootVector,
    v: &RootVector,
) -> Result<RootVector, RootSystemError> {
    if !rs.contains(alpha) {
        return Err(RootSystemError::NotARoot);
    }
    if v.ambient_dim() != alpha.ambient_dim() {
        return Err(RootSystemError::DimensionMismatch {
            expected: alpha.ambient_dim(),
            got: v.ambient_dim(),
        });
    }
    // c = 2 <v, alpha> / <alpha, alpha>, exact.
    let c = Rational64::new(2 * v.dot4(alpha), alpha.dot4(alpha));
    let coords2: Option<Vec<i64>> = v
        .coords2
        .iter()
        .zip(&alpha.coords2)
        .map(|(&vc, &ac)| {
            let t = Rational64::from_integer(vc) - c * Rational64::from_integer(ac);
            if t.is_integer() {
                Some(t.to_integer())
            } else {
                None
            }
        })
        .collect();
    coords2
        .map(RootVector::new)
        .ok_or(RootSystemError::NotHalfInteger)
}

/// Greatest `j >= 0` with `beta - j*alpha` a root.
pub fn chain_q(
    rs: &RootSystem,
    alpha: &RootVector,
    beta: &RootVector,
) -> Result<i64, RootSystemError> {
    if !rs.contains(alpha) || !rs.contains(beta) {
        return Err(RootSystemError::NotARoot);
    }
    if beta == alpha || *beta == alpha.neg() {
        return Err(RootSystemError::CollinearRoots);
    }
    let mut q = 0i64;
    let mut cur = beta.sub(alpha);
    while rs.contains(&cur) {
        q += 1;
        cur = cur.sub(alpha);
    }
    Ok(q)
}

/// An element of the abstract compact algebra: exact coefficients over the
/// bracket-table basis.
pub type AlgElt = Vec<Rational64>;

/// Structure constants of the compact form on the basis
/// `t_1..t_rank, u_{a_1}, v_{a_1}, ..., u_{a_m}, v_{a_m}` (positive roots
/// `a_k` in lex order).
#[derive(Clone, Debug)]
pub struct BracketTable {
    pub family: Family,
    pub rank: usize,
    pub root_system: RootSystem,
    /// Basis of the root span; `e_i` for B/C/D/F4, differences of adjacent
    /// `e_i` for A and G2.
    pub t_basis: Vec<RootVector>,
    /// Positive roots, lex ascending; root k owns basis slots
    /// `rank + 2k` (u) and `rank + 2k + 1` (v).
    pub pos_roots: Vec<RootVector>,
    /// Sparse constants for basis pairs (i, j), i < j; values are sparse
    /// coefficient vectors.
    pub constants: BTreeMap<(u16, u16), Vec<(u16, Rational64)>>,
    /// Gram matrix of `t_basis` under the Euclidean product (kappa excluded).
    pub gram_t: Vec<Vec<Rational64>>,
    /// Diagonal inner product of u_a / v_a: `4 / <a,a>` (kappa excluded).
    pub uv_norm2: Vec<Rational64>,
    /// Global scale of the invariant inner product. The default 1 matches
    /// -1/2 trace on so(2l+1) with the torus span{F_12, F_34, ...}.
    pub kappa: Rational64,
    /// Chevalley-signed constants on special pairs of positive roots,
    /// keyed by (index, index) into `pos_roots`.
    special_n: HashMap<(usize, usize), i64>,
}

impl BracketTable {
    pub fn dim(&self) -> usize {
        self.rank + 2 * self.pos_roots.len()
    }

    pub fn u_index(&self, k: usize) -> usize {
        self.rank + 2 * k
    }

    pub fn v_index(&self, k: usize) -> usize {
        self.rank + 2 * k + 1
    }

    pub fn zero(&self) -> AlgElt {
        vec![Rational64::zero(); self.dim()]
    }

    pub fn basis_elt(&self, i: usize) -> AlgElt {
        let mut e = self.zero();
        e[i] = Rational64::from_integer(1);
        e
    }

    fn pos_index(&self, r: &RootVector) -> Option<usize> {
        self.pos_roots.binary_search(r).ok()
    }

    /// Bracket of two basis elements as a sparse vector.
    pub fn bracket_basis(&self, i: usize, j: usize) -> Vec<(u16, Rational64)> {
        use std::cmp::Ordering;
        match i.cmp(&j) {
            Ordering::Equal => Vec::new(),
            Ordering::Less => self
                .constants
                .get(&(i as u16, j as u16))
                .cloned()
                .unwrap_or_default(),
            Ordering::Greater => self
                .constants
                .get(&(j as u16, i as u16))
                .map(|v| v.iter().map(|&(k, c)| (k, -c)).collect())
                .unwrap_or_default(),
        }
    }

    /// Bilinear extension of the table. Exact.
    pub fn bracket(&self, x: &AlgElt, y: &AlgElt) -> Result<AlgElt, RootSystemError> {
        let d = self.dim();
        if x.len() != d || y.len() != d {
            return Err(RootSystemError::DimensionMismatch {
                expected: d,
                got: if x.len() != d { x.len() } else { y.len() },
            });
        }
        let mut out = self.zero();
        for (i, xi) in x.iter().enumerate() {
            if xi.is_zero() {
                continue;
            }
            for (j, yj) in y.iter().enumerate() {
                if yj.is_zero() {
                    continue;
                }
                let c = xi * yj;
                for &(k, v) in &self.bracket_basis(i, j) {
                    out[k as usize] += c * v;
                }
            }
        }
        Ok(out)
    }

    /// The invariant inner product, exact, including the kappa scale.
    pub fn inner(&self, x: &AlgElt, y: &AlgElt) -> Result<Rational64, RootSystemError> {
        let d = self.dim();
        if x.len() != d || y.len() != d {
            return Err(RootSystemError::DimensionMismatch {
                expected: d,
                got: if x.len() != d { x.len() } else { y.len() },
            });
        }
        let mut acc = Rational64::zero();
        for i in 0..self.rank {
            for j in 0..self.rank {
                acc += x[i] * y[j] * self.gram_t[i][j];
            }
        }
        for k in 0..self.pos_roots.len() {
            let (ui, vi) = (self.u_index(k), self.v_index(k));
            acc += (x[ui] * y[ui] + x[vi] * y[vi]) * self.uv_norm2[k];
        }
        Ok(acc * self.kappa)
    }

    /// |N_{alpha,beta}| for arbitrary roots; zero when alpha+beta is not a
    /// root. Only the magnitude is convention-independent.
    pub fn n_magnitude(&self, alpha: &RootVector, beta: &RootVector) -> i64 {
        self.eval_n(alpha, beta).abs()
    }

    /// Chevalley-signed constant for arbitrary signed roots (internal sign
    /// convention; magnitudes are q+1).
    fn eval_n(&self, sigma: &RootVector, tau: &RootVector) -> i64 {
        let sum = sigma.add(tau);
        if sum.is_zero() || !self.root_system.contains(&sum) {
            return 0;
        }
        if !sum.is_positive() {
            return -self.eval_n(&sigma.neg(), &tau.neg());
        }
        match (sigma.is_positive(), tau.is_positive()) {
            (true, true) => {
                let i = self.pos_index(sigma).expect("positive root");
                let j = self.pos_index(tau).expect("positive root");
                if i < j {
                    *self.special_n.get(&(i, j)).unwrap_or(&0)
                } else {
                    -*self.special_n.get(&(j, i)).unwrap_or(&0)
                }
            }
            (true, false) => {
                // sigma positive, tau negative, sum positive:
                // N_{sigma,tau} = -(<sum>^2/<sigma>^2) N_{-tau, sum}.
                let ratio = Rational64::new(sum.dot4(&sum), sigma.dot4(sigma));
                let n = self.eval_n(&tau.neg(), &sum);
                let r = ratio * Rational64::from_integer(-n);
                debug_assert!(r.is_integer());
                r.to_integer()
            }
            (false, true) => -self.eval_n(tau, sigma),
            (false, false) => unreachable!("sum of negatives is negative"),
        }
    }
}

/// Solves `G c = rhs` exactly (G symmetric positive definite).
fn solve_exact(g: &[Vec<Rational64>], rhs: &[Rational64]) -> Vec<Rational64> {
    let n = rhs.len();
    let mut a: Vec<Vec<Rational64>> = (0..n)
        .map(|i| {
            let mut row = g[i].clone();
            row.push(rhs[i]);
            row
        })
        .collect();
    for col in 0..n {
        let pivot = (col..n)
            .find(|&r| !a[r][col].is_zero())
            .expect("singular Gram matrix");
        a.swap(col, pivot);
        let p = a[col][col];
        for j in col..=n {
            a[col][j] /= p;
        }
        for r in 0..n {
            if r != col && !a[r][col].is_zero() {
                let f = a[r][col];
                for j in col..=n {
                    let t = a[col][j];
                    a[r][j] -= f * t;
                }
            }
        }
    }
    (0..n).map(|i| a[i][n]).collect()
}

/// Builds the compact-form bracket table over the root system.
///
/// Signs follow the extraspecial-pair convention on lex-ordered positive
/// roots; the resulting table is validated by an exact Jacobi check.
pub fn build_bracket_table(rs: &RootSystem) -> Result<BracketTable, RootSystemError> {
    let t_basis: Vec<RootVector> = match rs.family {
        Family::A | Family::G2 => (0..rs.rank)
            .map(|i| {
                let mut c = vec![0i64; rs.ambient_dim];
                c[i] = 2;
                c[i + 1] = -2;
                RootVector::new(c)
            })
            .collect(),
        _ => (0..rs.rank)
            .map(|i| RootVector::new(unit2(rs.ambient_dim, i, 2)))
            .collect(),
    };
    let pos_roots = rs.positive_roots();
    let pos_index: HashMap<RootVector, usize> = pos_roots
        .iter()
        .enumerate()
        .map(|(i, r)| (r.clone(), i))
        .collect();

    // Special-pair constants, sums in lex ascending order.
    let special_n: HashMap<(usize, usize), i64>;
    {
        let mut partial = BracketTable {
            family: rs.family,
            rank: rs.rank,
            root_system: rs.clone(),
            t_basis: t_basis.clone(),
            pos_roots: pos_roots.clone(),
            constants: BTreeMap::new(),
            gram_t: Vec::new(),
            uv_norm2: Vec::new(),
            kappa: Rational64::from_integer(1),
            special_n: HashMap::new(),
        };
        for gamma in pos_roots.iter() {
            let mut pairs: Vec<(usize, usize)> = Vec::new();
            for (ai, a) in pos_roots.iter().enumerate() {
                let b = gamma.sub(a);
                if !b.is_positive() {
                    continue;
                }
                if let Some(&bi) = pos_index.get(&b) {
                    if a < &b {
                        pairs.push((ai, bi));
                    }
                }
            }
            if pairs.is_empty() {
                continue;
            }
            // pairs were collected in ascending order of the first root, so
            // the extraspecial pair comes first.
            let (a1, b1) = pairs[0];
            let p = max_down_chain(rs, &pos_roots[a1], &pos_roots[b1]);
            partial.special_n.insert((a1, b1), p + 1);
            for &(ai, bi) in &pairs[1..] {
                let alpha = &pos_roots[ai];
                let beta = &pos_roots[bi];
                let ea = &pos_roots[a1];
                let eb = &pos_roots[b1];
                // Jacobi-type identity for the quadruple
                // (ea, eb, -alpha, -beta), which sums to zero.
                let d1 = eb.sub(alpha);
                let d2 = ea.sub(alpha);
                let t2 = Rational64::from_integer(
                    partial.eval_n(eb, &alpha.neg()) * partial.eval_n(ea, &beta.neg()),
                ) / Rational64::from_integer(d1.dot4(&d1));
                let t3 = Rational64::from_integer(
                    partial.eval_n(&alpha.neg(), ea) * partial.eval_n(eb, &beta.neg()),
                ) / Rational64::from_integer(d2.dot4(&d2));
                let n_extra = *partial.special_n.get(&(a1, b1)).unwrap();
                let n_neg = -(t2 + t3) * Rational64::from_integer(gamma.dot4(gamma))
                    / Rational64::from_integer(n_extra);
                if !n_neg.is_integer() {
                    return Err(RootSystemError::SignConsistencyFailure(format!(
                        "non-integer constant for pair {:?}, {:?}",
                        alpha.coords_f64(),
                        beta.coords_f64()
                    )));
                }
                partial.special_n.insert((ai, bi), -n_neg.to_integer());
            }
        }
        special_n = std::mem::take(&mut partial.special_n);
    }

    let gram_t: Vec<Vec<Rational64>> = (0..rs.rank)
        .map(|i| (0..rs.rank).map(|j| t_basis[i].dot(&t_basis[j])).collect())
        .collect();
    let uv_norm2: Vec<Rational64> = pos_roots
        .iter()
        .map(|a| Rational64::from_integer(4) / a.norm2())
        .collect();

    let mut table = BracketTable {
        family: rs.family,
        rank: rs.rank,
        root_system: rs.clone(),
        t_basis,
        pos_roots,
        constants: BTreeMap::new(),
        gram_t,
        uv_norm2,
        kappa: Rational64::from_integer(1),
        special_n,
    };
    fill_constants(&mut table)?;

    if let Err(msg) = jacobi_check(&table) {
        return Err(RootSystemError::SignConsistencyFailure(msg));
    }
    Ok(table)
}

fn max_down_chain(rs: &RootSystem, alpha: &RootVector, beta: &RootVector) -> i64 {
    let mut q = 0i64;
    let mut cur = beta.sub(alpha);
    while rs.contains(&cur) {
        q += 1;
        cur = cur.sub(alpha);
    }
    q
}

fn fill_constants(table: &mut BracketTable) -> Result<(), RootSystemError> {
    let rank = table.rank;
    let npos = table.pos_roots.len();
    let mut constants: BTreeMap<(u16, u16), Vec<(u16, Rational64)>> = BTreeMap::new();
    let mut push = |i: usize, j: usize, entries: Vec<(usize, Rational64)>| {
        let mut filtered: Vec<(u16, Rational64)> = entries
            .into_iter()
            .filter(|(_, c)| !c.is_zero())
            .map(|(k, c)| (k as u16, c))
            .collect();
        filtered.sort_by_key(|&(k, _)| k);
        if !filtered.is_empty() {
            constants.insert((i as u16, j as u16), filtered);
        }
    };

    // Expansion of each positive root over the t-basis, exact.
    let expansions: Vec<Vec<Rational64>> = table
        .pos_roots
        .iter()
        .map(|a| {
            let rhs: Vec<Rational64> = table.t_basis.iter().map(|t| t.dot(a)).collect();
            solve_exact(&table.gram_t, &rhs)
        })
        .collect();

    for k in 0..npos {
        let alpha = table.pos_roots[k].clone();
        let (ui, vi) = (table.u_index(k), table.v_index(k));
        // [t_i, u_a] = -<a, t_i> v_a ; [t_i, v_a] = <a, t_i> u_a.
        for i in 0..rank {
            let c = table.t_basis[i].dot(&alpha);
            push(i, ui, vec![(vi, -c)]);
            push(i, vi, vec![(ui, c)]);
        }
        // [u_a, v_a] = -(4/<a,a>) a, expanded over the t-basis.
        let scale = Rational64::from_integer(4) / alpha.norm2();
        let entries: Vec<(usize, Rational64)> =
            (0..rank).map(|i| (i, -scale * expansions[k][i])).collect();
        push(ui, vi, entries);
    }

    // Root-plane cross brackets for positive roots a (index j) < b (index k).
    for j in 0..npos {
        for k in (j + 1)..npos {
            let a = table.pos_roots[j].clone();
            let b = table.pos_roots[k].clone();
            let n_sum = table.eval_n(&a, &b);
            let n_diff = table.eval_n(&a, &b.neg());
            let sum = a.add(&b);
            let diff = a.sub(&b); // lex negative since a < b
            let sum_idx = table.pos_index(&sum);
            let diff_idx = table.pos_index(&diff.neg());

            let (uj, vj) = (table.u_index(j), table.v_index(j));
            let (uk, vk) = (table.u_index(k), table.v_index(k));

            let mut uu: Vec<(usize, Rational64)> = Vec::new();
            let mut vv: Vec<(usize, Rational64)> = Vec::new();
            let mut uv: Vec<(usize, Rational64)> = Vec::new();
            let mut vu: Vec<(usize, Rational64)> = Vec::new();
            if let Some(s) = sum_idx {
                let n = Rational64::from_integer(n_sum);
                // [x_a, x_b] = N(a,b) x_{a+b} + ... ; u = x, v = y.
                uu.push((table.u_index(s), n));
                vv.push((table.u_index(s), -n));
                uv.push((table.v_index(s), n));
                vu.push((table.v_index(s), n));
            }
            if let Some(d) = diff_idx {
                // x_{a-b} = -u_{b-a}, y_{a-b} = v_{b-a}.
                let n = Rational64::from_integer(n_diff);
                uu.push((table.u_index(d), n));
                vv.push((table.u_index(d), n));
                uv.push((table.v_index(d), n));
                vu.push((table.v_index(d), -n));
            }
            push(uj, uk, uu);
            push(vj, vk, vv);
            push(uj, vk, uv);
            push(vj, uk, vu);
        }
    }
    table.constants = constants;
    Ok(())
}

/// Exact Jacobi identity over all basis triples.
pub fn jacobi_check(table: &BracketTable) -> Result<(), String> {
    let d = table.dim();
    for i in 0..d {
        for j in (i + 1)..d {
            let bij = table.bracket_basis(i, j);
            for k in (j + 1)..d {
                let bjk = table.bracket_basis(j, k);
                let bki = table.bracket_basis(k, i);
                let mut acc = vec![Rational64::zero(); d];
                accumulate_bracket(table, &bij, k, &mut acc, false);
                accumulate_bracket(table, &bjk, i, &mut acc, false);
                accumulate_bracket(table, &bki, j, &mut acc, false);
                if acc.iter().any(|c| !c.is_zero()) {
                    return Err(format!("Jacobi fails on basis triple ({i}, {j}, {k})"));
                }
            }
        }
    }
    Ok(())
}

/// acc += [sparse, basis_k] (or [basis_k, sparse] when `flip`).
fn accumulate_bracket(
    table: &BracketTable,
    sparse: &[(u16, Rational64)],
    k: usize,
    acc: &mut [Rational64],
    flip: bool,
) {
    for &(m, c) in sparse {
        let entries = table.bracket_basis(m as usize, k);
        for &(t, v) in &entries {
            if flip {
                acc[t as usize] -= c * v;
            } else {
                acc[t as usize] += c * v;
            }
        }
    }
}

/// Exact ad-invariance of the inner product over all basis triples:
/// <[x,y],z> + <y,[x,z]> = 0.
pub fn ad_invariance_check(table: &BracketTable) -> Result<(), String> {
    let d = table.dim();
    let basis: Vec<AlgElt> = (0..d).map(|i| table.basis_elt(i)).collect();
    for x in 0..d {
        for y in 0..d {
            let bxy = table.bracket(&basis[x], &basis[y]).unwrap();
            for z in 0..d {
                let bxz = table.bracket(&basis[x], &basis[z]).unwrap();
                let lhs =
                    table.inner(&bxy, &basis[z]).unwrap() + table.inner(&basis[y], &bxz).unwrap();
                if !lhs.is_zero() {
                    return Err(format!("ad-invariance fails on triple ({x}, {y}, {z})"));
                }
            }
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

/// JSON document for a root system together with its bracket table.
/// Rationals are encoded as `"p/q"` strings so the round trip stays exact.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AlgebraDoc {
    pub family: String,
    pub rank: usize,
    /// All roots, halved coordinates (exact in binary floating point).
    pub roots: Vec<Vec<f64>>,
    pub t_basis: Vec<Vec<f64>>,
    pub kappa: String,
    /// `[i, j, coeffs]` with `coeffs` dense over the basis.
    pub constants: Vec<(u16, u16, Vec<String>)>,
}

fn rat_to_string(r: &Rational64) -> String {
    if r.is_integer() {
        format!("{}", r.numer())
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

fn rat_from_string(s: &str) -> Result<Rational64, RootSystemError> {
    let parse = |t: &str| -> Result<i64, RootSystemError> {
        t.trim()
            .parse::<i64>()
            .map_err(|e| RootSystemError::BadDocument(format!("bad rational '{s}': {e}")))
    };
    match s.split_once('/') {
        Some((n, d)) => Ok(Rational64::new(parse(n)?, parse(d)?)),
        None => Ok(Rational64::from_integer(parse(s)?)),
    }
}

fn coords_from_f64(v: &[f64]) -> Result<Vec<i64>, RootSystemError> {
    v.iter()
        .map(|&x| {
            let d = x * 2.0;
            if d.fract() == 0.0 && d.abs() < 1e15 {
                Ok(d as i64)
            } else {
                Err(RootSystemError::BadDocument(format!(
                    "coordinate {x} is not a half integer"
                )))
            }
        })
        .collect()
}

pub fn to_doc(table: &BracketTable) -> AlgebraDoc {
    let d = table.dim();
    AlgebraDoc {
        family: table.family.name().to_string(),
        rank: table.rank,
        roots: table
            .root_system
            .roots
            .iter()
            .map(|r| r.coords_f64())
            .collect(),
        t_basis: table.t_basis.iter().map(|r| r.coords_f64()).collect(),
        kappa: rat_to_string(&table.kappa),
        constants: table
            .constants
            .iter()
            .map(|(&(i, j), entries)| {
                let mut dense = vec![Rational64::zero(); d];
                for &(k, c) in entries {
                    dense[k as usize] = c;
                }
                (i, j, dense.iter().map(rat_to_string).collect())
            })
            .collect(),
    }
}

pub fn from_doc(doc: &AlgebraDoc) -> Result<(RootSystem, BracketTable), RootSystemError> {
    let family = Family::parse(&doc.family)
        .ok_or_else(|| RootSystemError::BadDocument(format!("unknown family {}", doc.family)))?;
    let rs = build_root_system(family, doc.rank)?;
    let mut doc_roots: Vec<RootVector> = doc
        .roots
        .iter()
        .map(|r| coords_from_f64(r).map(RootVector::new))
        .collect::<Result<_, _>>()?;
    doc_roots.sort();
    if doc_roots != rs.roots {
        return Err(RootSystemError::BadDocument(
            "root list does not match the named family and rank".into(),
        ));
    }
    let mut table = build_bracket_table(&rs)?;
    table.kappa = rat_from_string(&doc.kappa)?;
    // The freshly built table and the document must agree constant by
    // constant; the document is authoritative for the round trip.
    let mut constants: BTreeMap<(u16, u16), Vec<(u16, Rational64)>> = BTreeMap::new();
    for (i, j, dense) in &doc.constants {
        let entries: Vec<(u16, Rational64)> = dense
            .iter()
            .enumerate()
            .map(|(k, s)| rat_from_string(s).map(|c| (k as u16, c)))
            .collect::<Result<Vec<_>, _>>()?
            .into_iter()
            .filter(|(_, c)| !c.is_zero())
            .collect();
        constants.insert((*i, *j), entries);
    }
    if constants != table.constants {
        return Err(RootSystemError::BadDocument(
            "constants do not match the deterministic sign convention".into(),
        ));
    }
    Ok((rs, table))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::Signed;

    fn rv(coords: &[i64]) -> RootVector {
        RootVector::from_ints(coords)
    }

    fn rvh(coords2: &[i64]) -> RootVector {
        RootVector::new(coords2.to_vec())
    }

    #[test]
    fn root_counts_match_the_family_formulas() {
        for (family, rank, expect) in [
            (Family::A, 1, 2),
            (Family::A, 2, 6),
            (Family::A, 3, 12),
            (Family::B, 2, 8),
            (Family::B, 3, 18),
            (Family::C, 2, 8),
            (Family::C, 3, 18),
            (Family::D, 3, 12),
            (Family::D, 4, 24),
            (Family::G2, 2, 12),
            (Family::F4, 4, 48),
        ] {
            let rs = build_root_system(family, rank).unwrap();
            assert_eq!(rs.roots.len(), expect, "{family:?} rank {rank}");
        }
    }

    #[test]
    fn b2_roots_and_length_partition() {
        let rs = build_root_system(Family::B, 2).unwrap();
        assert_eq!(rs.roots.len(), 8);
        for r in [rv(&[1, 0]), rv(&[0, 1]), rv(&[-1, 0]), rv(&[0, -1])] {
            assert!(rs.contains(&r));
            assert!(rs.short_roots().contains(&&r));
        }
        for r in [rv(&[1, 1]), rv(&[1, -1]), rv(&[-1, 1]), rv(&[-1, -1])] {
            assert!(rs.contains(&r));
            assert!(rs.long_roots().contains(&&r));
        }
    }

    #[test]
    fn f4_long_short_split() {
        let rs = build_root_system(Family::F4, 4).unwrap();
        assert_eq!(rs.long.len(), 24);
        assert_eq!(rs.short.len(), 24);
        // half-integer roots are short
        assert!(rs.short_roots().contains(&&rvh(&[1, 1, 1, 1])));
        assert!(rs.long_roots().contains(&&rv(&[1, 1, 0, 0])));
    }

    #[test]
    fn a_and_g2_roots_have_zero_coordinate_sum() {
        for (family, rank) in [(Family::A, 2), (Family::A, 3), (Family::G2, 2)] {
            let rs = build_root_system(family, rank).unwrap();
            for r in &rs.roots {
                assert_eq!(r.coords2.iter().sum::<i64>(), 0);
            }
        }
    }

    #[test]
    fn one_length_families_have_empty_short_set() {
        for (family, rank) in [(Family::A, 2), (Family::D, 3)] {
            let rs = build_root_system(family, rank).unwrap();
            assert_eq!(rs.long.len(), rs.roots.len());
            assert!(rs.short.is_empty());
        }
    }

    #[test]
    fn unsupported_ranks_are_rejected() {
        assert!(matches!(
            build_root_system(Family::G2, 3),
            Err(RootSystemError::UnsupportedRank { .. })
        ));
        assert!(matches!(
            build_root_system(Family::F4, 3),
            Err(RootSystemError::UnsupportedRank { .. })
        ));
        assert!(matches!(
            build_root_system(Family::B, 0),
            Err(RootSystemError::UnsupportedRank { .. })
        ));
    }

    #[test]
    fn weyl_reflection_examples() {
        let rs = build_root_system(Family::B, 2).unwrap();
        let e1 = rv(&[1, 0]);
        let e2 = rv(&[0, 1]);
        // reflection negates its own root
        assert_eq!(weyl_reflect(&rs, &e1, &e1).unwrap(), rv(&[-1, 0]));
        // reflection in e1 - e2 swaps e1 and e2
        assert_eq!(weyl_reflect(&rs, &rv(&[1, -1]), &e2).unwrap(), e1);
        // orthogonal vectors are fixed
        let d = rv(&[1, -1]);
        assert_eq!(weyl_reflect(&rs, &rv(&[1, 1]), &d).unwrap(), d);
        assert_eq!(
            weyl_reflect(&rs, &rv(&[2, 0]), &e1),
            Err(RootSystemError::NotARoot)
        );
    }

    #[test]
    fn weyl_reflections_permute_the_root_set() {
        for (family, rank) in [(Family::B, 2), (Family::G2, 2), (Family::A, 2)] {
            let rs = build_root_system(family, rank).unwrap();
            for alpha in &rs.roots {
                let mut image: Vec<RootVector> = rs
                    .roots
                    .iter()
                    .map(|v| weyl_reflect(&rs, alpha, v).unwrap())
                    .collect();
                image.sort();
                assert_eq!(image, rs.roots);
            }
        }
    }

    /// Orbit enumeration under the reflections: transitive on each
    /// length class.
    #[test]
    fn weyl_orbits_cover_each_length_class() {
        for (family, rank) in [
            (Family::B, 2),
            (Family::B, 3),
            (Family::C, 2),
            (Family::G2, 2),
            (Family::F4, 4),
            (Family::D, 3),
            (Family::A, 3),
        ] {
            let rs = build_root_system(family, rank).unwrap();
            for class in [&rs.long, &rs.short] {
                if class.is_empty() {
                    continue;
                }
                let seed = rs.roots[class[0]].clone();
                let mut orbit = std::collections::BTreeSet::new();
                let mut frontier = vec![seed];
                while let Some(v) = frontier.pop() {
                    if !orbit.insert(v.clone()) {
                        continue;
                    }
                    for alpha in &rs.roots {
                        frontier.push(weyl_reflect(&rs, alpha, &v).unwrap());
                    }
                }
                let class_set: std::collections::BTreeSet<RootVector> =
                    class.iter().map(|&i| rs.roots[i].clone()).collect();
                assert_eq!(orbit, class_set, "{family:?} rank {rank}");
            }
        }
    }

    #[test]
    fn chain_q_examples() {
        let rs = build_root_system(Family::B, 2).unwrap();
        // e2 - (e1 - e2) = 2e2 - e1 is not a root
        assert_eq!(chain_q(&rs, &rv(&[1, -1]), &rv(&[0, 1])).unwrap(), 0);
        // -e2 - (e1 + e2) is not a root, but the shifted pair has chain 1
        assert_eq!(chain_q(&rs, &rv(&[1, 1]), &rv(&[0, -1])).unwrap(), 0);
        assert_eq!(chain_q(&rs, &rv(&[1, 0]), &rv(&[0, 1])).unwrap(), 1);
        assert_eq!(
            chain_q(&rs, &rv(&[1, 0]), &rv(&[1, 0])),
            Err(RootSystemError::CollinearRoots)
        );
        assert_eq!(
            chain_q(&rs, &rv(&[1, 0]), &rv(&[-1, 0])),
            Err(RootSystemError::CollinearRoots)
        );
    }

    #[test]
    fn b2_torus_relations_and_uv_bracket() {
        let rs = build_root_system(Family::B, 2).unwrap();
        let table = build_bracket_table(&rs).unwrap();
        let alpha = rv(&[1, 1]);
        let k = table.pos_index(&alpha).unwrap();
        // [u_a, v_a] = -(4/<a,a>) a = -2 (e1 + e2)
        let uv = table
            .bracket(
                &table.basis_elt(table.u_index(k)),
                &table.basis_elt(table.v_index(k)),
            )
            .unwrap();
        assert_eq!(uv[0], Rational64::from_integer(-2));
        assert_eq!(uv[1], Rational64::from_integer(-2));
        assert!(uv[2..].iter().all(|c| c.is_zero()));
        // [h, u_a] = -<a,h> v_a for every torus basis vector
        for (i, t) in table.t_basis.iter().enumerate() {
            for (k, a) in table.pos_roots.iter().enumerate() {
                let hu = table
                    .bracket(&table.basis_elt(i), &table.basis_elt(table.u_index(k)))
                    .unwrap();
                let mut expected = table.zero();
                expected[table.v_index(k)] = -t.dot(a);
                assert_eq!(hu, expected);
                let hv = table
                    .bracket(&table.basis_elt(i), &table.basis_elt(table.v_index(k)))
                    .unwrap();
                let mut expected = table.zero();
                expected[table.u_index(k)] = t.dot(a);
                assert_eq!(hv, expected);
            }
        }
    }

    #[test]
    fn b2_structure_constant_magnitudes() {
        let rs = build_root_system(Family::B, 2).unwrap();
        let table = build_bracket_table(&rs).unwrap();
        let alpha = rv(&[1, 1]);
        let beta = rv(&[0, -1]);
        assert_eq!(table.n_magnitude(&alpha, &beta), 1);
        assert_eq!(table.n_magnitude(&alpha.add(&beta), &beta.neg()), 2);
        assert_eq!(table.n_magnitude(&alpha.add(&beta), &beta), 2);
    }

    #[test]
    fn two0_double_bracket_shape() {
        // [[u_a, u_b], u_b] = 2(+-u_a +- u_{a+2b}) for a = e1+e2, b = -e2.
        let rs = build_root_system(Family::B, 2).unwrap();
        let table = build_bracket_table(&rs).unwrap();
        let a = table.pos_index(&rv(&[1, 1])).unwrap();
        let b = table.pos_index(&rv(&[0, 1])).unwrap(); // u_{-e2} = u_{e2}
        let ua = table.basis_elt(table.u_index(a));
        let ub = table.basis_elt(table.u_index(b));
        let inner = table.bracket(&ua, &ub).unwrap();
        let result = table.bracket(&inner, &ub).unwrap();
        let a_idx = table.u_index(a);
        let c_idx = table.u_index(table.pos_index(&rv(&[1, -1])).unwrap());
        for (i, c) in result.iter().enumerate() {
            if i == a_idx || i == c_idx {
                assert_eq!(c.abs(), Rational64::from_integer(2));
            } else {
                assert!(c.is_zero());
            }
        }
    }

    #[test]
    fn bracket_is_antisymmetric_and_torus_commutes() {
        let rs = build_root_system(Family::B, 2).unwrap();
        let table = build_bracket_table(&rs).unwrap();
        let d = table.dim();
        // [X, X] = 0 for a dense element
        let x: AlgElt = (0..d).map(|i| Rational64::new(i as i64 + 1, 3)).collect();
        assert!(table.bracket(&x, &x).unwrap().iter().all(|c| c.is_zero()));
        // torus is abelian
        let t12 = table
            .bracket(&table.basis_elt(0), &table.basis_elt(1))
            .unwrap();
        assert!(t12.iter().all(|c| c.is_zero()));
        // dimension mismatch is reported
        let short = vec![Rational64::zero(); d - 1];
        assert!(matches!(
            table.bracket(&short, &x),
            Err(RootSystemError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn root_plane_brackets_stay_in_the_sum_and_difference_planes() {
        let rs = build_root_system(Family::B, 2).unwrap();
        let table = build_bracket_table(&rs).unwrap();
        let npos = table.pos_roots.len();
        for j in 0..npos {
            for k in 0..npos {
                if j == k {
                    continue;
                }
                let a = table.pos_roots[j].clone();
                let b = table.pos_roots[k].clone();
                let allowed: Vec<usize> = [a.add(&b), a.sub(&b)]
                    .iter()
                    .filter_map(|s| {
                        let p = if s.is_positive() { s.clone() } else { s.neg() };
                        table.pos_index(&p)
                    })
                    .flat_map(|i| [table.u_index(i), table.v_index(i)])
                    .collect();
                for xi in [table.u_index(j), table.v_index(j)] {
                    for yi in [table.u_index(k), table.v_index(k)] {
                        let out = table
                            .bracket(&table.basis_elt(xi), &table.basis_elt(yi))
                            .unwrap();
                        for (idx, c) in out.iter().enumerate() {
                            if !c.is_zero() {
                                assert!(allowed.contains(&idx), "({j},{k}) leaked to {idx}");
                            }
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn length_normalization_is_exact() {
        for (family, rank) in [(Family::B, 2), (Family::G2, 2), (Family::C, 2)] {
            let rs = build_root_system(family, rank).unwrap();
            let table = build_bracket_table(&rs).unwrap();
            for (k, a) in table.pos_roots.iter().enumerate() {
                let expect = Rational64::from_integer(4) / a.norm2();
                let u = table.basis_elt(table.u_index(k));
                let v = table.basis_elt(table.v_index(k));
                assert_eq!(table.inner(&u, &u).unwrap(), expect);
                assert_eq!(table.inner(&v, &v).unwrap(), expect);
                assert_eq!(table.inner(&u, &v).unwrap(), Rational64::zero());
            }
        }
    }

    #[test]
    fn jacobi_and_ad_invariance_hold_exactly_on_small_systems() {
        for (family, rank) in [(Family::A, 1), (Family::B, 2), (Family::G2, 2)] {
            let rs = build_root_system(family, rank).unwrap();
            let table = build_bracket_table(&rs).unwrap();
            jacobi_check(&table).unwrap();
            ad_invariance_check(&table).unwrap();
        }
    }

    #[test]
    fn document_round_trip_is_lossless() {
        for (family, rank) in [(Family::B, 2), (Family::G2, 2)] {
            let rs = build_root_system(family, rank).unwrap();
            let table = build_bracket_table(&rs).unwrap();
            let doc = to_doc(&table);
            let json = serde_json::to_string(&doc).unwrap();
            let parsed: AlgebraDoc = serde_json::from_str(&json).unwrap();
            let (rs2, table2) = from_doc(&parsed).unwrap();
            assert_eq!(rs2, rs);
            assert_eq!(table2.constants, table.constants);
            assert_eq!(table2.kappa, table.kappa);
        }
    }
}
