//! Concrete matrix model: so(n) as real skew-symmetric matrices with the
//! basis F_{i,j} = E_{i,j} - E_{j,i} and the inner product
//! <A,B> = -1/2 trace(A B).
//!
//! This side of the toolkit is floating point; every contract carries an
//! explicit tolerance. It is the ground truth the exact abstract model is
//! cross-checked against.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum MatrixError {
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("so(n) needs n >= 2, got {0}")]
    BadDimension(usize),
    #[error("matrix is not skew-symmetric (defect {0:.3e})")]
    NotSkew(f64),
    #[error("matrix is not special orthogonal (defect {0:.3e})")]
    NotOrthogonal(f64),
}

/// Tolerances used by the matrix model. Overridable from a JSON config
/// with keys "tol.orthogonality" and "tol.bracket".
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct Tolerances {
    #[serde(rename = "tol.orthogonality", default = "default_orth")]
    pub orthogonality: f64,
    #[serde(rename = "tol.bracket", default = "default_bracket")]
    pub bracket: f64,
}

fn default_orth() -> f64 {
    1e-10
}

fn default_bracket() -> f64 {
    1e-12
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            orthogonality: default_orth(),
            bracket: default_bracket(),
        }
    }
}

/// A skew-symmetric n x n matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct SkewMatrix {
    pub entries: DMatrix<f64>,
}

impl SkewMatrix {
    /// Wraps a matrix, checking skewness within 1e-12 absolute.
    pub fn new(entries: DMatrix<f64>) -> Result<Self, MatrixError> {
        let defect = (&entries + entries.transpose()).abs().max();
        if defect > 1e-12 {
            return Err(MatrixError::NotSkew(defect));
        }
        Ok(SkewMatrix { entries })
    }

    pub fn zeros(n: usize) -> Self {
        SkewMatrix {
            entries: DMatrix::zeros(n, n),
        }
    }

    pub fn n(&self) -> usize {
        self.entries.nrows()
    }

    pub fn scale(&self, c: f64) -> SkewMatrix {
        SkewMatrix {
            entries: &self.entries * c,
        }
    }

    pub fn add(&self, other: &SkewMatrix) -> SkewMatrix {
        SkewMatrix {
            entries: &self.entries + &other.entries,
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries.norm()
    }
}

/// An element of SO(n).
#[derive(Clone, Debug)]
pub struct GroupElement {
    pub entries: DMatrix<f64>,
}

/// Row-major nested array form for matrix I/O.
pub fn matrix_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect()
}

pub fn matrix_from_rows(rows: &[Vec<f64>]) -> Result<DMatrix<f64>, MatrixError> {
    let n = rows.len();
    if rows.iter().any(|r| r.len() != n) {
        return Err(MatrixError::DimensionMismatch(
            n,
            rows.iter().map(|r| r.len()).max().unwrap_or(0),
        ));
    }
    Ok(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
}

impl GroupElement {
    pub fn identity(n: usize) -> Self {
        GroupElement {
            entries: DMatrix::identity(n, n),
        }
    }

    pub fn new(entries: DMatrix<f64>) -> Result<Self, MatrixError> {
        let n = entries.nrows();
        let defect = (entries.transpose() * &entries - DMatrix::<f64>::identity(n, n))
            .abs()
            .max();
        let det = entries.determinant();
        if defect > 1e-10 || (det - 1.0).abs() > 1e-10 {
            return Err(MatrixError::NotOrthogonal(defect.max((det - 1.0).abs())));
        }
        Ok(GroupElement { entries })
    }

    pub fn n(&self) -> usize {
        self.entries.nrows()
    }
}

/// The basis F_{i,j}, 1 <= i < j <= n, in lexicographic (i, j) order.
pub fn so_basis(n: usize) -> Result<Vec<SkewMatrix>, MatrixError> {
    if n < 2 {
        return Err(MatrixError::BadDimension(n));
    }
    let mut basis = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in (i + 1)..n {
            let mut m = DMatrix::zeros(n, n);
            m[(i, j)] = 1.0;
            m[(j, i)] = -1.0;
            basis.push(SkewMatrix { entries: m });
        }
    }
    Ok(basis)
}

/// <A,B> = -1/2 trace(A B).
pub fn trace_product(a: &SkewMatrix, b: &SkewMatrix) -> Result<f64, MatrixError> {
    if a.n() != b.n() {
        return Err(MatrixError::DimensionMismatch(a.n(), b.n()));
    }
    Ok(-0.5 * (&a.entries * &b.entries).trace())
}

/// Matrix commutator AB - BA.
pub fn mat_bracket(a: &SkewMatrix, b: &SkewMatrix) -> Result<SkewMatrix, MatrixError> {
    if a.n() != b.n() {
        return Err(MatrixError::DimensionMismatch(a.n(), b.n()));
    }
    Ok(SkewMatrix {
        entries: &a.entries * &b.entries - &b.entries * &a.entries,
    })
}

/// Matrix exponential by scaling and squaring with a truncated series.
///
/// For skew input the result is special orthogonal; relative error is at
/// the 1e-13 level for norms up to 10.
pub fn exp_matrix(a: &SkewMatrix) -> GroupElement {
    let entries = exp_raw(&a.entries);
    GroupElement { entries }
}

pub(crate) fn exp_raw(a: &DMatrix<f64>) -> DMatrix<f64> {
    let n = a.nrows();
    let norm = a.norm();
    // Scale so the series argument has norm below 1/2, then square back.
    let s = if norm > 0.5 {
        (norm / 0.5).log2().ceil() as u32
    } else {
        0
    };
    let scaled = a / 2f64.powi(s as i32);
    let mut term = DMatrix::<f64>::identity(n, n);
    let mut sum = DMatrix::<f64>::identity(n, n);
    for k in 1..=16 {
        term = &term * &scaled / k as f64;
        sum += &term;
        if term.norm() < 1e-17 * sum.norm() {
            break;
        }
    }
    for _ in 0..s {
        sum = &sum * &sum;
    }
    sum
}

/// Ad(g) X = g X g^T.
pub fn adjoint(g: &GroupElement, x: &SkewMatrix) -> Result<SkewMatrix, MatrixError> {
    if g.n() != x.n() {
        return Err(MatrixError::DimensionMismatch(g.n(), x.n()));
    }
    Ok(SkewMatrix {
        entries: &g.entries * &x.entries * g.entries.transpose(),
    })
}

/// so(n) as a coefficient-vector algebra over the F_{i,j} basis.
///
/// Basis brackets have at most one term: [F_{ij}, F_{kl}] vanishes unless
/// the index pairs share exactly one index.
#[derive(Clone, Debug)]
pub struct SoAlgebra {
    pub n: usize,
    /// index[i][j] is the basis slot of F_{i,j} for i < j.
    index: Vec<Vec<usize>>,
    pairs: Vec<(usize, usize)>,
}

impl SoAlgebra {
    pub fn new(n: usize) -> Result<Self, MatrixError> {
        if n < 2 {
            return Err(MatrixError::BadDimension(n));
        }
        let mut index = vec![vec![usize::MAX; n]; n];
        let mut pairs = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                index[i][j] = pairs.len();
                pairs.push((i, j));
            }
        }
        Ok(SoAlgebra { n, index, pairs })
    }

    pub fn dim(&self) -> usize {
        self.pairs.len()
    }

    pub fn pair(&self, k: usize) -> (usize, usize) {
        self.pairs[k]
    }

    /// Signed basis index of F_{a,b} for arbitrary a != b.
    fn signed_index(&self, a: usize, b: usize) -> (usize, f64) {
        if a < b {
            (self.index[a][b], 1.0)
        } else {
            (self.index[b][a], -1.0)
        }
    }

    /// [F_{ij}, F_{kl}] as an optional (index, coefficient) pair.
    fn basis_bracket(&self, p: usize, q: usize) -> Option<(usize, f64)> {
        let (i, j) = self.pairs[p];
        let (k, l) = self.pairs[q];
        // [F_ij, F_kl] = d_jk F_il - d_ik F_jl - d_jl F_ik + d_il F_jk
        let mut out: Option<(usize, f64)> = None;
        let mut put = |a: usize, b: usize, sign: f64| {
            if a == b {
                return;
            }
            let (idx, s) = self.signed_index(a, b);
            match out {
                None => out = Some((idx, sign * s)),
                Some((i0, c0)) => {
                    debug_assert_eq!(i0, idx);
                    out = Some((i0, c0 + sign * s));
                }
            }
        };
        if j == k {
            put(i, l, 1.0);
        }
        if i == k {
            put(j, l, -1.0);
        }
        if j == l {
            put(i, k, -1.0);
        }
        if i == l {
            put(j, k, 1.0);
        }
        out.filter(|&(_, c)| c != 0.0)
    }

    pub fn coeffs_to_matrix(&self, x: &DVector<f64>) -> SkewMatrix {
        let mut m = DMatrix::zeros(self.n, self.n);
        for (k, &(i, j)) in self.pairs.iter().enumerate() {
            m[(i, j)] += x[k];
            m[(j, i)] -= x[k];
        }
        SkewMatrix { entries: m }
    }

    pub fn matrix_to_coeffs(&self, m: &SkewMatrix) -> DVector<f64> {
        DVector::from_iterator(
            self.dim(),
            self.pairs.iter().map(|&(i, j)| m.entries[(i, j)]),
        )
    }
}

/// Abstraction over both algebra models: coefficient-vector brackets and the
/// ambient Ad-invariant inner product.
pub trait LieAlgebra {
    fn dim(&self) -> usize;
    fn bracket(&self, x: &DVector<f64>, y: &DVector<f64>) -> DVector<f64>;
    fn inner(&self, x: &DVector<f64>, y: &DVector<f64>) -> f64;
}

impl LieAlgebra for SoAlgebra {
    fn dim(&self) -> usize {
        self.dim()
    }

    fn bracket(&self, x: &DVector<f64>, y: &DVector<f64>) -> DVector<f64> {
        let mut out = DVector::zeros(self.dim());
        for p in 0..self.dim() {
            if x[p] == 0.0 {
                continue;
            }
            for q in 0..self.dim() {
                if y[q] == 0.0 {
                    continue;
                }
                if let Some((k, c)) = self.basis_bracket(p, q) {
                    out[k] += x[p] * y[q] * c;
                }
            }
        }
        out
    }

    fn inner(&self, x: &DVector<f64>, y: &DVector<f64>) -> f64 {
        // The F basis is orthonormal for -1/2 trace.
        x.dot(y)
    }
}

impl LieAlgebra for crate::root_systems::BracketTable {
    fn dim(&self) -> usize {
        self.dim()
    }

    fn bracket(&self, x: &DVector<f64>, y: &DVector<f64>) -> DVector<f64> {
        let d = self.dim();
        let mut out = DVector::zeros(d);
        for i in 0..d {
            if x[i] == 0.0 {
                continue;
            }
            for j in 0..d {
                if y[j] == 0.0 {
                    continue;
                }
                for &(k, c) in &self.bracket_basis(i, j) {
                    let cf = *c.numer() as f64 / *c.denom() as f64;
                    out[k as usize] += x[i] * y[j] * cf;
                }
            }
        }
        out
    }

    fn inner(&self, x: &DVector<f64>, y: &DVector<f64>) -> f64 {
        let kappa = *self.kappa.numer() as f64 / *self.kappa.denom() as f64;
        let mut acc = 0.0;
        for i in 0..self.rank {
            for j in 0..self.rank {
                let g = &self.gram_t[i][j];
                acc += x[i] * y[j] * (*g.numer() as f64 / *g.denom() as f64);
            }
        }
        for k in 0..self.pos_roots.len() {
            let (ui, vi) = (self.u_index(k), self.v_index(k));
            let w = &self.uv_norm2[k];
            acc += (x[ui] * y[ui] + x[vi] * y[vi]) * (*w.numer() as f64 / *w.denom() as f64);
        }
        acc * kappa
    }
}
