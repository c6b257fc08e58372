//! Reductive splits g = h + p1 + p2, the two-parameter invariant metric
//! (.,.) = x1 <.,.>|p1 + x2 <.,.>|p2, orthogonal projections, the U-map of
//! the Levi-Civita connection and the geodesic-vector machinery.
//!
//! Everything is generic over the ambient algebra model through
//! [`LieAlgebra`], so the same machinery runs on so(n) matrices and on the
//! exact-rational bracket tables (converted to floats).

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use crate::compact_lie::LieAlgebra;
use crate::compact_lie::SoAlgebra;
use crate::root_systems::{BracketTable, RootVector};

#[derive(Debug, Error)]
pub enum SplitError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("metric parameters must be positive, got x1={0}, x2={1}")]
    BadParams(f64, f64),
    #[error("x1 and x2 are too close for this operation")]
    NearEqualParams,
    #[error("element has an h-component of norm {0:.3e}, not in p")]
    NotInP(f64),
    #[error("singular Gram matrix while solving on {0}")]
    SingularGram(&'static str),
    #[error("bases of {0} and {1} are not orthogonal (inner product {2:.3e})")]
    NotOrthogonal(&'static str, &'static str, f64),
    #[error("bases do not jointly span the algebra")]
    NotSpanning,
    #[error("module invariance violated: [{0}, {1}] leaks into {2} (norm {3:.3e})")]
    NotInvariant(&'static str, &'static str, &'static str, f64),
    #[error("bad space file: {0}")]
    BadSpace(String),
}

/// The metric pair (x1, x2), both positive.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct MetricParams {
    pub x1: f64,
    pub x2: f64,
}

impl MetricParams {
    pub fn new(x1: f64, x2: f64) -> Result<Self, SplitError> {
        if !(x1 > 0.0 && x2 > 0.0 && x1.is_finite() && x2.is_finite()) {
            return Err(SplitError::BadParams(x1, x2));
        }
        Ok(MetricParams { x1, x2 })
    }

    /// The normal-metric branch: |x2 - x1| <= 1e-8 max(x1, x2).
    pub fn near_equal(&self) -> bool {
        (self.x2 - self.x1).abs() <= 1e-8 * self.x1.max(self.x2)
    }

    pub fn ratio(&self) -> f64 {
        self.x2 / self.x1
    }
}

/// Which component of g = h + p1 + p2 to project onto.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Component {
    H,
    P,
    P1,
    P2,
}

/// Projections of an element onto the three blocks, as coefficient vectors
/// over the respective bases.
#[derive(Clone, Debug)]
pub struct SplitVector {
    pub h_part: DVector<f64>,
    pub p1_part: DVector<f64>,
    pub p2_part: DVector<f64>,
}

/// Affine family of solutions z = particular + span(nullspace_basis),
/// returned by [`geodesic_completion`].
#[derive(Clone, Debug)]
pub struct AffineFamily {
    pub particular: DVector<f64>,
    pub nullspace_basis: Vec<DVector<f64>>,
}

impl AffineFamily {
    /// A member of the family for the given nullspace coefficients.
    pub fn member(&self, coeffs: &[f64]) -> DVector<f64> {
        let mut z = self.particular.clone();
        for (c, b) in coeffs.iter().zip(&self.nullspace_basis) {
            z += b * *c;
        }
        z
    }
}

/// Ordered bases of h, p1, p2 inside an ambient algebra, with the Gram data
/// needed for orthogonal projections.
#[derive(Clone, Debug)]
pub struct ReductiveSplit<A: LieAlgebra> {
    pub algebra: A,
    pub basis_h: Vec<DVector<f64>>,
    pub basis_p1: Vec<DVector<f64>>,
    pub basis_p2: Vec<DVector<f64>>,
    inv_gram_h: DMatrix<f64>,
    inv_gram_p1: DMatrix<f64>,
    inv_gram_p2: DMatrix<f64>,
}

fn gram<A: LieAlgebra>(algebra: &A, basis: &[DVector<f64>]) -> DMatrix<f64> {
    let k = basis.len();
    DMatrix::from_fn(k, k, |i, j| algebra.inner(&basis[i], &basis[j]))
}

fn invert(g: &DMatrix<f64>, what: &'static str) -> Result<DMatrix<f64>, SplitError> {
    g.clone()
        .try_inverse()
        .ok_or(SplitError::SingularGram(what))
}

impl<A: LieAlgebra> ReductiveSplit<A> {
    /// Builds a split and verifies orthogonality, spanning and the module
    /// invariances [h,h] in h, [h,p_i] in p_i, [p2,p1] in p1,
    /// [p2,p2] in h + p2.
    pub fn new(
        algebra: A,
        basis_h: Vec<DVector<f64>>,
        basis_p1: Vec<DVector<f64>>,
        basis_p2: Vec<DVector<f64>>,
    ) -> Result<Self, SplitError> {
        let dim = algebra.dim();
        let total = basis_h.len() + basis_p1.len() + basis_p2.len();
        if total != dim {
            return Err(SplitError::DimensionMismatch {
                expected: dim,
                got: total,
            });
        }
        for v in basis_h.iter().chain(&basis_p1).chain(&basis_p2) {
            if v.len() != dim {
                return Err(SplitError::DimensionMismatch {
                    expected: dim,
                    got: v.len(),
                });
            }
        }
        let blocks: [(&'static str, &Vec<DVector<f64>>); 3] =
            [("h", &basis_h), ("p1", &basis_p1), ("p2", &basis_p2)];
        for a in 0..3 {
            for b in (a + 1)..3 {
                for x in blocks[a].1.iter() {
                    for y in blocks[b].1.iter() {
                        let ip = algebra.inner(x, y);
                        let scale = (algebra.inner(x, x) * algebra.inner(y, y))
                            .sqrt()
                            .max(1e-300);
                        if ip.abs() > 1e-10 * scale {
                            return Err(SplitError::NotOrthogonal(blocks[a].0, blocks[b].0, ip));
                        }
                    }
                }
            }
        }
        // jointly spanning: the assembled coefficient matrix is invertible
        let mut m = DMatrix::zeros(dim, dim);
        for (col, v) in basis_h.iter().chain(&basis_p1).chain(&basis_p2).enumerate() {
            m.set_column(col, v);
        }
        if m.lu().determinant().abs() < 1e-12 {
            return Err(SplitError::NotSpanning);
        }

        let inv_gram_h = invert(&gram(&algebra, &basis_h), "h")?;
        let inv_gram_p1 = invert(&gram(&algebra, &basis_p1), "p1")?;
        let inv_gram_p2 = invert(&gram(&algebra, &basis_p2), "p2")?;
        let split = ReductiveSplit {
            algebra,
            basis_h,
            basis_p1,
            basis_p2,
            inv_gram_h,
            inv_gram_p1,
            inv_gram_p2,
        };
        split.check_invariance()?;
        Ok(split)
    }

    fn check_invariance(&self) -> Result<(), SplitError> {
        let leak = |v: &DVector<f64>, keep: &[Component]| -> f64 {
            let mut kept = DVector::zeros(self.algebra.dim());
            for &c in keep {
                kept += self.project(v, c).unwrap();
            }
            let rest = v - kept;
            self.algebra.inner(&rest, &rest).sqrt()
        };
        let tol = 1e-9;
        for x in &self.basis_h {
            for y in &self.basis_h {
                let b = self.algebra.bracket(x, y);
                if leak(&b, &[Component::H]) > tol * (1.0 + b.norm()) {
                    return Err(SplitError::NotInvariant(
                        "h",
                        "h",
                        "p",
                        leak(&b, &[Component::H]),
                    ));
                }
            }
            for (name, comp, basis) in [
                ("p1", Component::P1, &self.basis_p1),
                ("p2", Component::P2, &self.basis_p2),
            ] {
                for y in basis.iter() {
                    let b = self.algebra.bracket(x, y);
                    let l = leak(&b, &[comp]);
                    if l > tol * (1.0 + b.norm()) {
                        return Err(SplitError::NotInvariant("h", name, "elsewhere", l));
                    }
                }
            }
        }
        for x in &self.basis_p2 {
            for y in &self.basis_p1 {
                let b = self.algebra.bracket(x, y);
                let l = leak(&b, &[Component::P1]);
                if l > tol * (1.0 + b.norm()) {
                    return Err(SplitError::NotInvariant("p2", "p1", "elsewhere", l));
                }
            }
            for y in &self.basis_p2 {
                let b = self.algebra.bracket(x, y);
                let l = leak(&b, &[Component::H, Component::P2]);
                if l > tol * (1.0 + b.norm()) {
                    return Err(SplitError::NotInvariant("p2", "p2", "p1", l));
                }
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.algebra.dim()
    }

    /// Basis of p = p1 + p2 (p1 first).
    pub fn basis_p(&self) -> Vec<&DVector<f64>> {
        self.basis_p1.iter().chain(&self.basis_p2).collect()
    }

    fn project_coeffs(
        &self,
        v: &DVector<f64>,
        basis: &[DVector<f64>],
        inv_gram: &DMatrix<f64>,
    ) -> DVector<f64> {
        let rhs =
            DVector::from_iterator(basis.len(), basis.iter().map(|b| self.algebra.inner(b, v)));
        inv_gram * rhs
    }

    fn assemble(&self, coeffs: &DVector<f64>, basis: &[DVector<f64>]) -> DVector<f64> {
        let mut out = DVector::zeros(self.algebra.dim());
        for (c, b) in coeffs.iter().zip(basis) {
            out += b * *c;
        }
        out
    }

    /// <.,.>-orthogonal projection onto the requested component.
    pub fn project(
        &self,
        v: &DVector<f64>,
        component: Component,
    ) -> Result<DVector<f64>, SplitError> {
        if v.len() != self.algebra.dim() {
            return Err(SplitError::DimensionMismatch {
                expected: self.algebra.dim(),
                got: v.len(),
            });
        }
        let one = |basis: &[DVector<f64>], ig: &DMatrix<f64>| {
            let c = self.project_coeffs(v, basis, ig);
            self.assemble(&c, basis)
        };
        Ok(match component {
            Component::H => one(&self.basis_h, &self.inv_gram_h),
            Component::P1 => one(&self.basis_p1, &self.inv_gram_p1),
            Component::P2 => one(&self.basis_p2, &self.inv_gram_p2),
            Component::P => {
                one(&self.basis_p1, &self.inv_gram_p1) + one(&self.basis_p2, &self.inv_gram_p2)
            }
        })
    }

    /// Coefficient-vector decomposition over the three block bases.
    pub fn decompose(&self, v: &DVector<f64>) -> Result<SplitVector, SplitError> {
        if v.len() != self.algebra.dim() {
            return Err(SplitError::DimensionMismatch {
                expected: self.algebra.dim(),
                got: v.len(),
            });
        }
        Ok(SplitVector {
            h_part: self.project_coeffs(v, &self.basis_h, &self.inv_gram_h),
            p1_part: self.project_coeffs(v, &self.basis_p1, &self.inv_gram_p1),
            p2_part: self.project_coeffs(v, &self.basis_p2, &self.inv_gram_p2),
        })
    }

    /// Reassembles a [`SplitVector`] into an ambient element.
    pub fn reassemble(&self, sv: &SplitVector) -> DVector<f64> {
        self.assemble(&sv.h_part, &self.basis_h)
            + self.assemble(&sv.p1_part, &self.basis_p1)
            + self.assemble(&sv.p2_part, &self.basis_p2)
    }

    fn check_in_p(&self, v: &DVector<f64>) -> Result<(), SplitError> {
        let h = self.project(v, Component::H)?;
        let hn = self.algebra.inner(&h, &h).sqrt();
        let vn = self.algebra.inner(v, v).sqrt();
        if hn > 1e-10 * (1.0 + vn) {
            return Err(SplitError::NotInP(hn));
        }
        Ok(())
    }
}

/// (X,Y) = x1 <X1,Y1> + x2 <X2,Y2>; both arguments must lie in p.
pub fn metric_inner<A: LieAlgebra>(
    split: &ReductiveSplit<A>,
    params: &MetricParams,
    x: &DVector<f64>,
    y: &DVector<f64>,
) -> Result<f64, SplitError> {
    split.check_in_p(x)?;
    split.check_in_p(y)?;
    Ok(metric_inner_raw(split, params, x, y))
}

/// The same bilinear form without the membership guard; h-components are
/// simply ignored. Used internally where elements are known p-projections.
pub fn metric_inner_raw<A: LieAlgebra>(
    split: &ReductiveSplit<A>,
    params: &MetricParams,
    x: &DVector<f64>,
    y: &DVector<f64>,
) -> f64 {
    let x1 = split.project(x, Component::P1).unwrap();
    let x2 = split.project(x, Component::P2).unwrap();
    let y1 = split.project(y, Component::P1).unwrap();
    let y2 = split.project(y, Component::P2).unwrap();
    params.x1 * split.algebra.inner(&x1, &y1) + params.x2 * split.algebra.inner(&x2, &y2)
}

/// The symmetric bilinear map U with
/// 2 (U(X,Y), Z) = ([Z,X]_p, Y) + (X, [Z,Y]_p) for all Z in p.
pub fn u_map<A: LieAlgebra>(
    split: &ReductiveSplit<A>,
    params: &MetricParams,
    x: &DVector<f64>,
    y: &DVector<f64>,
) -> Result<DVector<f64>, SplitError> {
    split.check_in_p(x)?;
    split.check_in_p(y)?;
    let p_basis = split.basis_p();
    let np = p_basis.len();
    let rhs = DVector::from_iterator(
        np,
        p_basis.iter().map(|z| {
            let zx = split
                .project(&split.algebra.bracket(z, x), Component::P)
                .unwrap();
            let zy = split
                .project(&split.algebra.bracket(z, y), Component::P)
                .unwrap();
            0.5 * (metric_inner_raw(split, params, &zx, y)
                + metric_inner_raw(split, params, x, &zy))
        }),
    );
    // Gram of the metric on the p basis.
    let m = DMatrix::from_fn(np, np, |i, j| {
        metric_inner_raw(split, params, p_basis[i], p_basis[j])
    });
    let coeffs = m
        .lu()
        .solve(&rhs)
        .ok_or(SplitError::SingularGram("p (metric)"))?;
    let mut out = DVector::zeros(split.algebra.dim());
    for (c, b) in coeffs.iter().zip(&p_basis) {
        out += *b * *c;
    }
    Ok(out)
}

/// Geodesic-vector test: W is geodesic when (W_p, [W, V]_p) = 0 for every V
/// in the p-basis. Returns the verdict and the worst normalized residual.
pub fn is_geodesic_vector<A: LieAlgebra>(
    split: &ReductiveSplit<A>,
    params: &MetricParams,
    w: &DVector<f64>,
) -> (bool, f64) {
    let wp = split.project(w, Component::P).unwrap();
    let wp_norm = metric_inner_raw(split, params, &wp, &wp).sqrt();
    if wp_norm == 0.0 {
        return (true, 0.0);
    }
    let mut worst: f64 = 0.0;
    for v in split.basis_p() {
        let wv = split
            .project(&split.algebra.bracket(w, v), Component::P)
            .unwrap();
        let val = metric_inner_raw(split, params, &wp, &wv);
        let v_norm = metric_inner_raw(split, params, v, v).sqrt();
        worst = worst.max(val.abs() / (wp_norm * wp_norm * v_norm));
    }
    (worst <= 1e-10, worst)
}

/// Solves for all Z in h with V + Z a geodesic vector:
/// (V, [Z, B_k]_p) = -(V, [V, B_k]_p) over the p-basis B_k.
///
/// Returns the affine solution family, or None when the system is
/// inconsistent (V admits no geodesic completion).
pub fn geodesic_completion<A: LieAlgebra>(
    split: &ReductiveSplit<A>,
    params: &MetricParams,
    v: &DVector<f64>,
) -> Result<Option<AffineFamily>, SplitError> {
    split.check_in_p(v)?;
    let p_basis = split.basis_p();
    let nh = split.basis_h.len();
    let np = p_basis.len();
    let mut a = DMatrix::zeros(np, nh);
    let mut b = DVector::zeros(np);
    for (k, bk) in p_basis.iter().enumerate() {
        for (j, hj) in split.basis_h.iter().enumerate() {
            let zb = split
                .project(&split.algebra.bracket(hj, bk), Component::P)
                .unwrap();
            a[(k, j)] = metric_inner_raw(split, params, v, &zb);
        }
        let vb = split
            .project(&split.algebra.bracket(v, bk), Component::P)
            .unwrap();
        b[k] = -metric_inner_raw(split, params, v, &vb);
    }

    let svd = a.clone().svd(true, true);
    let eps = 1e-10 * svd.singular_values.max().max(1.0);
    let particular = svd
        .solve(&b, eps)
        .map_err(|_| SplitError::SingularGram("completion"))?;
    let residual = (&a * &particular - &b).norm();
    if residual > 1e-9 * (1.0 + b.norm()) {
        return Ok(None);
    }

    // Kernel of A from the spectral decomposition of A^T A.
    let ata = a.transpose() * &a;
    let se = nalgebra::SymmetricEigen::new(ata);
    let lmax = se.eigenvalues.iter().cloned().fold(0.0f64, f64::max);
    let mut nullspace = Vec::new();
    for (i, &lam) in se.eigenvalues.iter().enumerate() {
        if lam <= 1e-18 * lmax.max(1.0) + 1e-14 {
            nullspace.push(DVector::from(se.eigenvectors.column(i).clone_owned()));
        }
    }

    // Coefficients over basis_h -> ambient h-elements.
    let to_ambient = |c: &DVector<f64>| {
        let mut out = DVector::zeros(split.algebra.dim());
        for (ci, hj) in c.iter().zip(&split.basis_h) {
            out += hj * *ci;
        }
        out
    };
    Ok(Some(AffineFamily {
        particular: to_ambient(&particular),
        nullspace_basis: nullspace.iter().map(to_ambient).collect(),
    }))
}

// ---------------------------------------------------------------------------
// Builders
// ---------------------------------------------------------------------------

/// Builds a split of an abstract bracket table by root sets: h gets the
/// whole torus plus the planes of `h_roots`, p1 / p2 the planes of the
/// other two lists. Roots may be given in either sign.
pub fn split_by_roots(
    table: &BracketTable,
    h_roots: &[RootVector],
    p1_roots: &[RootVector],
    p2_roots: &[RootVector],
) -> Result<ReductiveSplit<BracketTable>, SplitError> {
    let dim = table.dim();
    let unit = |i: usize| {
        let mut v = DVector::zeros(dim);
        v[i] = 1.0;
        v
    };
    let planes = |roots: &[RootVector]| -> Result<Vec<DVector<f64>>, SplitError> {
        let mut out = Vec::new();
        for r in roots {
            let pos = if r.is_positive() { r.clone() } else { r.neg() };
            let k = table
                .pos_roots
                .binary_search(&pos)
                .map_err(|_| SplitError::BadSpace(format!("{:?} is not a root", r.coords_f64())))?;
            out.push(unit(table.u_index(k)));
            out.push(unit(table.v_index(k)));
        }
        Ok(out)
    };
    let mut basis_h: Vec<DVector<f64>> = (0..table.rank).map(unit).collect();
    basis_h.extend(planes(h_roots)?);
    ReductiveSplit::new(table.clone(), basis_h, planes(p1_roots)?, planes(p2_roots)?)
}

/// On-disk description of a reductive split over so(n): coefficient vectors
/// over `so_basis(n)`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SpaceFile {
    pub algebra: String,
    pub h_basis: Vec<Vec<f64>>,
    pub p1_basis: Vec<Vec<f64>>,
    pub p2_basis: Vec<Vec<f64>>,
}

/// Loads a split over so(n) from its JSON description.
pub fn load_space(file: &SpaceFile) -> Result<ReductiveSplit<SoAlgebra>, SplitError> {
    let n: usize = file
        .algebra
        .strip_prefix("so")
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| SplitError::BadSpace(format!("unknown algebra '{}'", file.algebra)))?;
    let algebra = SoAlgebra::new(n).map_err(|e| SplitError::BadSpace(e.to_string()))?;
    let dim = algebra.dim();
    let conv = |rows: &Vec<Vec<f64>>| -> Result<Vec<DVector<f64>>, SplitError> {
        rows.iter()
            .map(|r| {
                if r.len() != dim {
                    Err(SplitError::DimensionMismatch {
                        expected: dim,
                        got: r.len(),
                    })
                } else {
                    Ok(DVector::from_vec(r.clone()))
                }
            })
            .collect()
    };
    ReductiveSplit::new(
        algebra,
        conv(&file.h_basis)?,
        conv(&file.p1_basis)?,
        conv(&file.p2_basis)?,
    )
}
