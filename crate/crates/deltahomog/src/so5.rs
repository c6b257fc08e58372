//! The SO(5)/U(2) case study: explicit u(2) + p1 + p2 split of so(5),
//! reduction to the 2-plane q, classification of geodesic vectors with
//! p-part in q, spectral certification of delta-vectors, and the phase
//! table of the two-parameter metric family, which is delta-homogeneous
//! exactly for x1 <= x2 <= 2 x1.

use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;
use thiserror::Error;

use crate::compact_lie::{exp_raw, GroupElement, LieAlgebra, SkewMatrix, SoAlgebra};
use crate::eig::symmetric_eigenvalues;
use crate::homogeneous_metric::{Component, MetricParams, ReductiveSplit, SplitError};
use crate::orbit_oracle::{
    is_delta_vector_numeric, DeltaCertificate, DeltaVerdict, OracleBudget, OracleError,
};

// Coefficient slots of so_basis(5): F12 F13 F14 F15 F23 F24 F25 F34 F35 F45.
pub const F12: usize = 0;
pub const F13: usize = 1;
pub const F14: usize = 2;
pub const F15: usize = 3;
pub const F23: usize = 4;
pub const F24: usize = 5;
pub const F25: usize = 6;
pub const F34: usize = 7;
pub const F35: usize = 8;
pub const F45: usize = 9;

#[derive(Debug, Error)]
pub enum So5Error {
    #[error("hypothesis violated: {0}")]
    HypothesisViolation(String),
    #[error("parameters ({0}, {1}) outside the delta-homogeneous range")]
    OutOfRange(f64, f64),
    #[error("p-part is not inside q (defect {0:.3e})")]
    NotInQ(f64),
    #[error(transparent)]
    Split(#[from] SplitError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
}

/// The space SO(5)/U(2) with a fixed metric parameter pair.
#[derive(Clone, Debug)]
pub struct So5Space {
    pub split: ReductiveSplit<SoAlgebra>,
    pub params: MetricParams,
}

pub fn elt(entries: &[(usize, f64)]) -> DVector<f64> {
    let mut v = DVector::zeros(10);
    for &(i, c) in entries {
        v[i] = c;
    }
    v
}

/// Builds the u(2) + p1 + p2 split of so(5) and verifies its invariants.
///
/// h = span{F13, F24, F12+F34, F14+F23}, p1 = span{F15, F25, F35, F45},
/// p2 = span{F12-F34, F14-F23}.
pub fn build_so5_u2(params: MetricParams) -> Result<So5Space, So5Error> {
    let algebra = SoAlgebra::new(5).expect("so(5)");
    let basis_h = vec![
        elt(&[(F13, 1.0)]),
        elt(&[(F24, 1.0)]),
        elt(&[(F12, 1.0), (F34, 1.0)]),
        elt(&[(F14, 1.0), (F23, 1.0)]),
    ];
    let basis_p1 = vec![
        elt(&[(F15, 1.0)]),
        elt(&[(F25, 1.0)]),
        elt(&[(F35, 1.0)]),
        elt(&[(F45, 1.0)]),
    ];
    let basis_p2 = vec![
        elt(&[(F12, 1.0), (F34, -1.0)]),
        elt(&[(F14, 1.0), (F23, -1.0)]),
    ];
    let split = ReductiveSplit::new(algebra, basis_h, basis_p1, basis_p2)?;
    Ok(So5Space { split, params })
}

impl So5Space {
    /// Coefficient of the p2 direction F12 - F34.
    fn q1_coeff(v: &DVector<f64>) -> f64 {
        0.5 * (v[F12] - v[F34])
    }

    /// Coefficient of the p2 direction F14 - F23 (the q-plane direction).
    fn q2_coeff(v: &DVector<f64>) -> f64 {
        0.5 * (v[F14] - v[F23])
    }
}

/// One zeroing rotation: finds t with target(Ad(exp(tH)) v) = 0 for a
/// coordinate that rotates harmonically under H, applies it, and returns
/// the group element together with the rotated vector.
fn rotate_to_zero(
    alg: &SoAlgebra,
    h: &DVector<f64>,
    v: &DVector<f64>,
    target: &fn(&DVector<f64>) -> f64,
) -> (DMatrix<f64>, DVector<f64>) {
    let h_mat = alg.coeffs_to_matrix(h).entries;
    let apply = |g: &DMatrix<f64>, v: &DVector<f64>| -> DVector<f64> {
        let m = g * alg.coeffs_to_matrix(v).entries * g.transpose();
        alg.matrix_to_coeffs(&SkewMatrix { entries: m })
    };
    let a = target(v);
    // the value a quarter turn away fixes the phase
    let quarter = exp_raw(&(&h_mat * std::f64::consts::FRAC_PI_2));
    let c = target(&apply(&quarter, v));
    let t = (-a).atan2(c);
    let g = exp_raw(&(&h_mat * t));
    let rotated = apply(&g, v);
    debug_assert!(target(&rotated).abs() <= 1e-9 * (1.0 + v.norm()));
    (g, rotated)
}

/// Moves V in p into the plane q = span{F15, F14 - F23} by an element of
/// U(2), preserving the metric norm.
pub fn reduce_to_q(
    space: &So5Space,
    v: &DVector<f64>,
) -> Result<(GroupElement, DVector<f64>), So5Error> {
    let split = &space.split;
    let h = split.project(v, Component::H)?;
    let hn = split.algebra.inner(&h, &h).sqrt();
    if hn > 1e-10 * (1.0 + v.norm()) {
        return Err(So5Error::Split(SplitError::NotInP(hn)));
    }
    let alg = &split.algebra;
    let mut cur = v.clone();
    let mut total = DMatrix::<f64>::identity(5, 5);
    // zero the p1 coefficients F35, F45, F25 in turn, then the p2
    // coefficient on F12 - F34
    type Target = fn(&DVector<f64>) -> f64;
    let steps: [(DVector<f64>, Target); 4] = [
        (elt(&[(F13, 1.0)]), |w| w[F35]),
        (elt(&[(F24, 1.0)]), |w| w[F45]),
        (elt(&[(F12, 1.0), (F34, 1.0)]), |w| w[F25]),
        (elt(&[(F24, 1.0)]), So5Space::q1_coeff),
    ];
    for (gen, target) in &steps {
        let (g, rotated) = rotate_to_zero(alg, gen, &cur, target);
        total = g * total;
        cur = rotated;
    }
    Ok((GroupElement { entries: total }, cur))
}

/// Geodesic vectors with p-part in q, following the three-family
/// classification (valid for x1 != x2, x2 != 2 x1).
#[derive(Clone, Debug, PartialEq)]
pub enum GeodesicFamily {
    /// W = b F15 + (x2/x1) c F14 + ((x2-2x1)/x1) c F23, b != 0, c != 0.
    One {
        b: f64,
        c: f64,
    },
    /// W = d (F14-F23) + a1 (F12+F34) + a2 (F14+F23) + a3 (F13-F24), d != 0.
    Two {
        d: f64,
        a1: f64,
        a2: f64,
        a3: f64,
    },
    /// W = e F15 + f F24, e != 0.
    Three {
        e: f64,
        f: f64,
    },
    NotGeodesic,
}

/// Matches W (with p-part in q) against the three geodesic families.
pub fn classify_geodesic(space: &So5Space, w: &DVector<f64>) -> Result<GeodesicFamily, So5Error> {
    let params = &space.params;
    if params.near_equal() {
        return Err(So5Error::HypothesisViolation("x1 = x2".into()));
    }
    if (params.x2 - 2.0 * params.x1).abs() <= 1e-8 * params.x1.max(params.x2) {
        return Err(So5Error::HypothesisViolation("x2 = 2 x1".into()));
    }
    let tol = 1e-9 * (1.0 + w.norm());
    // p-part must lie in q
    let off_q = w[F25].abs() + w[F35].abs() + w[F45].abs() + So5Space::q1_coeff(w).abs();
    if off_q > tol {
        return Err(So5Error::NotInQ(off_q));
    }
    let b = w[F15];
    let c = So5Space::q2_coeff(w);
    let z13 = w[F13];
    let z24 = w[F24];
    let z12p34 = 0.5 * (w[F12] + w[F34]);
    let z14p23 = 0.5 * (w[F14] + w[F23]);
    let (x1, x2) = (params.x1, params.x2);

    if b.abs() > tol && c.abs() > tol {
        let expected = (x2 - x1) / x1 * c;
        if z13.abs() <= tol
            && z24.abs() <= tol
            && z12p34.abs() <= tol
            && (z14p23 - expected).abs() <= tol
        {
            return Ok(GeodesicFamily::One { b, c });
        }
        return Ok(GeodesicFamily::NotGeodesic);
    }
    if b.abs() <= tol && c.abs() > tol {
        if (z13 + z24).abs() <= tol {
            return Ok(GeodesicFamily::Two {
                d: c,
                a1: z12p34,
                a2: z14p23,
                a3: z13,
            });
        }
        return Ok(GeodesicFamily::NotGeodesic);
    }
    if b.abs() > tol && c.abs() <= tol {
        if z13.abs() <= tol && z12p34.abs() <= tol && z14p23.abs() <= tol {
            return Ok(GeodesicFamily::Three { e: b, f: z24 });
        }
        return Ok(GeodesicFamily::NotGeodesic);
    }
    Ok(GeodesicFamily::NotGeodesic)
}

/// The delta-vector candidate
/// W = b F15 + (x2/x1) c F14 + ((x2-2x1)/x1) c F23.
pub fn candidate_w(b: f64, c: f64, params: &MetricParams) -> DVector<f64> {
    let (x1, x2) = (params.x1, params.x2);
    elt(&[
        (F15, b),
        (F14, x2 / x1 * c),
        (F23, (x2 - 2.0 * x1) / x1 * c),
    ])
}

/// A vector the oracle can refute when the parameters leave [x1, 2x1].
///
/// Above the range, candidate_w(1,1) stops being a delta-vector. Below it
/// the roles of the blocks flip and candidate_w keeps maximizing its own
/// orbit, so the witness is taken on the p2 root vector F14 - F23 instead:
/// its orbit contains mixed configurations of strictly larger projected
/// norm once x2 < x1, and no h-completion can repair that.
pub fn refutation_candidate(params: &MetricParams) -> DVector<f64> {
    if params.x2 > params.x1 {
        candidate_w(1.0, 1.0, params)
    } else {
        elt(&[(F14, 1.0), (F23, -1.0)])
    }
}

/// Eigenvalues of -W^2, sorted ascending with multiplicities.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpectralSignature {
    pub eigenvalues: Vec<f64>,
}

/// Spectral signature of a 5x5 skew matrix: the sorted eigenvalues of the
/// positive semidefinite matrix -W^2, computed by cyclic Jacobi iteration.
pub fn spectral_signature(w: &SkewMatrix) -> SpectralSignature {
    assert_eq!(w.n(), 5, "the case study works on so(5)");
    let m = -(&w.entries * &w.entries);
    let eigenvalues = symmetric_eigenvalues(&m);
    // odd-dimensional skew matrices are singular
    debug_assert!(eigenvalues[0] >= -1e-10);
    debug_assert!(eigenvalues[0] <= 1e-10 * (1.0 + eigenvalues[4]));
    SpectralSignature { eigenvalues }
}

/// The analytic eigenvalues of -candidate_w^2:
/// {0, c^2(2x1-x2)^2/x1^2 (x2), (b^2x1^2+c^2x2^2)/x1^2 (x2)}.
pub fn analytic_signature(b: f64, c: f64, params: &MetricParams) -> SpectralSignature {
    let (x1, x2) = (params.x1, params.x2);
    let small = c * c * (2.0 * x1 - x2).powi(2) / (x1 * x1);
    let big = (b * b * x1 * x1 + c * c * x2 * x2) / (x1 * x1);
    let mut eigenvalues = vec![0.0, small, small, big, big];
    eigenvalues.sort_by(|a, b| a.partial_cmp(b).unwrap());
    SpectralSignature { eigenvalues }
}

/// Strict inequality
/// (|c|(2x1-x2) + sqrt(b^2 x1^2 + c^2 x2^2))^2 x2 < 2 x1^2 (x1 b^2 + 2 x2 c^2),
/// valid for b != 0, x1 != 0 and x2 < 2 x1 (x2 may be nonpositive; the
/// left side is then nonpositive while the right side is positive).
pub fn sim_inequality_values(b: f64, c: f64, x1: f64, x2: f64) -> Result<bool, So5Error> {
    if b == 0.0 {
        return Err(So5Error::HypothesisViolation("b = 0".into()));
    }
    if x1 == 0.0 {
        return Err(So5Error::HypothesisViolation("x1 = 0".into()));
    }
    if 2.0 * x1 <= x2 {
        return Err(So5Error::HypothesisViolation("2 x1 <= x2".into()));
    }
    let lhs = (c.abs() * (2.0 * x1 - x2) + (b * b * x1 * x1 + c * c * x2 * x2).sqrt()).powi(2) * x2;
    let rhs = 2.0 * x1 * x1 * (x1 * b * b + 2.0 * x2 * c * c);
    Ok(lhs < rhs)
}

/// [`sim_inequality_values`] on a metric pair.
pub fn sim_inequality(b: f64, c: f64, params: &MetricParams) -> Result<bool, So5Error> {
    sim_inequality_values(b, c, params.x1, params.x2)
}

/// Certifies candidate_w(b, c) as a delta-vector for x1 < x2 < 2 x1 by the
/// spectral-signature analysis over the three geodesic families.
///
/// Case 1 reduces to the same (b, c) up to signs and gives the same norm;
/// case 2 is bounded through the strict inequality of `sim_inequality`;
/// case 3 puts all the mass on a single rotation plane. Every family tops
/// out at or below (W_p, W_p), so the candidate's projected norm is maximal
/// on its orbit.
pub fn verify_delta_vector_spectral(
    space: &So5Space,
    b: f64,
    c: f64,
) -> Result<DeltaCertificate, So5Error> {
    let params = &space.params;
    let (x1, x2) = (params.x1, params.x2);
    if !(x1 < x2 && x2 < 2.0 * x1) {
        return Err(So5Error::HypothesisViolation(format!(
            "need x1 < x2 < 2 x1, got ({x1}, {x2})"
        )));
    }
    let w = candidate_w(b, c, params);
    let w_mat = space.split.algebra.coeffs_to_matrix(&w);
    let analytic = analytic_signature(b, c, params);
    let numeric = spectral_signature(&w_mat);
    let lam_small = analytic.eigenvalues[1];
    let lam_big = analytic.eigenvalues[4];
    let sig_tol = 1e-9 * (1.0 + lam_big);
    let agree = numeric
        .eigenvalues
        .iter()
        .zip(&analytic.eigenvalues)
        .all(|(n, a)| (n - a).abs() <= sig_tol);
    if !agree {
        return Ok(DeltaCertificate {
            verdict: DeltaVerdict::Inconclusive,
            excess: f64::NAN,
            witness: None,
            evaluations: 1,
        });
    }

    // (W_p, W_p) = x1 b^2 + 2 x2 c^2
    let np = x1 * b * b + 2.0 * x2 * c * c;
    // family 1: |b~| = |b|, |c~| = |c|, equal norm
    let case1 = np;
    // family 2: 2|d| <= (|c|(2x1-x2) + sqrt(b^2x1^2+c^2x2^2))/x1
    let d_max =
        (c.abs() * (2.0 * x1 - x2) + (b * b * x1 * x1 + c * c * x2 * x2).sqrt()) / (2.0 * x1);
    let case2 = 2.0 * x2 * d_max * d_max;
    // family 3: e^2 is one of the nonzero eigenvalues
    let case3 = x1 * lam_small.max(lam_big);
    let sup_families = case1.max(case2).max(case3);
    let verdict = if sup_families <= np + 1e-10 * (1.0 + np) {
        DeltaVerdict::Confirmed
    } else {
        // the analysis itself shows a strictly better family: cannot happen
        // inside the open interval
        DeltaVerdict::Inconclusive
    };
    Ok(DeltaCertificate {
        verdict,
        excess: case2.max(case3) - np,
        witness: None,
        evaluations: 1,
    })
}

/// One row of the phase table emitted by [`verify_theorem_main`].
#[derive(Clone, Debug, Serialize)]
pub struct PhaseRow {
    pub ratio: f64,
    #[serde(rename = "verdict")]
    pub delta_homogeneous: bool,
    pub method: String,
    pub worst_excess: f64,
    pub runtime_ms: u128,
}

/// Default (b, c) certification grid: {+-0.5, +-1, +-2}^2.
pub fn default_grid() -> Vec<(f64, f64)> {
    let vals = [-2.0, -1.0, -0.5, 0.5, 1.0, 2.0];
    let mut grid = Vec::new();
    for &b in &vals {
        for &c in &vals {
            grid.push((b, c));
        }
    }
    grid
}

/// Evaluates the delta-homogeneity verdict for each x2/x1 ratio.
///
/// Interior ratios are confirmed spectrally on the (b, c) grid; the
/// boundary ratios 1 and 2 are the normal cases (SO(5)- and SO(6)-normal
/// respectively); ratios outside [1, 2] violate the parameter-range
/// inequality and the oracle is run on candidate_w(1, 1) to record an
/// explicit witness.
pub fn verify_theorem_main(
    ratios: &[f64],
    budget: &OracleBudget,
) -> Result<Vec<PhaseRow>, So5Error> {
    let boundary_tol = 1e-9;
    let mut rows = Vec::with_capacity(ratios.len());
    for &ratio in ratios {
        let start = Instant::now();
        if ratio <= 0.0 || ratio.is_nan() {
            return Err(So5Error::OutOfRange(1.0, ratio));
        }
        let params = MetricParams::new(1.0, ratio)?;
        let space = build_so5_u2(params)?;
        let row = if (ratio - 1.0).abs() <= boundary_tol {
            PhaseRow {
                ratio,
                delta_homogeneous: true,
                method: "boundary/normal (SO(5))".into(),
                worst_excess: 0.0,
                runtime_ms: 0,
            }
        } else if (ratio - 2.0).abs() <= 2.0 * boundary_tol {
            PhaseRow {
                ratio,
                delta_homogeneous: true,
                method: "boundary/normal (SO(6))".into(),
                worst_excess: 0.0,
                runtime_ms: 0,
            }
        } else if ratio > 1.0 && ratio < 2.0 {
            let mut worst = f64::NEG_INFINITY;
            let mut all_confirmed = true;
            for &(b, c) in &default_grid() {
                let cert = verify_delta_vector_spectral(&space, b, c)?;
                all_confirmed &= cert.verdict == DeltaVerdict::Confirmed;
                worst = worst.max(cert.excess);
            }
            PhaseRow {
                ratio,
                delta_homogeneous: all_confirmed,
                method: "spectral (three-family certification)".into(),
                worst_excess: worst,
                runtime_ms: 0,
            }
        } else {
            // outside [1, 2]: the parameter-range inequality refutes;
            // the oracle supplies an explicit witness
            let tol = crate::delta_conditions::CheckTolerances::default();
            let range = crate::delta_conditions::param_range_check(&params, &tol);
            debug_assert!(!range.holds);
            let w = refutation_candidate(&params);
            let cert = is_delta_vector_numeric(&space.split, &params, &w, budget)?;
            let method = match cert.verdict {
                DeltaVerdict::Refuted => "refuted (parameter range; oracle witness)",
                _ => "refuted (parameter range)",
            };
            PhaseRow {
                ratio,
                delta_homogeneous: false,
                method: method.into(),
                worst_excess: cert.excess,
                runtime_ms: 0,
            }
        };
        rows.push(PhaseRow {
            runtime_ms: start.elapsed().as_millis(),
            ..row
        });
    }
    Ok(rows)
}

/// The exact pinch constant (x2 / 4 x1)^2 of the delta-homogeneous metrics.
pub fn pinch_constant(params: &MetricParams) -> Result<f64, So5Error> {
    let (x1, x2) = (params.x1, params.x2);
    if !(x1 <= x2 && x2 <= 2.0 * x1) {
        return Err(So5Error::OutOfRange(x1, x2));
    }
    Ok((x2 / (4.0 * x1)).powi(2))
}
