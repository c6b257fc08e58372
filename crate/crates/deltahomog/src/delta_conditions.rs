//! The algebraic necessary conditions for delta-homogeneity: the
//! second-order orbit conditions, the geodesic-vector equalities for
//! two-parameter metrics, the double-bracket inequality and the parameter
//! range x1 < x2 <= 2 x1.
//!
//! Every check returns a [`ConditionReport`] with a scale-covariant
//! residual: verdicts do not change under joint rescaling of (x1, x2) or of
//! the tested vectors.

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::compact_lie::{LieAlgebra, SoAlgebra};
use crate::homogeneous_metric::{
    metric_inner_raw, Component, MetricParams, ReductiveSplit, SplitError,
};
use crate::orbit_oracle::{is_delta_vector_numeric, DeltaCertificate, OracleBudget, OracleError};

#[derive(Debug, Error)]
pub enum ConditionError {
    #[error("x1 and x2 are too close; the formula needs 1/(x2-x1)")]
    NearEqualParams,
    #[error(transparent)]
    Split(#[from] SplitError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
}

/// Default tolerances: 1e-10 relative for equalities, 1e-9 relative slack
/// for inequalities.
#[derive(Clone, Copy, Debug)]
pub struct CheckTolerances {
    pub equality: f64,
    pub inequality: f64,
}

impl Default for CheckTolerances {
    fn default() -> Self {
        CheckTolerances {
            equality: 1e-10,
            inequality: 1e-9,
        }
    }
}

/// Outcome of one condition evaluation.
#[derive(Clone, Debug, Serialize)]
pub struct ConditionReport {
    pub condition_id: String,
    pub holds: bool,
    pub worst_residual: f64,
    /// Element(s) achieving the worst residual, as ambient coefficient
    /// vectors.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Vec<Vec<f64>>>,
}

impl ConditionReport {
    fn new(id: &str, holds: bool, worst: f64, witness: Option<Vec<DVector<f64>>>) -> Self {
        ConditionReport {
            condition_id: id.to_string(),
            holds,
            worst_residual: worst,
            witness: witness.map(|ws| ws.iter().map(|w| w.iter().cloned().collect()).collect()),
        }
    }
}

/// Both reports of the second-order orbit condition: the first-order
/// equality and the second-order inequality.
#[derive(Clone, Debug, Serialize)]
pub struct NcdoReport {
    pub rav2: ConditionReport,
    pub rav3: ConditionReport,
}

/// Default direction set: the full ambient basis plus 64 seeded random unit
/// directions (the inequality is quadratic in the direction, so basis
/// directions alone cannot refute it).
pub fn default_directions<A: LieAlgebra>(algebra: &A, seed: u64) -> Vec<DVector<f64>> {
    let dim = algebra.dim();
    let mut dirs: Vec<DVector<f64>> = (0..dim)
        .map(|i| {
            let mut v = DVector::zeros(dim);
            v[i] = 1.0;
            v
        })
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..64 {
        let mut v: DVector<f64> = DVector::from_fn(dim, |_, _| rng.gen_range(-1.0..1.0));
        let n = v.norm();
        if n > 1e-9 {
            v /= n;
            dirs.push(v);
        }
    }
    dirs
}

/// Second-order conditions at the maximum of the displacement:
/// (V, [X, V+U]_p) = 0 and (V, [X,[X,V+U]]_p) + |[X,V+U]_p|^2 <= 0
/// for every direction X.
pub fn ncdo_check<A: LieAlgebra>(
    split: &ReductiveSplit<A>,
    params: &MetricParams,
    v: &DVector<f64>,
    u: &DVector<f64>,
    directions: Option<&[DVector<f64>]>,
    tol: &CheckTolerances,
) -> Result<NcdoReport, ConditionError> {
    let defaults;
    let dirs = match directions {
        Some(d) => d,
        None => {
            defaults = default_directions(&split.algebra, 0x6e63646f);
            &defaults
        }
    };
    let w = v + u;
    let v_norm2 = metric_inner_raw(split, params, v, v).max(1e-300);

    let mut worst2: f64 = 0.0;
    let mut worst2_dir: Option<DVector<f64>> = None;
    let mut worst3 = f64::NEG_INFINITY;
    let mut worst3_dir: Option<DVector<f64>> = None;
    for x in dirs {
        let x_norm2 = split.algebra.inner(x, x).max(1e-300);
        let xw = split.algebra.bracket(x, &w);
        let xw_p = split.project(&xw, Component::P)?;
        let r2 = metric_inner_raw(split, params, v, &xw_p).abs() / (v_norm2 * x_norm2.sqrt());
        if r2 > worst2 {
            worst2 = r2;
            worst2_dir = Some(x.clone());
        }
        let xxw = split.algebra.bracket(x, &xw);
        let xxw_p = split.project(&xxw, Component::P)?;
        let r3 = (metric_inner_raw(split, params, v, &xxw_p)
            + metric_inner_raw(split, params, &xw_p, &xw_p))
            / (v_norm2 * x_norm2);
        if r3 > worst3 {
            worst3 = r3;
            worst3_dir = Some(x.clone());
        }
    }

    Ok(NcdoReport {
        rav2: ConditionReport::new(
            "rav2",
            worst2 <= tol.equality,
            worst2,
            worst2_dir.map(|d| vec![d]),
        ),
        rav3: ConditionReport::new(
            "rav3",
            worst3 <= tol.inequality,
            worst3,
            worst3_dir.map(|d| vec![d]),
        ),
    })
}

/// Geodesic-vector equalities for W = X + Y + Z:
/// [Z,Y] = 0 and [X,Y] = (x1/(x2-x1)) [X,Z].
pub fn t31_4_check<A: LieAlgebra>(
    split: &ReductiveSplit<A>,
    params: &MetricParams,
    x: &DVector<f64>,
    y: &DVector<f64>,
    z: &DVector<f64>,
    tol: &CheckTolerances,
) -> Result<ConditionReport, ConditionError> {
    if params.near_equal() {
        return Err(ConditionError::NearEqualParams);
    }
    let alg = &split.algebra;
    let norm = |v: &DVector<f64>| alg.inner(v, v).sqrt();
    let zy = alg.bracket(z, y);
    let r1 = norm(&zy) / (norm(z) * norm(y)).max(1e-300);
    let xy = alg.bracket(x, y);
    let xz = alg.bracket(x, z);
    let factor = params.x1 / (params.x2 - params.x1);
    let resid = &xy - &xz * factor;
    let scale = (norm(x) * (norm(y) + norm(z) * factor.abs())).max(1e-300);
    let r2 = norm(&resid) / scale;
    let worst = r1.max(r2);
    Ok(ConditionReport::new(
        "t31.4",
        worst <= tol.equality,
        worst,
        Some(vec![x.clone(), y.clone(), z.clone()]),
    ))
}

/// The seven-term delta-vector inequality in the direction U in p1.
pub fn t31_5_check<A: LieAlgebra>(
    split: &ReductiveSplit<A>,
    params: &MetricParams,
    x: &DVector<f64>,
    y: &DVector<f64>,
    z: &DVector<f64>,
    u: &DVector<f64>,
    tol: &CheckTolerances,
) -> Result<ConditionReport, ConditionError> {
    let alg = &split.algebra;
    let (x1, x2) = (params.x1, params.x2);
    let ux = alg.bracket(u, x);
    let uy = alg.bracket(u, y);
    let uz = alg.bracket(u, z);
    let ux_h = split.project(&ux, Component::H)?;
    let ux_p2 = split.project(&ux, Component::P2)?;
    let total = -x1 * alg.inner(&ux_h, &ux_h)
        + (x2 - x1) * alg.inner(&ux_p2, &ux_p2)
        + (x1 - x2) * alg.inner(&uy, &ux)
        + (x1 - x2) * alg.inner(&uy, &uy)
        + x1 * alg.inner(&ux, &uz)
        + (2.0 * x1 - x2) * alg.inner(&uy, &uz)
        + x1 * alg.inner(&uz, &uz);
    let scale =
        x1.max(x2) * alg.inner(u, u) * (alg.inner(x, x) + alg.inner(y, y) + alg.inner(z, z));
    let worst = total / scale.max(1e-300);
    Ok(ConditionReport::new(
        "t31.5",
        worst <= tol.inequality,
        worst,
        Some(vec![u.clone()]),
    ))
}

/// Specialization of the seven-term inequality to X = 0.
pub fn nado1_value<A: LieAlgebra>(
    split: &ReductiveSplit<A>,
    params: &MetricParams,
    y: &DVector<f64>,
    z: &DVector<f64>,
    u: &DVector<f64>,
) -> f64 {
    let alg = &split.algebra;
    let (x1, x2) = (params.x1, params.x2);
    let uy = alg.bracket(u, y);
    let uz = alg.bracket(u, z);
    (x1 - x2) * alg.inner(&uy, &uy)
        + (2.0 * x1 - x2) * alg.inner(&uy, &uz)
        + x1 * alg.inner(&uz, &uz)
}

/// Infinitesimal double-bracket inequality for X in p1, Y in p2:
/// x1 |[[Y,X],X]_h|^2 >= (x2-x1) |[[Y,X],X]_{p2}|^2.
pub fn t31_9n_check<A: LieAlgebra>(
    split: &ReductiveSplit<A>,
    params: &MetricParams,
    x: &DVector<f64>,
    y: &DVector<f64>,
    tol: &CheckTolerances,
) -> Result<ConditionReport, ConditionError> {
    let alg = &split.algebra;
    let yx = alg.bracket(y, x);
    let yxx = alg.bracket(&yx, x);
    let h_part = split.project(&yxx, Component::H)?;
    let p2_part = split.project(&yxx, Component::P2)?;
    let lhs = (params.x2 - params.x1) * alg.inner(&p2_part, &p2_part)
        - params.x1 * alg.inner(&h_part, &h_part);
    let scale = params.x1.max(params.x2) * alg.inner(x, x).powi(2) * alg.inner(y, y);
    let worst = lhs / scale.max(1e-300);
    Ok(ConditionReport::new(
        "t31.9n",
        worst <= tol.inequality,
        worst,
        Some(vec![x.clone(), y.clone()]),
    ))
}

/// The a priori parameter range for the non-normal case: x1 < x2 <= 2 x1.
pub fn param_range_check(params: &MetricParams, tol: &CheckTolerances) -> ConditionReport {
    let scale = params.x1.max(params.x2);
    let worst = (params.x1 - params.x2).max(params.x2 - 2.0 * params.x1) / scale;
    let holds = params.x1 < params.x2 && params.x2 <= 2.0 * params.x1 * (1.0 + tol.inequality);
    ConditionReport::new("param_range", holds, worst, None)
}

/// Delta-vector query by orbit search (one-sided: can refute, cannot prove).
pub fn delta_vector_check(
    split: &ReductiveSplit<SoAlgebra>,
    params: &MetricParams,
    w: &DVector<f64>,
    budget: &OracleBudget,
) -> Result<DeltaCertificate, ConditionError> {
    Ok(is_delta_vector_numeric(split, params, w, budget)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compact_lie::SoAlgebra;
    use crate::homogeneous_metric::ReductiveSplit;
    use crate::orbit_oracle::DeltaVerdict;
    use crate::root_systems::{build_bracket_table, build_root_system, Family, RootVector};

    fn so5_u2() -> ReductiveSplit<SoAlgebra> {
        let alg = SoAlgebra::new(5).unwrap();
        let e = |entries: &[(usize, f64)]| {
            let mut v = DVector::zeros(10);
            for &(i, c) in entries {
                v[i] = c;
            }
            v
        };
        ReductiveSplit::new(
            alg,
            vec![
                e(&[(1, 1.0)]),
                e(&[(5, 1.0)]),
                e(&[(0, 1.0), (7, 1.0)]),
                e(&[(2, 1.0), (4, 1.0)]),
            ],
            vec![
                e(&[(3, 1.0)]),
                e(&[(6, 1.0)]),
                e(&[(8, 1.0)]),
                e(&[(9, 1.0)]),
            ],
            vec![e(&[(0, 1.0), (7, -1.0)]), e(&[(2, 1.0), (4, -1.0)])],
        )
        .unwrap()
    }

    fn ev(entries: &[(usize, f64)]) -> DVector<f64> {
        let mut v = DVector::zeros(10);
        for &(i, c) in entries {
            v[i] = c;
        }
        v
    }

    fn tol() -> CheckTolerances {
        CheckTolerances::default()
    }

    #[test]
    fn ncdo_holds_on_h_directions_for_any_metric() {
        let split = so5_u2();
        let params = MetricParams::new(1.0, 3.7).unwrap();
        let v = ev(&[(3, 0.8), (2, 0.4), (4, -0.4)]);
        let u = ev(&[(1, 0.9), (0, -0.2), (7, -0.2)]);
        // directions restricted to h
        let dirs: Vec<DVector<f64>> = split.basis_h.clone();
        let report = ncdo_check(&split, &params, &v, &u, Some(&dirs), &tol()).unwrap();
        assert!(report.rav2.holds, "rav2 {}", report.rav2.worst_residual);
        assert!(report.rav3.holds, "rav3 {}", report.rav3.worst_residual);
    }

    #[test]
    fn ncdo_on_the_completed_candidate() {
        let split = so5_u2();
        // V = F15 + (F14 - F23), U = 0.5 (F14 + F23): the geodesic
        // completion at x2 = 1.5
        let v = ev(&[(3, 1.0), (2, 1.0), (4, -1.0)]);
        let u = ev(&[(2, 0.5), (4, 0.5)]);
        let params = MetricParams::new(1.0, 1.5).unwrap();
        let report = ncdo_check(&split, &params, &v, &u, None, &tol()).unwrap();
        assert!(report.rav2.holds, "rav2 {}", report.rav2.worst_residual);
        assert!(report.rav3.holds, "rav3 {}", report.rav3.worst_residual);
        // same V with the completion for x2 = 2.5 violates the inequality
        let params_out = MetricParams::new(1.0, 2.5).unwrap();
        let u_out = ev(&[(2, 1.5), (4, 1.5)]);
        let report = ncdo_check(&split, &params_out, &v, &u_out, None, &tol()).unwrap();
        assert!(report.rav2.holds, "rav2 {}", report.rav2.worst_residual);
        assert!(
            !report.rav3.holds,
            "rav3 should fail, residual {}",
            report.rav3.worst_residual
        );
    }

    #[test]
    fn t31_4_examples() {
        let split = so5_u2();
        let params = MetricParams::new(1.0, 1.5).unwrap();
        let c = 0.7;
        let x = ev(&[(3, 1.0)]);
        let y = ev(&[(2, c), (4, -c)]);
        // Z = ((x2-x1)/x1) c (F14+F23)
        let z = ev(&[(2, 0.5 * c), (4, 0.5 * c)]);
        let rep = t31_4_check(&split, &params, &x, &y, &z, &tol()).unwrap();
        assert!(rep.holds, "residual {}", rep.worst_residual);
        // Z = c F13 makes [Z,Y] nonzero
        let z_bad = ev(&[(1, c)]);
        let rep = t31_4_check(&split, &params, &x, &y, &z_bad, &tol()).unwrap();
        assert!(!rep.holds);
        // commuting X, Y with Z = 0
        let rep = t31_4_check(
            &split,
            &params,
            &ev(&[(3, 1.0)]),
            &DVector::zeros(10),
            &DVector::zeros(10),
            &tol(),
        )
        .unwrap();
        assert!(rep.holds);
        // near-equal parameters are rejected
        let near = MetricParams::new(1.0, 1.0 + 1e-12).unwrap();
        assert!(matches!(
            t31_4_check(&split, &near, &x, &y, &z, &tol()),
            Err(ConditionError::NearEqualParams)
        ));
    }

    #[test]
    fn t31_5_examples_and_nado1_specialization() {
        let split = so5_u2();
        let params = MetricParams::new(1.0, 1.5).unwrap();
        // zero data: trivially holds
        let zero = DVector::zeros(10);
        let rep = t31_5_check(
            &split,
            &params,
            &zero,
            &zero,
            &zero,
            &ev(&[(3, 1.0)]),
            &tol(),
        )
        .unwrap();
        assert!(rep.holds);
        // X = 0 specialization equals the nado1 expression
        let y = ev(&[(2, 0.8), (4, -0.8)]);
        let z = ev(&[(1, 0.5), (5, -0.25)]);
        let u = ev(&[(3, 1.0), (6, -0.6)]);
        let rep = t31_5_check(&split, &params, &zero, &y, &z, &u, &tol()).unwrap();
        let direct = nado1_value(&split, &params, &y, &z, &u);
        let scale = params.x2
            * split.algebra.inner(&u, &u)
            * (split.algebra.inner(&y, &y) + split.algebra.inner(&z, &z));
        assert!((rep.worst_residual - direct / scale).abs() < 1e-12);
        // the delta-vector of the case study at x2 = 1.5 passes for all
        // p1 basis directions
        let w_x = ev(&[(3, 1.0)]);
        let w_y = ev(&[(2, 1.0), (4, -1.0)]);
        let w_z = ev(&[(2, 0.5), (4, 0.5)]);
        for u in &split.basis_p1 {
            let rep = t31_5_check(&split, &params, &w_x, &w_y, &w_z, u, &tol()).unwrap();
            assert!(rep.holds, "residual {}", rep.worst_residual);
        }
    }

    #[test]
    fn t31_9n_on_the_abstract_b2_model_detects_the_boundary() {
        let rs = build_root_system(Family::B, 2).unwrap();
        let table = build_bracket_table(&rs).unwrap();
        let e1me2 = RootVector::from_ints(&[1, -1]);
        let e1pe2 = RootVector::from_ints(&[1, 1]);
        let e1 = RootVector::from_ints(&[1, 0]);
        let e2 = RootVector::from_ints(&[0, 1]);
        let p1_roots = [e1, e2.clone()];
        let p2_roots = [e1pe2.clone()];
        let split =
            crate::homogeneous_metric::split_by_roots(&table, &[e1me2], &p1_roots, &p2_roots)
                .unwrap();
        // X = u_{beta} with beta = -e2 (u is even in the root), Y = u_{alpha}
        let k_beta = table.pos_roots.binary_search(&e2).unwrap();
        let k_alpha = table.pos_roots.binary_search(&e1pe2).unwrap();
        let mut x = DVector::zeros(table.dim());
        x[table.u_index(k_beta)] = 1.0;
        let mut y = DVector::zeros(table.dim());
        y[table.u_index(k_alpha)] = 1.0;
        for (ratio, expect) in [
            (1.0, true),
            (1.5, true),
            (2.0, true),
            (2.05, false),
            (2.5, false),
        ] {
            let params = MetricParams::new(1.0, ratio).unwrap();
            let rep = t31_9n_check(&split, &params, &x, &y, &tol()).unwrap();
            assert_eq!(rep.holds, expect, "ratio {ratio}: {}", rep.worst_residual);
        }
        // commuting pair: both sides vanish
        let params = MetricParams::new(1.0, 1.5).unwrap();
        let rep = t31_9n_check(&split, &params, &DVector::zeros(table.dim()), &y, &tol()).unwrap();
        assert!(rep.holds);
    }

    #[test]
    fn param_range_examples() {
        let t = tol();
        assert!(param_range_check(&MetricParams::new(1.0, 1.5).unwrap(), &t).holds);
        assert!(param_range_check(&MetricParams::new(1.0, 2.0).unwrap(), &t).holds);
        assert!(!param_range_check(&MetricParams::new(1.0, 0.5).unwrap(), &t).holds);
        assert!(!param_range_check(&MetricParams::new(1.0, 2.5).unwrap(), &t).holds);
        // scale covariance
        assert!(param_range_check(&MetricParams::new(3.0, 4.5).unwrap(), &t).holds);
        assert!(!param_range_check(&MetricParams::new(3.0, 7.5).unwrap(), &t).holds);
    }

    #[test]
    fn delta_vector_check_scale_covariance() {
        let split = so5_u2();
        let budget = OracleBudget {
            restarts: 8,
            steps_per_restart: 120,
            step_size: 0.1,
            seed: 11,
        };
        let w = ev(&[(3, 1.0), (2, 2.5), (4, 0.5)]);
        let v1 =
            delta_vector_check(&split, &MetricParams::new(1.0, 2.5).unwrap(), &w, &budget).unwrap();
        let v2 = delta_vector_check(
            &split,
            &MetricParams::new(2.0, 5.0).unwrap(),
            &(&w * 3.0),
            &budget,
        )
        .unwrap();
        assert_eq!(v1.verdict, DeltaVerdict::Refuted);
        assert_eq!(v2.verdict, DeltaVerdict::Refuted);
    }

    #[test]
    fn plausible_delta_vectors_are_geodesic() {
        // the chain: delta-vector => geodesic vector
        let split = so5_u2();
        let params = MetricParams::new(1.0, 1.5).unwrap();
        let budget = OracleBudget {
            restarts: 8,
            steps_per_restart: 120,
            step_size: 0.1,
            seed: 23,
        };
        for (b, c) in [(1.0, 1.0), (0.4, -1.2), (-2.0, 0.7)] {
            let w = ev(&[
                (3, b),
                (2, params.x2 / params.x1 * c),
                (4, (params.x2 - 2.0 * params.x1) / params.x1 * c),
            ]);
            let cert = delta_vector_check(&split, &params, &w, &budget).unwrap();
            assert_eq!(cert.verdict, DeltaVerdict::Plausible);
            assert!(cert.excess <= 1e-8);
            let (ok, res) = crate::homogeneous_metric::is_geodesic_vector(&split, &params, &w);
            assert!(ok, "plausible but residual {res}");
        }
    }

    #[test]
    fn t31_5_degenerates_to_minus_norm_when_only_z_is_present() {
        // Y = 0, Z = 0, x1 = x2: the expression collapses to
        // -x1 |[U,X]_h|^2 <= 0
        let split = so5_u2();
        let params = MetricParams::new(1.3, 1.3).unwrap();
        let zero = DVector::zeros(10);
        let x = ev(&[(3, 1.0), (6, -0.4)]);
        for u in &split.basis_p1 {
            let rep = t31_5_check(&split, &params, &x, &zero, &zero, u, &tol()).unwrap();
            assert!(rep.holds, "residual {}", rep.worst_residual);
            assert!(rep.worst_residual <= 1e-12);
        }
    }

    #[test]
    fn condition_reports_are_scale_covariant() {
        let split = so5_u2();
        let x = ev(&[(3, 1.0)]);
        let y = ev(&[(2, 1.0), (4, -1.0)]);
        for ratio in [1.5, 2.5] {
            let a = t31_9n_check(
                &split,
                &MetricParams::new(1.0, ratio).unwrap(),
                &x,
                &y,
                &tol(),
            )
            .unwrap();
            let b = t31_9n_check(
                &split,
                &MetricParams::new(7.0, 7.0 * ratio).unwrap(),
                &(&x * 0.2),
                &(&y * 5.0),
                &tol(),
            )
            .unwrap();
            assert_eq!(a.holds, b.holds, "ratio {ratio}");
            assert!((a.worst_residual - b.worst_residual).abs() <= 1e-9);
        }
    }

    #[test]
    fn reports_serialize_to_json() {
        let rep = ConditionReport::new("rav2", true, 1e-14, None);
        let json = serde_json::to_string(&rep).unwrap();
        assert!(json.contains("\"condition_id\":\"rav2\""));
        assert!(json.contains("\"holds\":true"));
    }
}
