//! Numerical oracle: maximize the projected metric norm of Ad(g)W over the
//! group by multi-restart gradient ascent in exponential coordinates.
//!
//! The oracle can refute a delta-vector (by exhibiting g with a larger
//! projected norm than at the identity) but can only report "plausible" in
//! the other direction; certification to machine precision is the job of the
//! spectral method in the SO(5)/U(2) case study.

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::compact_lie::{exp_raw, GroupElement, LieAlgebra, SoAlgebra};
use crate::homogeneous_metric::{metric_inner_raw, Component, MetricParams, ReductiveSplit};

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("the zero vector has no meaningful orbit")]
    ZeroVector,
}

/// Search budget. All restarts derive their random state from `seed`, so
/// reports are reproducible and the supremum estimate is monotone in
/// `restarts`.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct OracleBudget {
    pub restarts: u32,
    pub steps_per_restart: u32,
    pub step_size: f64,
    pub seed: u64,
}

impl Default for OracleBudget {
    fn default() -> Self {
        OracleBudget {
            restarts: 64,
            steps_per_restart: 500,
            step_size: 0.1,
            seed: 0,
        }
    }
}

/// Outcome of a delta-vector query.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DeltaVerdict {
    /// Certified by the spectral argument (case study only).
    Confirmed,
    /// The search found no excess; not a proof.
    Plausible,
    /// A group element with strictly larger projected norm exists.
    Refuted,
    /// Internal cross-check failed; no verdict.
    Inconclusive,
}

#[derive(Clone, Debug)]
pub struct DeltaCertificate {
    pub verdict: DeltaVerdict,
    /// Best found (Ad(g)W|_p, Ad(g)W|_p) minus (W_p, W_p).
    pub excess: f64,
    pub witness: Option<GroupElement>,
    pub evaluations: u64,
}

/// Multi-restart ascent on f(g) = (P(Ad(g)W), P(Ad(g)W)).
///
/// Restart 0 starts at the identity (so the estimate never falls below the
/// value there); later restarts start at random rotations. The ascent
/// direction comes from the first-order expansion
/// f(exp(tX) g) = f(g) + 2 t (P(V), [X, V]_p) with V = Ad(g)W.
pub fn orbit_projection_sup(
    split: &ReductiveSplit<SoAlgebra>,
    params: &MetricParams,
    w: &DVector<f64>,
    budget: &OracleBudget,
) -> Result<(f64, GroupElement, u64), OracleError> {
    if w.norm() == 0.0 {
        return Err(OracleError::ZeroVector);
    }
    let alg = &split.algebra;
    let n = alg.n;
    let dim = alg.dim();
    let w_mat = alg.coeffs_to_matrix(w).entries;

    let f_of = |v_coeffs: &DVector<f64>| -> f64 {
        let vp = split.project(v_coeffs, Component::P).unwrap();
        metric_inner_raw(split, params, &vp, &vp)
    };

    let mut best_value = f64::NEG_INFINITY;
    let mut best_witness = GroupElement::identity(n);
    let mut evaluations: u64 = 0;

    for restart in 0..budget.restarts.max(1) {
        let mut rng = ChaCha8Rng::seed_from_u64(
            budget
                .seed
                .wrapping_add((restart as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)),
        );
        let mut g = if restart == 0 {
            GroupElement::identity(n).entries
        } else {
            let mut coeffs: DVector<f64> = DVector::from_fn(dim, |_, _| rng.gen_range(-1.0..1.0));
            let norm = coeffs.norm().max(1e-12);
            coeffs *= rng.gen_range(0.1..std::f64::consts::PI) / norm;
            exp_raw(&alg.coeffs_to_matrix(&coeffs).entries)
        };
        let mut v_mat = &g * &w_mat * g.transpose();
        let mut v = alg.matrix_to_coeffs(&crate::compact_lie::SkewMatrix {
            entries: v_mat.clone(),
        });
        let mut value = f_of(&v);
        evaluations += 1;
        let mut step = budget.step_size;
        let mut failures = 0u32;

        for _ in 0..budget.steps_per_restart {
            // gradient over the orthonormal F basis
            let vp = split.project(&v, Component::P).unwrap();
            let mut grad = DVector::zeros(dim);
            for a in 0..dim {
                let mut ea = DVector::zeros(dim);
                ea[a] = 1.0;
                let br = alg.bracket(&ea, &v);
                let brp = split.project(&br, Component::P).unwrap();
                grad[a] = 2.0 * metric_inner_raw(split, params, &vp, &brp);
            }
            let gnorm = grad.norm();
            if gnorm <= 1e-13 * (1.0 + value.abs()) {
                break;
            }
            let dir = grad / gnorm;
            let e = exp_raw(&alg.coeffs_to_matrix(&(dir * step)).entries);
            let v_try = &e * &v_mat * e.transpose();
            let v_try_coeffs = alg.matrix_to_coeffs(&crate::compact_lie::SkewMatrix {
                entries: v_try.clone(),
            });
            let f_try = f_of(&v_try_coeffs);
            evaluations += 1;
            if f_try > value {
                value = f_try;
                v_mat = v_try;
                v = v_try_coeffs;
                g = &e * &g;
                step = (step * 1.25).min(budget.step_size * 8.0);
                failures = 0;
            } else {
                step *= 0.5;
                failures += 1;
                if failures >= 20 {
                    break;
                }
            }
        }

        if value > best_value {
            best_value = value;
            best_witness = GroupElement { entries: g };
        }
    }

    Ok((best_value, best_witness, evaluations))
}

/// Delta-vector test by search: refuted when the best found projected norm
/// exceeds the value at the identity by more than 1e-8 relative.
pub fn is_delta_vector_numeric(
    split: &ReductiveSplit<SoAlgebra>,
    params: &MetricParams,
    w: &DVector<f64>,
    budget: &OracleBudget,
) -> Result<DeltaCertificate, OracleError> {
    let wp = split.project(w, Component::P).unwrap();
    let base = metric_inner_raw(split, params, &wp, &wp);
    let (sup, witness, evaluations) = orbit_projection_sup(split, params, w, budget)?;
    let excess = sup - base;
    if excess > 1e-8 * base.max(1e-300) {
        Ok(DeltaCertificate {
            verdict: DeltaVerdict::Refuted,
            excess,
            witness: Some(witness),
            evaluations,
        })
    } else {
        Ok(DeltaCertificate {
            verdict: DeltaVerdict::Plausible,
            excess,
            witness: None,
            evaluations,
        })
    }
}

/// Chebyshev norm of the Killing field W: the maximum pointwise length,
/// which is the square root of the orbit supremum of the projected norm.
pub fn chebyshev_norm(
    split: &ReductiveSplit<SoAlgebra>,
    params: &MetricParams,
    w: &DVector<f64>,
    budget: &OracleBudget,
) -> Result<f64, OracleError> {
    let (sup, _, _) = orbit_projection_sup(split, params, w, budget)?;
    Ok(sup.max(0.0).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compact_lie::SoAlgebra;
    use crate::homogeneous_metric::ReductiveSplit;

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

    fn quick_budget() -> OracleBudget {
        OracleBudget {
            restarts: 12,
            steps_per_restart: 150,
            step_size: 0.1,
            seed: 7,
        }
    }

    #[test]
    fn normal_metric_never_exceeds_the_ambient_norm() {
        let split = so5_u2();
        let params = MetricParams::new(1.0, 1.0).unwrap();
        let w = ev(&[(3, 1.0), (0, 0.4), (7, 0.1), (9, -0.8)]);
        let (sup, _, _) = orbit_projection_sup(&split, &params, &w, &quick_budget()).unwrap();
        let total = split.algebra.inner(&w, &w);
        assert!(sup <= total + 1e-8, "sup {sup} vs ambient {total}");
    }

    #[test]
    fn p1_vectors_are_delta_vectors() {
        // every vector in p1 is a delta-vector for these spaces
        let split = so5_u2();
        let params = MetricParams::new(1.0, 1.5).unwrap();
        let w = ev(&[(3, 1.0)]);
        let cert = is_delta_vector_numeric(&split, &params, &w, &quick_budget()).unwrap();
        assert_eq!(cert.verdict, DeltaVerdict::Plausible);
        assert!(cert.excess.abs() <= 1e-6);
        let norm = chebyshev_norm(&split, &params, &w, &quick_budget()).unwrap();
        assert!((norm - 1.0f64.sqrt()).abs() < 1e-6);
    }

    #[test]
    fn candidate_above_the_boundary_is_refuted_with_witness() {
        let split = so5_u2();
        let params = MetricParams::new(1.0, 2.5).unwrap();
        // W = b F15 + (x2/x1) c F14 + ((x2-2x1)/x1) c F23 with b = c = 1
        let w = ev(&[(3, 1.0), (2, 2.5), (4, 0.5)]);
        let cert = is_delta_vector_numeric(&split, &params, &w, &quick_budget()).unwrap();
        assert_eq!(cert.verdict, DeltaVerdict::Refuted);
        assert!(cert.excess >= 1e-3, "excess {}", cert.excess);
        let g = cert.witness.expect("witness");
        // the witness really achieves a larger projected norm
        let alg = &split.algebra;
        let moved = &g.entries * &alg.coeffs_to_matrix(&w).entries * g.entries.transpose();
        let moved = alg.matrix_to_coeffs(&crate::compact_lie::SkewMatrix { entries: moved });
        let mp = split.project(&moved, Component::P).unwrap();
        let base_p = split.project(&w, Component::P).unwrap();
        let base = metric_inner_raw(&split, &params, &base_p, &base_p);
        let at_witness = metric_inner_raw(&split, &params, &mp, &mp);
        assert!(at_witness > base + 1e-3);
    }

    #[test]
    fn sup_estimate_is_monotone_in_restarts() {
        let split = so5_u2();
        let params = MetricParams::new(1.0, 2.2).unwrap();
        let w = ev(&[(3, 0.7), (2, 2.2), (4, 0.2), (6, 0.3)]);
        let mut last = f64::NEG_INFINITY;
        for restarts in [1, 4, 12] {
            let budget = OracleBudget {
                restarts,
                ..quick_budget()
            };
            let (sup, _, _) = orbit_projection_sup(&split, &params, &w, &budget).unwrap();
            assert!(sup >= last - 1e-12);
            last = sup;
        }
    }

    #[test]
    fn chebyshev_norm_is_ad_invariant_and_subadditive() {
        let split = so5_u2();
        let params = MetricParams::new(1.0, 1.4).unwrap();
        let budget = quick_budget();
        let v = ev(&[(3, 0.8), (0, 0.3), (7, -0.3)]);
        let w = ev(&[(6, 0.5), (2, 0.6), (4, -0.6)]);
        let nv = chebyshev_norm(&split, &params, &v, &budget).unwrap();
        let nw = chebyshev_norm(&split, &params, &w, &budget).unwrap();
        let nvw = chebyshev_norm(&split, &params, &(&v + &w), &budget).unwrap();
        assert!(nvw <= nv + nw + 1e-6);
        // Ad-invariance: rotate by a fixed group element
        let alg = &split.algebra;
        let g = exp_raw(&alg.coeffs_to_matrix(&ev(&[(1, 0.9), (9, -0.4)])).entries);
        let moved = &g * &alg.coeffs_to_matrix(&v).entries * g.transpose();
        let moved = alg.matrix_to_coeffs(&crate::compact_lie::SkewMatrix { entries: moved });
        let n_moved = chebyshev_norm(&split, &params, &moved, &budget).unwrap();
        assert!((n_moved - nv).abs() < 1e-6, "{n_moved} vs {nv}");
    }

    #[test]
    fn zero_vector_is_rejected() {
        let split = so5_u2();
        let params = MetricParams::new(1.0, 1.5).unwrap();
        assert!(matches!(
            orbit_projection_sup(&split, &params, &DVector::zeros(10), &quick_budget()),
            Err(OracleError::ZeroVector)
        ));
    }
}
