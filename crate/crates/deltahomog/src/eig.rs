//! Cyclic Jacobi eigensolver for small symmetric matrices.

use nalgebra::DMatrix;

/// Eigenvalues of a symmetric matrix, sorted ascending.
///
/// Plain cyclic Jacobi sweeps; converges when the off-diagonal Frobenius
/// mass drops below 1e-14 relative to the matrix norm. Unconditionally
/// stable at the sizes used here (n <= 10).
pub fn symmetric_eigenvalues(m: &DMatrix<f64>) -> Vec<f64> {
    let n = m.nrows();
    assert_eq!(n, m.ncols(), "matrix must be square");
    let mut a = m.clone();
    let scale = a.norm().max(1.0);
    for _sweep in 0..60 {
        let mut off = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                off += a[(i, j)] * a[(i, j)];
            }
        }
        if off.sqrt() <= 1e-14 * scale {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq.abs() <= 1e-300 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                // tangent of the rotation angle, smaller root
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut eig: Vec<f64> = (0..n).map(|i| a[(i, i)]).collect();
    eig.sort_by(|x, y| x.partial_cmp(y).unwrap());
    eig
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_matrix_is_already_solved() {
        let m = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![3.0, -1.0, 2.0]));
        assert_eq!(symmetric_eigenvalues(&m), vec![-1.0, 2.0, 3.0]);
    }

    #[test]
    fn known_two_by_two() {
        let m = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 2.0]);
        let e = symmetric_eigenvalues(&m);
        assert!((e[0] - 1.0).abs() < 1e-14);
        assert!((e[1] - 3.0).abs() < 1e-14);
    }

    #[test]
    fn random_symmetric_matches_characteristic_values() {
        // A fixed 5x5 with known spectrum: Q D Q^T for a rotation-ish Q.
        use crate::compact_lie::{exp_matrix, SoAlgebra};
        use nalgebra::DVector;
        let alg = SoAlgebra::new(5).unwrap();
        let skew = alg.coeffs_to_matrix(&DVector::from_vec(vec![
            0.3, -0.8, 0.2, 1.1, -0.4, 0.9, 0.05, -1.3, 0.6, 0.7,
        ]));
        let q = exp_matrix(&skew).entries;
        let d = DVector::from_vec(vec![-2.0, -0.5, 0.0, 1.25, 4.0]);
        let m = &q * DMatrix::from_diagonal(&d) * q.transpose();
        let e = symmetric_eigenvalues(&m);
        for (got, want) in e.iter().zip(d.iter()) {
            assert!((got - want).abs() < 1e-12, "{got} vs {want}");
        }
    }
}
