//! Singular values of small dense matrices.

/// Convergence threshold on the cosine between column pairs.
pub const JACOBI_TOL: f64 = 1e-12;
const MAX_SWEEPS: usize = 100;

/// Singular values of a row-major `d × d` matrix, in descending order,
/// computed by one-sided (Hestenes) Jacobi rotations.
pub fn singular_values(a: &[f64], d: usize) -> Vec<f64> {
    assert_eq!(a.len(), d * d, "expected a {d}x{d} matrix");
    // column-major working copy
    let mut cols: Vec<Vec<f64>> = (0..d).map(|j| (0..d).map(|i| a[i * d + j]).collect()).collect();
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for i in 0..d {
            for j in i + 1..d {
                let (alpha, beta, gamma) = cols[i]
                    .iter()
                    .zip(&cols[j])
                    .fold((0.0, 0.0, 0.0), |(a, b, g), (x, y)| (a + x * x, b + y * y, g + x * y));
                if gamma == 0.0 || gamma.abs() <= JACOBI_TOL * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                let (left, right) = cols.split_at_mut(j);
                for (x, y) in left[i].iter_mut().zip(right[0].iter_mut()) {
                    let (xi, yj) = (*x, *y);
                    *x = c * xi - s * yj;
                    *y = s * xi + c * yj;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut sv: Vec<f64> = cols.iter().map(|c| c.iter().map(|x| x * x).sum::<f64>().sqrt()).collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
    }

    #[test]
    fn diagonal_and_rotation() {
        let sv = singular_values(&[3.0, 0.0, 0.0, -4.0], 2);
        assert!(close(sv[0], 4.0, 1e-14) && close(sv[1], 3.0, 1e-14));
        let (c, s) = (0.6f64, 0.8f64);
        // R · diag(5, 2)
        let sv = singular_values(&[5.0 * c, -2.0 * s, 5.0 * s, 2.0 * c], 2);
        assert!(close(sv[0], 5.0, 1e-13) && close(sv[1], 2.0, 1e-13));
    }

    #[test]
    fn rank_one_and_frobenius() {
        let u = [1.0, 2.0, 2.0];
        let v = [2.0, -1.0, 0.5];
        let a: Vec<f64> = (0..9).map(|k| u[k / 3] * v[k % 3]).collect();
        let sv = singular_values(&a, 3);
        let expected = 3.0 * (4.0f64 + 1.0 + 0.25).sqrt();
        assert!(close(sv[0], expected, 1e-13));
        assert!(sv[1].abs() < 1e-12 && sv[2].abs() < 1e-12);

        let b = [1.0, -2.0, 0.5, 3.0, 0.25, -1.0, 2.0, 2.0, 1.5];
        let fro: f64 = b.iter().map(|x| x * x).sum::<f64>();
        let s2: f64 = singular_values(&b, 3).iter().map(|x| x * x).sum();
        assert!(close(fro, s2, 1e-13));
    }
}
