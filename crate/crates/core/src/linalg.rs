//! Small dense helpers for the excitation-block eigenproblems.

use alloc::vec;
use alloc::vec::Vec;

/// Eigen-decomposition of a real symmetric `n × n` matrix (row-major) by
/// cyclic Jacobi rotations.
///
/// Returns eigenvalues in ascending order and the matching eigenvectors as
/// rows of the second vector (`vectors[k * n + i]` is component `i` of
/// eigenvector `k`). Each eigenvector is sign-fixed so that its largest
/// component by magnitude (first one on ties) is positive.
pub fn symmetric_eigen(matrix: &[f64], n: usize) -> (Vec<f64>, Vec<f64>) {
    assert_eq!(matrix.len(), n * n, "matrix is not n × n");
    let mut a = matrix.to_vec();
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    let scale = a.iter().map(|x| x.abs()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);

    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|p| ((p + 1)..n).map(move |q| (p, q)))
            .map(|(p, q)| a[p * n + q] * a[p * n + q])
            .sum();
        if libm::sqrt(off) <= 1e-15 * scale {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq.abs() <= 1e-300 {
                    continue;
                }
                let theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + libm::sqrt(theta * theta + 1.0));
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / libm::sqrt(t * t + 1.0);
                let s = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[i * n + i].total_cmp(&a[j * n + j]));
    let values = order.iter().map(|&i| a[i * n + i]).collect();
    let mut vectors = vec![0.0; n * n];
    for (row, &col) in order.iter().enumerate() {
        let mut pivot = 0.0f64;
        for i in 0..n {
            let x = v[i * n + col];
            if x.abs() > pivot.abs() + 1e-12 {
                pivot = x;
            }
        }
        let sign = if pivot < 0.0 { -1.0 } else { 1.0 };
        for i in 0..n {
            vectors[row * n + i] = sign * v[i * n + col];
        }
    }
    (values, vectors)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonalizes_tridiagonal_block() {
        // resonant three-level block, n = 2, g1 = g2 = 1: eigenvalues 0, ±√3
        let s2 = libm::sqrt(2.0);
        let m = [0.0, s2, 0.0, s2, 0.0, 1.0, 0.0, 1.0, 0.0];
        let (vals, vecs) = symmetric_eigen(&m, 3);
        let r3 = libm::sqrt(3.0);
        assert!((vals[0] + r3).abs() < 1e-14);
        assert!(vals[1].abs() < 1e-14);
        assert!((vals[2] - r3).abs() < 1e-14);
        for k in 0..3 {
            for i in 0..3 {
                let hv: f64 = (0..3).map(|j| m[i * 3 + j] * vecs[k * 3 + j]).sum();
                assert!((hv - vals[k] * vecs[k * 3 + i]).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn handles_one_by_one_and_diagonal() {
        let (vals, vecs) = symmetric_eigen(&[-2.5], 1);
        assert_eq!(vals, vec![-2.5]);
        assert_eq!(vecs, vec![1.0]);
        let (vals, _) = symmetric_eigen(&[3.0, 0.0, 0.0, 1.0], 2);
        assert_eq!(vals, vec![1.0, 3.0]);
    }
}
