//! Small dense linear algebra: cyclic Jacobi eigensolver and Gaussian
//! elimination. Matrices are row-major `Vec<Vec<f64>>`.

use crate::error::{Error, Result};

/// Off-diagonal Frobenius norm (relative to `max(1, ||A||_F)`) at which the
/// Jacobi sweeps stop.
pub const JACOBI_TOL: f64 = 1e-13;
const MAX_SWEEPS: usize = 100;

/// Eigen-decomposition of a symmetric matrix.
#[derive(Debug, Clone)]
pub struct SymmetricEigen {
    /// Ascending eigenvalues.
    pub values: Vec<f64>,
    /// `vectors[k]` is the unit eigenvector of `values[k]`.
    pub vectors: Vec<Vec<f64>>,
}

/// Largest `|A_ij - A_ji|`.
pub fn asymmetry(a: &[Vec<f64>]) -> f64 {
    let n = a.len();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            worst = worst.max((a[i][j] - a[j][i]).abs());
        }
    }
    worst
}

fn frobenius(a: &[Vec<f64>]) -> f64 {
    a.iter().flatten().map(|x| x * x).sum::<f64>().sqrt()
}

fn off_diagonal(a: &[Vec<f64>]) -> f64 {
    let n = a.len();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a[i][j] * a[i][j];
            }
        }
    }
    s.sqrt()
}

/// Cyclic Jacobi rotations on a symmetric matrix. Fails on non-square input
/// or asymmetry above `1e-12 * max(1, ||A||_F)`.
pub fn jacobi_eigen(input: &[Vec<f64>]) -> Result<SymmetricEigen> {
    let n = input.len();
    if let Some(row) = input.iter().find(|r| r.len() != n) {
        return Err(Error::Dimension { expected: n, got: row.len() });
    }
    let scale = frobenius(input).max(1.0);
    let asym = asymmetry(input);
    if asym > 1e-12 * scale {
        return Err(Error::Asymmetric(asym));
    }

    let mut a: Vec<Vec<f64>> = input.to_vec();
    // symmetrise exactly
    for i in 0..n {
        for j in (i + 1)..n {
            let m = 0.5 * (a[i][j] + a[j][i]);
            a[i][j] = m;
            a[j][i] = m;
        }
    }
    let mut v = vec![vec![0.0; n]; n];
    for (i, row) in v.iter_mut().enumerate() {
        row[i] = 1.0;
    }

    let mut sweeps = 0;
    while off_diagonal(&a) > JACOBI_TOL * scale {
        sweeps += 1;
        if sweeps > MAX_SWEEPS {
            return Err(Error::Numerical(format!(
                "Jacobi iteration did not converge in {MAX_SWEEPS} sweeps"
            )));
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p][q];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                a[p][q] = 0.0;
                a[q][p] = 0.0;
                for row in v.iter_mut() {
                    let vkp = row[p];
                    let vkq = row[q];
                    row[p] = c * vkp - s * vkq;
                    row[q] = s * vkp + c * vkq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[i][i].total_cmp(&a[j][j]));
    let values = order.iter().map(|&i| a[i][i]).collect();
    let vectors = order
        .iter()
        .map(|&col| v.iter().map(|row| row[col]).collect())
        .collect();
    Ok(SymmetricEigen { values, vectors })
}

/// Solves `A x = b` by Gaussian elimination with partial pivoting; `None`
/// if a pivot vanishes.
pub fn solve(a: &[Vec<f64>], b: &[f64]) -> Option<Vec<f64>> {
    let n = b.len();
    let mut m: Vec<Vec<f64>> = a.to_vec();
    let mut x = b.to_vec();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))?;
        if m[piv][col].abs() < 1e-300 {
            return None;
        }
        m.swap(col, piv);
        x.swap(col, piv);
        for row in (col + 1)..n {
            let f = m[row][col] / m[col][col];
            if f != 0.0 {
                for k in col..n {
                    m[row][k] -= f * m[col][k];
                }
                x[row] -= f * x[col];
            }
        }
    }
    for col in (0..n).rev() {
        let s: f64 = ((col + 1)..n).map(|k| m[col][k] * x[k]).sum();
        x[col] = (x[col] - s) / m[col][col];
    }
    Some(x)
}

pub fn mat_vec(a: &[Vec<f64>], x: &[f64]) -> Vec<f64> {
    a.iter().map(|row| row.iter().zip(x).map(|(p, q)| p * q).sum()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Random orthogonal matrix as a product of Givens rotations.
    fn random_rotation(n: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
        let mut q = vec![vec![0.0; n]; n];
        for (i, row) in q.iter_mut().enumerate() {
            row[i] = 1.0;
        }
        for _ in 0..(4 * n * n) {
            let p = rng.gen_range(0..n);
            let r = rng.gen_range(0..n);
            if p == r {
                continue;
            }
            let ang: f64 = rng.gen_range(-3.0..3.0);
            let (c, s) = (ang.cos(), ang.sin());
            for row in q.iter_mut() {
                let (x, y) = (row[p], row[r]);
                row[p] = c * x - s * y;
                row[r] = s * x + c * y;
            }
        }
        q
    }

    #[test]
    fn recovers_known_spectra() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for &n in &[2usize, 5, 17, 40, 101] {
            let q = random_rotation(n, &mut rng);
            let mut diag: Vec<f64> = (0..n).map(|_| rng.gen_range(-10.0..10.0)).collect();
            let mut a = vec![vec![0.0; n]; n];
            for i in 0..n {
                for j in 0..n {
                    a[i][j] = (0..n).map(|k| q[i][k] * diag[k] * q[j][k]).sum();
                }
            }
            for i in 0..n {
                for j in (i + 1)..n {
                    let m = 0.5 * (a[i][j] + a[j][i]);
                    a[i][j] = m;
                    a[j][i] = m;
                }
            }
            let eig = jacobi_eigen(&a).unwrap();
            diag.sort_by(f64::total_cmp);
            let err = eig
                .values
                .iter()
                .zip(&diag)
                .map(|(x, y)| (x - y).abs())
                .fold(0.0, f64::max);
            assert!(err < 1e-10, "n = {n}: error {err:e}");
            // A v = lambda v
            for (lam, vec) in eig.values.iter().zip(&eig.vectors) {
                let av = mat_vec(&a, vec);
                for (x, y) in av.iter().zip(vec) {
                    assert!((x - lam * y).abs() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn rejects_asymmetric() {
        let a = vec![vec![1.0, 2.0], vec![2.1, 1.0]];
        assert!(matches!(jacobi_eigen(&a), Err(Error::Asymmetric(_))));
    }

    #[test]
    fn solves_small_system() {
        let a = vec![vec![0.0, 2.0, 1.0], vec![1.0, 1.0, 0.0], vec![3.0, 0.0, 1.0]];
        let x = solve(&a, &[5.0, 3.0, 6.0]).unwrap();
        let back = mat_vec(&a, &x);
        for (p, q) in back.iter().zip(&[5.0, 3.0, 6.0]) {
            assert!((p - q).abs() < 1e-14);
        }
        assert!(solve(&[vec![1.0, 1.0], vec![1.0, 1.0]], &[1.0, 2.0]).is_none());
    }
}
