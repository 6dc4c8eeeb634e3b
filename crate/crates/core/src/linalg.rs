//! Dense LU with partial pivoting and a Hager-Higham 1-norm condition
//! estimate. Sized for the few-hundred-point Gram matrices used here.

use nalgebra::DMatrix;

/// Row-pivoted LU factors `P A = L U`, stored packed in one matrix.
#[derive(Debug, Clone)]
pub struct Lu {
    packed: DMatrix<f64>,
    /// `perm[i]` is the row of `A` that ended up in row `i`.
    perm: Vec<usize>,
    zero_pivot: bool,
}

impl Lu {
    pub fn factor(a: &DMatrix<f64>) -> Lu {
        assert!(a.is_square(), "LU needs a square matrix");
        let n = a.nrows();
        let mut m = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut zero_pivot = false;

        for k in 0..n {
            let (p, pivot) = (k..n)
                .map(|i| (i, m[(i, k)].abs()))
                .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
            if pivot == 0.0 || !pivot.is_finite() {
                zero_pivot = true;
                continue;
            }
            if p != k {
                m.swap_rows(p, k);
                perm.swap(p, k);
            }
            let d = m[(k, k)];
            for i in k + 1..n {
                let l = m[(i, k)] / d;
                m[(i, k)] = l;
                if l != 0.0 {
                    for j in k + 1..n {
                        let u = m[(k, j)];
                        m[(i, j)] -= l * u;
                    }
                }
            }
        }
        Lu {
            packed: m,
            perm,
            zero_pivot,
        }
    }

    pub fn dim(&self) -> usize {
        self.packed.nrows()
    }

    pub fn has_zero_pivot(&self) -> bool {
        self.zero_pivot
    }

    /// Solves `A x = b`.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.dim();
        assert_eq!(b.len(), n);
        let mut x: Vec<f64> = self.perm.iter().map(|&i| b[i]).collect();
        for i in 0..n {
            let mut s = x[i];
            for j in 0..i {
                s -= self.packed[(i, j)] * x[j];
            }
            x[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for j in i + 1..n {
                s -= self.packed[(i, j)] * x[j];
            }
            x[i] = s / self.packed[(i, i)];
        }
        x
    }

    /// Solves `A^T x = b`.
    pub fn solve_transpose(&self, b: &[f64]) -> Vec<f64> {
        let n = self.dim();
        assert_eq!(b.len(), n);
        // A^T = U^T L^T P, so solve U^T z = b, L^T w = z, then x = P^T w.
        let mut w = b.to_vec();
        for i in 0..n {
            let mut s = w[i];
            for j in 0..i {
                s -= self.packed[(j, i)] * w[j];
            }
            w[i] = s / self.packed[(i, i)];
        }
        for i in (0..n).rev() {
            let mut s = w[i];
            for j in i + 1..n {
                s -= self.packed[(j, i)] * w[j];
            }
            w[i] = s;
        }
        let mut x = vec![0.0; n];
        for (i, &p) in self.perm.iter().enumerate() {
            x[p] = w[i];
        }
        x
    }

    /// Unit lower triangular factor.
    pub fn l(&self) -> DMatrix<f64> {
        let n = self.dim();
        DMatrix::from_fn(n, n, |i, j| match i.cmp(&j) {
            std::cmp::Ordering::Greater => self.packed[(i, j)],
            std::cmp::Ordering::Equal => 1.0,
            std::cmp::Ordering::Less => 0.0,
        })
    }

    pub fn u(&self) -> DMatrix<f64> {
        let n = self.dim();
        DMatrix::from_fn(n, n, |i, j| if i <= j { self.packed[(i, j)] } else { 0.0 })
    }

    /// `P A` for the row permutation chosen during factorization.
    pub fn permute_rows(&self, a: &DMatrix<f64>) -> DMatrix<f64> {
        DMatrix::from_fn(a.nrows(), a.ncols(), |i, j| a[(self.perm[i], j)])
    }

    /// Estimate of `1 / (||A||_1 ||A^{-1}||_1)`. Zero when a pivot vanished.
    pub fn rcond(&self, a_norm1: f64) -> f64 {
        if self.zero_pivot {
            return 0.0;
        }
        let inv_norm = self.inverse_norm1_estimate();
        if !inv_norm.is_finite() || a_norm1 == 0.0 {
            return 0.0;
        }
        1.0 / (a_norm1 * inv_norm)
    }

    /// Hager's power-method estimate of `||A^{-1}||_1`, refined with Higham's
    /// alternating-sign test vector. Always a lower bound.
    fn inverse_norm1_estimate(&self) -> f64 {
        let n = self.dim();
        if n == 0 {
            return 0.0;
        }
        let mut x = vec![1.0 / n as f64; n];
        let mut est = 0.0;
        let mut last_j = usize::MAX;
        for _ in 0..5 {
            let y = self.solve(&x);
            est = norm1(&y);
            let xi: Vec<f64> = y.iter().map(|v| if *v >= 0.0 { 1.0 } else { -1.0 }).collect();
            let z = self.solve_transpose(&xi);
            let (j, zmax) = z
                .iter()
                .enumerate()
                .map(|(i, v)| (i, v.abs()))
                .fold((0, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
            let ztx: f64 = z.iter().zip(&x).map(|(a, b)| a * b).sum();
            if zmax <= ztx || j == last_j {
                break;
            }
            x.iter_mut().for_each(|v| *v = 0.0);
            x[j] = 1.0;
            last_j = j;
        }
        let alt: Vec<f64> = (0..n)
            .map(|i| {
                let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
                let frac = if n > 1 { i as f64 / (n - 1) as f64 } else { 0.0 };
                sign * (1.0 + frac)
            })
            .collect();
        let alt_est = 2.0 * norm1(&self.solve(&alt)) / (3.0 * n as f64);
        est.max(alt_est)
    }
}

pub fn norm1(v: &[f64]) -> f64 {
    v.iter().map(|x| x.abs()).sum()
}

pub fn norm_inf(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Maximum absolute column sum.
pub fn matrix_norm1(a: &DMatrix<f64>) -> f64 {
    a.column_iter()
        .map(|c| c.iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Maximum absolute row sum.
pub fn matrix_norm_inf(a: &DMatrix<f64>) -> f64 {
    a.row_iter()
        .map(|r| r.iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

pub fn mat_vec(a: &DMatrix<f64>, x: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.nrows()];
    for (j, &xj) in x.iter().enumerate() {
        if xj == 0.0 {
            continue;
        }
        for (o, aij) in out.iter_mut().zip(a.column(j).iter()) {
            *o += aij * xj;
        }
    }
    out
}

pub fn mat_t_vec(a: &DMatrix<f64>, x: &[f64]) -> Vec<f64> {
    a.column_iter()
        .map(|c| c.iter().zip(x).map(|(a, b)| a * b).sum())
        .collect()
}
