#![allow(dead_code)]

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `n` points in `[lo, hi]` with consecutive gaps of at least `min_gap`,
/// shuffled so user order differs from sorted order.
pub fn spaced_points(rng: &mut impl Rng, n: usize, lo: f64, hi: f64, min_gap: f64) -> Vec<f64> {
    assert!(min_gap * n as f64 <= hi - lo);
    let slack = hi - lo - min_gap * (n as f64 - 1.0);
    let mut cuts: Vec<f64> = (0..n).map(|_| rng.random::<f64>() * slack).collect();
    cuts.sort_by(f64::total_cmp);
    let mut pts: Vec<f64> = cuts
        .iter()
        .enumerate()
        .map(|(i, c)| lo + c + min_gap * i as f64)
        .collect();
    for i in (1..n).rev() {
        let j = rng.random_range(0..=i);
        pts.swap(i, j);
    }
    pts
}

pub fn uniform_vec(rng: &mut impl Rng, n: usize, lo: f64, hi: f64) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(lo..hi)).collect()
}

/// Cyclic coordinate descent for `||K c - y||^2 + mu ||c||_1` on a dense
/// row-major matrix, run until no coordinate moves by more than `tol`.
pub fn coordinate_descent(k: &[Vec<f64>], y: &[f64], mu: f64, tol: f64, max_sweeps: usize) -> Vec<f64> {
    let n = k.len();
    let col = |j: usize| -> Vec<f64> { (0..n).map(|i| k[i][j]).collect() };
    let cols: Vec<Vec<f64>> = (0..n).map(col).collect();
    let norms: Vec<f64> = cols.iter().map(|c| c.iter().map(|v| v * v).sum()).collect();
    let mut c = vec![0.0; n];
    // residual y - K c
    let mut r = y.to_vec();
    for _ in 0..max_sweeps {
        let mut biggest: f64 = 0.0;
        for j in 0..n {
            let rho: f64 = cols[j].iter().zip(&r).map(|(a, b)| a * b).sum::<f64>() + norms[j] * c[j];
            let half = 0.5 * mu;
            let new = if rho > half {
                (rho - half) / norms[j]
            } else if rho < -half {
                (rho + half) / norms[j]
            } else {
                0.0
            };
            let delta = new - c[j];
            if delta != 0.0 {
                for (ri, kij) in r.iter_mut().zip(&cols[j]) {
                    *ri -= delta * kij;
                }
                c[j] = new;
            }
            biggest = biggest.max(delta.abs());
        }
        if biggest <= tol {
            break;
        }
    }
    c
}

pub fn lasso_objective(k: &[Vec<f64>], y: &[f64], mu: f64, c: &[f64]) -> f64 {
    let loss: f64 = k
        .iter()
        .zip(y)
        .map(|(row, yi)| {
            let v: f64 = row.iter().zip(c).map(|(a, b)| a * b).sum();
            (v - yi) * (v - yi)
        })
        .sum();
    loss + mu * c.iter().map(|v| v.abs()).sum::<f64>()
}

/// Dense solve by Gaussian elimination with partial pivoting, kept apart
/// from the library's LU.
pub fn gauss_solve(a: &[Vec<f64>], b: &[f64]) -> Vec<f64> {
    let n = a.len();
    let mut m: Vec<Vec<f64>> = a.iter().zip(b).map(|(row, bi)| {
        let mut r = row.clone();
        r.push(*bi);
        r
    }).collect();
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))
            .unwrap();
        m.swap(col, piv);
        for row in col + 1..n {
            let f = m[row][col] / m[col][col];
            for k in col..=n {
                m[row][k] -= f * m[col][k];
            }
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|k| m[i][k] * x[k]).sum();
        x[i] = (m[i][n] - s) / m[i][i];
    }
    x
}
