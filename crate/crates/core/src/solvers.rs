//! Finite-dimensional problems left after the representer reduction:
//!
//! - l1-regularized least squares on the Gram matrix,
//!   `min_c s ||K[x] c - y||_2^2 + mu ||c||_1`, solved with monotone FISTA;
//! - the ridge baseline `h = (K[x] + mu I)^{-1} y`.
//!
//! Lasso results are certified by the KKT residual of the objective rather
//! than by the iteration count.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gram::{GramSystem, SINGULAR_RCOND};
use crate::interpolation::{CoefficientVector, Side};
use crate::linalg::{self, Lu};

/// Scaling `s` of the squared loss.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum LossScaling {
    /// `||K c - y||^2`
    #[default]
    Sum,
    /// `(1/n) ||K c - y||^2`
    Mean,
}

impl LossScaling {
    fn factor(self, n: usize) -> f64 {
        match self {
            LossScaling::Sum => 1.0,
            LossScaling::Mean => 1.0 / n as f64,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LassoConfig {
    pub mu: f64,
    pub max_iter: usize,
    /// Target KKT residual.
    pub tol: f64,
    /// Coefficients below `sparsity_threshold * max(1, ||c||_inf)` count as
    /// zero.
    pub sparsity_threshold: f64,
    #[serde(default)]
    pub loss: LossScaling,
    /// Keep the objective value of every iterate in the result.
    #[serde(default)]
    pub record_objective: bool,
}

impl LassoConfig {
    pub fn new(mu: f64) -> Self {
        LassoConfig {
            mu,
            ..Default::default()
        }
    }
}

impl Default for LassoConfig {
    fn default() -> Self {
        LassoConfig {
            mu: 0.0,
            max_iter: 50_000,
            tol: 1e-8,
            sparsity_threshold: 1e-8,
            loss: LossScaling::Sum,
            record_objective: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub coefficients: CoefficientVector,
    pub objective: f64,
    pub kkt_residual: f64,
    pub iterations: usize,
    pub sparsity: usize,
    pub converged: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub objective_trace: Vec<f64>,
}

impl FitResult {
    pub fn values(&self) -> &[f64] {
        &self.coefficients.values
    }
}

/// `sign(v_j) max(|v_j| - tau, 0)` componentwise.
pub fn soft_threshold(v: &[f64], tau: f64) -> Vec<f64> {
    v.iter().map(|&x| shrink(x, tau)).collect()
}

fn shrink(x: f64, tau: f64) -> f64 {
    if x > tau {
        x - tau
    } else if x < -tau {
        x + tau
    } else {
        0.0
    }
}

/// Number of coefficients above the scaled threshold.
pub fn count_nonzero(c: &[f64], threshold: f64) -> usize {
    let scale = linalg::norm_inf(c).max(1.0);
    c.iter().filter(|v| v.abs() > threshold * scale).count()
}

/// Largest violation of the optimality conditions of
/// `||K c - y||^2 + mu ||c||_1` at `c`.
pub fn kkt_residual(system: &GramSystem, y: &[f64], mu: f64, c: &[f64]) -> Result<f64> {
    check_inputs(system, y, mu)?;
    if c.len() != system.n() {
        return Err(Error::DimensionMismatch {
            expected: system.n(),
            found: c.len(),
        });
    }
    let problem = Problem::new(system.gram(), y, mu, 1.0);
    let (r, _) = problem.residual(c);
    Ok(problem.kkt(c, &problem.gradient(&r)))
}

fn check_inputs(system: &GramSystem, y: &[f64], mu: f64) -> Result<()> {
    if y.len() != system.n() {
        return Err(Error::DimensionMismatch {
            expected: system.n(),
            found: y.len(),
        });
    }
    if !(mu >= 0.0) {
        return Err(Error::NegativeMu(mu));
    }
    Ok(())
}

/// The objective `s ||K c - y||^2 + mu ||c||_1` over a fixed Gram matrix.
struct Problem<'a> {
    k: &'a DMatrix<f64>,
    y: &'a [f64],
    mu: f64,
    scale: f64,
}

impl<'a> Problem<'a> {
    fn new(k: &'a DMatrix<f64>, y: &'a [f64], mu: f64, scale: f64) -> Self {
        Problem { k, y, mu, scale }
    }

    /// Residual `K c - y` and objective value.
    fn residual(&self, c: &[f64]) -> (Vec<f64>, f64) {
        let mut r = linalg::mat_vec(self.k, c);
        r.iter_mut().zip(self.y).for_each(|(ri, yi)| *ri -= yi);
        let loss: f64 = r.iter().map(|v| v * v).sum();
        let f = self.scale * loss + self.mu * linalg::norm1(c);
        (r, f)
    }

    fn objective(&self, c: &[f64]) -> f64 {
        self.residual(c).1
    }

    /// `2 s K^T r`.
    fn gradient(&self, r: &[f64]) -> Vec<f64> {
        let mut g = linalg::mat_t_vec(self.k, r);
        g.iter_mut().for_each(|v| *v *= 2.0 * self.scale);
        g
    }

    fn kkt(&self, c: &[f64], grad: &[f64]) -> f64 {
        c.iter()
            .zip(grad)
            .map(|(&cj, &gj)| {
                if cj > 0.0 {
                    (gj + self.mu).abs()
                } else if cj < 0.0 {
                    (gj - self.mu).abs()
                } else {
                    (gj.abs() - self.mu).max(0.0)
                }
            })
            .fold(0.0, f64::max)
    }

    /// Largest eigenvalue of `2 s K^T K` by power iteration.
    fn lipschitz(&self) -> f64 {
        let n = self.k.ncols();
        let mut v = vec![1.0 / (n as f64).sqrt(); n];
        let mut lambda = 0.0;
        for _ in 0..100 {
            let w = linalg::mat_t_vec(self.k, &linalg::mat_vec(self.k, &v));
            let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm == 0.0 {
                break;
            }
            let next = norm;
            v = w.into_iter().map(|x| x / norm).collect();
            let done = (next - lambda).abs() <= 1e-10 * next;
            lambda = next;
            if done {
                break;
            }
        }
        2.0 * self.scale * lambda
    }

    /// Minimizer of the quadratic `s ||K_S c - y||^2 + mu sigma^T c` over
    /// coefficients supported on `support`, or `None` when `K_S` is rank
    /// deficient.
    fn face_minimizer(&self, support: &[usize], sigma: &[f64]) -> Option<Vec<f64>> {
        if support.is_empty() {
            return None;
        }
        let n = self.k.nrows();
        let ks = DMatrix::from_fn(n, support.len(), |i, j| self.k[(i, support[j])]);
        let qr = ks.clone().qr();
        let r = qr.r();
        let diag_max = (0..r.nrows()).map(|i| r[(i, i)].abs()).fold(0.0, f64::max);
        if (0..r.nrows()).any(|i| r[(i, i)].abs() <= 1e-14 * diag_max) {
            return None;
        }
        // normal equations K_S^T K_S c = K_S^T y - mu/(2s) sigma, with R^T R = K_S^T K_S
        let shift = self.mu / (2.0 * self.scale);
        let sigma = DVector::from_column_slice(sigma);
        let y = DVector::from_column_slice(self.y);
        let mut qty = y.clone();
        qr.q_tr_mul(&mut qty);
        let qty = qty.rows(0, support.len()).into_owned();
        let z = r.tr_solve_upper_triangular(&sigma)?;
        let mut cs = r.solve_upper_triangular(&(qty - z * shift))?;
        // one step of refinement on the normal equations
        let e = ks.tr_mul(&(&y - &ks * &cs)) - &sigma * shift;
        let w = r.tr_solve_upper_triangular(&e)?;
        cs += r.solve_upper_triangular(&w)?;
        let mut out = vec![0.0; self.k.ncols()];
        for (&j, v) in support.iter().zip(cs.iter()) {
            out[j] = *v;
        }
        Some(out)
    }

    /// Exact minimizer of the objective on the segment from `x` to `target`,
    /// given the residual `r` at `x`. A coefficient whose sign change point
    /// is the minimizer is set to zero exactly.
    fn line_search(&self, x: &[f64], r: &[f64], target: &[f64]) -> Vec<f64> {
        let d: Vec<f64> = target.iter().zip(x).map(|(t, a)| t - a).collect();
        let kd = linalg::mat_vec(self.k, &d);
        let a2 = 2.0 * self.scale * kd.iter().map(|v| v * v).sum::<f64>();
        let a1 = 2.0 * self.scale * kd.iter().zip(r).map(|(u, v)| u * v).sum::<f64>();
        let mut breaks: Vec<f64> = x
            .iter()
            .zip(&d)
            .filter(|(a, b)| **a != 0.0 && **b != 0.0)
            .map(|(a, b)| -a / b)
            .filter(|&t| t > 0.0 && t < 1.0)
            .collect();
        breaks.push(1.0);
        breaks.sort_by(f64::total_cmp);
        breaks.dedup();
        // phi'(t) = a1 + a2 t + mu sum_j sign(x_j + t d_j) d_j is piecewise linear
        let mut lo = 0.0;
        let mut alpha = 1.0;
        for &hi in &breaks {
            let mid = 0.5 * (lo + hi);
            let l1_slope = self.mu
                * x.iter()
                    .zip(&d)
                    .map(|(a, b)| {
                        let v = a + mid * b;
                        let sign = if v != 0.0 { v.signum() } else { b.signum() };
                        sign * b
                    })
                    .sum::<f64>();
            if a1 + a2 * hi + l1_slope >= 0.0 {
                alpha = if a2 > 0.0 {
                    (-(a1 + l1_slope) / a2).clamp(lo, hi)
                } else {
                    lo
                };
                break;
            }
            lo = hi;
        }
        x.iter()
            .zip(&d)
            .map(|(&a, &b)| {
                let v = a + alpha * b;
                if a != 0.0 && b != 0.0 && (-a / b - alpha).abs() <= 1e-15 * alpha.max(1e-300) {
                    0.0
                } else {
                    v
                }
            })
            .collect()
    }

    /// Active-set descent from `x`: minimize on the current signed support,
    /// move there with an exact line search, and bring in the worst KKT
    /// violator once the support itself is optimal. Only steps that lower
    /// the objective are taken. Returns the final point, its objective and
    /// whether the KKT tolerance was reached.
    fn polish(
        &self,
        mut x: Vec<f64>,
        mut fx: f64,
        tol: f64,
        max_steps: usize,
        mut trace: Option<&mut Vec<f64>>,
    ) -> (Vec<f64>, f64, bool) {
        for _ in 0..max_steps {
            let (r, _) = self.residual(&x);
            let g = self.gradient(&r);
            let mut support: Vec<usize> = (0..x.len()).filter(|&j| x[j] != 0.0).collect();
            let mut sigma: Vec<f64> = support.iter().map(|&j| x[j].signum()).collect();
            let on_support = support
                .iter()
                .map(|&j| (g[j] + self.mu * x[j].signum()).abs())
                .fold(0.0, f64::max);
            if on_support <= 0.5 * tol {
                let (worst, excess) = (0..x.len())
                    .filter(|&j| x[j] == 0.0)
                    .map(|j| (j, g[j].abs() - self.mu))
                    .fold((usize::MAX, f64::NEG_INFINITY), |acc, v| if v.1 > acc.1 { v } else { acc });
                if worst == usize::MAX || excess <= tol {
                    return (x, fx, true);
                }
                let pos = support.partition_point(|&j| j < worst);
                support.insert(pos, worst);
                sigma.insert(pos, -g[worst].signum());
            }
            let Some(target) = self.face_minimizer(&support, &sigma) else {
                break;
            };
            let moved = self.line_search(&x, &r, &target);
            let fm = self.objective(&moved);
            if !(fm < fx) {
                break;
            }
            x = moved;
            fx = fm;
            if let Some(t) = trace.as_deref_mut() {
                t.push(fx);
            }
        }
        (x, fx, false)
    }
}

/// l1-regularized least squares on the Gram matrix, started from zero.
pub fn lasso_gram(system: &GramSystem, y: &[f64], config: &LassoConfig) -> Result<FitResult> {
    lasso_gram_from(system, y, config, None)
}

/// As [`lasso_gram`], started from `init` when given (warm start).
pub fn lasso_gram_from(
    system: &GramSystem,
    y: &[f64],
    config: &LassoConfig,
    init: Option<&[f64]>,
) -> Result<FitResult> {
    check_inputs(system, y, config.mu)?;
    system.kernel().ensure_fittable()?;
    if config.max_iter == 0 || !(config.tol > 0.0) {
        return Err(Error::InvalidConfig(
            "lasso needs max_iter >= 1 and tol > 0".into(),
        ));
    }
    let n = system.n();
    let problem = Problem::new(system.gram(), y, config.mu, config.loss.factor(n));

    let finish = |c: Vec<f64>, iterations: usize, trace: Vec<f64>| {
        let (r, objective) = problem.residual(&c);
        let kkt = problem.kkt(&c, &problem.gradient(&r));
        FitResult {
            sparsity: count_nonzero(&c, config.sparsity_threshold),
            coefficients: CoefficientVector {
                values: c,
                side: Side::Left,
            },
            objective,
            kkt_residual: kkt,
            iterations,
            converged: kkt <= config.tol,
            objective_trace: trace,
        }
    };

    // zero is optimal exactly when ||2 s K^T y||_inf <= mu
    let zero = vec![0.0; n];
    let (r0, _) = problem.residual(&zero);
    if problem.kkt(&zero, &problem.gradient(&r0)) == 0.0 {
        return Ok(finish(zero, 0, Vec::new()));
    }
    if config.mu == 0.0 {
        let c = system.solve(y)?;
        let fit = finish(c, 0, Vec::new());
        if fit.converged {
            return Ok(fit);
        }
    }

    let mut x: Vec<f64> = match init {
        Some(c) if c.len() == n => c.to_vec(),
        Some(c) => {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: c.len(),
            })
        }
        None => zero,
    };
    let mut fx = problem.objective(&x);
    let mut lip = problem.lipschitz();
    let mut z = x.clone();
    let mut t = 1.0f64;
    let mut trace = Vec::new();
    if config.record_objective {
        trace.push(fx);
    }
    const CHECK_EVERY: usize = 20;
    const POLISH_STEPS: usize = 50;

    let mut iter = 0;
    while iter < config.max_iter {
        iter += 1;
        let (rz, _) = problem.residual(&z);
        let gz = problem.gradient(&rz);
        let step: Vec<f64> = z.iter().zip(&gz).map(|(zi, gi)| zi - gi / lip).collect();
        let u = soft_threshold(&step, config.mu / lip);
        let fu = problem.objective(&u);

        let next = if fu <= fx {
            fx = fu;
            u
        } else {
            // accelerated point rejected: plain proximal step from x
            let (rx, _) = problem.residual(&x);
            let gx = problem.gradient(&rx);
            let step: Vec<f64> = x.iter().zip(&gx).map(|(xi, gi)| xi - gi / lip).collect();
            let v = soft_threshold(&step, config.mu / lip);
            let fv = problem.objective(&v);
            t = 1.0;
            if fv <= fx {
                fx = fv;
                v
            } else if fv - fx > 1e-15 * fx.abs().max(1.0) {
                // step too long for the power-iteration estimate
                lip *= 2.0;
                z = x.clone();
                if config.record_objective {
                    trace.push(fx);
                }
                continue;
            } else {
                x.clone()
            }
        };
        let mut x_prev = std::mem::replace(&mut x, next);
        if config.record_objective {
            trace.push(fx);
        }

        if iter % CHECK_EVERY == 0 {
            let (rx, _) = problem.residual(&x);
            if problem.kkt(&x, &problem.gradient(&rx)) <= config.tol {
                return Ok(finish(x, iter, trace));
            }
            let record = config.record_objective.then_some(&mut trace);
            let (polished, fp, done) = problem.polish(x.clone(), fx, config.tol, POLISH_STEPS.max(2 * n), record);
            if fp < fx {
                x = polished;
                fx = fp;
                x_prev = x.clone();
                t = 1.0;
            }
            if done {
                return Ok(finish(x, iter, trace));
            }
        }

        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        let beta = (t - 1.0) / t_next;
        z = x
            .iter()
            .zip(&x_prev)
            .map(|(xi, pi)| xi + beta * (xi - pi))
            .collect();
        t = t_next;
    }
    Ok(finish(x, iter, trace))
}

/// Kernel ridge regression `h = (K[x] + mu I)^{-1} y`. The reported objective
/// is `||K h - y||^2 + mu h^T K h` and the residual is
/// `||(K + mu I) h - y||_inf`.
pub fn ridge_gram(system: &GramSystem, y: &[f64], mu: f64) -> Result<FitResult> {
    check_inputs(system, y, mu)?;
    system.kernel().ensure_fittable()?;
    let n = system.n();
    let shifted = system.gram() + DMatrix::<f64>::identity(n, n) * mu;
    let lu = Lu::factor(&shifted);
    if lu.rcond(linalg::matrix_norm1(&shifted)) < SINGULAR_RCOND {
        return Err(Error::SingularShifted { mu });
    }
    let h = lu.solve(y);
    let kh = linalg::mat_vec(system.gram(), &h);
    let loss: f64 = kh.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
    let penalty: f64 = h.iter().zip(&kh).map(|(a, b)| a * b).sum();
    let stationarity = kh
        .iter()
        .zip(&h)
        .zip(y)
        .map(|((khi, hi), yi)| (khi + mu * hi - yi).abs())
        .fold(0.0, f64::max);
    Ok(FitResult {
        sparsity: count_nonzero(&h, LassoConfig::default().sparsity_threshold),
        coefficients: CoefficientVector {
            values: h,
            side: Side::Left,
        },
        objective: loss + mu * penalty,
        kkt_residual: stationarity,
        iterations: 0,
        converged: true,
        objective_trace: Vec::new(),
    })
}
