//! Numerical audits of the admissibility conditions (A1), (A2) and (A4), the
//! Lebesgue function `L(t) = ||K[x]^{-1} K_x(t)||_1`, and the one-point
//! extension norm that ties (A4) to minimal-norm interpolation.
//!
//! An audit can refute a condition by exhibiting a witness; a `Pass` only
//! means that no violation turned up in the sampled trials.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gram::{linspace, GramSystem, PointSet};
use crate::kernels::{Interval, KernelSpec, Status};
use crate::linalg::norm1;
use crate::rng::{self, Purpose};

/// Slack on the unit Lebesgue bound, absorbing solve round-off.
pub const A4_TOLERANCE: f64 = 1e-9;
/// Slack on the declared kernel bound.
pub const A2_TOLERANCE: f64 = 1e-12;
/// Schur complements below this make the extended Gram matrix singular.
pub const SCHUR_TOLERANCE: f64 = 1e-14;
/// Uniform nodes in a default Lebesgue grid.
pub const DEFAULT_GRID_SIZE: usize = 2001;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Condition {
    A1,
    A2,
    A4,
    RelaxedA4,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

/// Concrete configuration violating a condition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub points: Vec<f64>,
    /// Evaluation point, absent for (A1).
    pub t: Option<f64>,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditStats {
    pub n_trials: usize,
    /// Trials that could not be evaluated (invalid point sets, singular
    /// Gram matrices where those are not the subject of the audit).
    pub skipped: usize,
    /// Largest Lebesgue value, largest `|K|`, or smallest rcond for (A1).
    pub worst_value: f64,
    pub argmax_location: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub condition: Condition,
    pub verdict: Verdict,
    pub witness: Option<Witness>,
    pub stats: AuditStats,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

/// One-line statement of the (A3) status, which is not audited numerically.
pub fn a3_statement(kernel: &KernelSpec) -> String {
    let status = match kernel.metadata().a3 {
        Status::Proven => "Proven",
        Status::Disproven => "Disproven",
        Status::Unknown => "Unknown",
    };
    format!("A3: {status} per analytic results, not testable numerically")
}

/// Source of random sample point sets.
pub trait PointGenerator: Sync {
    fn generate(&self, rng: &mut ChaCha8Rng) -> Vec<f64>;

    /// Window over which Lebesgue grids are laid out.
    fn window(&self) -> (f64, f64);
}

/// `n` uniform in `n_range`, points uniform in the window interior, with a
/// minimum spacing of `min_spacing_frac` times the window length.
#[derive(Debug, Clone, Copy)]
pub struct UniformGenerator {
    pub lo: f64,
    pub hi: f64,
    pub n_min: usize,
    pub n_max: usize,
    pub min_spacing_frac: f64,
}

impl UniformGenerator {
    pub fn new(lo: f64, hi: f64) -> Self {
        UniformGenerator {
            lo,
            hi,
            n_min: 2,
            n_max: 30,
            min_spacing_frac: 1e-3,
        }
    }

    pub fn with_sizes(mut self, n_min: usize, n_max: usize) -> Self {
        self.n_min = n_min;
        self.n_max = n_max;
        self
    }

    /// Default window for a kernel: its domain when bounded, `[-3, 3]`
    /// otherwise.
    pub fn for_kernel(kernel: &KernelSpec) -> Self {
        let (lo, hi) = sampling_window(kernel);
        UniformGenerator::new(lo, hi)
    }
}

pub fn sampling_window(kernel: &KernelSpec) -> (f64, f64) {
    let d = kernel.domain();
    if d.is_bounded() {
        (d.lo, d.hi)
    } else {
        (d.lo.max(-3.0), d.hi.min(3.0))
    }
}

impl PointGenerator for UniformGenerator {
    fn generate(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        let n = rng.random_range(self.n_min..=self.n_max);
        let spacing = self.min_spacing_frac * (self.hi - self.lo);
        let mut pts: Vec<f64> = Vec::with_capacity(n);
        while pts.len() < n {
            let p = rng.random_range(self.lo..self.hi);
            if p <= self.lo || pts.iter().any(|q| (p - q).abs() < spacing) {
                continue;
            }
            pts.push(p);
        }
        pts
    }

    fn window(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }
}

/// Tight equispaced clusters `c, c + h, ..., c + (size - 1) h` with the
/// spacing `h` uniform in `spacing`.
#[derive(Debug, Clone, Copy)]
pub struct ClusterGenerator {
    pub lo: f64,
    pub hi: f64,
    pub size: usize,
    pub spacing: (f64, f64),
}

impl PointGenerator for ClusterGenerator {
    fn generate(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        let h = rng.random_range(self.spacing.0..=self.spacing.1);
        let span = h * (self.size.saturating_sub(1)) as f64;
        let start = rng.random_range(self.lo..(self.hi - span).max(self.lo + f64::EPSILON));
        (0..self.size).map(|k| start + h * k as f64).collect()
    }

    fn window(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }
}

/// Always returns the same point set.
#[derive(Debug, Clone)]
pub struct FixedGenerator {
    pub points: Vec<f64>,
    pub window: (f64, f64),
}

impl PointGenerator for FixedGenerator {
    fn generate(&self, _rng: &mut ChaCha8Rng) -> Vec<f64> {
        self.points.clone()
    }

    fn window(&self) -> (f64, f64) {
        self.window
    }
}

/// Values of the Lebesgue function over a grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LebesgueProfile {
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    pub max_value: f64,
    pub argmax: f64,
}

/// `L(t) = ||K[x]^{-1} K_x(t)||_1`.
pub fn lebesgue_function(system: &GramSystem, t: f64) -> Result<f64> {
    Ok(norm1(&system.cardinal_coefficients(t)?))
}

/// Lebesgue function over `grid`. The maximum is a lower bound for the
/// Lebesgue constant over the domain.
pub fn lebesgue_constant(system: &GramSystem, grid: &[f64]) -> Result<LebesgueProfile> {
    if grid.is_empty() {
        return Err(Error::InvalidConfig("Lebesgue grid is empty".into()));
    }
    let values = grid
        .iter()
        .map(|&t| lebesgue_function(system, t))
        .collect::<Result<Vec<_>>>()?;
    let (imax, max_value) = values
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |b, c| if c.1 > b.1 { c } else { b });
    Ok(LebesgueProfile {
        grid: grid.to_vec(),
        values,
        max_value,
        argmax: grid[imax],
    })
}

/// `size` uniform nodes over `window` restricted to the kernel domain, plus
/// the midpoints between consecutive sample points, in ascending order.
pub fn profile_grid(kernel: &KernelSpec, points: &PointSet, window: (f64, f64), size: usize) -> Vec<f64> {
    let domain = kernel.domain();
    let sorted = points.sorted();
    let mut grid: Vec<f64> = linspace(window.0, window.1, size)
        .into_iter()
        .chain(sorted.windows(2).map(|w| 0.5 * (w[0] + w[1])))
        .filter(|t| domain.contains(*t))
        .collect();
    grid.sort_by(f64::total_cmp);
    grid
}

/// Grid estimate of the relaxed constant, never below one.
pub fn estimate_beta(system: &GramSystem, grid: &[f64]) -> Result<f64> {
    Ok(lebesgue_constant(system, grid)?.max_value.max(1.0))
}

#[cfg(feature = "parallel")]
fn map_trials<T: Send>(trials: usize, f: impl Fn(usize) -> T + Sync + Send) -> Vec<T> {
    use rayon::prelude::*;
    (0..trials).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
fn map_trials<T: Send>(trials: usize, f: impl Fn(usize) -> T + Sync + Send) -> Vec<T> {
    (0..trials).map(f).collect()
}

enum TrialOutcome {
    Value { points: Vec<f64>, t: Option<f64>, value: f64 },
    Skipped(String),
}

/// Builds Gram systems for sampled point sets and fails on the first one
/// whose rcond estimate falls below the singularity threshold.
pub fn audit_a1(
    kernel: &KernelSpec,
    generator: &dyn PointGenerator,
    trials: usize,
    seed: u64,
) -> AuditReport {
    let outcomes = map_trials(trials, |i| {
        let mut rng = rng::stream(seed, i as u64, Purpose::PointSet);
        let raw = generator.generate(&mut rng);
        match PointSet::new(raw.clone()) {
            Err(e) => TrialOutcome::Skipped(e.to_string()),
            Ok(points) => match GramSystem::build(*kernel, points) {
                Ok(sys) => TrialOutcome::Value {
                    points: raw,
                    t: None,
                    value: sys.rcond(),
                },
                Err(Error::SingularGram { rcond, .. }) => TrialOutcome::Value {
                    points: raw,
                    t: None,
                    value: rcond,
                },
                Err(e) => TrialOutcome::Skipped(e.to_string()),
            },
        }
    });
    summarize(Condition::A1, trials, outcomes, |v| v < crate::gram::SINGULAR_RCOND, false)
}

/// Largest `|K(s, t)|` over the given pairs against the declared bound.
/// Pairs outside the domain are skipped.
pub fn audit_a2(kernel: &KernelSpec, pairs: &[(f64, f64)]) -> AuditReport {
    let bound = kernel.bound();
    let outcomes = pairs
        .iter()
        .map(|&(s, t)| match kernel.eval(s, t) {
            Ok(v) => TrialOutcome::Value {
                points: vec![s],
                t: Some(t),
                value: v.abs(),
            },
            Err(e) => TrialOutcome::Skipped(e.to_string()),
        })
        .collect();
    let mut report = summarize(
        Condition::A2,
        pairs.len(),
        outcomes,
        |v| v > bound + A2_TOLERANCE,
        true,
    );
    report.note = Some(format!("declared bound M = {bound}"));
    report
}

/// `m * m` pairs over a square window, shrunk by half a cell so open domain
/// endpoints are never hit.
pub fn square_pairs(window: (f64, f64), m: usize) -> Vec<(f64, f64)> {
    let h = (window.1 - window.0) / m as f64;
    let axis: Vec<f64> = (0..m).map(|i| window.0 + h * (i as f64 + 0.5)).collect();
    axis.iter()
        .flat_map(|&s| axis.iter().map(move |&t| (s, t)))
        .collect()
}

/// Lebesgue constants of sampled point sets against the unit bound.
pub fn audit_a4(
    kernel: &KernelSpec,
    generator: &dyn PointGenerator,
    grid_size: usize,
    trials: usize,
    seed: u64,
) -> AuditReport {
    let mut report = lebesgue_audit(kernel, generator, grid_size, trials, seed, 1.0);
    report.condition = Condition::A4;
    report
}

/// Lebesgue constants against a relaxed bound `beta >= 1`.
pub fn audit_relaxed_a4(
    kernel: &KernelSpec,
    generator: &dyn PointGenerator,
    grid_size: usize,
    trials: usize,
    seed: u64,
    beta: f64,
) -> AuditReport {
    let mut report = lebesgue_audit(kernel, generator, grid_size, trials, seed, beta);
    report.condition = Condition::RelaxedA4;
    report.note = Some(format!("relaxed bound beta = {beta}"));
    report
}

fn lebesgue_audit(
    kernel: &KernelSpec,
    generator: &dyn PointGenerator,
    grid_size: usize,
    trials: usize,
    seed: u64,
    beta: f64,
) -> AuditReport {
    let outcomes = map_trials(trials, |i| {
        let mut rng = rng::stream(seed, i as u64, Purpose::PointSet);
        let raw = generator.generate(&mut rng);
        let points = match PointSet::new(raw.clone()) {
            Ok(p) => p,
            Err(e) => return TrialOutcome::Skipped(e.to_string()),
        };
        let grid = profile_grid(kernel, &points, generator.window(), grid_size);
        let profile = GramSystem::build(*kernel, points).and_then(|sys| lebesgue_constant(&sys, &grid));
        match profile {
            Ok(p) => TrialOutcome::Value {
                points: raw,
                t: Some(p.argmax),
                value: p.max_value,
            },
            Err(e) => TrialOutcome::Skipped(e.to_string()),
        }
    });
    summarize(
        Condition::A4,
        trials,
        outcomes,
        |v| v > beta + A4_TOLERANCE,
        true,
    )
}

/// Folds trial outcomes in index order. `larger_is_worse` picks the direction
/// of `worst_value`; the first violating trial becomes the witness.
fn summarize(
    condition: Condition,
    trials: usize,
    outcomes: Vec<TrialOutcome>,
    violates: impl Fn(f64) -> bool,
    larger_is_worse: bool,
) -> AuditReport {
    let mut witness = None;
    let mut skipped = 0;
    let mut first_skip = None;
    let mut worst: Option<(f64, Option<f64>)> = None;
    for outcome in outcomes {
        match outcome {
            TrialOutcome::Skipped(msg) => {
                skipped += 1;
                first_skip.get_or_insert(msg);
            }
            TrialOutcome::Value { points, t, value } => {
                let replace = match worst {
                    None => true,
                    Some((w, _)) => {
                        if larger_is_worse {
                            value > w
                        } else {
                            value < w
                        }
                    }
                };
                if replace {
                    worst = Some((value, t));
                }
                if witness.is_none() && violates(value) {
                    witness = Some(Witness { points, t, value });
                }
            }
        }
    }
    let verdict = if witness.is_some() {
        Verdict::Fail
    } else if skipped == trials {
        Verdict::Inconclusive
    } else {
        Verdict::Pass
    };
    let note = match (verdict, first_skip) {
        (Verdict::Inconclusive, Some(msg)) => Some(format!("no trial could be evaluated: {msg}")),
        (_, Some(msg)) => Some(format!("{skipped} trial(s) skipped, first: {msg}")),
        _ => None,
    };
    AuditReport {
        condition,
        verdict,
        witness,
        stats: AuditStats {
            n_trials: trials,
            skipped,
            worst_value: worst.map_or(f64::NAN, |w| w.0),
            argmax_location: worst.and_then(|w| w.1),
        },
        note,
    }
}

/// Coefficients of the interpolant of `(y, b)` on `x` plus `t_new`, from the
/// block inverse of the extended Gram matrix.
pub fn extension_coefficients(system: &GramSystem, y: &[f64], t_new: f64, b: f64) -> Result<Vec<f64>> {
    let kernel = system.kernel();
    kernel.check(t_new)?;
    if system.points().as_slice().contains(&t_new) {
        return Err(Error::DuplicatePoints { min_spacing: 0.0 });
    }
    let a = system.solve(y)?;
    let col = system.kx_column(t_new)?;
    let row = system.kx_row(t_new)?;
    let w = system.solve(&col)?;
    let dot = |u: &[f64], v: &[f64]| -> f64 { u.iter().zip(v).map(|(p, q)| p * q).sum() };
    let p = kernel.eval_unchecked(t_new, t_new) - dot(&row, &w);
    if p.abs() < SCHUR_TOLERANCE {
        return Err(Error::DegenerateSchur { schur: p });
    }
    let q = dot(&row, &a) - b;
    let ratio = q / p;
    let mut out: Vec<f64> = a.iter().zip(&w).map(|(ai, wi)| ai + ratio * wi).collect();
    out.push(-ratio);
    Ok(out)
}

/// `||K[xbar]^{-1} (y, b)||_1`.
pub fn extension_norm(system: &GramSystem, y: &[f64], t_new: f64, b: f64) -> Result<f64> {
    Ok(norm1(&extension_coefficients(system, y, t_new, b)?))
}

/// Interior window helper for callers that want a closed sampling interval
/// strictly inside an open domain.
pub fn inset(domain: Interval, margin: f64) -> (f64, f64) {
    (domain.lo + margin, domain.hi - margin)
}
