//! Noisy regression comparison between the l1 coefficient scheme (RKBS) and
//! kernel ridge regression (RKHS).
//!
//! Samples of a five-bump exponential target on equally spaced points are
//! perturbed by noise; both methods are fitted for every regularization
//! weight on a grid, and each keeps the weight whose fit is closest to the
//! true target in L2 (oracle selection). Errors and coefficient sparsity are
//! then aggregated over trials.

use std::fmt::Write as _;

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gram::{linspace, GramSystem, PointSet};
use crate::interpolation::ExpansionFunction;
use crate::kernels::{Interval, KernelSpec};
use crate::linalg;
use crate::rng::{self, Purpose};
use crate::solvers::{self, LassoConfig};

/// Centers of the five exponential bumps making up the target.
pub const TARGET_CENTERS: [f64; 5] = [-1.0, -0.8, 0.0, 0.8, 1.0];

/// `sum_c exp(-|t - c|)` over [`TARGET_CENTERS`].
pub fn target_function(t: f64) -> f64 {
    // the centers are symmetric, so evaluating at |t| makes f exactly even
    let t = t.abs();
    TARGET_CENTERS.iter().map(|c| (-(t - c).abs()).exp()).sum()
}

/// The target written as an exponential-kernel expansion.
pub fn target_expansion() -> ExpansionFunction {
    ExpansionFunction::left(
        KernelSpec::exponential(),
        PointSet::new(TARGET_CENTERS.to_vec()).expect("distinct centers"),
        vec![1.0; TARGET_CENTERS.len()],
    )
    .expect("valid expansion")
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NoiseModel {
    /// No perturbation; useful to check the pipeline.
    None,
    /// i.i.d. normal with the given variance.
    Gaussian { variance: f64 },
    /// i.i.d. uniform on `[-halfwidth, halfwidth]`.
    Uniform { halfwidth: f64 },
    /// `+-magnitude` with equal probability. With `fraction < 1` only that
    /// share of samples (chosen at random) is corrupted.
    PepperSauce {
        magnitude: f64,
        #[serde(default = "one")]
        fraction: f64,
    },
}

fn one() -> f64 {
    1.0
}

impl NoiseModel {
    pub const GAUSSIAN: NoiseModel = NoiseModel::Gaussian { variance: 0.01 };
    pub const UNIFORM: NoiseModel = NoiseModel::Uniform { halfwidth: 0.1 };
    pub const PEPPER: NoiseModel = NoiseModel::PepperSauce {
        magnitude: 0.1,
        fraction: 1.0,
    };

    pub fn name(&self) -> &'static str {
        match self {
            NoiseModel::None => "none",
            NoiseModel::Gaussian { .. } => "gaussian",
            NoiseModel::Uniform { .. } => "uniform",
            NoiseModel::PepperSauce { .. } => "pepper",
        }
    }

    /// Default parameters for a noise name.
    pub fn from_name(name: &str) -> Result<Self> {
        match name.trim().to_ascii_lowercase().as_str() {
            "gaussian" | "normal" => Ok(Self::GAUSSIAN),
            "uniform" => Ok(Self::UNIFORM),
            "pepper" | "pepper_sauce" | "pepper-sauce" => Ok(Self::PEPPER),
            "none" => Ok(NoiseModel::None),
            other => Err(Error::InvalidConfig(format!("unknown noise model `{other}`"))),
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match *self {
            NoiseModel::None => true,
            NoiseModel::Gaussian { variance } => variance > 0.0 && variance.is_finite(),
            NoiseModel::Uniform { halfwidth } => halfwidth > 0.0 && halfwidth.is_finite(),
            NoiseModel::PepperSauce {
                magnitude,
                fraction,
            } => magnitude > 0.0 && magnitude.is_finite() && (0.0..=1.0).contains(&fraction),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidConfig(format!("invalid noise parameters {self:?}")))
        }
    }
}

pub fn generate_noise<R: Rng + ?Sized>(model: &NoiseModel, n: usize, rng: &mut R) -> Vec<f64> {
    match *model {
        NoiseModel::None => vec![0.0; n],
        NoiseModel::Gaussian { variance } => {
            let normal = Normal::new(0.0, variance.sqrt()).expect("positive variance");
            (0..n).map(|_| normal.sample(rng)).collect()
        }
        NoiseModel::Uniform { halfwidth } => {
            (0..n).map(|_| rng.random_range(-halfwidth..=halfwidth)).collect()
        }
        NoiseModel::PepperSauce {
            magnitude,
            fraction,
        } => (0..n)
            .map(|_| {
                if fraction < 1.0 && !rng.random_bool(fraction) {
                    return 0.0;
                }
                if rng.random_bool(0.5) {
                    magnitude
                } else {
                    -magnitude
                }
            })
            .collect(),
    }
}

/// `log10` exponents `from..=to` as the grid `10^from, ..., 10^to`.
pub fn decade_grid(from: i32, to: i32) -> Vec<f64> {
    (from..=to).map(|j| 10f64.powi(j)).collect()
}

/// Parses `"1e-7..1e1"` (every decade in between) or a comma-separated list.
pub fn parse_mu_grid(spec: &str) -> Result<Vec<f64>> {
    let bad = || Error::InvalidConfig(format!("cannot parse mu grid `{spec}`"));
    let grid = if let Some((a, b)) = spec.split_once("..") {
        let lo: f64 = a.trim().parse().map_err(|_| bad())?;
        let hi: f64 = b.trim().parse().map_err(|_| bad())?;
        if !(lo > 0.0 && hi >= lo) {
            return Err(bad());
        }
        decade_grid(lo.log10().round() as i32, hi.log10().round() as i32)
    } else {
        spec.split(',')
            .map(|s| s.trim().parse::<f64>().map_err(|_| bad()))
            .collect::<Result<Vec<_>>>()?
    };
    if grid.is_empty() || grid.iter().any(|m| !(*m >= 0.0)) {
        return Err(bad());
    }
    Ok(grid)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub n_points: usize,
    pub interval: (f64, f64),
    pub kernel: KernelSpec,
    pub noise: NoiseModel,
    pub trials: usize,
    pub mu_grid: Vec<f64>,
    pub master_seed: u64,
    pub quadrature_nodes: usize,
    /// Solver settings; `mu` is overwritten from the grid.
    pub lasso: LassoConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            n_points: 200,
            interval: (-1.0, 1.0),
            kernel: KernelSpec::exponential(),
            noise: NoiseModel::GAUSSIAN,
            trials: 50,
            mu_grid: decade_grid(-7, 1),
            master_seed: 2012,
            quadrature_nodes: 2001,
            lasso: LassoConfig::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn with_noise(noise: NoiseModel) -> Self {
        ExperimentConfig {
            noise,
            ..Default::default()
        }
    }

    fn validate(&self) -> Result<()> {
        let fail = |m: &str| Err(Error::InvalidConfig(m.to_string()));
        if self.n_points < 2 {
            return fail("n_points must be at least 2");
        }
        if self.trials == 0 {
            return fail("trials must be at least 1");
        }
        if self.mu_grid.is_empty() || self.mu_grid.iter().any(|m| !(*m >= 0.0)) {
            return fail("mu grid must be nonempty and nonnegative");
        }
        if self.quadrature_nodes < 2 {
            return fail("quadrature needs at least 2 nodes");
        }
        if !(self.interval.0 < self.interval.1) {
            return fail("interval must be nonempty");
        }
        self.noise.validate()
    }
}

/// Composite trapezoid rule on uniform nodes, with the target values and the
/// kernel sections at the sample points tabulated once.
#[derive(Debug, Clone)]
pub struct Quadrature {
    weights: Vec<f64>,
    target: Vec<f64>,
    /// `sections[(i, j)] = K(x_j, t_i)`
    sections: DMatrix<f64>,
}

impl Quadrature {
    pub fn new(kernel: &KernelSpec, points: &PointSet, interval: (f64, f64), nodes: usize) -> Result<Self> {
        if nodes < 2 {
            return Err(Error::InvalidConfig("quadrature needs at least 2 nodes".into()));
        }
        let ts = linspace(interval.0, interval.1, nodes);
        for &t in &ts {
            kernel.check(t)?;
        }
        let h = (interval.1 - interval.0) / (nodes - 1) as f64;
        let mut weights = vec![h; nodes];
        weights[0] *= 0.5;
        weights[nodes - 1] *= 0.5;
        let xs = points.as_slice();
        let sections = DMatrix::from_fn(nodes, xs.len(), |i, j| kernel.eval_unchecked(xs[j], ts[i]));
        Ok(Quadrature {
            weights,
            target: ts.iter().map(|&t| target_function(t)).collect(),
            sections,
        })
    }

    /// L2 distance to the target of the left expansion with coefficients `c`.
    pub fn error(&self, c: &[f64]) -> f64 {
        let values = linalg::mat_vec(&self.sections, c);
        values
            .iter()
            .zip(&self.target)
            .zip(&self.weights)
            .map(|((v, f), w)| w * (v - f) * (v - f))
            .sum::<f64>()
            .sqrt()
    }
}

/// `||f - target||_{L2([a, b])}` by the composite trapezoid rule.
pub fn l2_error(f: &ExpansionFunction, interval: (f64, f64), nodes: usize) -> Result<f64> {
    let q = Quadrature::new(f.kernel(), f.points(), interval, nodes)?;
    Ok(q.error(f.coefficients()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MethodRecord {
    pub l2_error: f64,
    pub sparsity: usize,
    pub chosen_mu: f64,
    /// Whether every solve on the grid met its tolerance.
    pub converged: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: usize,
    pub rkhs: MethodRecord,
    pub rkbs: MethodRecord,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MethodSummary {
    pub mean_error: f64,
    /// Mean of the squared L2 distances.
    pub mean_squared_error: f64,
    pub mean_sparsity: f64,
    pub max_sparsity: usize,
}

impl MethodSummary {
    fn aggregate<'a>(records: impl Iterator<Item = &'a MethodRecord>) -> Self {
        let (mut err, mut sq, mut sp, mut max, mut count) = (0.0, 0.0, 0.0, 0usize, 0usize);
        for r in records {
            err += r.l2_error;
            sq += r.l2_error * r.l2_error;
            sp += r.sparsity as f64;
            max = max.max(r.sparsity);
            count += 1;
        }
        let n = count.max(1) as f64;
        MethodSummary {
            mean_error: err / n,
            mean_squared_error: sq / n,
            mean_sparsity: sp / n,
            max_sparsity: max,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMetadata {
    pub point_layout: String,
    pub pepper_interpretation: String,
    pub mu_selection: String,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialSummary {
    pub config: ExperimentConfig,
    pub rkhs: MethodSummary,
    pub rkbs: MethodSummary,
    pub records: Vec<TrialRecord>,
    pub metadata: RunMetadata,
}

/// A configured experiment with its Gram system and quadrature tables.
pub struct Experiment {
    config: ExperimentConfig,
    system: GramSystem,
    quadrature: Quadrature,
    clean: Vec<f64>,
}

impl Experiment {
    pub fn new(config: ExperimentConfig) -> Result<Self> {
        config.validate()?;
        config.kernel.ensure_fittable()?;
        let kernel = config
            .kernel
            .with_domain(Interval::closed(config.interval.0, config.interval.1))
            .or_else(|_| {
                config.kernel.check(config.interval.0)?;
                config.kernel.check(config.interval.1)?;
                Ok::<_, Error>(config.kernel)
            })?;
        let points = PointSet::linspace(config.interval.0, config.interval.1, config.n_points)?;
        let clean = points.as_slice().iter().map(|&x| target_function(x)).collect();
        let quadrature = Quadrature::new(&kernel, &points, config.interval, config.quadrature_nodes)?;
        let system = GramSystem::build(kernel, points)?;
        Ok(Experiment {
            config,
            system,
            quadrature,
            clean,
        })
    }

    pub fn config(&self) -> &ExperimentConfig {
        &self.config
    }

    pub fn system(&self) -> &GramSystem {
        &self.system
    }

    pub fn quadrature(&self) -> &Quadrature {
        &self.quadrature
    }

    /// Noisy samples for one trial.
    pub fn samples(&self, trial: usize) -> Vec<f64> {
        let mut rng = rng::stream(self.config.master_seed, trial as u64, Purpose::Noise);
        let noise = generate_noise(&self.config.noise, self.clean.len(), &mut rng);
        self.clean.iter().zip(noise).map(|(f, e)| f + e).collect()
    }

    pub fn run_trial(&self, trial: usize) -> Result<TrialRecord> {
        let y = self.samples(trial);

        let mut rkhs: Option<MethodRecord> = None;
        let mut rkhs_converged = true;
        for &mu in &self.config.mu_grid {
            let fit = solvers::ridge_gram(&self.system, &y, mu)?;
            rkhs_converged &= fit.converged;
            let err = self.quadrature.error(fit.values());
            if rkhs.is_none_or(|best| err < best.l2_error) {
                rkhs = Some(MethodRecord {
                    l2_error: err,
                    sparsity: fit.sparsity,
                    chosen_mu: mu,
                    converged: true,
                });
            }
        }

        // largest weight first so each solve warm-starts from a sparser one
        let mut order: Vec<usize> = (0..self.config.mu_grid.len()).collect();
        order.sort_by(|&a, &b| self.config.mu_grid[b].total_cmp(&self.config.mu_grid[a]));
        let mut rkbs: Option<(usize, MethodRecord)> = None;
        let mut rkbs_converged = true;
        let mut warm: Option<Vec<f64>> = None;
        for idx in order {
            let mu = self.config.mu_grid[idx];
            let config = LassoConfig {
                mu,
                ..self.config.lasso
            };
            let fit = solvers::lasso_gram_from(&self.system, &y, &config, warm.as_deref())?;
            rkbs_converged &= fit.converged;
            let err = self.quadrature.error(fit.values());
            // ties go to the earlier grid entry, independent of solve order
            let better = match rkbs {
                None => true,
                Some((best_idx, best)) => err < best.l2_error || (err == best.l2_error && idx < best_idx),
            };
            if better {
                rkbs = Some((
                    idx,
                    MethodRecord {
                        l2_error: err,
                        sparsity: fit.sparsity,
                        chosen_mu: mu,
                        converged: true,
                    },
                ));
            }
            warm = Some(fit.coefficients.values);
        }

        let mut rkhs = rkhs.expect("nonempty grid");
        let mut rkbs = rkbs.expect("nonempty grid").1;
        rkhs.converged = rkhs_converged;
        rkbs.converged = rkbs_converged;
        Ok(TrialRecord { trial, rkhs, rkbs })
    }

    pub fn run(&self) -> Result<TrialSummary> {
        let records = map_trials(self.config.trials, |i| self.run_trial(i))
            .into_iter()
            .collect::<Result<Vec<_>>>()?;
        let n = self.config.n_points;
        let mut warnings = Vec::new();
        for r in &records {
            if r.rkhs.sparsity != n {
                warnings.push(format!(
                    "trial {}: ridge solution has {} of {n} coefficients above threshold",
                    r.trial, r.rkhs.sparsity
                ));
            }
            if !r.rkbs.converged {
                warnings.push(format!(
                    "trial {}: an l1 solve stopped at max_iter before reaching the KKT tolerance",
                    r.trial
                ));
            }
        }
        Ok(TrialSummary {
            rkhs: MethodSummary::aggregate(records.iter().map(|r| &r.rkhs)),
            rkbs: MethodSummary::aggregate(records.iter().map(|r| &r.rkbs)),
            metadata: RunMetadata {
                point_layout: format!(
                    "{} equally spaced points on [{}, {}], both endpoints included",
                    n, self.config.interval.0, self.config.interval.1
                ),
                pepper_interpretation: match self.config.noise {
                    NoiseModel::PepperSauce { fraction, .. } if fraction < 1.0 => format!(
                        "each sample corrupted with probability {fraction} by +-magnitude with equal odds"
                    ),
                    _ => "every sample perturbed by +-magnitude with equal odds".into(),
                },
                mu_selection: "oracle: weight minimizing the L2 distance to the true target".into(),
                warnings,
            },
            records,
            config: self.config.clone(),
        })
    }
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

pub fn run_trial(config: &ExperimentConfig, trial: usize) -> Result<TrialRecord> {
    Experiment::new(config.clone())?.run_trial(trial)
}

pub fn run_experiment(config: &ExperimentConfig) -> Result<TrialSummary> {
    Experiment::new(config.clone())?.run()
}

pub const CSV_HEADER: &str = "noise,method,mean_error,mean_sparsity,max_sparsity,trials,seed";

/// One row per (noise model, method).
pub fn csv_report(summaries: &[TrialSummary]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for s in summaries {
        for (method, m) in [("rkhs", &s.rkhs), ("rkbs", &s.rkbs)] {
            let _ = writeln!(
                out,
                "{},{},{:.6e},{:.2},{},{},{}",
                s.config.noise.name(),
                method,
                m.mean_error,
                m.mean_sparsity,
                m.max_sparsity,
                s.config.trials,
                s.config.master_seed
            );
        }
    }
    out
}
