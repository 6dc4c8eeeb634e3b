//! Browser bindings for three interactive views: the Lebesgue function of a
//! point set, its cardinal functions, and a noisy fit comparing l1 and ridge
//! regularization. Each view has a plain Rust function returning a
//! serializable struct and a thin `wasm_bindgen` wrapper returning JSON.

use serde::Serialize;
use wasm_bindgen::prelude::*;

use sparse_rkbs::admissibility::{lebesgue_constant, profile_grid};
use sparse_rkbs::experiment::{Experiment, ExperimentConfig, NoiseModel};
use sparse_rkbs::gram::linspace;
use sparse_rkbs::interpolation::ExpansionFunction;
use sparse_rkbs::kernels::closed_form_cardinal;
use sparse_rkbs::solvers::{self, LassoConfig};
use sparse_rkbs::{Error, GramSystem, KernelSpec, PointSet, Result};

#[derive(Debug, Clone, Serialize)]
pub struct LebesgueView {
    pub kernel: String,
    pub points: Vec<f64>,
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    pub max_value: f64,
    pub argmax: f64,
    pub rcond: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct CardinalView {
    pub kernel: String,
    pub points: Vec<f64>,
    pub grid: Vec<f64>,
    /// `curves[k][i]` is the k-th cardinal function at `grid[i]`.
    pub curves: Vec<Vec<f64>>,
    /// Largest gap to the closed-form cardinals, when the kernel has them.
    pub closed_form_gap: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct FitCurve {
    pub mu: f64,
    pub values: Vec<f64>,
    pub sparsity: usize,
    pub l2_error: f64,
    pub kkt_residual: f64,
    /// Sample points carrying a nonzero coefficient.
    pub centers: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct FitView {
    pub noise: String,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub grid: Vec<f64>,
    pub target: Vec<f64>,
    pub rkbs: FitCurve,
    pub rkhs: FitCurve,
}

/// Numbers separated by commas or whitespace.
pub fn parse_points(text: &str) -> Result<Vec<f64>> {
    text.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<f64>()
                .map_err(|_| Error::InvalidConfig(format!("cannot parse `{s}` as a number")))
        })
        .collect()
}

/// Plot window: the domain when bounded, otherwise the points padded by
/// half their spread (at least 0.5).
fn window(kernel: &KernelSpec, points: &PointSet) -> (f64, f64) {
    let d = kernel.domain();
    if d.is_bounded() {
        return (d.lo, d.hi);
    }
    let sorted = points.sorted();
    let (lo, hi) = (sorted[0], sorted[sorted.len() - 1]);
    let pad = (0.5 * (hi - lo)).max(0.5);
    (d.lo.max(lo - pad), d.hi.min(hi + pad))
}

fn setup(kernel: &str, points: &str) -> Result<(KernelSpec, GramSystem)> {
    let kernel: KernelSpec = kernel.parse()?;
    let points = PointSet::new(parse_points(points)?)?;
    let system = GramSystem::build(kernel, points)?;
    Ok((kernel, system))
}

pub fn lebesgue_view(kernel: &str, points: &str, grid_size: usize) -> Result<LebesgueView> {
    let (kernel, system) = setup(kernel, points)?;
    let grid = profile_grid(&kernel, system.points(), window(&kernel, system.points()), grid_size.max(2));
    let profile = lebesgue_constant(&system, &grid)?;
    Ok(LebesgueView {
        kernel: kernel.name(),
        points: system.points().as_slice().to_vec(),
        grid: profile.grid,
        values: profile.values,
        max_value: profile.max_value,
        argmax: profile.argmax,
        rcond: system.rcond(),
    })
}

pub fn cardinal_view(kernel: &str, points: &str, grid_size: usize) -> Result<CardinalView> {
    let (kernel, system) = setup(kernel, points)?;
    let grid = profile_grid(&kernel, system.points(), window(&kernel, system.points()), grid_size.max(2));
    let n = system.n();
    let mut curves = vec![Vec::with_capacity(grid.len()); n];
    let mut gap: Option<f64> = None;
    for &t in &grid {
        let u = system.cardinal_coefficients(t)?;
        match closed_form_cardinal(&kernel, system.points(), t) {
            Ok(exact) => {
                let g = u.iter().zip(&exact).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
                gap = Some(gap.map_or(g, |m| m.max(g)));
            }
            Err(Error::UnsupportedKernel(_)) => {}
            Err(e) => return Err(e),
        }
        for (curve, v) in curves.iter_mut().zip(u) {
            curve.push(v);
        }
    }
    Ok(CardinalView {
        kernel: kernel.name(),
        points: system.points().as_slice().to_vec(),
        grid,
        curves,
        closed_form_gap: gap,
    })
}

/// One noisy sample of the five-bump target on `n` equally spaced points
/// of [-1, 1], fitted with the exponential kernel by l1 and ridge
/// regularization at the given weights.
pub fn fit_view(noise: &str, n: usize, seed: u64, mu_rkbs: f64, mu_rkhs: f64, grid_size: usize) -> Result<FitView> {
    let noise = NoiseModel::from_name(noise)?;
    let config = ExperimentConfig {
        n_points: n,
        noise,
        trials: 1,
        mu_grid: vec![mu_rkbs, mu_rkhs],
        master_seed: seed,
        ..Default::default()
    };
    let exp = Experiment::new(config)?;
    let system = exp.system();
    let y = exp.samples(0);
    let grid = linspace(-1.0, 1.0, grid_size.max(2));
    let target = grid.iter().map(|&t| sparse_rkbs::experiment::target_function(t)).collect();

    let curve = |mu: f64, fit: solvers::FitResult| -> Result<FitCurve> {
        let f = ExpansionFunction::left(*system.kernel(), system.points().clone(), fit.values().to_vec())?;
        let values = grid.iter().map(|&t| f.evaluate(t)).collect::<Result<Vec<_>>>()?;
        let centers = system
            .points()
            .as_slice()
            .iter()
            .zip(fit.values())
            .filter(|(_, c)| **c != 0.0)
            .map(|(x, _)| *x)
            .collect();
        Ok(FitCurve {
            mu,
            values,
            sparsity: fit.sparsity,
            l2_error: exp.quadrature().error(fit.values()),
            kkt_residual: fit.kkt_residual,
            centers,
        })
    };
    let rkbs = curve(mu_rkbs, solvers::lasso_gram(system, &y, &LassoConfig::new(mu_rkbs))?)?;
    let rkhs = curve(mu_rkhs, solvers::ridge_gram(system, &y, mu_rkhs)?)?;
    Ok(FitView {
        noise: noise.name().to_string(),
        x: system.points().as_slice().to_vec(),
        y,
        grid,
        target,
        rkbs,
        rkhs,
    })
}

fn to_js<T: Serialize>(r: Result<T>) -> std::result::Result<String, JsError> {
    match r {
        Ok(v) => serde_json::to_string(&v).map_err(|e| JsError::new(&e.to_string())),
        Err(e) => Err(JsError::new(&e.to_string())),
    }
}

/// JSON [`LebesgueView`].
#[wasm_bindgen(js_name = lebesgueProfile)]
pub fn lebesgue_profile(kernel: &str, points: &str, grid_size: usize) -> std::result::Result<String, JsError> {
    to_js(lebesgue_view(kernel, points, grid_size))
}

/// JSON [`CardinalView`].
#[wasm_bindgen(js_name = cardinalFunctions)]
pub fn cardinal_functions(kernel: &str, points: &str, grid_size: usize) -> std::result::Result<String, JsError> {
    to_js(cardinal_view(kernel, points, grid_size))
}

/// JSON [`FitView`].
#[wasm_bindgen(js_name = noisyFit)]
pub fn noisy_fit(
    noise: &str,
    n: usize,
    seed: u32,
    mu_rkbs: f64,
    mu_rkhs: f64,
    grid_size: usize,
) -> std::result::Result<String, JsError> {
    to_js(fit_view(noise, n, seed as u64, mu_rkbs, mu_rkhs, grid_size))
}
