//! Finite kernel expansions, their norms, the bilinear pairing between the
//! two sides, and minimal-norm interpolation.
//!
//! A left expansion `f = sum_j c_j K(x_j, .)` lives in the l1 space and has
//! norm `||c||_1`. A right expansion `g = sum_j c_j K(., x_j)` lives in the
//! dual-side space; for kernels with a proven unit Lebesgue bound its norm is
//! `||c^T K[x]||_inf`, the largest value of `|g|` at the nodes.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gram::{GramSystem, PointSet};
use crate::kernels::{KernelSpec, Status};
use crate::linalg::{norm1, norm_inf};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    /// `sum_j c_j K(x_j, .)`
    Left,
    /// `sum_j c_j K(., x_j)`
    Right,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientVector {
    #[serde(rename = "coefficients")]
    pub values: Vec<f64>,
    pub side: Side,
}

/// A finite expansion in kernel sections.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpansionFunction {
    kernel: KernelSpec,
    points: PointSet,
    #[serde(flatten)]
    coefficients: CoefficientVector,
}

impl ExpansionFunction {
    pub fn new(kernel: KernelSpec, points: PointSet, coefficients: CoefficientVector) -> Result<Self> {
        if coefficients.values.len() != points.len() {
            return Err(Error::DimensionMismatch {
                expected: points.len(),
                found: coefficients.values.len(),
            });
        }
        for &x in points.as_slice() {
            kernel.check(x)?;
        }
        Ok(ExpansionFunction {
            kernel,
            points,
            coefficients,
        })
    }

    pub fn left(kernel: KernelSpec, points: PointSet, values: Vec<f64>) -> Result<Self> {
        Self::new(kernel, points, CoefficientVector { values, side: Side::Left })
    }

    pub fn right(kernel: KernelSpec, points: PointSet, values: Vec<f64>) -> Result<Self> {
        Self::new(kernel, points, CoefficientVector { values, side: Side::Right })
    }

    /// The section `K(s, .)`.
    pub fn left_section(kernel: KernelSpec, s: f64) -> Result<Self> {
        Self::left(kernel, PointSet::new(vec![s])?, vec![1.0])
    }

    /// The section `K(., t)`.
    pub fn right_section(kernel: KernelSpec, t: f64) -> Result<Self> {
        Self::right(kernel, PointSet::new(vec![t])?, vec![1.0])
    }

    pub fn kernel(&self) -> &KernelSpec {
        &self.kernel
    }

    pub fn points(&self) -> &PointSet {
        &self.points
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients.values
    }

    pub fn side(&self) -> Side {
        self.coefficients.side
    }

    pub fn evaluate(&self, t: f64) -> Result<f64> {
        self.kernel.check(t)?;
        Ok(self.evaluate_unchecked(t))
    }

    pub(crate) fn evaluate_unchecked(&self, t: f64) -> f64 {
        let k = &self.kernel;
        let terms = self.points.as_slice().iter().zip(&self.coefficients.values);
        match self.coefficients.side {
            Side::Left => terms.map(|(&x, c)| c * k.eval_unchecked(x, t)).sum(),
            Side::Right => terms.map(|(&x, c)| c * k.eval_unchecked(t, x)).sum(),
        }
    }

    /// `||c||_1` for a left expansion.
    pub fn bnorm(&self) -> Result<f64> {
        self.require(Side::Left)?;
        Ok(norm1(&self.coefficients.values))
    }

    /// `||c^T K[x]||_inf` for a right expansion. Only valid when the kernel
    /// has a proven unit Lebesgue bound; otherwise use [`Self::grid_sup_norm`].
    pub fn bsharp_norm(&self) -> Result<f64> {
        self.require(Side::Right)?;
        if self.kernel.metadata().a4 != Status::Proven {
            return Err(Error::FormulaUnavailable(self.kernel.name()));
        }
        let xs = self.points.as_slice();
        let row: Vec<f64> = xs.iter().map(|&t| self.evaluate_unchecked(t)).collect();
        Ok(norm_inf(&row))
    }

    /// `max |f(t)|` over the grid points inside the domain: a lower bound for
    /// the sup norm.
    pub fn grid_sup_norm(&self, grid: &[f64]) -> Result<f64> {
        grid.iter()
            .map(|&t| self.evaluate(t).map(f64::abs))
            .try_fold(0.0f64, |m, v| v.map(|v| m.max(v)))
    }

    fn require(&self, side: Side) -> Result<()> {
        if self.coefficients.side != side {
            return Err(Error::SideMismatch {
                expected: match side {
                    Side::Left => "left",
                    Side::Right => "right",
                },
            });
        }
        Ok(())
    }
}

/// The interpolant `sum_j c_j K(x_j, .)` with `K[x] c = y`. For kernels with
/// the unit Lebesgue bound this has minimal l1 norm among all interpolants.
pub fn min_norm_interpolant_b(system: &GramSystem, y: &[f64]) -> Result<ExpansionFunction> {
    let c = system.solve(y)?;
    ExpansionFunction::left(*system.kernel(), system.points().clone(), c)
}

/// The interpolant `t -> y^T K[x]^{-1} K_x(t)` as a right expansion; its
/// dual-side norm equals `||y||_inf`.
pub fn min_norm_interpolant_bsharp(system: &GramSystem, y: &[f64]) -> Result<ExpansionFunction> {
    if system.kernel().metadata().a4 != Status::Proven {
        return Err(Error::FormulaUnavailable(system.kernel().name()));
    }
    let d = system.solve_transpose(y)?;
    ExpansionFunction::right(*system.kernel(), system.points().clone(), d)
}

/// `<f, g> = sum_j sum_k a_j b_k K(s_j, t_k)` for a left `f` and right `g`.
pub fn bilinear_form(f: &ExpansionFunction, g: &ExpansionFunction) -> Result<f64> {
    f.require(Side::Left)?;
    g.require(Side::Right)?;
    if f.kernel != g.kernel {
        return Err(Error::KernelMismatch);
    }
    let k = &f.kernel;
    let mut total = 0.0;
    for (&s, a) in f.points.as_slice().iter().zip(f.coefficients()) {
        for (&t, b) in g.points.as_slice().iter().zip(g.coefficients()) {
            total += a * b * k.eval_unchecked(s, t);
        }
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::KernelFamily;
    use approx::assert_abs_diff_eq;

    fn pts(xs: &[f64]) -> PointSet {
        PointSet::new(xs.to_vec()).unwrap()
    }

    fn exp_system(xs: &[f64]) -> GramSystem {
        GramSystem::build(KernelSpec::exponential(), pts(xs)).unwrap()
    }

    #[test]
    fn evaluation() {
        let k = KernelSpec::exponential();
        let f = ExpansionFunction::left(k, pts(&[0.0, 1.0]), vec![1.0, 1.0]).unwrap();
        assert_abs_diff_eq!(f.evaluate(0.0).unwrap(), 1.0 + (-1.0f64).exp(), epsilon = 1e-15);
        let e = ExpansionFunction::left(k, pts(&[0.0, 1.0]), vec![0.0, 1.0]).unwrap();
        assert_eq!(e.evaluate(0.3).unwrap(), k.eval(1.0, 0.3).unwrap());
        let g = ExpansionFunction::right(k, pts(&[0.0, 1.0]), vec![1.0, 1.0]).unwrap();
        assert_eq!(g.evaluate(0.37).unwrap(), f.evaluate(0.37).unwrap());
        assert!(ExpansionFunction::left(k, pts(&[0.0]), vec![1.0, 2.0]).is_err());
    }

    #[test]
    fn norms() {
        let k = KernelSpec::exponential();
        let f = ExpansionFunction::left(k, pts(&[0.0, 1.0, 2.0]), vec![1.0, -2.0, 0.5]).unwrap();
        assert_eq!(f.bnorm().unwrap(), 3.5);
        let z = ExpansionFunction::left(k, pts(&[0.0]), vec![0.0]).unwrap();
        assert_eq!(z.bnorm().unwrap(), 0.0);
        assert!(f.bsharp_norm().is_err());

        let g = ExpansionFunction::right(k, pts(&[0.0, 1.0]), vec![1.0, 1.0]).unwrap();
        assert_abs_diff_eq!(g.bsharp_norm().unwrap(), 1.0 + (-1.0f64).exp(), epsilon = 1e-15);
        let e = ExpansionFunction::right(k, pts(&[0.0, 0.4, 1.0]), vec![0.0, 1.0, 0.0]).unwrap();
        assert_eq!(e.bsharp_norm().unwrap(), 1.0);
        let one = ExpansionFunction::right(KernelSpec::brownian_bridge(), pts(&[0.3]), vec![-2.0]).unwrap();
        assert_abs_diff_eq!(one.bsharp_norm().unwrap(), 2.0 * 0.21, epsilon = 1e-15);

        let gauss = ExpansionFunction::right(KernelSpec::gaussian(1.0).unwrap(), pts(&[0.0]), vec![1.0]).unwrap();
        assert!(matches!(gauss.bsharp_norm(), Err(Error::FormulaUnavailable(_))));
        assert_eq!(gauss.grid_sup_norm(&[-1.0, 0.0, 1.0]).unwrap(), 1.0);
    }

    #[test]
    fn b_interpolants() {
        let sys = exp_system(&[0.0, 1.0]);
        let zero = min_norm_interpolant_b(&sys, &[0.0, 0.0]).unwrap();
        assert_eq!(zero.bnorm().unwrap(), 0.0);

        let f = min_norm_interpolant_b(&sys, &[1.0, (-1.0f64).exp()]).unwrap();
        assert_abs_diff_eq!(f.coefficients()[0], 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(f.coefficients()[1], 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(f.bnorm().unwrap(), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn bsharp_interpolants() {
        let sys = exp_system(&[0.0, 1.0]);
        let g = min_norm_interpolant_bsharp(&sys, &[1.0, 1.0]).unwrap();
        assert_abs_diff_eq!(g.bsharp_norm().unwrap(), 1.0, epsilon = 1e-12);

        let sys = exp_system(&[-1.0, -0.2, 0.5, 1.3]);
        let y = [0.0, 0.0, -2.5, 0.0];
        let g = min_norm_interpolant_bsharp(&sys, &y).unwrap();
        assert_abs_diff_eq!(g.bsharp_norm().unwrap(), 2.5, epsilon = 1e-12);
        for (x, yj) in sys.points().as_slice().iter().zip(&y) {
            assert_abs_diff_eq!(g.evaluate(*x).unwrap(), *yj, epsilon = 1e-10);
        }
        let gauss = GramSystem::build(KernelSpec::gaussian(1.0).unwrap(), pts(&[0.0, 1.0])).unwrap();
        assert!(min_norm_interpolant_bsharp(&gauss, &[1.0, 1.0]).is_err());
    }

    #[test]
    fn pairing() {
        let k = KernelSpec::exponential();
        let f = ExpansionFunction::left_section(k, 0.3).unwrap();
        let g = ExpansionFunction::right_section(k, -0.6).unwrap();
        assert_eq!(bilinear_form(&f, &g).unwrap(), k.eval(0.3, -0.6).unwrap());
        assert!(bilinear_form(&g, &f).is_err());
        let other = ExpansionFunction::right_section(KernelSpec::new(KernelFamily::Sinc).unwrap(), 0.0).unwrap();
        assert_eq!(bilinear_form(&f, &other), Err(Error::KernelMismatch));
    }

    #[test]
    fn json_shape() {
        let k = KernelSpec::exponential();
        let f = ExpansionFunction::left(k, pts(&[0.0, 1.0]), vec![0.5, -1.0]).unwrap();
        let v: serde_json::Value = serde_json::to_value(&f).unwrap();
        assert_eq!(v["side"], "left");
        assert_eq!(v["coefficients"][1], -1.0);
        assert_eq!(v["points"][1], 1.0);
        assert_eq!(v["kernel"]["family"], "exponential");
        let back: ExpansionFunction = serde_json::from_value(v).unwrap();
        assert_eq!(back, f);
    }
}
