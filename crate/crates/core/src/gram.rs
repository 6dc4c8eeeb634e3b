//! Sample point sets, Gram matrices and the cardinal-coefficient solves every
//! higher-level routine builds on.
//!
//! Gram entries follow the convention `gram[(j, k)] = K(x_k, x_j)`, so that
//! `gram * c` evaluates the left expansion `sum_k c_k K(x_k, .)` at the nodes.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::KernelSpec;
use crate::linalg::{self, Lu};

/// Reciprocal condition number below which a Gram matrix is treated as
/// singular.
pub const SINGULAR_RCOND: f64 = 1e-14;

/// A nonempty list of pairwise distinct, finite sample points. The user order
/// is kept; a sorting permutation is stored alongside.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct PointSet {
    points: Vec<f64>,
    order: Vec<usize>,
    min_spacing: f64,
}

impl PointSet {
    pub fn new(points: Vec<f64>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::EmptyPointSet);
        }
        if points.iter().any(|p| !p.is_finite()) {
            return Err(Error::NonFinitePoint);
        }
        let mut order: Vec<usize> = (0..points.len()).collect();
        order.sort_by(|&a, &b| points[a].total_cmp(&points[b]));
        let min_spacing = order
            .windows(2)
            .map(|w| points[w[1]] - points[w[0]])
            .fold(f64::INFINITY, f64::min);
        if min_spacing <= 0.0 {
            return Err(Error::DuplicatePoints { min_spacing });
        }
        Ok(PointSet {
            points,
            order,
            min_spacing,
        })
    }

    /// `n` equally spaced points on `[a, b]`, both endpoints included.
    pub fn linspace(a: f64, b: f64, n: usize) -> Result<Self> {
        PointSet::new(linspace(a, b, n))
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.points
    }

    /// Indices that visit the points in ascending order.
    pub fn sorted_order(&self) -> &[usize] {
        &self.order
    }

    pub fn sorted(&self) -> Vec<f64> {
        self.order.iter().map(|&i| self.points[i]).collect()
    }

    /// Smallest gap between two points; infinite for a single point.
    pub fn min_spacing(&self) -> f64 {
        self.min_spacing
    }

    /// A new set with `t` appended.
    pub fn extended(&self, t: f64) -> Result<Self> {
        let mut pts = self.points.clone();
        pts.push(t);
        PointSet::new(pts)
    }
}

impl TryFrom<Vec<f64>> for PointSet {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        PointSet::new(v)
    }
}

impl From<PointSet> for Vec<f64> {
    fn from(p: PointSet) -> Self {
        p.points
    }
}

pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![a],
        _ => {
            let h = (b - a) / (n - 1) as f64;
            (0..n)
                .map(|i| if i == n - 1 { b } else { a + h * i as f64 })
                .collect()
        }
    }
}

/// Gram matrix of a kernel over a point set, with its LU factors.
#[derive(Debug, Clone)]
pub struct GramSystem {
    kernel: KernelSpec,
    points: PointSet,
    gram: DMatrix<f64>,
    lu: Lu,
    rcond: f64,
}

impl GramSystem {
    pub fn build(kernel: KernelSpec, points: PointSet) -> Result<Self> {
        for &x in points.as_slice() {
            kernel.check(x)?;
        }
        let gram = gram_matrix(&kernel, points.as_slice());
        let lu = Lu::factor(&gram);
        let rcond = lu.rcond(linalg::matrix_norm1(&gram));
        if !(rcond >= SINGULAR_RCOND) {
            return Err(Error::SingularGram {
                rcond,
                min_spacing: points.min_spacing(),
            });
        }
        Ok(GramSystem {
            kernel,
            points,
            gram,
            lu,
            rcond,
        })
    }

    pub fn kernel(&self) -> &KernelSpec {
        &self.kernel
    }

    pub fn points(&self) -> &PointSet {
        &self.points
    }

    pub fn n(&self) -> usize {
        self.points.len()
    }

    pub fn gram(&self) -> &DMatrix<f64> {
        &self.gram
    }

    pub fn lu(&self) -> &Lu {
        &self.lu
    }

    /// Estimated reciprocal 1-norm condition number of the Gram matrix.
    pub fn rcond(&self) -> f64 {
        self.rcond
    }

    /// `K_x(t) = (K(t, x_j))_j`.
    pub fn kx_column(&self, t: f64) -> Result<Vec<f64>> {
        self.kernel.check(t)?;
        Ok(self
            .points
            .as_slice()
            .iter()
            .map(|&x| self.kernel.eval_unchecked(t, x))
            .collect())
    }

    /// `K^x(t) = (K(x_j, t))_j`.
    pub fn kx_row(&self, t: f64) -> Result<Vec<f64>> {
        self.kernel.check(t)?;
        Ok(self
            .points
            .as_slice()
            .iter()
            .map(|&x| self.kernel.eval_unchecked(x, t))
            .collect())
    }

    fn check_len(&self, v: &[f64]) -> Result<()> {
        if v.len() != self.n() {
            return Err(Error::DimensionMismatch {
                expected: self.n(),
                found: v.len(),
            });
        }
        Ok(())
    }

    /// Solves `K[x] c = y`.
    pub fn solve(&self, y: &[f64]) -> Result<Vec<f64>> {
        self.check_len(y)?;
        Ok(self.lu.solve(y))
    }

    /// Solves `K[x]^T c = y`.
    pub fn solve_transpose(&self, y: &[f64]) -> Result<Vec<f64>> {
        self.check_len(y)?;
        Ok(self.lu.solve_transpose(y))
    }

    /// Cardinal coefficients `K[x]^{-1} K_x(t)`.
    pub fn cardinal_coefficients(&self, t: f64) -> Result<Vec<f64>> {
        let col = self.kx_column(t)?;
        self.solve(&col)
    }

    /// `K[x] c`, the values of the left expansion with coefficients `c` at the
    /// nodes.
    pub fn apply(&self, c: &[f64]) -> Result<Vec<f64>> {
        self.check_len(c)?;
        Ok(linalg::mat_vec(&self.gram, c))
    }

    /// `K[x]^T v`.
    pub fn apply_transpose(&self, v: &[f64]) -> Result<Vec<f64>> {
        self.check_len(v)?;
        Ok(linalg::mat_t_vec(&self.gram, v))
    }

    /// Gram matrix as nested rows, for diagnostic dumps.
    pub fn gram_rows(&self) -> Vec<Vec<f64>> {
        self.gram
            .row_iter()
            .map(|r| r.iter().copied().collect())
            .collect()
    }
}

/// `K[x]` with entry `(j, k) = K(x_k, x_j)`. Points must already be checked
/// against the kernel domain.
pub(crate) fn gram_matrix(kernel: &KernelSpec, xs: &[f64]) -> DMatrix<f64> {
    let n = xs.len();
    DMatrix::from_fn(n, n, |j, k| kernel.eval_unchecked(xs[k], xs[j]))
}
