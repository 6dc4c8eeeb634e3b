//! Sparse kernel learning in reproducing kernel Banach spaces with the
//! l1 norm.
//!
//! A function is represented by a finite kernel expansion
//! `f = sum_j c_j K(x_j, .)` whose norm is `||c||_1`. The crate provides:
//!
//! - [`kernels`]: the kernel zoo, with closed-form cardinal functions for the
//!   exponential and Brownian bridge kernels;
//! - [`gram`]: point sets, Gram matrices and cardinal-coefficient solves;
//! - [`admissibility`]: numerical audits of the admissibility conditions and
//!   Lebesgue-constant estimates;
//! - [`interpolation`]: minimal-norm interpolation, norms and the bilinear
//!   form pairing the two function spaces;
//! - [`solvers`]: l1-regularized least squares on the Gram matrix (monotone
//!   FISTA) and the ridge baseline;
//! - [`experiment`]: the noisy-regression comparison between the l1 scheme
//!   and kernel ridge regression.

pub mod admissibility;
pub mod error;
pub mod experiment;
pub mod gram;
pub mod interpolation;
pub mod kernels;
pub mod linalg;
pub mod rng;
pub mod solvers;

pub use error::{Error, Result};
pub use gram::{GramSystem, PointSet};
pub use kernels::{Interval, KernelFamily, KernelSpec};
