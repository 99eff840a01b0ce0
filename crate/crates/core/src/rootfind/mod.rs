//! Zeros of polynomials and of rational sums.
//!
//! [`aberth_roots`] solves a dense polynomial; [`companion_roots`] is an
//! independent QR-based oracle for low degrees; [`critical_points`] and
//! [`rational_zeros`] work purely from root form so that they stay accurate at
//! degrees where expanded coefficients are meaningless.

mod aberth;
mod companion;
mod critical;
mod matching;

pub use aberth::{aberth_roots, bini_initial_guesses};
pub use companion::{companion_roots, COMPANION_MAX_DEGREE};
pub use critical::{critical_points, merge_multiple, merge_poles, rational_zeros, MULTIPLE_ZERO_RELATIVE_GAP};
pub use matching::{match_rootsets, MATCHING_MAX_SIZE};

use serde::{Deserialize, Serialize};

use crate::RootSet;

/// Default mixed absolute/relative stopping tolerance.
pub const DEFAULT_TOL: f64 = 1e-12;
pub const DEFAULT_MAX_ITER: usize = 500;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RootFindReport {
    pub roots: RootSet,
    pub iterations: usize,
    /// Largest entry of `residuals`.
    pub max_residual: f64,
    /// Per root: `|f(root)|` divided by the matching absolute-value scale
    /// (`Σ|a_k||z|^k` for polynomials, `Σ|a_k|/|z - z_k|` for rational sums).
    pub residuals: Vec<f64>,
    pub converged: Vec<bool>,
}

impl RootFindReport {
    pub fn unconverged(&self) -> usize {
        self.converged.iter().filter(|&&c| !c).count()
    }

    pub fn all_converged(&self) -> bool {
        self.converged.iter().all(|&c| c)
    }
}
