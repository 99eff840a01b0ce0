//! Simulation laboratory for zeros and critical points of random polynomials.
//!
//! The crate is organized bottom-up:
//!
//! * [`polycore`]: dense and root-form polynomial arithmetic, compensated
//!   evaluation, overflow-free log-magnitudes and rational sums
//!   `L(z) = Σ a_k / (z - z_k)`.
//! * [`rootfind`]: Aberth–Ehrlich root finding, a companion-matrix QR oracle,
//!   root-form critical points with multiplicity bookkeeping, and bottleneck
//!   matching of root sets.
//! * [`ensembles`]: deterministic sequences and seeded random ensembles.
//! * [`measures`]: empirical measures, Wasserstein-1 (exact and sliced),
//!   angular discrepancy and logarithmic potentials.
//! * [`diagnostics`]: Monte Carlo and quadrature probes of `(1/n) log|L_n|`.
//! * [`harness`]: declarative experiments, result files and SVG plots.
//!
//! [`atoms`] reads and writes plain-text atom files; [`geometry`] has the
//! convex hull used for Gauss–Lucas checks.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod atoms;
pub mod diagnostics;
pub mod ensembles;
mod dd;
mod error;
pub mod geometry;
pub mod harness;
pub mod measures;
pub mod polycore;
pub mod rootfind;

pub use error::{Error, Result};
pub use num_complex::Complex64 as Complex;
pub use polycore::{Polynomial, RationalSum, RootSet};
pub use rootfind::RootFindReport;
pub use ensembles::{EnsembleSpec, Generated, Seed};
pub use measures::EmpiricalMeasure;
