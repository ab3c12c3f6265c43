//! Empirical Bayes multiple testing for high-dimensional sparse binary
//! sequences.
//!
//! Each of `n` objects is observed through `m` coin flips, `X_j ~ Bin(m_j,
//! theta_j)`, and the null hypothesis for object `j` is `theta_j = 1/2`. A
//! spike-and-slab prior (point mass at 1/2 mixed with a uniform slab, mixing
//! weight `w`) yields three posterior null summaries per object:
//!
//! * the l-value (local FDR): posterior probability of the null given `X_j`;
//! * the Cl-value: the l-value with the slab density rescaled by
//!   `sqrt(2/(pi m)) (1+m)` so that its rejection threshold tracks the sharp
//!   detection boundary;
//! * the q-value: posterior probability of the null given the two-sided tail
//!   event `|X_j − m/2| >= |x_j − m/2|`.
//!
//! Rejecting `{statistic <= t}` with the slab weight estimated by marginal
//! maximum likelihood gives multiple testing procedures whose FDR/FNR
//! behaviour this crate computes exactly (finite sums), bounds (tail
//! inequalities), and inverts (rejection thresholds).
//!
//! Modules:
//! * [`binom`]: accurate binomial pmf / tails, Gaussian tails, entropy.
//! * [`bounds`]: two-sided tail and Stirling-type bound pairs used to
//!   sanity-check the exact computations.
//! * [`model`]: the spike-and-slab statistics and the marginal maximum
//!   likelihood estimate of the slab weight.
//! * [`thresholds`]: rejection-region radii obtained by inverting the
//!   statistics, plus closed-form asymptotic approximations.
//! * [`procedures`]: decision vectors (l / Cl / q / Benjamini-Hochberg) and
//!   confusion counting against a known truth.
//! * [`diagnostics`]: exact moment sums and the calibration weights they
//!   define.

// Frozen reference constants in tests keep their full 17-digit printed form.
#![allow(clippy::excessive_precision)]

pub mod binom;
pub mod bounds;
pub mod diagnostics;
mod error;
pub mod model;
pub mod procedures;
pub mod thresholds;

pub use error::{Error, Result};
