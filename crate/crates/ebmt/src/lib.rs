//! Command-line harness around the `ebmt-core` statistics library.
//!
//! This crate supplies the pieces that turn the core procedures into a
//! reproducible experiment pipeline:
//!
//! - [`config`]: JSON experiment descriptions with strict validation,
//! - [`rng`]: documented per-replicate random stream derivation,
//! - [`runner`]: the Monte Carlo driver with thread-count-independent output,
//! - [`io`]: CSV readers and writers with stable formatting,
//! - [`svg`]: deterministic figure rendering.

pub mod config;
pub mod io;
pub mod rng;
pub mod runner;
pub mod svg;
