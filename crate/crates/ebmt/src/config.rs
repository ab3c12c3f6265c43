//! Experiment configuration for the Monte Carlo harness.
//!
//! Configurations are stored as JSON with snake_case keys and are rejected if
//! they contain unknown fields, so a typo in a key fails loudly instead of
//! silently falling back to a default.

use anyhow::{bail, Context, Result};
use ebmt_core::procedures::Procedure;
use serde::{Deserialize, Serialize};

/// One multiple-testing procedure named in a config file.
///
/// This mirrors [`Procedure`] but carries the serde impls so config files can
/// round-trip through JSON without the core crate depending on serde.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProcedureSpec {
    Ell,
    Cl,
    Q,
    Bh,
}

impl From<ProcedureSpec> for Procedure {
    fn from(p: ProcedureSpec) -> Procedure {
        match p {
            ProcedureSpec::Ell => Procedure::Ell,
            ProcedureSpec::Cl => Procedure::Cl,
            ProcedureSpec::Q => Procedure::Q,
            ProcedureSpec::Bh => Procedure::Bh,
        }
    }
}

impl std::fmt::Display for ProcedureSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        Procedure::from(*self).fmt(f)
    }
}

/// Full description of a simulation experiment.
///
/// The factorial design crosses `m_values` x `s_frac_values` x `theta0_grid`;
/// each cell is replicated `replicates` times and every replicate is scored
/// under every `(procedure, t)` pair on the same synthetic dataset.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Number of objects per synthetic dataset.
    pub n: u64,
    /// Trials per object; one homogeneous dataset per value.
    pub m_values: Vec<u64>,
    /// Fraction of objects drawn as signals; `s_frac * n` must be integral.
    pub s_frac_values: Vec<f64>,
    /// Signal success probabilities, each in `[0.5, 1]`.
    pub theta0_grid: Vec<f64>,
    /// Target levels for every procedure.
    pub t_levels: Vec<f64>,
    /// Procedures to score on each replicate.
    pub procedures: Vec<ProcedureSpec>,
    /// Monte Carlo replicates per scenario cell.
    pub replicates: u64,
    /// Root seed for the per-replicate random streams.
    pub master_seed: u64,
}

impl ExperimentConfig {
    /// Default factorial used for the desk-scale frequentist comparison:
    /// n = 2000 objects, m in {85, 200, 1000}, signal fractions
    /// {0.001, 0.01, 0.1}, signal strengths 0.50(0.02)1.00, level t = 0.1,
    /// 200 replicates.
    pub fn desk_default() -> Self {
        // Integer ratios give the closest f64 to each decimal grid point.
        let theta0_grid = (0..26).map(|i| (50 + 2 * i) as f64 / 100.0).collect();
        ExperimentConfig {
            n: 2000,
            m_values: vec![85, 200, 1000],
            s_frac_values: vec![0.001, 0.01, 0.1],
            theta0_grid,
            t_levels: vec![0.1],
            procedures: vec![ProcedureSpec::Ell, ProcedureSpec::Cl, ProcedureSpec::Q],
            replicates: 200,
            master_seed: 20240817,
        }
    }

    /// Checks the structural invariants the runner relies on.
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            bail!("config: n must be at least 1");
        }
        if self.replicates == 0 {
            bail!("config: replicates must be at least 1");
        }
        if self.m_values.is_empty() {
            bail!("config: m_values must be non-empty");
        }
        if let Some(&m) = self.m_values.iter().find(|&&m| m == 0) {
            bail!("config: trials per object must be positive, got m={m}");
        }
        if self.s_frac_values.is_empty() {
            bail!("config: s_frac_values must be non-empty");
        }
        for &s in &self.s_frac_values {
            if !(0.0..=1.0).contains(&s) {
                bail!("config: s_frac {s} outside [0, 1]");
            }
            let scaled = s * self.n as f64;
            if (scaled - scaled.round()).abs() > 1e-9 * self.n as f64 {
                bail!(
                    "config: s_frac {s} times n {} does not round to an integer",
                    self.n
                );
            }
        }
        if self.theta0_grid.is_empty() {
            bail!("config: theta0_grid must be non-empty");
        }
        for &th in &self.theta0_grid {
            if !(0.5..=1.0).contains(&th) {
                bail!("config: theta0 {th} outside [0.5, 1]");
            }
        }
        if self.t_levels.is_empty() {
            bail!("config: t_levels must be non-empty");
        }
        for &t in &self.t_levels {
            if !(t > 0.0 && t < 1.0) {
                bail!("config: level t={t} outside (0, 1)");
            }
        }
        if self.procedures.is_empty() {
            bail!("config: procedures must be non-empty");
        }
        Ok(())
    }

    /// Parses and validates a config from JSON text.
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig =
            serde_json::from_str(text).context("failed to parse experiment config JSON")?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Serializes the config as pretty-printed JSON.
    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).context("failed to serialize experiment config")
    }

    /// Signal count for one scenario cell.
    pub fn signal_count(&self, s_frac: f64) -> u64 {
        (s_frac * self.n as f64).round() as u64
    }
}
