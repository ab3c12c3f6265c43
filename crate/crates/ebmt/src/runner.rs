//! Monte Carlo driver for the frequentist comparison of the procedures.
//!
//! The experiment crosses trial counts, signal fractions, and signal
//! strengths into scenario cells; each cell is replicated with independent,
//! reproducible random streams (see [`crate::rng`]), and every replicate is
//! scored under all requested `(procedure, t)` pairs on the same dataset.
//! Replicates may run on any number of threads: each one derives its own
//! stream from its `(scenario, replicate)` index and the final reduction
//! walks the results in index order, so the report is byte-identical for any
//! thread count.

use crate::config::ExperimentConfig;
use crate::io::MetricsRow;
use crate::rng::replicate_rng;
use anyhow::{Context, Result};
use ebmt_core::model::{mmle, CountsDataset};
use ebmt_core::procedures::{confusion, decide, fdp, fnp, risk, Procedure};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;

/// One cell of the factorial design.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScenarioSpec {
    /// Position in row-major `(m, s_frac, theta0)` order; used to derive
    /// random streams, so renumbering scenarios changes the simulated data.
    pub index: u64,
    pub m: u64,
    pub s_frac: f64,
    pub theta0: f64,
}

/// Expands a config into its scenario cells in row-major
/// `(m, s_frac, theta0)` order.
pub fn scenario_list(cfg: &ExperimentConfig) -> Vec<ScenarioSpec> {
    let mut out = Vec::new();
    let mut index = 0u64;
    for &m in &cfg.m_values {
        for &s_frac in &cfg.s_frac_values {
            for &theta0 in &cfg.theta0_grid {
                out.push(ScenarioSpec {
                    index,
                    m,
                    s_frac,
                    theta0,
                });
                index += 1;
            }
        }
    }
    out
}

/// Draws one synthetic dataset: the first `round(s_frac * n)` objects are
/// signals with success rate `theta0`, the rest are nulls at 1/2. True rates
/// are recorded so replicates can be scored against the ground truth.
pub fn generate_scenario(
    n: u64,
    m: u64,
    s_frac: f64,
    theta0: f64,
    rng: &mut ChaCha8Rng,
) -> Result<CountsDataset> {
    let s = (s_frac * n as f64).round() as u64;
    let signal = BinomialSampler::new(m, theta0);
    let null = BinomialSampler::new(m, 0.5);
    let mut counts = Vec::with_capacity(n as usize);
    let mut truth = Vec::with_capacity(n as usize);
    for j in 0..n {
        if j < s {
            counts.push(signal.sample(rng));
            truth.push(theta0);
        } else {
            counts.push(null.sample(rng));
            truth.push(0.5);
        }
    }
    let trials = vec![m; n as usize];
    Ok(CountsDataset::new(counts, trials, Some(truth))?)
}

/// Binomial sampler that tolerates the degenerate endpoint rates, keeping
/// the generator total on the closed parameter range.
enum BinomialSampler {
    Constant(u64),
    Draw(Binomial),
}

impl BinomialSampler {
    fn new(m: u64, theta: f64) -> Self {
        if theta <= 0.0 {
            BinomialSampler::Constant(0)
        } else if theta >= 1.0 {
            BinomialSampler::Constant(m)
        } else {
            BinomialSampler::Draw(
                Binomial::new(m, theta).expect("binomial parameters validated by config"),
            )
        }
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> u64 {
        match self {
            BinomialSampler::Constant(v) => *v,
            BinomialSampler::Draw(d) => d.sample(rng),
        }
    }
}

/// Per-replicate error proportions for one `(procedure, t)` pair.
#[derive(Clone, Copy, Debug, Default)]
struct ReplicateScore {
    fdp: f64,
    fnp: f64,
    risk: f64,
}

/// Scores one replicate of one scenario under every `(procedure, t)` pair.
///
/// The plug-in weight is estimated once per replicate by marginal maximum
/// likelihood and shared by the three empirical Bayes procedures; the
/// Benjamini-Hochberg step-up ignores it.
fn run_replicate(
    cfg: &ExperimentConfig,
    spec: &ScenarioSpec,
    replicate: u64,
) -> Result<Vec<ReplicateScore>> {
    let mut rng = replicate_rng(cfg.master_seed, spec.index, replicate);
    let data = generate_scenario(cfg.n, spec.m, spec.s_frac, spec.theta0, &mut rng)?;
    let w_hat = mmle(&data)?.w_hat;
    let truth = data
        .truth
        .as_deref()
        .expect("generated scenarios always carry truth");

    let mut scores = Vec::with_capacity(cfg.procedures.len() * cfg.t_levels.len());
    for &proc_spec in &cfg.procedures {
        let procedure = Procedure::from(proc_spec);
        for &t in &cfg.t_levels {
            let decision = decide(&data, procedure, t, Some(w_hat))?;
            let counts = confusion(&decision, truth)?;
            scores.push(ReplicateScore {
                fdp: fdp(&counts),
                fnp: fnp(&counts),
                risk: risk(&counts),
            });
        }
    }
    Ok(scores)
}

/// Runs the full experiment and aggregates per-cell means and Monte Carlo
/// standard errors.
///
/// Output rows are ordered by `(procedure, t)` first and scenario second, so
/// each procedure's curve over the signal-strength grid is contiguous.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<MetricsRow>> {
    cfg.validate()?;
    let scenarios = scenario_list(cfg);
    let jobs: Vec<(usize, u64)> = scenarios
        .iter()
        .enumerate()
        .flat_map(|(si, _)| (0..cfg.replicates).map(move |r| (si, r)))
        .collect();

    // Indexed parallel map keeps results in job order regardless of which
    // thread finishes first; the reduction below is then fully sequential.
    let per_replicate: Vec<Vec<ReplicateScore>> = jobs
        .par_iter()
        .map(|&(si, r)| run_replicate(cfg, &scenarios[si], r))
        .collect::<Result<Vec<_>>>()
        .context("simulation replicate failed")?;

    let pairs = cfg.procedures.len() * cfg.t_levels.len();
    let reps = cfg.replicates as usize;
    let mut rows = Vec::new();
    for (pi, &proc_spec) in cfg.procedures.iter().enumerate() {
        for (ti, &t) in cfg.t_levels.iter().enumerate() {
            let pair = pi * cfg.t_levels.len() + ti;
            for (si, spec) in scenarios.iter().enumerate() {
                let mut fdp = Vec::with_capacity(reps);
                let mut fnp = Vec::with_capacity(reps);
                let mut risk_sum = 0.0;
                for r in 0..reps {
                    let score = per_replicate[si * reps + r][pair];
                    fdp.push(score.fdp);
                    fnp.push(score.fnp);
                    risk_sum += score.risk;
                }
                let (fdr_mean, fdr_mcse) = mean_and_mcse(&fdp);
                let (fnr_mean, fnr_mcse) = mean_and_mcse(&fnp);
                rows.push(MetricsRow {
                    procedure: proc_spec.to_string(),
                    t,
                    m: spec.m,
                    s_frac: spec.s_frac,
                    theta0: spec.theta0,
                    replicates: cfg.replicates,
                    fdr_mean,
                    fdr_mcse,
                    fnr_mean,
                    fnr_mcse,
                    risk_mean: risk_sum / reps as f64,
                });
            }
        }
    }
    debug_assert_eq!(rows.len(), pairs * scenarios.len());
    Ok(rows)
}

/// Sample mean and Monte Carlo standard error `sd / sqrt(n)`, with the
/// standard error defined as zero for a single replicate.
fn mean_and_mcse(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Convenience wrapper used by tests: runs inside a rayon pool of the given
/// size so thread-count independence can be checked directly.
pub fn run_experiment_with_threads(cfg: &ExperimentConfig, threads: usize) -> Result<Vec<MetricsRow>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .context("failed to build thread pool")?;
    pool.install(|| run_experiment(cfg))
}
