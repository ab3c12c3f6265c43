//! `ebmt`: empirical Bayes multiple testing for sparse binary sequences.

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use ebmt_core::diagnostics::{moment_report, solve_w0, solve_weight_bounds};
use ebmt_core::model::TailConvention;
use ebmt_core::procedures::{decide_with, Procedure};
use ebmt_core::thresholds::threshold_set;
use ebmt::config::ExperimentConfig;
use ebmt::io::{
    format_sig6, read_input_csv, read_results_csv, write_decisions_csv, write_results_csv,
    DecisionRow,
};
use ebmt::rng::RNG_SCHEME;
use ebmt::runner::run_experiment;
use ebmt::svg::render_svg;
use std::fs;
use std::path::PathBuf;

#[derive(Parser)]
#[command(
    name = "ebmt",
    version,
    about = "Empirical Bayes multiple testing for sparse binary sequences"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a Monte Carlo experiment described by a JSON config.
    Simulate {
        /// Path to the experiment config (JSON).
        #[arg(long)]
        config: PathBuf,
        /// Output CSV for the aggregated metrics.
        #[arg(long)]
        out: PathBuf,
        /// Optional SVG figure of FDR against signal strength.
        #[arg(long)]
        svg: Option<PathBuf>,
        /// Override the config's master seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Worker thread count (default: one per logical CPU).
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Apply one procedure to observed counts or raw binary labels.
    Decide {
        /// Procedure name: ell, cl, q, or bh.
        #[arg(long)]
        procedure: Procedure,
        /// Target level in (0, 1).
        #[arg(long)]
        t: f64,
        /// Input CSV, either counts (id,x,m) or labels (worker,object,label).
        #[arg(long)]
        input: PathBuf,
        /// Output CSV of decisions.
        #[arg(long)]
        out: PathBuf,
        /// Mixture weight override; estimated from the data when omitted.
        #[arg(long)]
        w: Option<f64>,
        /// Use the exclusive tail convention for the q-value statistic.
        #[arg(long)]
        qvalue_exclusive_tail: bool,
    },
    /// Print the exact small-sample thresholds for one (m, w, t).
    Thresholds {
        /// Trials per object.
        #[arg(long)]
        m: u64,
        /// Mixture weight in (0, 1).
        #[arg(long)]
        w: f64,
        /// Target level in (0, 1).
        #[arg(long)]
        t: f64,
    },
    /// Print posterior moment diagnostics and weight-equation solutions.
    Diagnose {
        /// Trials per object.
        #[arg(long)]
        m: u64,
        /// Mixture weight in (0, 1).
        #[arg(long)]
        w: f64,
        /// Success rate for the first-two-moments row (defaults to 1/2).
        #[arg(long)]
        theta: Option<f64>,
        /// Number of objects, enabling the sparsity-equation solution.
        #[arg(long)]
        n: Option<u64>,
        /// Expected signal count for the sparsity equation.
        #[arg(long)]
        delta: Option<f64>,
        /// Signal fraction for the weight-bound equations.
        #[arg(long)]
        s_frac: Option<f64>,
        /// Relative slack for the weight-bound equations.
        #[arg(long, default_value_t = 0.1)]
        kappa: f64,
    },
    /// Render a previously saved results CSV as an SVG figure.
    Plot {
        /// Results CSV produced by `simulate`.
        #[arg(long)]
        input: PathBuf,
        /// Output SVG path.
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Simulate {
            config,
            out,
            svg,
            seed,
            threads,
        } => cmd_simulate(config, out, svg, seed, threads),
        Command::Decide {
            procedure,
            t,
            input,
            out,
            w,
            qvalue_exclusive_tail,
        } => cmd_decide(procedure, t, input, out, w, qvalue_exclusive_tail),
        Command::Thresholds { m, w, t } => cmd_thresholds(m, w, t),
        Command::Diagnose {
            m,
            w,
            theta,
            n,
            delta,
            s_frac,
            kappa,
        } => cmd_diagnose(m, w, theta, n, delta, s_frac, kappa),
        Command::Plot { input, out } => cmd_plot(input, out),
    }
}

fn cmd_simulate(
    config: PathBuf,
    out: PathBuf,
    svg: Option<PathBuf>,
    seed: Option<u64>,
    threads: Option<usize>,
) -> Result<()> {
    let text = fs::read_to_string(&config)
        .with_context(|| format!("failed to read config {}", config.display()))?;
    let mut cfg = ExperimentConfig::from_json(&text)?;
    if let Some(seed) = seed {
        cfg.master_seed = seed;
    }

    let rows = if let Some(threads) = threads {
        ebmt::runner::run_experiment_with_threads(&cfg, threads)?
    } else {
        run_experiment(&cfg)?
    };

    let mut buf = Vec::new();
    write_results_csv(&mut buf, &rows)?;
    fs::write(&out, &buf).with_context(|| format!("failed to write {}", out.display()))?;
    if let Some(svg_path) = svg {
        let doc = render_svg(&rows)?;
        fs::write(&svg_path, doc)
            .with_context(|| format!("failed to write {}", svg_path.display()))?;
    }
    eprintln!(
        "simulate: {} rows -> {} (seed {}, streams {})",
        rows.len(),
        out.display(),
        cfg.master_seed,
        RNG_SCHEME
    );
    Ok(())
}

fn cmd_decide(
    procedure: Procedure,
    t: f64,
    input: PathBuf,
    out: PathBuf,
    w: Option<f64>,
    qvalue_exclusive_tail: bool,
) -> Result<()> {
    let (ids, data) = read_input_csv(&input)?;
    let convention = if qvalue_exclusive_tail {
        TailConvention::Exclusive
    } else {
        TailConvention::Inclusive
    };
    let decision = decide_with(&data, procedure, t, w, convention)?;
    let rows: Vec<DecisionRow> = ids
        .iter()
        .enumerate()
        .map(|(j, id)| DecisionRow {
            id: id.clone(),
            x: data.counts[j],
            m: data.trials[j],
            statistic: decision.statistic[j],
            reject: decision.reject[j],
        })
        .collect();
    let mut buf = Vec::new();
    write_decisions_csv(&mut buf, &rows)?;
    fs::write(&out, &buf).with_context(|| format!("failed to write {}", out.display()))?;
    let rejected = decision.reject.iter().filter(|&&r| r).count();
    if decision.w_used.is_nan() {
        eprintln!("decide: {} of {} rejected at t={t}", rejected, ids.len());
    } else {
        eprintln!(
            "decide: {} of {} rejected at t={t} (w={})",
            rejected,
            ids.len(),
            format_sig6(decision.w_used)
        );
    }
    Ok(())
}

fn cmd_thresholds(m: u64, w: f64, t: f64) -> Result<()> {
    let set = threshold_set(m, w, t)?;
    println!("m          {}", set.m);
    println!("w          {}", format_sig6(set.w));
    println!("t          {}", format_sig6(set.t));
    println!("r_wt       {}", format_sig6(set.r_wt));
    println!("zeta       {}", format_sig6(set.zeta));
    println!("xi         {}", format_sig6(set.xi));
    println!("nu         {}", format_sig6(set.nu));
    println!("t_ell      {}", format_sig6(set.t_l));
    println!("t_cl       {}", format_sig6(set.t_cl));
    println!("t_q        {}", format_sig6(set.t_q));
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_diagnose(
    m: u64,
    w: f64,
    theta: Option<f64>,
    n: Option<u64>,
    delta: Option<f64>,
    s_frac: Option<f64>,
    kappa: f64,
) -> Result<()> {
    let theta = theta.unwrap_or(0.5);
    let report = moment_report(m, theta, w)?;
    println!("metric,value");
    println!("m_tilde,{}", format_sig6(report.m_tilde));
    println!("m1,{}", format_sig6(report.m1));
    println!("m2,{}", format_sig6(report.m2));

    if let Some(delta) = delta {
        let n = n.ok_or_else(|| anyhow::anyhow!("diagnose: --delta requires --n"))?;
        match solve_w0(m, n, delta) {
            Ok(w0) => println!("w0,{}", format_sig6(w0)),
            Err(e) => println!("w0,error: {e}"),
        }
    }

    if let Some(s_frac) = s_frac {
        let n = n.ok_or_else(|| anyhow::anyhow!("diagnose: --s-frac requires --n"))?;
        let s = (s_frac * n as f64).round() as usize;
        if s == 0 || s as u64 > n {
            bail!("diagnose: s_frac {s_frac} gives no signals for n={n}");
        }
        let mut truth = vec![theta; s];
        truth.extend(std::iter::repeat_n(0.5, n as usize - s));
        let (w1, w2) = solve_weight_bounds(&truth, m, kappa)?;
        match w1 {
            Some(v) => println!("w1,{}", format_sig6(v)),
            None => println!("w1,none"),
        }
        match w2 {
            Some(v) => println!("w2,{}", format_sig6(v)),
            None => println!("w2,none"),
        }
    }
    Ok(())
}

fn cmd_plot(input: PathBuf, out: PathBuf) -> Result<()> {
    let rows = read_results_csv(&input)?;
    let doc = render_svg(&rows)?;
    fs::write(&out, doc).with_context(|| format!("failed to write {}", out.display()))?;
    eprintln!("plot: {} rows -> {}", rows.len(), out.display());
    Ok(())
}
