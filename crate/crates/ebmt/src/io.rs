//! CSV input and output for counts, crowd labels, decisions, and results.
//!
//! All readers report the offending line number on malformed input and treat
//! an empty table as an error, since every downstream routine needs at least
//! one object. All writers emit a fixed column order and format floats with
//! six significant digits so repeated runs produce byte-identical files.

use anyhow::{bail, Context, Result};
use ebmt_core::model::CountsDataset;
use std::collections::HashMap;
use std::io::Write;
use std::path::Path;

/// Formats a float with six significant digits in plain decimal notation.
///
/// Used for every float column in output CSVs; the fixed precision makes the
/// files byte-stable across runs and platforms.
pub fn format_sig6(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let exp = x.abs().log10().floor() as i32;
    let decimals = (5 - exp).max(0) as usize;
    format!("{x:.decimals$}")
}

/// One row of a counts table: an object identifier with its success count and
/// trial count.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CountsRow {
    pub id: String,
    pub x: u64,
    pub m: u64,
}

/// Reads a `id,x,m` counts CSV into a dataset, preserving row order.
pub fn read_counts_csv(path: &Path) -> Result<(Vec<String>, CountsDataset)> {
    let mut reader = csv::Reader::from_path(path)
        .with_context(|| format!("failed to open counts file {}", path.display()))?;
    check_header(&mut reader, &["id", "x", "m"], path)?;

    let mut ids = Vec::new();
    let mut counts = Vec::new();
    let mut trials = Vec::new();
    for record in reader.records() {
        let record = record?;
        let line = record
            .position()
            .map(|p| p.line())
            .unwrap_or_default();
        if record.len() != 3 {
            bail!(
                "{}:{line}: expected 3 fields (id,x,m), got {}",
                path.display(),
                record.len()
            );
        }
        let x: u64 = record[1]
            .trim()
            .parse()
            .with_context(|| format!("{}:{line}: bad success count {:?}", path.display(), &record[1]))?;
        let m: u64 = record[2]
            .trim()
            .parse()
            .with_context(|| format!("{}:{line}: bad trial count {:?}", path.display(), &record[2]))?;
        if x > m {
            bail!(
                "{}:{line}: success count {x} exceeds trial count {m}",
                path.display()
            );
        }
        ids.push(record[0].to_string());
        counts.push(x);
        trials.push(m);
    }
    if ids.is_empty() {
        bail!("{}: counts file contains no data rows", path.display());
    }
    let dataset = CountsDataset::new(counts, trials, None)?;
    Ok((ids, dataset))
}

/// Reads a `worker,object,label` CSV of binary votes and aggregates it into
/// per-object counts. Objects appear in the output in the order they first
/// appear in the file; each row contributes one trial and `label` successes.
pub fn read_labels_csv(path: &Path) -> Result<(Vec<String>, CountsDataset)> {
    let mut reader = csv::Reader::from_path(path)
        .with_context(|| format!("failed to open labels file {}", path.display()))?;
    check_header(&mut reader, &["worker", "object", "label"], path)?;

    let mut order: Vec<String> = Vec::new();
    let mut index: HashMap<String, usize> = HashMap::new();
    let mut counts: Vec<u64> = Vec::new();
    let mut trials: Vec<u64> = Vec::new();
    for record in reader.records() {
        let record = record?;
        let line = record
            .position()
            .map(|p| p.line())
            .unwrap_or_default();
        if record.len() != 3 {
            bail!(
                "{}:{line}: expected 3 fields (worker,object,label), got {}",
                path.display(),
                record.len()
            );
        }
        let object = record[1].trim().to_string();
        let label: u64 = record[2]
            .trim()
            .parse()
            .with_context(|| format!("{}:{line}: bad label {:?}", path.display(), &record[2]))?;
        if label > 1 {
            bail!(
                "{}:{line}: label must be 0 or 1, got {label}",
                path.display()
            );
        }
        let slot = *index.entry(object.clone()).or_insert_with(|| {
            order.push(object);
            counts.push(0);
            trials.push(0);
            counts.len() - 1
        });
        counts[slot] += label;
        trials[slot] += 1;
    }
    if order.is_empty() {
        bail!("{}: labels file contains no data rows", path.display());
    }
    let dataset = CountsDataset::new(counts, trials, None)?;
    Ok((order, dataset))
}

/// Table kind detected from a CSV header.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InputKind {
    Counts,
    Labels,
}

/// Peeks at a CSV header to decide whether it is a counts or a labels table.
pub fn detect_input_kind(path: &Path) -> Result<InputKind> {
    let mut reader = csv::Reader::from_path(path)
        .with_context(|| format!("failed to open input file {}", path.display()))?;
    let headers = reader.headers()?.clone();
    let fields: Vec<String> = headers.iter().map(|h| h.trim().to_string()).collect();
    if fields == ["id", "x", "m"] {
        Ok(InputKind::Counts)
    } else if fields == ["worker", "object", "label"] {
        Ok(InputKind::Labels)
    } else {
        bail!(
            "{}: unrecognized header {:?}; expected id,x,m or worker,object,label",
            path.display(),
            fields.join(",")
        )
    }
}

/// Reads either input flavor, aggregating labels into counts when needed.
pub fn read_input_csv(path: &Path) -> Result<(Vec<String>, CountsDataset)> {
    match detect_input_kind(path)? {
        InputKind::Counts => read_counts_csv(path),
        InputKind::Labels => read_labels_csv(path),
    }
}

/// One scored decision row for output.
#[derive(Clone, Debug)]
pub struct DecisionRow {
    pub id: String,
    pub x: u64,
    pub m: u64,
    pub statistic: f64,
    pub reject: bool,
}

/// Writes decision rows as `id,x,m,statistic,reject` with reject as 0/1.
pub fn write_decisions_csv<W: Write>(out: &mut W, rows: &[DecisionRow]) -> Result<()> {
    writeln!(out, "id,x,m,statistic,reject")?;
    for row in rows {
        writeln!(
            out,
            "{},{},{},{},{}",
            row.id,
            row.x,
            row.m,
            format_sig6(row.statistic),
            u8::from(row.reject)
        )?;
    }
    Ok(())
}

/// One aggregated metrics row of a simulation report.
#[derive(Clone, Debug, PartialEq)]
pub struct MetricsRow {
    pub procedure: String,
    pub t: f64,
    pub m: u64,
    pub s_frac: f64,
    pub theta0: f64,
    pub replicates: u64,
    pub fdr_mean: f64,
    pub fdr_mcse: f64,
    pub fnr_mean: f64,
    pub fnr_mcse: f64,
    pub risk_mean: f64,
}

/// Writes the simulation report with the fixed header
/// `procedure,t,m,s_frac,theta0,replicates,fdr_mean,fdr_mcse,fnr_mean,fnr_mcse,risk_mean`.
pub fn write_results_csv<W: Write>(out: &mut W, rows: &[MetricsRow]) -> Result<()> {
    writeln!(
        out,
        "procedure,t,m,s_frac,theta0,replicates,fdr_mean,fdr_mcse,fnr_mean,fnr_mcse,risk_mean"
    )?;
    for row in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{}",
            row.procedure,
            format_sig6(row.t),
            row.m,
            format_sig6(row.s_frac),
            format_sig6(row.theta0),
            row.replicates,
            format_sig6(row.fdr_mean),
            format_sig6(row.fdr_mcse),
            format_sig6(row.fnr_mean),
            format_sig6(row.fnr_mcse),
            format_sig6(row.risk_mean)
        )?;
    }
    Ok(())
}

/// Reads a simulation report back, for plotting a previously saved run.
pub fn read_results_csv(path: &Path) -> Result<Vec<MetricsRow>> {
    let mut reader = csv::Reader::from_path(path)
        .with_context(|| format!("failed to open results file {}", path.display()))?;
    let expected = [
        "procedure",
        "t",
        "m",
        "s_frac",
        "theta0",
        "replicates",
        "fdr_mean",
        "fdr_mcse",
        "fnr_mean",
        "fnr_mcse",
        "risk_mean",
    ];
    check_header(&mut reader, &expected, path)?;
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record?;
        let line = record
            .position()
            .map(|p| p.line())
            .unwrap_or_default();
        if record.len() != expected.len() {
            bail!(
                "{}:{line}: expected {} fields, got {}",
                path.display(),
                expected.len(),
                record.len()
            );
        }
        let f = |i: usize| -> Result<f64> {
            record[i]
                .trim()
                .parse::<f64>()
                .with_context(|| format!("{}:{line}: bad float {:?}", path.display(), &record[i]))
        };
        let u = |i: usize| -> Result<u64> {
            record[i]
                .trim()
                .parse::<u64>()
                .with_context(|| format!("{}:{line}: bad integer {:?}", path.display(), &record[i]))
        };
        rows.push(MetricsRow {
            procedure: record[0].trim().to_string(),
            t: f(1)?,
            m: u(2)?,
            s_frac: f(3)?,
            theta0: f(4)?,
            replicates: u(5)?,
            fdr_mean: f(6)?,
            fdr_mcse: f(7)?,
            fnr_mean: f(8)?,
            fnr_mcse: f(9)?,
            risk_mean: f(10)?,
        });
    }
    if rows.is_empty() {
        bail!("{}: results file contains no data rows", path.display());
    }
    Ok(rows)
}

fn check_header<R: std::io::Read>(
    reader: &mut csv::Reader<R>,
    expected: &[&str],
    path: &Path,
) -> Result<()> {
    let headers = reader.headers()?;
    let fields: Vec<String> = headers.iter().map(|h| h.trim().to_string()).collect();
    if fields != expected {
        bail!(
            "{}: expected header {:?}, got {:?}",
            path.display(),
            expected.join(","),
            fields.join(",")
        );
    }
    Ok(())
}
