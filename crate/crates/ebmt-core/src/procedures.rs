//! Multiple-testing procedures over count datasets: thresholding any of the
//! three mixture statistics, the Benjamini-Hochberg step-up on exact
//! two-sided p-values, and the confusion/error-rate accounting used to score
//! them against known truth.

use crate::binom::survival;
use crate::model::{cl_value, l_value, mmle, q_value_with, CountsDataset, TailConvention};
use crate::{Error, Result};
use std::fmt;
use std::str::FromStr;

/// Which decision rule to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Procedure {
    /// Threshold the posterior null probability.
    Ell,
    /// Threshold the calibrated posterior null probability.
    Cl,
    /// Threshold the tail-mass statistic.
    Q,
    /// Benjamini-Hochberg step-up on exact two-sided p-values.
    Bh,
}

impl fmt::Display for Procedure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Procedure::Ell => "ell",
            Procedure::Cl => "cl",
            Procedure::Q => "q",
            Procedure::Bh => "bh",
        })
    }
}

impl FromStr for Procedure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ell" => Ok(Procedure::Ell),
            "cl" => Ok(Procedure::Cl),
            "q" => Ok(Procedure::Q),
            "bh" => Ok(Procedure::Bh),
            other => Err(Error::Domain(format!(
                "unknown procedure '{other}' (expected ell, cl, q, or bh)"
            ))),
        }
    }
}

/// Per-object decisions plus the statistics they were based on.
#[derive(Debug, Clone, PartialEq)]
pub struct ProcedureDecision {
    pub procedure: Procedure,
    /// Level the statistics were compared against.
    pub t: f64,
    /// Mixture weight used (estimated or supplied); NaN for the p-value
    /// procedure, which has no weight.
    pub w_used: f64,
    pub reject: Vec<bool>,
    /// Statistic values (p-values for the step-up procedure).
    pub statistic: Vec<f64>,
}

/// Rejection tallies against known truth; an object is null exactly when
/// its true rate is 1/2.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConfusionCounts {
    pub false_discoveries: u64,
    pub true_discoveries: u64,
    pub false_negatives: u64,
    pub true_negatives: u64,
    pub n_signals: u64,
    pub n_nulls: u64,
}

fn check_level(t: f64) -> Result<()> {
    if !(t > 0.0 && t < 1.0) {
        return Err(Error::Domain(format!("t = {t} not in (0, 1)")));
    }
    Ok(())
}

/// Run a procedure at level `t` with the default tail convention. The
/// mixture weight is `w_override` if given, otherwise the marginal maximum
/// likelihood estimate from the data (for all three mixture procedures).
pub fn decide(
    d: &CountsDataset,
    procedure: Procedure,
    t: f64,
    w_override: Option<f64>,
) -> Result<ProcedureDecision> {
    decide_with(d, procedure, t, w_override, TailConvention::default())
}

/// [`decide`] with an explicit tail convention for the tail statistic.
pub fn decide_with(
    d: &CountsDataset,
    procedure: Procedure,
    t: f64,
    w_override: Option<f64>,
    convention: TailConvention,
) -> Result<ProcedureDecision> {
    check_level(t)?;
    if d.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if procedure == Procedure::Bh {
        return bh_decide(d, t);
    }
    let w = match w_override {
        Some(w) if w > 0.0 && w <= 1.0 => w,
        Some(w) => return Err(Error::Domain(format!("w = {w} not in (0, 1]"))),
        None => mmle(d)?.w_hat,
    };
    let mut statistic = Vec::with_capacity(d.len());
    for (&x, &m) in d.counts.iter().zip(&d.trials) {
        statistic.push(match procedure {
            Procedure::Ell => l_value(m, x, w)?,
            Procedure::Cl => cl_value(m, x, w)?,
            Procedure::Q => q_value_with(m, x, w, convention)?,
            Procedure::Bh => unreachable!(),
        });
    }
    let reject = statistic.iter().map(|&s| s <= t).collect();
    Ok(ProcedureDecision { procedure, t, w_used: w, reject, statistic })
}

/// Exact two-sided p-value for a count under the symmetric null:
/// `min(1, 2 P(X >= max(x, m-x)))`. Equals 1 at the central count.
pub fn p_value_two_sided(m: u64, x: u64) -> Result<f64> {
    if m == 0 {
        return Err(Error::Domain("m must be positive".into()));
    }
    if x > m {
        return Err(Error::Domain(format!("x = {x} > m = {m}")));
    }
    Ok((2.0 * survival(m, 0.5, x.max(m - x))?).min(1.0))
}

/// Benjamini-Hochberg step-up at level `t`: sort p-values ascending (ties
/// broken by object index), find the largest `k` with `p_(k) <= k t / n`,
/// and reject the `k` smallest.
pub fn bh_decide(d: &CountsDataset, t: f64) -> Result<ProcedureDecision> {
    check_level(t)?;
    if d.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let n = d.len();
    let mut statistic = Vec::with_capacity(n);
    for (&x, &m) in d.counts.iter().zip(&d.trials) {
        statistic.push(p_value_two_sided(m, x)?);
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        statistic[a]
            .partial_cmp(&statistic[b])
            .expect("p-values are never NaN")
            .then(a.cmp(&b))
    });
    let mut k_star = 0;
    for (rank, &j) in order.iter().enumerate() {
        if statistic[j] <= (rank + 1) as f64 * t / n as f64 {
            k_star = rank + 1;
        }
    }
    let mut reject = vec![false; n];
    for &j in &order[..k_star] {
        reject[j] = true;
    }
    Ok(ProcedureDecision {
        procedure: Procedure::Bh,
        t,
        w_used: f64::NAN,
        reject,
        statistic,
    })
}

/// Tally a decision vector against true rates.
pub fn confusion(dec: &ProcedureDecision, truth: &[f64]) -> Result<ConfusionCounts> {
    if truth.len() != dec.reject.len() {
        return Err(Error::LengthMismatch(format!(
            "{} decisions vs {} truth values",
            dec.reject.len(),
            truth.len()
        )));
    }
    let mut c = ConfusionCounts {
        false_discoveries: 0,
        true_discoveries: 0,
        false_negatives: 0,
        true_negatives: 0,
        n_signals: 0,
        n_nulls: 0,
    };
    for (&r, &theta) in dec.reject.iter().zip(truth) {
        let null = theta == 0.5;
        if null {
            c.n_nulls += 1;
            if r {
                c.false_discoveries += 1;
            } else {
                c.true_negatives += 1;
            }
        } else {
            c.n_signals += 1;
            if r {
                c.true_discoveries += 1;
            } else {
                c.false_negatives += 1;
            }
        }
    }
    Ok(c)
}

/// False discovery proportion `fd / max(1, fd + td)`.
pub fn fdp(c: &ConfusionCounts) -> f64 {
    c.false_discoveries as f64 / 1.0_f64.max((c.false_discoveries + c.true_discoveries) as f64)
}

/// False negative proportion `fn / max(1, n_signals)`.
pub fn fnp(c: &ConfusionCounts) -> f64 {
    c.false_negatives as f64 / 1.0_f64.max(c.n_signals as f64)
}

/// Combined classification risk `fdp + fnp`.
pub fn risk(c: &ConfusionCounts) -> f64 {
    fdp(c) + fnp(c)
}

/// Exact probability that a null count triggers rejection,
/// `P_{theta = 1/2}(statistic <= t)`, summed over the integer rejection
/// region (the statistics are non-increasing in the folded count, so the
/// region is a symmetric pair of tails found by binary search).
pub fn null_rejection_prob(procedure: Procedure, m: u64, w: f64, t: f64) -> Result<f64> {
    if !(w > 0.0 && w < 1.0) {
        return Err(Error::Domain(format!("w = {w} not in (0, 1)")));
    }
    check_level(t)?;
    let stat = |fold: u64| -> Result<f64> {
        match procedure {
            Procedure::Ell => l_value(m, fold, w),
            Procedure::Cl => cl_value(m, fold, w),
            Procedure::Q => q_value_with(m, fold, w, TailConvention::default()),
            Procedure::Bh => Err(Error::Domain(
                "null rejection probability is defined for the mixture procedures only".into(),
            )),
        }
    };
    let k_first = m.div_ceil(2);
    if stat(m)? > t {
        return Ok(0.0);
    }
    // Smallest fold whose statistic is at or below t.
    let k_star = if stat(k_first)? <= t {
        k_first
    } else {
        let (mut lo, mut hi) = (k_first, m);
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            if stat(mid)? > t {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        hi
    };
    // Two symmetric tails; at the central fold this caps to the whole space.
    Ok((2.0 * survival(m, 0.5, k_star)?).min(1.0))
}
