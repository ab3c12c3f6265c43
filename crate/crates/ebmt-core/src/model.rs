//! Spike-and-slab posterior machinery for symmetric-null binomial counts.
//!
//! Each object contributes a count `X_j` out of `m_j` trials. Under the null
//! the success rate is exactly 1/2; under the alternative it is drawn from a
//! uniform slab, whose marginal over counts is the constant `1/(m+1)`. The
//! mixture weight `w` of the slab is shared across objects and estimated by
//! marginal maximum likelihood. From the fitted mixture we compute three
//! per-object null summaries: the posterior null probability (`l_value`), a
//! calibrated variant that replaces the slab density with its central-scale
//! equivalent (`cl_value`), and a tail-mass analogue built from survival
//! functions (`q_value`).

use crate::binom::{log_coeff_continuous, log_pmf, survival};
use crate::{Error, Result};
use statrs::function::gamma::ln_gamma;

/// Which lattice the tail statistic's slab survival uses.
///
/// `Inclusive` counts the observed point into the slab tail, keeping the
/// statistic strictly interior and monotone out to the extreme count.
/// `Exclusive` drops it, which reproduces the textbook formula but pins the
/// statistic to 1 at the most extreme observation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TailConvention {
    #[default]
    Inclusive,
    Exclusive,
}

/// A batch of binomial observations, optionally with ground-truth rates.
#[derive(Debug, Clone, PartialEq)]
pub struct CountsDataset {
    /// Observed success counts `X_j`.
    pub counts: Vec<u64>,
    /// Trials per object `m_j`.
    pub trials: Vec<u64>,
    /// Optional true success rates, used by simulation diagnostics.
    pub truth: Option<Vec<f64>>,
}

impl CountsDataset {
    pub fn new(counts: Vec<u64>, trials: Vec<u64>, truth: Option<Vec<f64>>) -> Result<Self> {
        if counts.is_empty() {
            return Err(Error::EmptyDataset);
        }
        if counts.len() != trials.len() {
            return Err(Error::LengthMismatch(format!(
                "{} counts vs {} trial sizes",
                counts.len(),
                trials.len()
            )));
        }
        if let Some(t) = &truth {
            if t.len() != counts.len() {
                return Err(Error::LengthMismatch(format!(
                    "{} counts vs {} truth values",
                    counts.len(),
                    t.len()
                )));
            }
        }
        for (j, (&x, &m)) in counts.iter().zip(&trials).enumerate() {
            if m == 0 || x > m {
                return Err(Error::Domain(format!(
                    "object {j}: count {x} out of range for {m} trials"
                )));
            }
        }
        Ok(Self { counts, trials, truth })
    }

    /// All objects share the same number of trials.
    pub fn homogeneous(counts: Vec<u64>, m: u64) -> Result<Self> {
        let trials = vec![m; counts.len()];
        Self::new(counts, trials, None)
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }
}

/// Result of the marginal maximum likelihood fit for the slab weight.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightEstimate {
    /// Fitted weight in `[1/n, 1]`.
    pub w_hat: f64,
    /// The score is non-positive already at `w = 1/n`.
    pub at_lower_boundary: bool,
    /// The score is non-negative still at `w = 1`.
    pub at_upper_boundary: bool,
    /// Score evaluated at `w_hat`.
    pub score_at_w: f64,
    /// Bisection steps taken (0 for boundary fits).
    pub iterations: u32,
}

fn check_weight(w: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&w) {
        return Err(Error::Domain(format!("w = {w} not in [0, 1]")));
    }
    Ok(())
}

/// Marginal density of a count under the uniform slab: `1/(m+1)`, free of x.
pub fn g_slab(m: u64) -> Result<f64> {
    if m == 0 {
        return Err(Error::Domain("m must be positive".into()));
    }
    Ok(1.0 / (m as f64 + 1.0))
}

/// Marginal density of count `x` under a symmetric Beta(alpha, alpha) slab.
///
/// Computed in log space as `C(m,x) B(x + a, m - x + a) / B(a, a)`; at
/// `alpha = 1` this reduces to the flat `1/(m+1)` for every `x`.
pub fn g_slab_alpha(m: u64, x: u64, alpha: u64) -> Result<f64> {
    if m == 0 {
        return Err(Error::Domain("m must be positive".into()));
    }
    if x > m {
        return Err(Error::Domain(format!("x = {x} > m = {m}")));
    }
    if alpha == 0 {
        return Err(Error::Domain("alpha must be >= 1".into()));
    }
    let a = alpha as f64;
    let log = log_coeff_continuous(m, x as f64)? + ln_gamma(2.0 * a) + ln_gamma(x as f64 + a)
        + ln_gamma((m - x) as f64 + a)
        - 2.0 * ln_gamma(a)
        - ln_gamma(m as f64 + 2.0 * a);
    Ok(log.exp())
}

/// `ln(g / phi)` at count `x`; the shared building block for the likelihood
/// ratio pieces below.
fn log_density_ratio(m: u64, x: u64) -> Result<f64> {
    Ok(g_slab(m)?.ln() - log_pmf(m, 0.5, x)?)
}

/// `beta(x) = g(x)/phi(x) - 1`, the centered likelihood ratio. Symmetric
/// about `m/2`, minimized there, and always above -1. Overflows to infinity
/// for counts so extreme that `phi` underflows; downstream forms stay finite.
pub fn beta_fn(m: u64, x: u64) -> Result<f64> {
    Ok(log_density_ratio(m, x)?.exp_m1())
}

/// `beta(x, w) = beta(x) / (1 + w beta(x))`, evaluated in a form that stays
/// finite when `beta(x)` overflows (the limit is `1/w`).
pub fn beta_w(m: u64, x: u64, w: f64) -> Result<f64> {
    check_weight(w)?;
    Ok(beta_w_from_ratio(log_density_ratio(m, x)?, w))
}

/// [`beta_w`] evaluated from a precomputed log density ratio. The ratio does
/// not depend on `w`, so root finders cache it across weight evaluations.
fn beta_w_from_ratio(lr: f64, w: f64) -> f64 {
    if lr < 500.0 {
        let b = lr.exp_m1();
        b / (1.0 + w * b)
    } else {
        let e = (-lr).exp();
        (1.0 - e) / ((1.0 - w) * e + w)
    }
}

/// `ln(1 + w beta(x))` via `ln((1-w) + w e^lr)`, stable for extreme `lr`.
fn ln_one_plus_w_beta(lr: f64, w: f64) -> f64 {
    if w == 0.0 {
        0.0
    } else if w == 1.0 {
        lr
    } else if lr <= 500.0 {
        ((1.0 - w) + w * lr.exp()).ln()
    } else {
        lr + (w + (1.0 - w) * (-lr).exp()).ln()
    }
}

/// Log marginal likelihood of the mixture weight `w` over the dataset,
/// `sum_j [ln phi_j(X_j) + ln(1 + w beta_j(X_j))]`. Concave in `w`.
pub fn log_marginal(d: &CountsDataset, w: f64) -> Result<f64> {
    check_weight(w)?;
    let mut total = 0.0;
    for (&x, &m) in d.counts.iter().zip(&d.trials) {
        total += log_pmf(m, 0.5, x)? + ln_one_plus_w_beta(log_density_ratio(m, x)?, w);
    }
    Ok(total)
}

/// Score function `S(w) = sum_j beta_j(X_j, w)`, the derivative of
/// [`log_marginal`] in `w`. Strictly decreasing unless every `beta_j(X_j)`
/// vanishes.
pub fn score(d: &CountsDataset, w: f64) -> Result<f64> {
    check_weight(w)?;
    Ok(score_from_ratios(&density_ratios(d)?, w))
}

/// Log density ratios for every object, the `w`-free part of the score.
fn density_ratios(d: &CountsDataset) -> Result<Vec<f64>> {
    d.counts
        .iter()
        .zip(&d.trials)
        .map(|(&x, &m)| log_density_ratio(m, x))
        .collect()
}

fn score_from_ratios(ratios: &[f64], w: f64) -> f64 {
    ratios.iter().map(|&lr| beta_w_from_ratio(lr, w)).sum()
}

/// Marginal maximum likelihood estimate of the slab weight over `[1/n, 1]`.
///
/// The score is monotone decreasing, so the argmax is either a boundary
/// (score does not change sign) or the unique root, found by bisection to
/// `|dw| <= 1e-12`.
pub fn mmle(d: &CountsDataset) -> Result<WeightEstimate> {
    if d.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let ratios = density_ratios(d)?;
    let w_min = 1.0 / d.len() as f64;
    let s_lo = score_from_ratios(&ratios, w_min);
    if s_lo <= 0.0 {
        return Ok(WeightEstimate {
            w_hat: w_min,
            at_lower_boundary: true,
            at_upper_boundary: false,
            score_at_w: s_lo,
            iterations: 0,
        });
    }
    let s_hi = score_from_ratios(&ratios, 1.0);
    if s_hi >= 0.0 {
        return Ok(WeightEstimate {
            w_hat: 1.0,
            at_lower_boundary: false,
            at_upper_boundary: true,
            score_at_w: s_hi,
            iterations: 0,
        });
    }
    let (mut lo, mut hi) = (w_min, 1.0);
    let mut iterations = 0;
    while hi - lo > 1e-12 {
        let mid = 0.5 * (lo + hi);
        if score_from_ratios(&ratios, mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        iterations += 1;
    }
    let w_hat = 0.5 * (lo + hi);
    Ok(WeightEstimate {
        w_hat,
        at_lower_boundary: false,
        at_upper_boundary: false,
        score_at_w: score_from_ratios(&ratios, w_hat),
        iterations,
    })
}

/// Posterior probability `(1-w) a / ((1-w) a + w b)` of the null component
/// given null mass `a` and slab mass `b`. Returns 1 when the slab mass is
/// zero (nothing to shift belief toward).
fn spike_slab_posterior(null_mass: f64, slab_mass: f64, w: f64) -> f64 {
    let num = (1.0 - w) * null_mass;
    let den = num + w * slab_mass;
    if den == 0.0 {
        1.0
    } else {
        num / den
    }
}

fn check_count(m: u64, x: u64) -> Result<()> {
    if m == 0 {
        return Err(Error::Domain("m must be positive".into()));
    }
    if x > m {
        return Err(Error::Domain(format!("x = {x} > m = {m}")));
    }
    Ok(())
}

/// Posterior null probability of count `x`: `(1-w) phi / ((1-w) phi + w g)`.
/// Symmetric in `x` about `m/2` and non-increasing in `|x - m/2|`.
pub fn l_value(m: u64, x: u64, w: f64) -> Result<f64> {
    check_count(m, x)?;
    check_weight(w)?;
    Ok(spike_slab_posterior(
        log_pmf(m, 0.5, x)?.exp(),
        g_slab(m)?,
        w,
    ))
}

/// Calibration factor `sqrt(2/(pi m)) (1 + m)` that rescales the flat slab
/// to the null's central density scale.
pub(crate) fn cl_factor(m: u64) -> f64 {
    let mf = m as f64;
    (2.0 / (std::f64::consts::PI * mf)).sqrt() * (1.0 + mf)
}

/// Calibrated posterior null probability: the slab density is inflated by
/// `sqrt(2/(pi m)) (1 + m)` so that it matches the null pmf's central
/// height. Always at most [`l_value`] for `m >= 2`.
pub fn cl_value(m: u64, x: u64, w: f64) -> Result<f64> {
    check_count(m, x)?;
    check_weight(w)?;
    Ok(spike_slab_posterior(
        log_pmf(m, 0.5, x)?.exp(),
        cl_factor(m) * g_slab(m)?,
        w,
    ))
}

/// Tail-mass analogue of [`l_value`] under the default inclusive convention.
pub fn q_value(m: u64, x: u64, w: f64) -> Result<f64> {
    q_value_with(m, x, w, TailConvention::Inclusive)
}

/// Tail-mass analogue of [`l_value`]: survival functions of the folded count
/// `u = m/2 + |x - m/2|` replace the densities. The null tail is the
/// inclusive binomial survival `P(X >= u)`; the slab tail is
/// `(m - u + 1)/(m + 1)` (inclusive) or `(m - u)/(m + 1)` (exclusive, which
/// forces the statistic to 1 at `u = m`).
pub fn q_value_with(m: u64, x: u64, w: f64, convention: TailConvention) -> Result<f64> {
    check_count(m, x)?;
    check_weight(w)?;
    // Fold to the upper tail; ceil keeps odd m exact (|x - m/2| is half-odd).
    let fold = x.max(m - x);
    let null_tail = survival(m, 0.5, fold)?;
    let slab_tail = match convention {
        TailConvention::Inclusive => (m - fold + 1) as f64 / (m as f64 + 1.0),
        TailConvention::Exclusive => (m - fold) as f64 / (m as f64 + 1.0),
    };
    Ok(spike_slab_posterior(null_tail, slab_tail, w))
}
