//! Exact moment diagnostics for the score function and the calibration
//! equations built from them.
//!
//! The score's behavior under nulls and signals is captured by three
//! expectations of the tilted ratio `beta(x, w)`: its negative null mean
//! (`m_tilde`), its mean under an arbitrary rate (`m1`), and its second
//! moment (`m2`). All are computed as exact finite sums over the count
//! lattice, never by asymptotic approximation; the asymptotic bounds from
//! the analysis become test assertions instead. On top of these sit the
//! calibration solvers: `solve_weight_bounds` brackets where the weight
//! estimate concentrates given a truth vector, and `solve_w0` inverts the
//! sparsity equation `n w m_tilde(w) = delta`.

use crate::binom::pmf;
use crate::model::beta_w;
use crate::{Error, Result};
use std::collections::BTreeMap;

/// The three moment diagnostics at one `(m, theta, w)` point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentReport {
    pub m_tilde: f64,
    pub m1: f64,
    pub m2: f64,
    /// Evaluation point `(m, theta, w)`.
    pub at: (u64, f64, f64),
}

fn check_weight_positive(w: f64) -> Result<()> {
    if !(w > 0.0 && w <= 1.0) {
        return Err(Error::Domain(format!("w = {w} not in (0, 1]")));
    }
    Ok(())
}

fn check_theta_open(theta: f64) -> Result<()> {
    if !(theta > 0.0 && theta < 1.0) {
        return Err(Error::Domain(format!("theta = {theta} not in (0, 1)")));
    }
    Ok(())
}

/// Negative null expectation of the tilted ratio,
/// `m_tilde(w) = -E_{1/2} beta(X, w)`, by exact summation. Non-negative and
/// increasing in `w`; tends to 0 as `w` does.
pub fn m_tilde(m: u64, w: f64) -> Result<f64> {
    check_weight_positive(w)?;
    let mut total = 0.0;
    for u in 0..=m {
        total += beta_w(m, u, w)? * pmf(m, 0.5, u)?;
    }
    Ok(-total)
}

/// Mean of the tilted ratio under rate `theta`,
/// `m1(theta, w) = E_theta beta(X, w)`, by exact summation. Decreasing in
/// `w`; equals `-m_tilde(w)` at `theta = 1/2`.
pub fn m1(m: u64, theta: f64, w: f64) -> Result<f64> {
    check_theta_open(theta)?;
    check_weight_positive(w)?;
    let mut total = 0.0;
    for u in 0..=m {
        total += beta_w(m, u, w)? * pmf(m, theta, u)?;
    }
    Ok(total)
}

/// Second moment of the tilted ratio under rate `theta`,
/// `m2(theta, w) = E_theta beta(X, w)^2`. Always non-negative.
pub fn m2(m: u64, theta: f64, w: f64) -> Result<f64> {
    check_theta_open(theta)?;
    check_weight_positive(w)?;
    let mut total = 0.0;
    for u in 0..=m {
        total += beta_w(m, u, w)?.powi(2) * pmf(m, theta, u)?;
    }
    Ok(total)
}

/// All three diagnostics at one point.
pub fn moment_report(m: u64, theta: f64, w: f64) -> Result<MomentReport> {
    Ok(MomentReport {
        m_tilde: m_tilde(m, w)?,
        m1: m1(m, theta, w)?,
        m2: m2(m, theta, w)?,
        at: (m, theta, w),
    })
}

/// Sum of `m1(theta_j, w)` over the signal entries of a truth vector,
/// grouping duplicate rates so the lattice sum runs once per distinct rate.
fn signal_m1_sum(signals: &BTreeMap<u64, u64>, m: u64, w: f64) -> Result<f64> {
    let mut total = 0.0;
    for (&bits, &count) in signals {
        total += count as f64 * m1(m, f64::from_bits(bits), w)?;
    }
    Ok(total)
}

/// Solve the two weight-calibration equations
/// `sum_{signals} m1(theta_j, w) = (1 -+ kappa) (n - s0) m_tilde(w)`
/// on `w in [1/n, 1/ln n]`. The left-to-right ratio is monotone, so each
/// root is unique when the endpoint signs differ; a root that does not
/// exist in the interval is reported as `None` rather than an error. When
/// both exist, the second (inflated right side) lies below the first.
pub fn solve_weight_bounds(
    d_truth: &[f64],
    m: u64,
    kappa: f64,
) -> Result<(Option<f64>, Option<f64>)> {
    if !(kappa > 0.0 && kappa < 1.0) {
        return Err(Error::Domain(format!("kappa = {kappa} not in (0, 1)")));
    }
    let n = d_truth.len();
    let mut signals: BTreeMap<u64, u64> = BTreeMap::new();
    for &theta in d_truth {
        if theta != 0.5 {
            check_theta_open(theta)?;
            *signals.entry(theta.to_bits()).or_insert(0) += 1;
        }
    }
    let s0: u64 = signals.values().sum();
    if s0 == 0 {
        return Ok((None, None));
    }
    let lo = 1.0 / n as f64;
    let hi = 1.0 / (n as f64).ln();
    if !(lo < hi && hi < 1.0) {
        return Ok((None, None));
    }
    let nulls = (n as u64 - s0) as f64;
    let mut roots = [None, None];
    for (slot, sign) in roots.iter_mut().zip([-1.0, 1.0]) {
        let c = (1.0 + sign * kappa) * nulls;
        let f = |w: f64| -> Result<f64> { Ok(signal_m1_sum(&signals, m, w)? - c * m_tilde(m, w)?) };
        // f is decreasing in w; a root needs f(lo) > 0 > f(hi).
        if f(lo)? <= 0.0 || f(hi)? >= 0.0 {
            continue;
        }
        let (mut a, mut b) = (lo, hi);
        while b - a > 1e-12 {
            let mid = 0.5 * (a + b);
            if f(mid)? > 0.0 {
                a = mid;
            } else {
                b = mid;
            }
        }
        *slot = Some(0.5 * (a + b));
    }
    Ok((roots[0], roots[1]))
}

/// Solve the sparsity calibration `n w m_tilde(w) = delta_n` for `w`; the
/// left side is strictly increasing, so the root is unique. `delta_n` must
/// lie in `[1.1, n/10]`.
pub fn solve_w0(m: u64, n: u64, delta_n: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::Domain("n must be positive".into()));
    }
    if !(delta_n >= 1.1 && delta_n <= n as f64 / 10.0) {
        return Err(Error::Domain(format!(
            "delta_n = {delta_n} outside [1.1, n/10] for n = {n}"
        )));
    }
    let nf = n as f64;
    let g = |w: f64| -> Result<f64> { Ok(nf * w * m_tilde(m, w)? - delta_n) };
    let lo = 1.0 / nf;
    if g(lo)? > 0.0 {
        return Err(Error::NoSolution(format!(
            "n w m_tilde(w) already exceeds delta_n = {delta_n} at w = 1/n"
        )));
    }
    if g(1.0)? < 0.0 {
        return Err(Error::NoSolution(format!(
            "n m_tilde(1) below delta_n = {delta_n}; no root at m = {m}"
        )));
    }
    let (mut a, mut b) = (lo, 1.0);
    while b - a > 1e-12 {
        let mid = 0.5 * (a + b);
        if g(mid)? < 0.0 {
            a = mid;
        } else {
            b = mid;
        }
    }
    Ok(0.5 * (a + b))
}
