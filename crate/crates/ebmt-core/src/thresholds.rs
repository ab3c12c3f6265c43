//! Rejection thresholds for the three statistics, obtained by inverting the
//! underlying density or tail ratios, plus the scale functions `zeta`, `xi`,
//! `nu` and closed-form asymptotic approximations used for cross-checks.
//!
//! Each statistic rejects when it falls at or below a level `t`, which is
//! equivalent to the folded distance `|x - m/2|` reaching `m` times a
//! threshold. The thresholds come from inverting the relevant ratio at
//! `r(w, t) = wt / ((1-w)(1-t))`: the density ratio `phi/g` for the
//! posterior statistic (on its gamma-continuous extension), the calibrated
//! density ratio for the calibrated statistic, and the lattice tail ratio
//! for the tail statistic (piecewise-linear, since survival functions have
//! no natural continuous extension).

use crate::binom::{log_coeff_continuous, survival};
use crate::model::cl_factor;
use crate::{Error, Result};

/// Whether an inversion landed inside the attainable range or was clamped
/// to an endpoint.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClampStatus {
    /// The requested level is attainable; the value inverts it exactly.
    Interior,
    /// Level above the ratio's maximum: threshold 0, every count rejects.
    RejectAll,
    /// Level below the ratio's minimum: no count rejects.
    RejectNone,
}

/// An inverted ratio location `x/m` in `[1/2, 1]` with its clamp status.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EtaValue {
    pub value: f64,
    pub status: ClampStatus,
}

impl EtaValue {
    fn interior(value: f64) -> Self {
        Self { value, status: ClampStatus::Interior }
    }
}

/// Node placement for the tail-ratio lattice.
///
/// `Inclusive` matches the default tail statistic (both survivals count the
/// observed point, slab tail `(m-k+1)/(m+1)`). `Exclusive` keeps the
/// inclusive null survival but the open slab tail `(m-k)/(m+1)`, mirroring
/// the compatibility statistic. `Strict` uses open tails on both sides,
/// which is the lattice on which the three-way threshold ordering holds at
/// every finite `m` (nodes `P(X > k) / P(U > k)` plus a terminal zero node).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum QLattice {
    #[default]
    Inclusive,
    Exclusive,
    Strict,
}

/// All thresholds and scale functions for one `(m, w, t)` configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdSet {
    pub m: u64,
    pub w: f64,
    pub t: f64,
    /// Posterior-odds level `r(w, t)` the inversions are evaluated at.
    pub r_wt: f64,
    /// Sparsity scale `sqrt(log(1/w) / (2m))`.
    pub zeta: f64,
    /// Solution of `beta(m/2 + m xi) = 1/w`.
    pub xi: f64,
    /// Solution of `beta(m/2 + m nu) = 0`.
    pub nu: f64,
    /// Folded rejection threshold for the posterior statistic.
    pub t_l: f64,
    /// Folded rejection threshold for the calibrated statistic.
    pub t_cl: f64,
    /// Folded rejection threshold for the tail statistic (inclusive lattice).
    pub t_q: f64,
}

/// Posterior-odds level `r(w, t) = wt / ((1-w)(1-t))`.
pub fn r_of(w: f64, t: f64) -> Result<f64> {
    if !(w > 0.0 && w < 1.0) {
        return Err(Error::Domain(format!("w = {w} not in (0, 1)")));
    }
    if !(t > 0.0 && t < 1.0) {
        return Err(Error::Domain(format!("t = {t} not in (0, 1)")));
    }
    Ok(w * t / ((1.0 - w) * (1.0 - t)))
}

/// Sparsity scale `sqrt(log(1/w) / (2m))`; infinite at `w = 0`.
pub fn zeta(m: u64, w: f64) -> Result<f64> {
    if m == 0 {
        return Err(Error::Domain("m must be positive".into()));
    }
    if !(0.0..=1.0).contains(&w) {
        return Err(Error::Domain(format!("w = {w} not in [0, 1]")));
    }
    if w == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(((1.0 / w).ln() / (2.0 * m as f64)).sqrt())
}

/// `ln((phi/g)(x))` on the gamma-continuous extension, for real `x`.
fn log_density_ratio_continuous(m: u64, x: f64) -> Result<f64> {
    let mf = m as f64;
    Ok(log_coeff_continuous(m, x)? - mf * std::f64::consts::LN_2 + (mf + 1.0).ln())
}

/// Invert the null-to-slab density ratio `phi/g` over `x in [m/2, m]`:
/// returns the `x/m` where the ratio equals `u`, clamping to an endpoint
/// (with a status flag) when `u` is outside the attainable range.
pub fn eta_l(m: u64, u: f64) -> Result<EtaValue> {
    if m == 0 {
        return Err(Error::Domain("m must be positive".into()));
    }
    if u < 0.0 {
        return Err(Error::Domain(format!("u = {u} negative")));
    }
    if u == 0.0 {
        return Ok(EtaValue { value: 1.0, status: ClampStatus::RejectNone });
    }
    let mf = m as f64;
    let lu = u.ln();
    let top = log_density_ratio_continuous(m, mf / 2.0)?;
    let bot = log_density_ratio_continuous(m, mf)?;
    // Levels within rounding error of an endpoint count as attained.
    let tol_top = 1e-12 * (1.0 + top.abs());
    let tol_bot = 1e-12 * (1.0 + bot.abs());
    if lu >= top - tol_top {
        return Ok(if lu <= top + tol_top {
            EtaValue::interior(0.5)
        } else {
            EtaValue { value: 0.5, status: ClampStatus::RejectAll }
        });
    }
    if lu <= bot + tol_bot {
        return Ok(if lu >= bot - tol_bot {
            EtaValue::interior(1.0)
        } else {
            EtaValue { value: 1.0, status: ClampStatus::RejectNone }
        });
    }
    let (mut lo, mut hi) = (mf / 2.0, mf);
    while (hi - lo) / mf > 1e-10 {
        let mid = 0.5 * (lo + hi);
        if log_density_ratio_continuous(m, mid)? > lu {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(EtaValue::interior(0.5 * (lo + hi) / mf))
}

/// Invert the calibrated density ratio: [`eta_l`] evaluated at
/// `sqrt(2/(pi m)) (1+m) u`.
pub fn eta_cl(m: u64, u: f64) -> Result<EtaValue> {
    if m == 0 {
        return Err(Error::Domain("m must be positive".into()));
    }
    eta_l(m, cl_factor(m) * u)
}

/// Invert the lattice tail ratio with the default inclusive node placement.
pub fn eta_q(m: u64, u: f64) -> Result<EtaValue> {
    eta_q_with(m, u, QLattice::Inclusive)
}

/// Tail ratio at lattice fold `k` for the given node placement. `None`
/// marks the strict lattice's terminal zero node.
fn lattice_ratio(m: u64, k: u64, lattice: QLattice) -> Result<f64> {
    let scale = m as f64 + 1.0;
    Ok(match lattice {
        QLattice::Inclusive => survival(m, 0.5, k)? * scale / (m - k + 1) as f64,
        QLattice::Exclusive => survival(m, 0.5, k)? * scale / (m - k) as f64,
        QLattice::Strict => {
            if k == m {
                0.0
            } else {
                survival(m, 0.5, k + 1)? * scale / (m - k) as f64
            }
        }
    })
}

/// Invert the lattice tail ratio by monotone piecewise-linear interpolation
/// between adjacent folds; same clamp semantics as [`eta_l`].
pub fn eta_q_with(m: u64, u: f64, lattice: QLattice) -> Result<EtaValue> {
    if m == 0 {
        return Err(Error::Domain("m must be positive".into()));
    }
    if u < 0.0 {
        return Err(Error::Domain(format!("u = {u} negative")));
    }
    let k_first = m.div_ceil(2);
    let k_last = match lattice {
        QLattice::Inclusive | QLattice::Strict => m,
        QLattice::Exclusive => m - 1,
    };
    let mf = m as f64;
    let top = lattice_ratio(m, k_first, lattice)?;
    // Levels within rounding error of an endpoint count as attained.
    if u >= top * (1.0 - 1e-12) {
        return Ok(if u <= top * (1.0 + 1e-12) {
            EtaValue::interior(k_first as f64 / mf)
        } else {
            EtaValue { value: 0.5, status: ClampStatus::RejectAll }
        });
    }
    let bot = lattice_ratio(m, k_last, lattice)?;
    if u <= bot * (1.0 + 1e-12) {
        return Ok(if u >= bot * (1.0 - 1e-12) {
            EtaValue::interior(k_last as f64 / mf)
        } else {
            EtaValue { value: 1.0, status: ClampStatus::RejectNone }
        });
    }
    // Smallest k with ratio(k) <= u; the ratio is strictly decreasing in k.
    let (mut lo, mut hi) = (k_first, k_last);
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if lattice_ratio(m, mid, lattice)? > u {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let (v_lo, v_hi) = (lattice_ratio(m, lo, lattice)?, lattice_ratio(m, hi, lattice)?);
    let frac = (v_lo - u) / (v_lo - v_hi);
    Ok(EtaValue::interior((lo as f64 + frac) / mf))
}

/// Solve `beta(m/2 + m xi) = 1/w` on the continuous extension; errors when
/// `1/w` exceeds `beta(m)` so no solution exists in `(0, 1/2]`.
pub fn xi(m: u64, w: f64) -> Result<f64> {
    if !(w > 0.0 && w < 1.0) {
        return Err(Error::Domain(format!("w = {w} not in (0, 1)")));
    }
    // beta = 1/w is the same as phi/g = w/(1+w).
    match eta_l(m, w / (1.0 + w))? {
        EtaValue { value, status: ClampStatus::Interior } => Ok(value - 0.5),
        EtaValue { status: ClampStatus::RejectNone, .. } => Err(Error::NoSolution(format!(
            "1/w = {} exceeds the centered likelihood ratio at x = m = {m}",
            1.0 / w
        ))),
        EtaValue { status: ClampStatus::RejectAll, .. } => unreachable!(
            "phi/g at the center exceeds 1 > w/(1+w)"
        ),
    }
}

/// Solve `beta(m/2 + m nu) = 0` on the continuous extension (the fold where
/// slab and null densities cross).
pub fn nu(m: u64) -> Result<f64> {
    if m < 2 {
        return Err(Error::Domain(format!("m = {m} < 2")));
    }
    match eta_l(m, 1.0)? {
        EtaValue { value, status: ClampStatus::Interior } => Ok(value - 0.5),
        _ => unreachable!("phi/g spans 1 on [m/2, m] for m >= 2"),
    }
}

/// Assemble every threshold and scale function for one configuration.
///
/// Rejection of integer counts is decision-consistent with the statistics
/// themselves: `statistic(m, x, w) <= t` exactly when `|x - m/2| >= m t_X`,
/// because the inversions run on the same ratio the statistics are built
/// from. Callers comparing floats near a lattice boundary (within about
/// `1e-9 m` of an integer fold) should fall back to evaluating the
/// statistic at the two straddling integers.
pub fn threshold_set(m: u64, w: f64, t: f64) -> Result<ThresholdSet> {
    let r_wt = r_of(w, t)?;
    Ok(ThresholdSet {
        m,
        w,
        t,
        r_wt,
        zeta: zeta(m, w)?,
        xi: xi(m, w)?,
        nu: nu(m)?,
        t_l: eta_l(m, r_wt)?.value - 0.5,
        t_cl: eta_cl(m, r_wt)?.value - 0.5,
        t_q: eta_q(m, r_wt)?.value - 0.5,
    })
}

/// Closed-form large-`m` threshold approximations `(t_l, t_cl, t_q)`,
/// for cross-validation and reporting only:
/// `sqrt((L + ln(sqrt(2/(pi m))(1+m))) / (2m))`, `sqrt(L / (2m))`, and
/// `sqrt((L - ln(sqrt(L))) / (2m))` with `L = ln(1/r(w,t))`.
pub fn asymptotic_thresholds(m: u64, w: f64, t: f64) -> Result<(f64, f64, f64)> {
    if m == 0 {
        return Err(Error::Domain("m must be positive".into()));
    }
    let r = r_of(w, t)?;
    if r >= 1.0 {
        return Err(Error::Domain(format!(
            "r(w, t) = {r} >= 1; the approximations need log(1/r) > 0"
        )));
    }
    let big_l = (1.0 / r).ln();
    let two_m = 2.0 * m as f64;
    let t_l = ((big_l + cl_factor(m).ln()) / two_m).sqrt();
    let t_cl = (big_l / two_m).sqrt();
    let t_q = ((big_l - big_l.sqrt().ln()) / two_m).sqrt();
    Ok((t_l, t_cl, t_q))
}
