//! Closed-form two-sided bounds and approximations for symmetric-ish
//! binomial tails, each checked against the exact computations in
//! [`crate::binom`].
//!
//! These exist to validate the exact code (and vice versa) and to give
//! analysts cheap envelopes at scales where exact summation is awkward. All
//! bounds are classical: Stirling-error envelopes for the central
//! coefficient, Chernoff and saddle-point sandwiches for the upper tail,
//! Carter's normal-factorization approximation, McKay's and Slud's
//! Gaussian-comparison bounds, and a Mills-type ratio bracket.

use crate::binom::{entropy_t, gauss_mills_ratio, gauss_survival, pmf};
use crate::{Error, Result};

/// A two-sided envelope `[lower, upper]` for a scalar quantity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundPair {
    pub lower: f64,
    pub upper: f64,
}

impl BoundPair {
    fn new(lower: f64, upper: f64) -> Self {
        debug_assert!(lower <= upper, "bound pair inverted: [{lower}, {upper}]");
        Self { lower, upper }
    }

    /// Whether `x` lies inside the envelope.
    pub fn contains(&self, x: f64) -> bool {
        self.lower <= x && x <= self.upper
    }

    /// Envelope width `upper - lower`.
    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }
}

/// Tail approximation for `P(X >= k)` at `theta = 1/2`, factored as a
/// Gaussian tail times an exponential correction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CarterDecomposition {
    /// Normalized offset `(2K - M) / M` with `K = k - 1`, `M = m - 1`.
    pub epsilon: f64,
    /// Series coefficient `gamma(epsilon)`, in `[1/12, 1/(12(1-eps^2))]`.
    pub gamma_eps: f64,
    /// `-M eps^4 gamma(eps) - ln(1 - eps^2)/2`, the exponent of the
    /// correction factor.
    pub a_m_core: f64,
    /// `gauss_survival(eps sqrt M) * exp(a_m_core)`.
    pub approx: f64,
}

/// Bracket for `ln C(m, m/2 + m s)` from the Stirling approximation with
/// explicit error-term ranges.
///
/// The point evaluated is the coefficient at `x = m/2 + m s`; tests feed `s`
/// values that make `x` an integer so the exact coefficient is available.
pub fn stirling_coeff_bounds(m: u64, s: f64) -> Result<BoundPair> {
    if !(0.0..0.5).contains(&s) {
        return Err(Error::Domain(format!("s = {s} not in [0, 1/2)")));
    }
    let mf = m as f64;
    let base = 0.5 * std::f64::consts::LN_2 - mf * entropy_t(0.5 + s, 0.5)?
        + mf * std::f64::consts::LN_2
        - 0.5 * (std::f64::consts::PI * mf * (1.0 - 4.0 * s * s)).ln();
    // Stirling error ranges: 1/(12n+1) < stirlerr(n) < 1/(12n) applied to m,
    // m/2 + ms and m/2 - ms.
    let omega_min = 1.0 / (12.0 * mf + 1.0)
        - 1.0 / (6.0 * mf + 12.0 * mf * s)
        - 1.0 / (6.0 * mf - 12.0 * mf * s);
    let omega_max = 1.0 / (12.0 * mf)
        - 1.0 / (6.0 * mf + 12.0 * mf * s + 1.0)
        - 1.0 / (6.0 * mf - 12.0 * mf * s + 1.0);
    Ok(BoundPair::new(base + omega_min, base + omega_max))
}

fn check_tail_args(m: u64, a: f64, theta: f64) -> Result<()> {
    if m == 0 {
        return Err(Error::Domain("m must be positive".into()));
    }
    if !(0.5..1.0).contains(&theta) {
        return Err(Error::Domain(format!("theta = {theta} not in [1/2, 1)")));
    }
    if !(a > theta && a < 1.0) {
        return Err(Error::Domain(format!(
            "a = {a} not in (theta, 1) with theta = {theta}"
        )));
    }
    Ok(())
}

/// Chernoff upper bound `exp(-m T(a, theta))` for `P(X >= ceil(m a))`.
pub fn chernoff_tail(m: u64, a: f64, theta: f64) -> Result<f64> {
    check_tail_args(m, a, theta)?;
    Ok((-(m as f64) * entropy_t(a, theta)?).exp())
}

/// Saddle-point sandwich for `P(X >= m a)` with `m a` integer.
///
/// The upper bound is rigorous everywhere in the domain. The lower bound
/// degrades within about `sqrt(m)` of the right endpoint (the `1/(12(m-k))`
/// Stirling defect outruns the tail surplus there); callers wanting a
/// guaranteed floor should keep `m a <= m - sqrt(m)`.
pub fn tail_sandwich(m: u64, a: f64, theta: f64) -> Result<BoundPair> {
    check_tail_args(m, a, theta)?;
    let mf = m as f64;
    let core = (-mf * entropy_t(a, theta)?).exp()
        / (2.0 * std::f64::consts::PI * mf * a * (1.0 - a)).sqrt();
    let upper = core * a * (1.0 - theta) * (1.0 / (12.0 * mf)).exp() / (a - theta);
    Ok(BoundPair::new(core, upper))
}

/// Normal-factorization tail approximation at `theta = 1/2` (Carter-style):
/// `P(X >= k) ~= gauss_survival(eps sqrt M) exp(-M eps^4 gamma(eps) -
/// ln(1 - eps^2)/2)`, dropping the vanishing correction factors whose
/// constants are not explicit.
pub fn carter_tail(m: u64, k: u64) -> Result<CarterDecomposition> {
    if m < 28 {
        return Err(Error::Domain(format!("m = {m} < 28")));
    }
    if 2 * k <= m || k > m - 1 {
        return Err(Error::Domain(format!("k = {k} not in (m/2, m-1] for m = {m}")));
    }
    let big_m = (m - 1) as f64;
    let big_k = (k - 1) as f64;
    let eps = (2.0 * big_k - big_m) / big_m;
    let gamma_eps = carter_gamma(eps);
    let a_m_core = -big_m * eps.powi(4) * gamma_eps - 0.5 * (1.0 - eps * eps).ln();
    let approx = gauss_survival(eps * big_m.sqrt()) * a_m_core.exp();
    Ok(CarterDecomposition {
        epsilon: eps,
        gamma_eps,
        a_m_core,
        approx,
    })
}

/// `gamma(eps) = sum_{r>=0} eps^{2r} / ((2r+3)(2r+4))`, truncated when terms
/// drop below 1e-16.
fn carter_gamma(eps: f64) -> f64 {
    let e2 = eps * eps;
    let mut term = 1.0;
    let mut total = 0.0;
    for r in 0..200u32 {
        let denom = f64::from((2 * r + 3) * (2 * r + 4));
        total += term / denom;
        term *= e2;
        if term / denom < 1e-16 {
            break;
        }
    }
    total
}

/// McKay's Gaussian-comparison sandwich for `P(X >= k)`, `k > m theta`:
/// `sigma pmf(m-1, theta, k-1) Y(z) <= P(X >= k) <= lower exp(min(sqrt(pi/8),
/// 1/z)/sigma)` with `Y` the Gaussian Mills ratio.
pub fn mckay_bounds(m: u64, theta: f64, k: u64) -> Result<BoundPair> {
    if !(theta > 0.0 && theta < 1.0) {
        return Err(Error::Domain(format!("theta = {theta} not in (0, 1)")));
    }
    if k > m {
        return Err(Error::Domain(format!("k = {k} > m = {m}")));
    }
    let (mf, kf) = (m as f64, k as f64);
    let sigma = (mf * theta * (1.0 - theta)).sqrt();
    let z = (kf - mf * theta) / sigma;
    if z <= 0.0 {
        return Err(Error::Domain(format!("k = {k} <= m theta = {}", mf * theta)));
    }
    let y = gauss_mills_ratio(z);
    let lower = sigma * pmf(m - 1, theta, k - 1)? * y;
    let upper = lower * ((std::f64::consts::PI / 8.0).sqrt().min(1.0 / z) / sigma).exp();
    Ok(BoundPair::new(lower, upper))
}

/// Slud's lower bound `P(X >= k) >= gauss_survival((k - m theta) /
/// sqrt(m theta))` for `k <= m theta`.
pub fn slud_lower(m: u64, theta: f64, k: u64) -> Result<f64> {
    if !(theta > 0.0 && theta < 1.0) {
        return Err(Error::Domain(format!("theta = {theta} not in (0, 1)")));
    }
    let (mf, kf) = (m as f64, k as f64);
    if kf > mf * theta {
        return Err(Error::Domain(format!("k = {k} > m theta = {}", mf * theta)));
    }
    Ok(gauss_survival((kf - mf * theta) / (mf * theta).sqrt()))
}

/// Bracket `[k/m, k(1-theta)/(k - m theta)]` for the tail-to-pmf ratio
/// `P(X >= k) / P(X = k)` when `k > m theta`.
pub fn mills_ratio_bounds(m: u64, theta: f64, k: u64) -> Result<BoundPair> {
    if !(theta > 0.0 && theta < 1.0) {
        return Err(Error::Domain(format!("theta = {theta} not in (0, 1)")));
    }
    if k > m {
        return Err(Error::Domain(format!("k = {k} > m = {m}")));
    }
    let (mf, kf) = (m as f64, k as f64);
    if kf <= mf * theta {
        return Err(Error::Domain(format!("k = {k} <= m theta = {}", mf * theta)));
    }
    if k == m {
        // Both endpoints collapse to 1 exactly; the general expression can
        // round its upper a ulp below its lower here.
        return Ok(BoundPair::new(1.0, 1.0));
    }
    Ok(BoundPair::new(
        kf / mf,
        kf * (1.0 - theta) / (kf - mf * theta),
    ))
}

/// Closed-form bracket for the integer `k` at which the symmetric binomial
/// tail first drops to `y`; the exact inverse lies in `[lower - 1,
/// upper + 1]` for large `m`.
pub fn inv_survival_asymptotic(m: u64, y: f64) -> Result<BoundPair> {
    if m < 28 {
        return Err(Error::Domain(format!("m = {m} < 28")));
    }
    if !(y > 0.0 && y < 0.5) {
        return Err(Error::Domain(format!("y = {y} not in (0, 1/2)")));
    }
    let mf = m as f64;
    let ly = (1.0 / y).ln();
    let inner = ly - ly.sqrt().ln() - (4.0 * std::f64::consts::PI.sqrt()).ln();
    let lower = mf / 2.0 + (mf / 2.0 * inner.max(0.0)).sqrt();
    let upper = mf / 2.0 + (mf * ly / 2.0).sqrt();
    Ok(BoundPair::new(lower, upper))
}

/// `h'''(x)/6` for `h(x) = T(p + x, p)`, the cubic correction coefficient in
/// the entropy envelopes.
fn entropy_cubic(p: f64, x: f64) -> f64 {
    let d = 1.0 - 4.0 * (p + x - 0.5).powi(2);
    8.0 * (2.0 * p + 2.0 * x - 1.0) / (3.0 * d * d)
}

/// Taylor envelope for the relative entropy `T(p + eps, p)` around `eps = 0`,
/// for `p >= 1/2`.
///
/// With center `c = eps^2 / (2 p (1-p))` and `D(x) = h'''(x)/6`:
/// `eps = 0` gives `[0, 0]`; `0 < eps < 1-p` gives `[c, c + eps^3 D(eps)]`;
/// for negative `eps` the cubic term is negative, so the envelope becomes
/// `[c + eps^3 D(0), c]` on `(1/2 - p, 0)` and `[c + eps^3 D(0),
/// c + eps^3 D(eps)]` on `(-p, 1/2 - p]`, by the mean-value form of the
/// remainder with `h'''` monotone between the evaluation points.
pub fn entropy_sandwich(p: f64, eps: f64) -> Result<BoundPair> {
    if !(0.5..1.0).contains(&p) {
        return Err(Error::Domain(format!("p = {p} not in [1/2, 1)")));
    }
    if eps == 0.0 {
        return Ok(BoundPair::new(0.0, 0.0));
    }
    let center = eps * eps / (2.0 * p * (1.0 - p));
    if eps > 0.0 && eps < 1.0 - p {
        Ok(BoundPair::new(center, center + eps.powi(3) * entropy_cubic(p, eps)))
    } else if eps < 0.0 && eps > 0.5 - p {
        Ok(BoundPair::new(center + eps.powi(3) * entropy_cubic(p, 0.0), center))
    } else if eps < 0.0 && eps > -p && eps <= 0.5 - p {
        Ok(BoundPair::new(
            center + eps.powi(3) * entropy_cubic(p, 0.0),
            center + eps.powi(3) * entropy_cubic(p, eps),
        ))
    } else {
        Err(Error::Domain(format!(
            "eps = {eps} outside (-p, 1 - p) for p = {p}"
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::binom::{log_coeff_continuous, survival};
    use approx::assert_relative_eq;

    #[test]
    fn stirling_brackets_exact_coefficient() {
        let b = stirling_coeff_bounds(4, 0.0).unwrap();
        assert_relative_eq!(b.lower, 1.7907250189670814, max_relative = 1e-13);
        assert_relative_eq!(b.upper, 1.7944835223684419, max_relative = 1e-13);
        assert!(b.contains(6.0_f64.ln()));

        assert!(stirling_coeff_bounds(100, 0.0)
            .unwrap()
            .contains(66.78384165201743));
        assert!(stirling_coeff_bounds(4, 0.25).unwrap().contains(4.0_f64.ln()));
        assert!(stirling_coeff_bounds(100, 0.1)
            .unwrap()
            .contains(log_coeff_continuous(100, 60.0).unwrap()));

        let w_small = stirling_coeff_bounds(100, 0.0).unwrap().width();
        let w_large = stirling_coeff_bounds(10_000, 0.0).unwrap().width();
        assert!(w_large < w_small);
        assert!(stirling_coeff_bounds(4, 0.5).is_err());
    }

    #[test]
    fn chernoff_dominates_exact_tail() {
        let b = chernoff_tail(100, 0.7, 0.5).unwrap();
        assert_relative_eq!(b, (-100.0 * 0.08228287850505185_f64).exp(), max_relative = 1e-12);
        assert!(b >= survival(100, 0.5, 70).unwrap());
        assert!(chernoff_tail(10, 0.9, 0.5).unwrap() >= survival(10, 0.5, 9).unwrap());
        // a close to theta drives the bound to 1.
        assert!(chernoff_tail(100, 0.500001, 0.5).unwrap() > 0.999);
        assert!(chernoff_tail(100, 0.5, 0.5).is_err());
    }

    #[test]
    fn tail_sandwich_contains_exact() {
        let b = tail_sandwich(100, 0.7, 0.5).unwrap();
        assert!(b.contains(3.925069822796835e-5));
        let b = tail_sandwich(28, 0.75, 0.5).unwrap();
        assert!(b.contains(survival(28, 0.5, 21).unwrap()));
        assert!(b.lower <= b.upper);
        assert!(tail_sandwich(100, 0.4, 0.5).is_err());
    }

    #[test]
    fn carter_matches_exact_within_tolerance() {
        let c = carter_tail(100, 60).unwrap();
        let exact = survival(100, 0.5, 60).unwrap();
        assert!((c.approx - exact).abs() / exact < 0.10);
        // Cross-implementation regression value.
        assert_relative_eq!(
            carter_tail(100, 70).unwrap().approx,
            3.9018432172641896e-5,
            max_relative = 1e-12
        );
        let c = carter_tail(1000, 530).unwrap();
        assert!((c.approx - 0.03101159754918159).abs() / 0.03101159754918159 < 0.03);
        assert!(carter_tail(100, 50).is_err());
        assert!(carter_tail(100, 100).is_err());
        assert!(carter_tail(27, 20).is_err());
    }

    #[test]
    fn carter_gamma_series() {
        // Odd m, central k gives eps = 0 exactly.
        let c = carter_tail(101, 51).unwrap();
        assert_eq!(c.epsilon, 0.0);
        assert_relative_eq!(c.gamma_eps, 1.0 / 12.0, max_relative = 1e-15);
        // Closed form ((1+e)ln(1+e) + (1-e)ln(1-e) - e^2) / (2 e^4).
        assert_relative_eq!(
            carter_gamma(0.3),
            0.08648660806331496,
            max_relative = 1e-13
        );
        let c = carter_tail(1000, 900).unwrap();
        let e2 = c.epsilon * c.epsilon;
        assert!(c.gamma_eps >= 1.0 / 12.0 && c.gamma_eps <= 1.0 / (12.0 * (1.0 - e2)));
    }

    #[test]
    fn mckay_sandwich() {
        let b = mckay_bounds(100, 0.6, 70).unwrap();
        assert_relative_eq!(b.lower, 0.023735495806422716, max_relative = 1e-11);
        assert_relative_eq!(b.upper, 0.02623177969136488, max_relative = 1e-11);
        assert!(b.contains(0.024782823116493102));
        assert!(mckay_bounds(50, 0.5, 30)
            .unwrap()
            .contains(survival(50, 0.5, 30).unwrap()));
        assert!(mckay_bounds(100, 0.6, 60).is_err());
        // Ratio of the pair tends to 1 as m grows.
        let small = mckay_bounds(50, 0.5, 30).unwrap();
        let large = mckay_bounds(5000, 0.5, 2600).unwrap();
        assert!(large.upper / large.lower < small.upper / small.lower);
    }

    #[test]
    fn slud_lower_bound() {
        assert_eq!(slud_lower(100, 0.5, 50).unwrap(), 0.5);
        assert!(slud_lower(100, 0.5, 50).unwrap() <= 0.5397946186935894);
        assert_relative_eq!(
            slud_lower(100, 0.5, 40).unwrap(),
            0.9213503964748574,
            max_relative = 1e-12
        );
        assert!(slud_lower(100, 0.5, 40).unwrap() <= 0.9823998998911476);
        assert!(slud_lower(20, 0.7, 10).unwrap() <= 0.9828551835687416);
        assert!(slud_lower(100, 0.5, 51).is_err());
    }

    #[test]
    fn mills_ratio_bracket() {
        let b = mills_ratio_bounds(4, 0.5, 3).unwrap();
        assert_eq!((b.lower, b.upper), (0.75, 1.5));
        assert!(b.contains(1.25));
        let b = mills_ratio_bounds(100, 0.5, 60).unwrap();
        assert_eq!((b.lower, b.upper), (0.6, 3.0));
        assert!(b.contains(2.623046518080438));
        let b = mills_ratio_bounds(100, 0.3, 100).unwrap();
        assert_eq!((b.lower, b.upper), (1.0, 1.0));
        assert!(mills_ratio_bounds(100, 0.5, 50).is_err());
    }

    #[test]
    fn inv_survival_asymptotic_brackets_exact() {
        let cases: [(u64, f64, u64); 4] = [
            (10_000, 0.01, 5117),
            (10_000, 1e-4, 5187),
            (1_000_000, 1e-4, 501_861),
            (200_000, 1e-6, 101_064),
        ];
        for (m, y, exact) in cases {
            let b = inv_survival_asymptotic(m, y).unwrap();
            let k = exact as f64;
            assert!(b.lower - 1.0 <= k && k <= b.upper + 1.0, "m={m} y={y}");
            assert!(b.upper > m as f64 / 2.0);
        }
        assert!(inv_survival_asymptotic(10_000, 0.6).is_err());
        assert!(inv_survival_asymptotic(20, 0.01).is_err());
    }

    #[test]
    fn entropy_sandwich_cases() {
        // eps = 0.
        let b = entropy_sandwich(0.5, 0.0).unwrap();
        assert_eq!((b.lower, b.upper), (0.0, 0.0));

        // Positive eps: lower is exactly the Taylor center.
        let b = entropy_sandwich(0.5, 0.2).unwrap();
        assert_relative_eq!(b.lower, 2.0 * 0.04, max_relative = 1e-15);
        assert_relative_eq!(
            b.upper,
            0.08 + 8.0 * 0.008 * 0.4 / (3.0 * (1.0 - 0.16) * (1.0 - 0.16)),
            max_relative = 1e-14
        );
        assert!(b.contains(0.08228287850505185));

        // Small negative eps, above 1/2 - p.
        let b = entropy_sandwich(0.6, -0.05).unwrap();
        assert!(b.contains(entropy_t(0.55, 0.6).unwrap()));

        // Large negative eps, below 1/2 - p; the frozen value is T(0.3, 0.6).
        let b = entropy_sandwich(0.6, -0.3).unwrap();
        assert!(b.contains(0.18378689738681228));

        // A point where the uncorrected orientation of the negative-eps case
        // fails: here T(0.3, 0.5) exceeds the center 0.08.
        let b = entropy_sandwich(0.5, -0.2).unwrap();
        assert!(b.contains(entropy_t(0.3, 0.5).unwrap()));
        assert!(entropy_t(0.3, 0.5).unwrap() > 0.08);

        assert!(entropy_sandwich(0.5, 0.7).is_err());
        assert!(entropy_sandwich(0.6, -0.7).is_err());
        assert!(entropy_sandwich(0.4, 0.1).is_err());
    }
}
