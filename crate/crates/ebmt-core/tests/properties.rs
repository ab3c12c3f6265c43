//! Randomized invariant checks across the numeric stack: distribution
//! identities, bound containment on valid domains, threshold/decision
//! consistency, and solver monotonicity.

use ebmt_core::binom::{cdf, entropy_t, inv_survival, pmf, survival};
use ebmt_core::bounds::{
    carter_tail, chernoff_tail, entropy_sandwich, inv_survival_asymptotic, mckay_bounds,
    mills_ratio_bounds, slud_lower, tail_sandwich,
};
use ebmt_core::diagnostics::{m1, m_tilde};
use ebmt_core::model::{
    cl_value, l_value, mmle, q_value, q_value_with, CountsDataset, TailConvention,
};
use ebmt_core::procedures::{bh_decide, decide, Procedure};
use ebmt_core::thresholds::{eta_cl, eta_l, eta_q_with, threshold_set, ClampStatus, QLattice};
use proptest::prelude::*;

proptest! {
    #[test]
    fn pmf_sums_to_one(m in 1u64..400, theta in 0.01f64..0.99) {
        let total: f64 = (0..=m).map(|x| pmf(m, theta, x).unwrap()).sum();
        prop_assert!((total - 1.0).abs() < 1e-10);
    }

    #[test]
    fn survival_decrements_by_pmf(m in 1u64..2000, theta in 0.01f64..0.99, frac in 0.0f64..1.0) {
        let k = (frac * m as f64) as u64;
        let lhs = survival(m, theta, k).unwrap() - survival(m, theta, k + 1).unwrap();
        let rhs = pmf(m, theta, k).unwrap();
        // The absolute floor covers cancellation when both survivals are
        // near 1 and the pmf is tiny.
        prop_assert!((lhs - rhs).abs() <= 1e-9 * rhs + 1e-13);
    }

    #[test]
    fn cdf_complements_survival(m in 1u64..2000, theta in 0.01f64..0.99, frac in 0.0f64..1.0) {
        let k = (frac * m as f64) as i64;
        let total = cdf(m, theta, k).unwrap() + survival(m, theta, k as u64 + 1).unwrap();
        prop_assert!((total - 1.0).abs() < 1e-10);
    }

    #[test]
    fn tail_inversion_round_trip(m in 2u64..5000, theta in 0.05f64..0.95, y in 1e-8f64..0.999) {
        let k = inv_survival(m, theta, y).unwrap();
        // Smallest k whose tail has dropped to y.
        prop_assert!(survival(m, theta, k).unwrap() <= y * (1.0 + 1e-8));
        if k > 0 {
            prop_assert!(survival(m, theta, k - 1).unwrap() > y * (1.0 - 1e-8));
        }
    }

    #[test]
    fn statistics_symmetric_and_folded(m in 2u64..300, x in 0u64..301, w in 0.01f64..0.99) {
        let x = x.min(m);
        for f in [l_value, cl_value, q_value] {
            let a = f(m, x, w).unwrap();
            let b = f(m, m - x, w).unwrap();
            prop_assert!((a - b).abs() <= 1e-12 * a.max(1e-300));
            prop_assert!((0.0..=1.0).contains(&a));
        }
        // Exclusive slab tails are smaller, so the null posterior is larger.
        prop_assert!(
            q_value_with(m, x, w, TailConvention::Exclusive).unwrap()
                >= q_value(m, x, w).unwrap() - 1e-12
        );
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    // Rejecting by statistic value and rejecting by folded-count threshold
    // are the same decision, for all three statistics.
    #[test]
    fn decisions_match_thresholds(m in 4u64..300, w in 0.02f64..0.9, t in 0.02f64..0.9) {
        let s = match threshold_set(m, w, t) {
            Ok(s) => s,
            // Tiny m with tiny w can make the xi equation unsolvable; the
            // thresholds themselves are exercised by other samples.
            Err(_) => return Ok(()),
        };
        let half = m as f64 / 2.0;
        for x in 0..=m {
            let fold = (x as f64 - half).abs();
            for (stat, thr) in [
                (l_value(m, x, w).unwrap(), s.t_l),
                (cl_value(m, x, w).unwrap(), s.t_cl),
                (q_value(m, x, w).unwrap(), s.t_q),
            ] {
                let boundary = m as f64 * thr;
                if (fold - boundary).abs() <= 1e-9 * m as f64 {
                    continue;
                }
                prop_assert_eq!(stat <= t, fold >= boundary);
            }
        }
    }
}

proptest! {
    // The posterior rejections are always covered by the calibrated ones
    // (pointwise algebra); the calibrated ones are covered by the tail ones
    // in the moderate regime (the inclusion can fail at the extreme count
    // for single-digit m).
    #[test]
    fn rejection_nesting(m in 50u64..300, w in 0.01f64..0.3, t in 0.05f64..0.3) {
        let d = CountsDataset::homogeneous((0..=m).collect(), m).unwrap();
        let ell = decide(&d, Procedure::Ell, t, Some(w)).unwrap();
        let cl = decide(&d, Procedure::Cl, t, Some(w)).unwrap();
        let q = decide(&d, Procedure::Q, t, Some(w)).unwrap();
        for j in 0..d.len() {
            prop_assert!(!ell.reject[j] || cl.reject[j]);
            prop_assert!(!cl.reject[j] || q.reject[j]);
        }
    }

    #[test]
    fn ell_within_cl_any_scale(m in 2u64..500, w in 0.01f64..0.99, t in 0.01f64..0.99) {
        let d = CountsDataset::homogeneous((0..=m).collect(), m).unwrap();
        let ell = decide(&d, Procedure::Ell, t, Some(w)).unwrap();
        let cl = decide(&d, Procedure::Cl, t, Some(w)).unwrap();
        for j in 0..d.len() {
            prop_assert!(!ell.reject[j] || cl.reject[j]);
        }
    }

    // The strict lattice is the inclusive lattice shifted one node left, so
    // interior inversions off the terminal segment differ by exactly 1/m.
    #[test]
    fn lattice_shift_identity(m in 8u64..500, u in 1e-6f64..2.0) {
        let strict = eta_q_with(m, u, QLattice::Strict).unwrap();
        if strict.status == ClampStatus::Interior && strict.value * m as f64 <= (m - 1) as f64 {
            let incl = eta_q_with(m, u, QLattice::Inclusive).unwrap();
            prop_assert_eq!(incl.status, ClampStatus::Interior);
            prop_assert!((incl.value - strict.value - 1.0 / m as f64).abs() < 1e-9);
        }
    }

    #[test]
    fn moments_monotone_in_weight(m in 2u64..200, theta in 0.55f64..0.95,
                                  w1 in 0.02f64..0.5, w2 in 0.5f64..0.99) {
        prop_assert!(m_tilde(m, w1).unwrap() <= m_tilde(m, w2).unwrap() + 1e-12);
        prop_assert!(m1(m, theta, w1).unwrap() >= m1(m, theta, w2).unwrap() - 1e-12);
    }

    #[test]
    fn mmle_flags_consistent(m in 4u64..60, counts in prop::collection::vec(0u64..61, 2..40)) {
        let counts: Vec<u64> = counts.into_iter().map(|x| x.min(m)).collect();
        let n = counts.len();
        let d = CountsDataset::homogeneous(counts, m).unwrap();
        let est = mmle(&d).unwrap();
        if est.at_lower_boundary {
            prop_assert!((est.w_hat - 1.0 / n as f64).abs() < 1e-15);
            prop_assert!(est.score_at_w <= 0.0);
        } else if est.at_upper_boundary {
            prop_assert_eq!(est.w_hat, 1.0);
            prop_assert!(est.score_at_w >= 0.0);
        } else {
            prop_assert!(est.score_at_w.abs() <= 1e-8 * n as f64);
            prop_assert!(est.w_hat > 1.0 / n as f64 && est.w_hat < 1.0);
        }
    }

    #[test]
    fn step_up_permutation_invariant(counts in prop::collection::vec(0u64..21, 2..30),
                                     rot in 0usize..29, t in 0.02f64..0.5) {
        let n = counts.len();
        let rot = rot % n;
        let mut rotated = counts.clone();
        rotated.rotate_left(rot);
        let d = CountsDataset::homogeneous(counts, 20).unwrap();
        let d_rot = CountsDataset::homogeneous(rotated, 20).unwrap();
        let base = bh_decide(&d, t).unwrap();
        let perm = bh_decide(&d_rot, t).unwrap();
        for j in 0..n {
            prop_assert_eq!(base.reject[(j + rot) % n], perm.reject[j]);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn chernoff_and_sandwich_contain_tails(m in 30u64..3000, theta in 0.5f64..0.9,
                                           frac in 0.0f64..1.0) {
        let k_lo = (m as f64 * theta).ceil() as u64 + 1;
        let k_hi = m - (m as f64).sqrt().ceil().max(3.0) as u64;
        prop_assume!(k_lo < k_hi);
        let k = k_lo + (frac * (k_hi - k_lo) as f64) as u64;
        let a = k as f64 / m as f64;
        let exact = survival(m, theta, k).unwrap();
        let cb = chernoff_tail(m, a, theta).unwrap();
        prop_assert!(exact <= cb * (1.0 + 1e-11));
        let sandwich = tail_sandwich(m, a, theta).unwrap();
        prop_assert!(sandwich.lower <= exact * (1.0 + 1e-11));
        prop_assert!(exact <= sandwich.upper * (1.0 + 1e-11));
    }

    #[test]
    fn carter_tracks_exact(m in 28u64..2048, frac in 0.0f64..1.0) {
        let mf = m as f64;
        // Offsets between 2/sqrt(m) and 0.9 on the internal grid.
        let k_lo = ((mf + 1.0) / 2.0 + (mf - 1.0) / mf.sqrt()).ceil() as u64;
        let k_hi = ((0.95 * (mf - 1.0)) as u64 + 1).min(m - 1);
        prop_assume!(k_lo <= k_hi && 2 * k_lo > m);
        let k = k_lo + (frac * (k_hi - k_lo) as f64) as u64;
        let exact = survival(m, 0.5, k).unwrap();
        prop_assume!(exact > 1e-290);
        let c = carter_tail(m, k).unwrap();
        prop_assert!((c.approx - exact).abs() / exact <= 0.10,
            "m={} k={} approx={} exact={}", m, k, c.approx, exact);
    }

    #[test]
    fn gaussian_comparison_bounds(m in 20u64..2000, theta in 0.1f64..0.9, frac in 0.0f64..1.0) {
        let k_lo = (m as f64 * theta).floor() as u64 + 1;
        prop_assume!(k_lo <= m && k_lo as f64 > m as f64 * theta);
        let k = k_lo + (frac * (m - k_lo) as f64) as u64;
        let exact = survival(m, theta, k).unwrap();

        let mk = mckay_bounds(m, theta, k).unwrap();
        prop_assert!(mk.lower <= exact * (1.0 + 1e-9));
        prop_assert!(exact <= mk.upper * (1.0 + 1e-9));

        let p = pmf(m, theta, k).unwrap();
        prop_assume!(p > 1e-290);
        let ratio = exact / p;
        let mills = mills_ratio_bounds(m, theta, k).unwrap();
        prop_assert!(mills.lower <= ratio * (1.0 + 1e-9));
        prop_assert!(ratio <= mills.upper * (1.0 + 1e-9));
    }

    #[test]
    fn slud_stays_below_tail(m in 1u64..2000, theta in 0.1f64..0.9, frac in 0.0f64..1.0) {
        let k_hi = (m as f64 * theta).floor() as u64;
        let k = (frac * k_hi as f64) as u64;
        let exact = survival(m, theta, k).unwrap();
        prop_assert!(slud_lower(m, theta, k).unwrap() <= exact * (1.0 + 1e-12));
    }

    #[test]
    fn inverse_tail_bracket(m in 28u64..100_000, y in 1e-9f64..0.49) {
        let b = inv_survival_asymptotic(m, y).unwrap();
        let exact = inv_survival(m, 0.5, y).unwrap() as f64;
        prop_assert!(b.lower - 1.0 <= exact && exact <= b.upper + 1.0,
            "m={} y={} exact={} bracket=[{}, {}]", m, y, exact, b.lower, b.upper);
    }

    // Sample the perturbed point first so the offset is exactly
    // representable, then check the envelope against the exact entropy.
    #[test]
    fn entropy_envelope_contains(p in 0.5f64..0.95, x in 0.001f64..0.999) {
        prop_assume!((x - p).abs() > 1e-9);
        let eps = x - p;
        let envelope = entropy_sandwich(p, eps).unwrap();
        let h = entropy_t(x, p).unwrap();
        let tol = 1e-13 * (h.abs() + eps.abs());
        prop_assert!(envelope.lower - tol <= h && h <= envelope.upper + tol,
            "p={} eps={} h={} bracket=[{}, {}]", p, eps, h, envelope.lower, envelope.upper);
    }
}

// The lattice on which the three-way ordering holds at every finite m is the
// strictly-open one; checked on the canonical size ladder with a fixed grid.
#[test]
fn eta_ordering_on_grid() {
    for m in [8u64, 16, 30, 64, 128, 1000] {
        for i in 1..=50 {
            let u = i as f64 / 51.0;
            let q = eta_q_with(m, u, QLattice::Strict).unwrap().value;
            let cl = eta_cl(m, u).unwrap().value;
            let l = eta_l(m, u).unwrap().value;
            assert!(q <= cl, "m={m} u={u}: {q} > {cl}");
            assert!(cl <= l, "m={m} u={u}: {cl} > {l}");
        }
    }
}
