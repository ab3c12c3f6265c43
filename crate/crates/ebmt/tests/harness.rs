//! Integration checks tying the Monte Carlo harness back to closed-form
//! ground truth: empirical null rejection rates against the exact
//! probabilities, concentration of the estimated weight inside its
//! calibration interval, and the error-rate ordering of the three mixture
//! procedures on a mid-strength slice.

use ebmt::config::{ExperimentConfig, ProcedureSpec};
use ebmt::rng::replicate_rng;
use ebmt::runner::{generate_scenario, run_experiment};
use ebmt_core::diagnostics::solve_weight_bounds;
use ebmt_core::model::mmle;
use ebmt_core::procedures::{decide, null_rejection_prob, Procedure};

/// With the weight held fixed, per-object null rejections are i.i.d.
/// Bernoulli with the exact closed-form probability; the empirical rate over
/// a large seeded draw must sit within three binomial standard errors.
#[test]
fn empirical_null_rejection_matches_exact_probability() {
    let (m, w, t) = (60u64, 0.1, 0.1);
    let replicates = 400u64;
    let n_per_rep = 50u64;

    // All-null scenarios concatenated into one dataset; with an overridden
    // weight the decision for each object depends on its count alone.
    let mut counts = Vec::new();
    for rep in 0..replicates {
        let mut rng = replicate_rng(0xAB5E_2024, 0, rep);
        let data = generate_scenario(n_per_rep, m, 0.0, 0.9, &mut rng).unwrap();
        counts.extend(data.counts);
    }
    let total = counts.len() as f64;
    let data = ebmt_core::model::CountsDataset::homogeneous(counts, m).unwrap();

    for procedure in [Procedure::Ell, Procedure::Cl, Procedure::Q] {
        let exact = null_rejection_prob(procedure, m, w, t).unwrap();
        let decision = decide(&data, procedure, t, Some(w)).unwrap();
        let hits = decision.reject.iter().filter(|&&r| r).count() as f64;
        let rate = hits / total;
        let se = (exact * (1.0 - exact) / total).sqrt();
        assert!(
            (rate - exact).abs() <= 3.0 * se + 1e-9,
            "{procedure}: empirical {rate} vs exact {exact} (se {se})"
        );
    }
}

/// The estimated weight lands inside the calibration interval [w2, w1]
/// (slack kappa = 0.5) in at least 95% of replicates for a clearly
/// estimable scenario.
#[test]
fn weight_estimate_concentrates_in_calibration_interval() {
    let (n, m, s_frac, theta0) = (2000u64, 200u64, 0.01, 0.95);
    let s = (s_frac * n as f64).round() as usize;
    let mut truth = vec![theta0; s];
    truth.extend(std::iter::repeat_n(0.5, n as usize - s));
    let (w1, w2) = solve_weight_bounds(&truth, m, 0.5).unwrap();
    let (w1, w2) = (w1.expect("upper root"), w2.expect("lower root"));
    assert!(w2 < w1);

    let replicates = 100u64;
    let mut inside = 0u64;
    for rep in 0..replicates {
        let mut rng = replicate_rng(0xC0CE_2024, 0, rep);
        let data = generate_scenario(n, m, s_frac, theta0, &mut rng).unwrap();
        let w_hat = mmle(&data).unwrap().w_hat;
        if (w2..=w1).contains(&w_hat) {
            inside += 1;
        }
    }
    assert!(
        inside >= 95,
        "only {inside} of {replicates} estimates inside [{w2}, {w1}]"
    );
}

/// On a mid-strength slice where all three procedures reject, their realized
/// FDR is ordered: the posterior rule is the most conservative, the
/// calibrated rule sits between it and the tail rule.
#[test]
fn fdr_ordering_on_mid_strength_slice() {
    let cfg = ExperimentConfig {
        n: 2000,
        m_values: vec![200],
        s_frac_values: vec![0.1],
        theta0_grid: vec![0.60, 0.64, 0.68, 0.72],
        t_levels: vec![0.1],
        procedures: vec![ProcedureSpec::Ell, ProcedureSpec::Cl, ProcedureSpec::Q],
        replicates: 60,
        master_seed: 0xF1D0,
    };
    let rows = run_experiment(&cfg).unwrap();
    let total_fdr = |name: &str| -> f64 {
        rows.iter()
            .filter(|r| r.procedure == name)
            .map(|r| r.fdr_mean)
            .sum()
    };
    let (ell, cl, q) = (total_fdr("ell"), total_fdr("cl"), total_fdr("q"));
    assert!(ell < cl, "FDR(ell) {ell} not below FDR(cl) {cl}");
    assert!(cl <= q, "FDR(cl) {cl} above FDR(q) {q}");
    assert!(q > 0.0, "slice produced no false discoveries at all");
}
