use etm::estimate::{
    dependence_diagnostics, estimate_params, fit_drift_t, fit_drift_x, fit_nig_mle_init, nig_cls_objective, DriftFitX,
    EstimateOptions, DEFAULT_U_GRID,
};
use etm::validation::synthetic_series;
use etm::{CfContext, EtmParams};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

fn rmse(xs: &[f64], truth: f64) -> f64 {
    (xs.iter().map(|x| (x - truth).powi(2)).sum::<f64>() / xs.len() as f64).sqrt()
}

#[test]
fn reversion_speeds_are_consistent() {
    let p = EtmParams::reference_france();
    let fit = |days: usize| {
        let mut kx = Vec::new();
        let mut kt = Vec::new();
        for r in 0..20 {
            let s = synthetic_series(&p, days, r, 71).unwrap();
            kx.push(fit_drift_x(&s).unwrap().kappa);
            kt.push(fit_drift_t(&s).unwrap().kappa);
        }
        (rmse(&kx, p.kappa_x), rmse(&kt, p.kappa_t))
    };
    let (a, b) = (fit(2_500), fit(10_000));
    // quadrupling the sample should roughly halve the error
    assert!(b.0 < 0.75 * a.0, "kappa_x rmse {} -> {}", a.0, b.0);
    assert!(b.1 < 0.75 * a.1, "kappa_t rmse {} -> {}", a.1, b.1);
}

#[test]
fn fitted_values_reconstruct_the_series() {
    let p = EtmParams::reference_france();
    let s = synthetic_series(&p, 1_500, 0, 72).unwrap();
    let fit = fit_drift_x(&s).unwrap();
    let off = s.offsets();
    for (r, &k) in s.transitions().iter().enumerate() {
        let reg = DriftFitX::regressor(off[k] as f64, s.x[k]);
        let f: f64 = reg.iter().zip(&fit.eta).map(|(a, b)| a * b).sum();
        assert!((f - fit.fitted[r]).abs() < 1e-12 * f.abs().max(1.0));
        assert!((fit.fitted[r] + fit.residuals[r] - s.x[k + 1]).abs() < 1e-12 * s.x[k + 1].abs().max(1.0));
    }
    let back = DriftFitX::eta_from(fit.kappa, fit.beta0, fit.alpha1, fit.beta1, &fit.dow_offset);
    for j in 0..11 {
        assert!((back[j] - fit.eta[j]).abs() < 1e-9, "eta[{j}]");
    }
}

#[test]
fn uncoupled_objective_ignores_the_temperature_scale() {
    let p = EtmParams::reference_france();
    let ctx = CfContext::new(p.clone());
    let s = synthetic_series(&p, 1_000, 1, 73).unwrap();
    let res = fit_drift_x(&s).unwrap().residuals;
    let a = nig_cls_objective(&p.nig, 0.0, &res, p.kappa_x, p.sigma_t, &DEFAULT_U_GRID, &ctx).unwrap();
    let b = nig_cls_objective(&p.nig, 0.0, &res, p.kappa_x, 0.0, &DEFAULT_U_GRID, &ctx).unwrap();
    let c = nig_cls_objective(&p.nig, -0.3, &res, p.kappa_x, 0.0, &DEFAULT_U_GRID, &ctx).unwrap();
    assert_eq!(a, b);
    assert_eq!(a, c);
}

#[test]
fn independent_residuals_pass_the_rank_test() {
    let mut rng = ChaCha8Rng::seed_from_u64(74);
    let mut ok = 0;
    for _ in 0..50 {
        let a: Vec<f64> = (0..2_000).map(|_| StandardNormal.sample(&mut rng)).collect();
        let b: Vec<f64> = (0..2_000).map(|_| StandardNormal.sample(&mut rng)).collect();
        let d = dependence_diagnostics(&a, &b, 3).unwrap();
        assert_eq!(d.dof, 4);
        assert_eq!(d.table.iter().flatten().sum::<u64>(), 2_000);
        if d.p_value > 0.01 {
            ok += 1;
        }
    }
    assert!(ok >= 48, "{ok}/50 replicates above 0.01");
}

#[test]
fn dependent_residuals_fail_the_rank_test() {
    let mut rng = ChaCha8Rng::seed_from_u64(75);
    let a: Vec<f64> = (0..2_000).map(|_| StandardNormal.sample(&mut rng)).collect();
    let b: Vec<f64> = a.iter().map(|x| { let e: f64 = StandardNormal.sample(&mut rng); 0.3 * x + e }).collect();
    assert!(dependence_diagnostics(&a, &b, 3).unwrap().p_value < 1e-6);
}

#[test]
fn likelihood_fit_recovers_nig_samples() {
    let p = EtmParams::reference_france().nig;
    let mut rng = ChaCha8Rng::seed_from_u64(76);
    let xs = p.sample(&mut rng, 200_000);
    let fit = fit_nig_mle_init(&xs, 0.0).unwrap();
    assert!(!fit.fallback);
    let (m, w) = (fit.params.moments(), p.moments());
    assert!((m.variance / w.variance - 1.0).abs() < 0.02, "variance {} vs {}", m.variance, w.variance);
    assert!((fit.params.alpha() / p.alpha() - 1.0).abs() < 0.05, "alpha {}", fit.params.alpha());
    assert!((fit.params.delta() / p.delta() - 1.0).abs() < 0.05, "delta {}", fit.params.delta());
}

#[test]
fn full_pipeline_recovers_a_strong_coupling() {
    let p = EtmParams::reference_france().with_lambda(-0.05);
    let s = synthetic_series(&p, 6_000, 2, 77).unwrap();
    let (q, report) = estimate_params(&s, &EstimateOptions::default()).unwrap();
    assert!(report.nig_cls_converged);
    assert!((q.lambda - p.lambda).abs() < 0.015, "lambda {}", q.lambda);
    assert!(report.dependence.p_value < 0.01);
    assert_eq!(q.epoch, p.epoch);
}
