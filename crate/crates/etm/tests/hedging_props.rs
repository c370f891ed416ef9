use chrono::{Datelike, Weekday};
use etm::hedging::{ehdd_hedge_coeffs, lambda_misspecification_study, pnl_study, HedgeCoefficients, HedgeSystem, HedgeTarget};
use etm::pricing::TruncationBounds;
use etm::simulate::simulate_window;
use etm::{CfContext, EtmParams, McEngine, PathState};
use nalgebra::{Matrix3, Vector3};

fn france() -> (EtmParams, CfContext) {
    let p = EtmParams::reference_france();
    let ctx = CfContext::matched(p.clone());
    (p, ctx)
}

#[test]
fn gram_matrices_are_positive_definite_all_year() {
    let (p, ctx) = france();
    for month in 1..=12 {
        let (t1, t2) = p.month_window(2018, month).unwrap();
        for target in [HedgeTarget::Ehdd, HedgeTarget::Quanto] {
            let c = HedgeCoefficients::compute(target, &ctx, t1, t2, 50.0, 18.0).unwrap();
            for (k, s) in c.systems.iter().enumerate() {
                assert!(s.min_eigenvalue() > 0.0, "{target:?} month {month} day {k}: {:?}", s.gram);
                assert!(s.relative_residual() < 1e-10);
            }
        }
    }
}

#[test]
fn hedging_never_increases_dispersion() {
    let (p, ctx) = france();
    let engine = McEngine::new(20_000, 41);
    for month in [1, 5] {
        let (t1, t2) = p.month_window(2018, month).unwrap();
        for target in [HedgeTarget::Ehdd, HedgeTarget::Quanto] {
            let c = HedgeCoefficients::compute(target, &ctx, t1, t2, 50.0, 18.0).unwrap();
            let r = pnl_study(&c, &p, &engine).unwrap();
            assert!(r.hedged.sd < r.unhedged.sd, "{target:?} month {month}: {} vs {}", r.hedged.sd, r.unhedged.sd);
        }
    }
}

#[test]
fn ehdd_residual_is_orthogonal_to_the_instruments() {
    let (p, ctx) = france();
    let t0 = 1062.0;
    let s0 = PathState::on_mean(&p, t0);
    let t_bar = 18.0;
    let sys = ehdd_hedge_coeffs(&ctx, s0, 30.0, t_bar, &TruncationBounds::default()).unwrap();
    let c = sys.solution;
    let engine = McEngine::new(100_000, 43);
    let mc = simulate_window(s0, &p, 30, &engine, 3, |path, out| {
        let (s, t) = (path[30].price(), path[30].temp);
        let h = (t_bar - t).max(0.0);
        let resid = s * h - c[0] - c[1] * h - c[2] * s;
        out[0] = resid;
        out[1] = resid * h;
        out[2] = resid * s;
    })
    .unwrap();
    for (k, r) in mc.iter().enumerate() {
        assert!(r.z_score(0.0).abs() < 3.5, "moment {k}: {:?}", r);
    }
}

#[test]
fn uncoupled_quanto_hedge_is_the_regression_slope() {
    // At λ = 0 the cross moments are exact products, so the Gram solution is the
    // population regression of the payoff on (1, hdd, call).
    let p = EtmParams::reference_france().with_lambda(0.0);
    let ctx = CfContext::matched(p.clone());
    let (s_bar, t_bar) = (50.0, 18.0);
    let s0 = PathState::on_mean(&p, 1062.0);
    let sys = etm::hedging::quanto_hedge_coeffs(&ctx, s0, 30.0, s_bar, t_bar, &Default::default()).unwrap();
    let engine = McEngine::new(200_000, 47);
    let rows = engine
        .collect(2, |_, rng, out| {
            let st = etm::simulate::Stepper::new(&p, 1.0).unwrap();
            let path = etm::simulate::trajectory(&st, s0, 30, rng);
            out[0] = (path[30].price() - s_bar).max(0.0);
            out[1] = (t_bar - path[30].temp).max(0.0);
        })
        .unwrap();
    let mut xtx = Matrix3::zeros();
    let mut xty = Vector3::zeros();
    for r in &rows {
        let x = Vector3::new(1.0, r[1], r[0]);
        xtx += x * x.transpose();
        xty += x * (r[0] * r[1]);
    }
    let inv = xtx.try_inverse().unwrap();
    let beta = inv * xty;
    let mut meat = Matrix3::zeros();
    for r in &rows {
        let x = Vector3::new(1.0, r[1], r[0]);
        let e = r[0] * r[1] - x.dot(&beta);
        meat += x * x.transpose() * (e * e);
    }
    let cov = inv * meat * inv;
    for j in 0..3 {
        let se = cov[(j, j)].sqrt();
        assert!((beta[j] - sys.solution[j]).abs() < 3.5 * se, "coef {j}: ols {} ± {se}, gram {}", beta[j], sys.solution[j]);
    }
}

#[test]
fn zero_hedge_leaves_the_pnl_unchanged() {
    let (p, _) = france();
    let (t1, t2) = p.month_window(2018, 1).unwrap();
    let c = HedgeCoefficients::zero(HedgeTarget::Ehdd, t1, t2, 50.0, 18.0);
    let r = pnl_study(&c, &p, &McEngine::new(2_000, 3)).unwrap();
    assert_eq!(r.hedged, r.unhedged);
}

#[test]
fn misspecification_is_void_without_coupling() {
    let p = EtmParams::reference_france().with_lambda(0.0);
    let ctx = CfContext::matched(p.clone());
    let (t1, t2) = p.month_window(2018, 5).unwrap();
    let r = lambda_misspecification_study(HedgeTarget::Ehdd, &ctx, t1, t2, 50.0, 18.0, &McEngine::new(2_000, 5)).unwrap();
    assert_eq!(r.true_lambda, r.zero_lambda);
}

#[test]
fn january_coefficients_follow_the_week() {
    let (p, ctx) = france();
    let (t1, t2) = p.month_window(2018, 1).unwrap();
    for target in [HedgeTarget::Ehdd, HedgeTarget::Quanto] {
        let c = HedgeCoefficients::compute(target, &ctx, t1, t2, 50.0, 18.0).unwrap();
        let (mut weekend, mut weekday) = (Vec::new(), Vec::new());
        for (k, s) in c.systems.iter().enumerate() {
            assert!(s.solution[1] > 0.0 && s.solution[2] > 0.0, "{target:?} day {k}: {:?}", s.solution);
            let wd = p.date_at(t1 + k as i64).weekday();
            if matches!(wd, Weekday::Sat | Weekday::Sun) {
                weekend.push(s.solution[1]);
            } else {
                weekday.push(s.solution[1]);
            }
        }
        let max_weekend = weekend.iter().copied().fold(f64::MIN, f64::max);
        let min_weekday = weekday.iter().copied().fold(f64::MAX, f64::min);
        assert!(max_weekend < min_weekday, "{target:?}: weekend {max_weekend} vs weekday {min_weekday}");
        if target == HedgeTarget::Ehdd {
            // the price leg carries no weekday effect: it only drifts with the horizon
            assert!(c.systems.windows(2).all(|w| w[1].solution[2] > w[0].solution[2]));
        }
    }
}

#[test]
fn solver_rejects_bad_systems() {
    assert!(HedgeSystem::solve([[1.0, 2.0, 3.0], [2.0, 4.0, 6.0], [3.0, 6.0, 9.0]], [1.0, 2.0, 3.0]).is_err());
    assert!(HedgeSystem::solve([[1.0, 0.5, 0.0], [0.4, 1.0, 0.0], [0.0, 0.0, 1.0]], [1.0, 1.0, 1.0]).is_err());
}
