use chrono::NaiveDate;
use etm::simulate::{Moments, Stepper};
use etm::{EtmParams, Kernels, NigParams, PathState};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

proptest! {
    #[test]
    fn cross_kernel_obeys_cauchy_schwarz(kx in 1e-3f64..3.0, kt in 1e-3f64..3.0, delta in 1e-3f64..400.0) {
        let k = Kernels::new(kx, kt, delta);
        prop_assert!(k.kxt2 * k.kxt2 <= k.kx2 * k.kt2 * (1.0 + 1e-12));
        prop_assert!(k.kx2 > 0.0 && k.kt2 > 0.0 && k.kxt2 > 0.0);
        prop_assert!(k.rho() <= 1.0);
    }

    #[test]
    fn kernels_increase_with_lag(kx in 1e-3f64..3.0, kt in 1e-3f64..3.0, d in 1e-3f64..100.0, extra in 1e-3f64..100.0) {
        let a = Kernels::new(kx, kt, d);
        let b = Kernels::new(kx, kt, d + extra);
        prop_assert!(b.kx2 >= a.kx2 && b.kt2 >= a.kt2 && b.kxt2 >= a.kxt2);
        prop_assert!(b.kx2 <= 0.5 / kx + 1e-12);
    }

    #[test]
    fn residual_covariance_is_scaled_cross_kernel(lambda in -0.1f64..0.1, delta in 0.1f64..60.0) {
        let p = EtmParams::reference_france().with_lambda(lambda);
        let g = p.gaussian_pair_law(delta);
        let c = p.residual_covariance(delta);
        let want = lambda * p.sigma_t * p.sigma_t * g.cov[0][1];
        prop_assert!((c - want).abs() <= 1e-13 * want.abs().max(1e-300));
        prop_assert!((g.rho * g.rho + g.rho_complement * g.rho_complement - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rotating_the_anchor_with_the_levels_leaves_seasonality_unchanged(shift in 0u8..7, t in 0.0f64..2000.0) {
        let p = EtmParams::reference_france();
        let mut q = p.clone();
        q.dow_anchor = shift;
        for d in 0..7 {
            q.mu_x.dow[(d + shift as usize) % 7] = p.mu_x.dow[d];
        }
        prop_assert!((p.mu_x(t) - q.mu_x(t)).abs() < 1e-12);
    }

    #[test]
    fn parameter_file_round_trips(kx in 0.01f64..2.0, lambda in -0.05f64..0.05, alpha in 1.0f64..20.0, b in -0.7f64..0.7) {
        let mut p = EtmParams::reference_france();
        p.kappa_x = kx;
        p.lambda = lambda;
        p.nig = NigParams::centered(alpha, b * alpha, 0.3).unwrap();
        let q = EtmParams::from_config_str(&p.to_config_string()).unwrap();
        prop_assert_eq!(p, q);
    }
}

#[test]
fn daily_kernels_of_the_reference_model() {
    let k = EtmParams::reference_france().kernels(1.0);
    assert!((k.kt() - 0.88547).abs() < 5e-6, "kT {}", k.kt());
    assert!((k.kxt2 - 0.794202).abs() < 1e-6, "kXT² {}", k.kxt2);
    let (slope, resid) = EtmParams::reference_france().conditional_projection(1.0);
    assert!((slope - 1.0130).abs() < 5e-4, "slope {slope}");
    assert!(resid >= 0.0);
}

#[test]
fn calendar_windows() {
    let p = EtmParams::reference_france();
    assert_eq!(p.month_window(2018, 1).unwrap(), (1092, 1122));
    assert_eq!(p.month_window(2018, 5).unwrap(), (1212, 1242));
    assert_eq!(p.date_at(0), NaiveDate::from_ymd_opt(2015, 1, 5).unwrap());
    assert!(p.month_window(2018, 13).is_err());
}

#[test]
fn one_step_residuals_have_the_model_covariance() {
    let p = EtmParams::reference_france().with_lambda(-0.05);
    let st = Stepper::new(&p, 1.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let s0 = PathState::on_mean(&p, 400.0);
    let n = 1_000_000;
    let (mut mx, mut mt) = (Moments::default(), Moments::default());
    let mut prods = Vec::with_capacity(n);
    for _ in 0..n {
        let s1 = st.step(&s0, &mut rng);
        let (rx, rt) = (s1.x - p.mu_x(401.0), s1.temp - p.mu_t(401.0));
        mx.push(rx);
        mt.push(rt);
        prods.push(rx * rt);
    }
    let mut mp = Moments::default();
    prods.iter().for_each(|&v| mp.push(v));
    let target = p.residual_covariance(1.0);
    let cov = mp.mean - mx.mean * mt.mean;
    assert!((cov - target).abs() < 4.0 * mp.sd() / (n as f64).sqrt(), "cov {cov} vs {target}");
    let kt = p.kernels(1.0).kt();
    assert!((mt.sd() / (p.sigma_t * kt) - 1.0).abs() < 0.005);
}
