use etm::quadrature::{integrate, QuadConfig};
use etm::validation::{kolmogorov_sf, ks_statistic};
use etm::{EtmParams, NigParams};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn france() -> NigParams {
    EtmParams::reference_france().nig
}

proptest! {
    #[test]
    fn symmetric_law_has_even_density(alpha in 1.0f64..80.0, delta in 0.05f64..3.0, x in -2.0f64..2.0) {
        let p = NigParams::new(alpha, 0.0, delta, 0.0).unwrap();
        let (a, b) = (p.pdf(x), p.pdf(-x));
        prop_assert!((a - b).abs() <= 1e-12 * a.max(1e-300));
    }

    #[test]
    fn density_integrates_to_one(alpha in 2.0f64..60.0, b in -0.8f64..0.8, delta in 0.1f64..2.0) {
        let p = NigParams::centered(alpha, b * alpha, delta).unwrap();
        let sd = p.moments().variance.sqrt();
        let q = QuadConfig { abs_tol: 1e-12, rel_tol: 1e-10, max_subdivisions: 2000 };
        let mass = integrate(|x| p.pdf(x), -60.0 * sd, 60.0 * sd, &q).unwrap().value;
        prop_assert!((mass - 1.0).abs() < 1e-6, "mass {}", mass);
    }

    #[test]
    fn cumulant_vanishes_at_zero_and_is_hermitian(alpha in 2.0f64..60.0, b in -0.8f64..0.8, delta in 0.1f64..2.0, u in -20.0f64..20.0) {
        let p = NigParams::centered(alpha, b * alpha, delta).unwrap();
        prop_assert!(p.cumulant(Complex64::new(0.0, 0.0)).norm() < 1e-14);
        let c = p.cf(u);
        let d = p.cf(-u);
        prop_assert!((c - d.conj()).norm() < 1e-12);
        prop_assert!(c.norm() <= 1.0 + 1e-12);
    }
}

#[test]
fn empirical_cf_matches_cumulant() {
    let p = france();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let n = 1_000_000;
    let xs = p.sample(&mut rng, n);
    for k in -10..=10 {
        let u = 0.5 * k as f64;
        let (mut re, mut im, mut re2, mut im2) = (0.0, 0.0, 0.0, 0.0);
        for &x in &xs {
            let (s, c) = (u * x).sin_cos();
            re += c;
            im += s;
            re2 += c * c;
            im2 += s * s;
        }
        let nf = n as f64;
        let (re, im) = (re / nf, im / nf);
        let se_re = ((re2 / nf - re * re) / nf).sqrt().max(1e-12);
        let se_im = ((im2 / nf - im * im) / nf).sqrt().max(1e-12);
        let model = p.cf(u);
        assert!((re - model.re).abs() < 4.0 * se_re, "Re at u={u}: {re} vs {}", model.re);
        assert!((im - model.im).abs() < 4.0 * se_im, "Im at u={u}: {im} vs {}", model.im);
    }
}

#[test]
fn samples_pass_kolmogorov_smirnov() {
    let p = france();
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let n = 100_000;
    let mut xs = p.sample(&mut rng, n);
    let d = ks_statistic(&p, &mut xs).unwrap();
    let pval = kolmogorov_sf((n as f64).sqrt() * d);
    assert!(pval > 0.001, "KS D={d}, p={pval}");
}

#[test]
fn sample_moments_match() {
    let p = france();
    let m = p.moments();
    assert!((m.variance - 0.0302).abs() < 5e-4, "variance {}", m.variance);
    assert!(m.mean.abs() < 1e-14);
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let xs = p.sample(&mut rng, 1_000_000);
    let mut acc = etm::simulate::Moments::default();
    xs.iter().for_each(|&x| acc.push(x));
    assert!((acc.variance() / m.variance - 1.0).abs() < 0.02);
    assert!((acc.skewness() / m.skewness - 1.0).abs() < 0.1, "skew {} vs {}", acc.skewness(), m.skewness);
}

#[test]
fn infeasible_parameters_are_rejected() {
    assert!(NigParams::new(1.0, 1.0, 0.5, 0.0).is_err());
    assert!(NigParams::new(1.0, 0.2, -0.5, 0.0).is_err());
    assert!(NigParams::new(-1.0, 0.0, 0.5, 0.0).is_err());
}
