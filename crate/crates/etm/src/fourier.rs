//! Transform pricing from a conditional log-price characteristic function: damped
//! call (Carr–Madan), squared call and the Gil-Pelaez tail probability.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{EtmError, Result};
use crate::quadrature::{integrate, QuadConfig};

/// Characteristic function of the log-price, `u ↦ E[e^{iuX}]`, possibly at complex `u`.
pub trait LogPriceCf: Sync {
    fn eval(&self, u: Complex64) -> Result<Complex64>;
}

impl<F: Fn(Complex64) -> Result<Complex64> + Sync> LogPriceCf for F {
    fn eval(&self, u: Complex64) -> Result<Complex64> {
        self(u)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct TransformConfig {
    pub damping: f64,
    /// Truncate the frequency axis once the integrand modulus drops below this.
    pub envelope_tol: f64,
    pub v_cap: f64,
    pub quad: QuadConfig,
}

impl Default for TransformConfig {
    fn default() -> Self {
        TransformConfig {
            damping: 0.5,
            envelope_tol: 1e-12,
            v_cap: 1e4,
            quad: QuadConfig { abs_tol: 1e-11, rel_tol: 1e-11, max_subdivisions: 4000 },
        }
    }
}

impl TransformConfig {
    pub fn with_damping(mut self, a: f64) -> Self {
        self.damping = a;
        self
    }
}

/// Integrate `Re f` on `[0, V*]`, with `V*` the first doubling point where `|f|` falls
/// below the envelope tolerance.
fn semi_infinite<F: Fn(f64) -> Result<Complex64>>(f: F, cfg: &TransformConfig) -> Result<f64> {
    let mut v_star = 8.0;
    loop {
        let env = f(v_star)?.norm();
        if env < cfg.envelope_tol {
            break;
        }
        if v_star >= cfg.v_cap {
            if env < 1e3 * cfg.envelope_tol {
                break;
            }
            return Err(EtmError::Integration(format!("integrand still {env:e} at the frequency cap {}", cfg.v_cap)));
        }
        v_star = (v_star * 2.0).min(cfg.v_cap);
    }
    let mut failure = None;
    let r = integrate(
        |v| match f(v) {
            Ok(z) => z.re,
            Err(e) => {
                failure.get_or_insert(e);
                0.0
            }
        },
        0.0,
        v_star,
        &cfg.quad,
    )?;
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(r.value)
}

fn check_damping(a: f64) -> Result<()> {
    if a > 0.0 && a.is_finite() {
        Ok(())
    } else {
        Err(EtmError::Usage(format!("damping must be positive, got {a}")))
    }
}

/// `E[(S − S̄)⁺]` with `S = e^X`.
pub fn call_price(cf: &dyn LogPriceCf, s_bar: f64, cfg: &TransformConfig) -> Result<f64> {
    check_damping(cfg.damping)?;
    let a = cfg.damping;
    let k = s_bar.ln();
    let i = Complex64::i();
    let integrand = |v: f64| -> Result<Complex64> {
        let psi = cf.eval(Complex64::new(v, -(a + 1.0)))?;
        let den = Complex64::new(a * a + a - v * v, (2.0 * a + 1.0) * v);
        Ok((-i * k * v).exp() * psi / den)
    };
    let value = (-a * k).exp() / PI * semi_infinite(integrand, cfg)?;
    nonnegative(value, "call price")
}

/// `E[((S − S̄)⁺)²]`.
pub fn call_sq_price(cf: &dyn LogPriceCf, s_bar: f64, cfg: &TransformConfig) -> Result<f64> {
    check_damping(cfg.damping)?;
    let a = cfg.damping;
    let k = s_bar.ln();
    let i = Complex64::i();
    let integrand = |v: f64| -> Result<Complex64> {
        let psi = cf.eval(Complex64::new(v, -(a + 2.0)))?;
        let w = 1.0 / Complex64::new(a, v) - 2.0 / Complex64::new(a + 1.0, v) + 1.0 / Complex64::new(a + 2.0, v);
        Ok((-i * k * v).exp() * psi * w)
    };
    let value = (-a * k).exp() / PI * semi_infinite(integrand, cfg)?;
    nonnegative(value, "squared call price")
}

/// `P(S ≥ S̄)`.
pub fn tail_probability(cf: &dyn LogPriceCf, s_bar: f64, cfg: &TransformConfig) -> Result<f64> {
    let k = s_bar.ln();
    let i = Complex64::i();
    let integrand = |v: f64| -> Result<Complex64> { Ok((-i * k * v).exp() * cf.eval(Complex64::from(v))? / (i * v)) };
    let p = 0.5 + semi_infinite(integrand, cfg)? / PI;
    let slack = 1e-9;
    if !(-slack..=1.0 + slack).contains(&p) {
        return Err(EtmError::Integration(format!("tail probability {p} outside [0, 1]")));
    }
    Ok(p.clamp(0.0, 1.0))
}

fn nonnegative(v: f64, what: &str) -> Result<f64> {
    if v < -1e-9 {
        return Err(EtmError::Integration(format!("{what} came out negative ({v:e})")));
    }
    Ok(v.max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::norm_cdf;

    // Lognormal reference: X ~ N(m, s²).
    fn gaussian(m: f64, s: f64) -> impl Fn(Complex64) -> Result<Complex64> + Sync {
        move |u: Complex64| Ok((Complex64::i() * u * m - 0.5 * s * s * u * u).exp())
    }

    fn bs_call(m: f64, s: f64, k: f64) -> f64 {
        let f = (m + 0.5 * s * s).exp();
        let d1 = ((f / k).ln() + 0.5 * s * s) / s;
        f * norm_cdf(d1) - k * norm_cdf(d1 - s)
    }

    #[test]
    fn lognormal_call_tail_and_square() {
        let (m, s) = (3.8, 0.35);
        let cf = gaussian(m, s);
        let cfg = TransformConfig::default();
        for &k in &[30.0, 45.0, 60.0] {
            let c = call_price(&cf, k, &cfg).unwrap();
            assert!((c - bs_call(m, s, k)).abs() < 1e-9, "{c} vs {}", bs_call(m, s, k));
            let d2 = (m - k.ln()) / s;
            let p = tail_probability(&cf, k, &cfg).unwrap();
            assert!((p - norm_cdf(d2)).abs() < 1e-9);
            // E[(S−K)²⁺] = E[S²1] − 2K E[S 1] + K² P
            let e_s2 = (2.0 * m + 2.0 * s * s).exp() * norm_cdf(d2 + 2.0 * s);
            let e_s = (m + 0.5 * s * s).exp() * norm_cdf(d2 + s);
            let want = e_s2 - 2.0 * k * e_s + k * k * norm_cdf(d2);
            let got = call_sq_price(&cf, k, &cfg).unwrap();
            assert!((got - want).abs() < 1e-7 * want, "{got} vs {want}");
        }
    }

    #[test]
    fn damping_must_be_positive() {
        let cf = gaussian(3.8, 0.3);
        assert!(call_price(&cf, 50.0, &TransformConfig::default().with_damping(0.0)).is_err());
    }
}
