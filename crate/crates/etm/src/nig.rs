//! The Normal Inverse Gaussian law NIG(α, β, δ, m).

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{EtmError, Result};
use crate::special::ln_bessel_k1;

/// Parameters of a NIG law. `gamma = √(α² − β²)` is cached.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawNig", into = "RawNig")]
pub struct NigParams {
    alpha: f64,
    beta: f64,
    delta: f64,
    m: f64,
    gamma: f64,
}

#[derive(Serialize, Deserialize)]
struct RawNig {
    alpha: f64,
    beta: f64,
    delta: f64,
    m: f64,
}

impl TryFrom<RawNig> for NigParams {
    type Error = EtmError;
    fn try_from(r: RawNig) -> Result<Self> {
        NigParams::new(r.alpha, r.beta, r.delta, r.m)
    }
}

impl From<NigParams> for RawNig {
    fn from(p: NigParams) -> Self {
        RawNig { alpha: p.alpha, beta: p.beta, delta: p.delta, m: p.m }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NigMoments {
    pub mean: f64,
    pub variance: f64,
    pub skewness: f64,
    pub excess_kurtosis: f64,
}

impl NigParams {
    pub fn new(alpha: f64, beta: f64, delta: f64, m: f64) -> Result<Self> {
        if !(alpha.is_finite() && beta.is_finite() && delta.is_finite() && m.is_finite()) {
            return Err(EtmError::Domain("NIG parameters must be finite".into()));
        }
        if alpha <= beta.abs() {
            return Err(EtmError::Domain(format!("NIG requires alpha > |beta|, got alpha={alpha}, beta={beta}")));
        }
        if delta <= 0.0 {
            return Err(EtmError::Domain(format!("NIG requires delta > 0, got {delta}")));
        }
        let gamma = (alpha * alpha - beta * beta).sqrt();
        Ok(NigParams { alpha, beta, delta, m, gamma })
    }

    /// Zero-mean law: `m = −δβ/γ`.
    pub fn centered(alpha: f64, beta: f64, delta: f64) -> Result<Self> {
        let p = NigParams::new(alpha, beta, delta, 0.0)?;
        Ok(NigParams { m: p.centering_location(), ..p })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }
    pub fn beta(&self) -> f64 {
        self.beta
    }
    pub fn delta(&self) -> f64 {
        self.delta
    }
    pub fn m(&self) -> f64 {
        self.m
    }
    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    fn centering_location(&self) -> f64 {
        -self.delta * self.beta / self.gamma
    }

    /// True when `m` is exactly the centering value.
    pub fn is_centered(&self) -> bool {
        self.m == self.centering_location()
    }

    /// Law of the Lévy increment over a time span `h`: NIG(α, β, hδ, hm).
    pub fn over_time(&self, h: f64) -> Result<Self> {
        NigParams::new(self.alpha, self.beta, h * self.delta, h * self.m)
    }

    pub fn pdf(&self, x: f64) -> f64 {
        self.ln_pdf(x).exp()
    }

    pub fn ln_pdf(&self, x: f64) -> f64 {
        let d = x - self.m;
        let q = (self.delta * self.delta + d * d).sqrt();
        (self.alpha * self.delta / PI).ln() + ln_bessel_k1(self.alpha * q) - q.ln()
            + self.delta * self.gamma
            + self.beta * d
    }

    pub fn moments(&self) -> NigMoments {
        let (a, b, d, g) = (self.alpha, self.beta, self.delta, self.gamma);
        NigMoments {
            mean: self.m + d * b / g,
            variance: d * a * a / (g * g * g),
            skewness: 3.0 * b / (a * (g * d).sqrt()),
            excess_kurtosis: 3.0 * (1.0 + 4.0 * b * b / (a * a)) / (d * g),
        }
    }

    /// Cumulant function ψ(x) = xm + δ(γ − √(α² − (β + x)²)), principal square root.
    pub fn cumulant(&self, x: Complex64) -> Complex64 {
        let bx = self.beta + x;
        let root = (Complex64::from(self.alpha * self.alpha) - bx * bx).sqrt();
        x * self.m + self.delta * (self.gamma - root)
    }

    /// Characteristic function exp(ψ(iu)).
    pub fn cf(&self, u: f64) -> Complex64 {
        self.cumulant(Complex64::new(0.0, u)).exp()
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let v = inverse_gaussian(self.delta / self.gamma, self.delta * self.delta, rng);
        let z: f64 = rng.sample(StandardNormal);
        self.m + self.beta * v + v.sqrt() * z
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, n: usize) -> Vec<f64> {
        (0..n).map(|_| self.draw(rng)).collect()
    }
}

/// Inverse Gaussian draw with the given mean and shape (Michael, Schucany and Haas).
///
/// The root is written as `4μλy/(r + y)²`, which avoids the cancellation of the
/// textbook form `μ + μ(y − r)/(2λ)` for large `y`.
pub fn inverse_gaussian<R: Rng + ?Sized>(mean: f64, shape: f64, rng: &mut R) -> f64 {
    let n: f64 = rng.sample(StandardNormal);
    let y = mean * n * n;
    let r = (y * y + 4.0 * shape * y).sqrt();
    let x = if y > 0.0 { 4.0 * mean * shape * y / ((r + y) * (r + y)) } else { mean };
    let u: f64 = rng.random();
    if u * (mean + x) <= mean {
        x
    } else {
        mean * mean / x
    }
}

pub fn nig_pdf(x: f64, p: &NigParams) -> f64 {
    p.pdf(x)
}

pub fn nig_moments(p: &NigParams) -> NigMoments {
    p.moments()
}

pub fn nig_cumulant(x: Complex64, p: &NigParams) -> Complex64 {
    p.cumulant(x)
}

pub fn nig_sample<R: Rng + ?Sized>(p: &NigParams, rng: &mut R, n: usize) -> Vec<f64> {
    p.sample(rng, n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn france() -> NigParams {
        NigParams::centered(4.189, -0.379, 0.125).unwrap()
    }

    #[test]
    fn domain_is_enforced() {
        assert!(NigParams::new(1.0, 1.0, 1.0, 0.0).is_err());
        assert!(NigParams::new(1.0, 0.5, 0.0, 0.0).is_err());
        assert!(NigParams::new(f64::NAN, 0.5, 1.0, 0.0).is_err());
    }

    #[test]
    fn centering_matches_rounded_location() {
        let p = france();
        assert!(p.is_centered());
        assert!((p.m() - 0.011356).abs() < 5e-7);
        assert!(p.moments().mean.abs() < 1e-17);
    }

    #[test]
    fn variance_and_symmetry() {
        assert!((france().moments().variance - 0.0302).abs() < 5e-5);
        let s = NigParams::new(2.0, 0.0, 0.7, 0.0).unwrap();
        assert_eq!(s.moments().skewness, 0.0);
        for &x in &[0.1, 0.5, 3.0] {
            assert!((s.pdf(x) - s.pdf(-x)).abs() < 1e-15 * s.pdf(x).max(1e-300));
        }
    }

    #[test]
    fn density_is_unimodal_around_mode() {
        let p = france();
        let (mut mode, mut best) = (0.0, 0.0);
        let mut x = -1.0;
        while x < 1.0 {
            if p.pdf(x) > best {
                best = p.pdf(x);
                mode = x;
            }
            x += 1e-4;
        }
        assert!(best > p.pdf(mode + p.delta()) && best > p.pdf(mode - p.delta()));
    }

    #[test]
    fn cumulant_basics() {
        let p = france();
        assert_eq!(p.cumulant(Complex64::new(0.0, 0.0)), Complex64::new(0.0, 0.0));
        assert!(p.cf(1.0).norm() <= 1.0);
        let r = p.cumulant(Complex64::new(1.0, 0.0));
        assert_eq!(r.im, 0.0);
        let direct = p.m() + p.delta() * (p.gamma() - (p.alpha().powi(2) - (p.beta() + 1.0).powi(2)).sqrt());
        assert!((r.re - direct).abs() < 1e-15);
    }

    #[test]
    fn sampling_is_deterministic() {
        let p = france();
        let a = p.sample(&mut ChaCha8Rng::seed_from_u64(7), 100);
        let b = p.sample(&mut ChaCha8Rng::seed_from_u64(7), 100);
        assert_eq!(a, b);
    }

    #[test]
    fn inverse_gaussian_mean() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let (mu, lam) = (0.03, 0.0156);
        let n = 200_000;
        let s: f64 = (0..n).map(|_| inverse_gaussian(mu, lam, &mut rng)).sum();
        let se = (mu.powi(3) / lam / n as f64).sqrt();
        assert!((s / n as f64 - mu).abs() < 4.0 * se);
    }
}
