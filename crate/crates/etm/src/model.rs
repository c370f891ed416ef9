//! Joint model parameters, seasonal means, mean-reversion kernels and the Gaussian
//! structure shared by the two driving Brownian integrals.
//!
//! Dynamics, with `X̃ = X − μ_X` and `T̃ = T − μ_T`:
//!
//! ```text
//! dX̃ = −κ_X X̃ dt + λσ_T dW + dL      (L a centered NIG Lévy process)
//! dT̃ = −κ_T T̃ dt + σ_T dW
//! ```

use std::f64::consts::PI;
use std::fmt::Write as _;

use chrono::{Datelike, NaiveDate};

use crate::error::{EtmError, Result};
use crate::nig::NigParams;

/// Annual angular frequency, one cycle per 365 days.
pub const XI: f64 = 2.0 * PI / 365.0;

/// Log-price seasonality: trend, annual harmonic and day-of-week levels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeasonalityX {
    pub beta0: f64,
    pub alpha1: f64,
    pub beta1: f64,
    /// Level for each weekday, Monday first.
    pub dow: [f64; 7],
}

/// Temperature seasonality: level, trend and annual harmonic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeasonalityT {
    pub alpha0: f64,
    pub beta0: f64,
    pub alpha1: f64,
    pub beta1: f64,
}

impl SeasonalityX {
    pub fn eval(&self, t: f64, anchor: u8) -> f64 {
        let day = (t.floor() as i64 + anchor as i64).rem_euclid(7) as usize;
        self.beta0 * t + self.alpha1 * (XI * t).sin() + self.beta1 * (XI * t).cos() + self.dow[day]
    }
}

impl SeasonalityT {
    pub fn eval(&self, t: f64) -> f64 {
        self.alpha0 + self.beta0 * t + self.alpha1 * (XI * t).sin() + self.beta1 * (XI * t).cos()
    }
}

pub fn mu_x(t: f64, s: &SeasonalityX, anchor: u8) -> f64 {
    s.eval(t, anchor)
}

pub fn mu_t(t: f64, s: &SeasonalityT) -> f64 {
    s.eval(t)
}

/// Variance kernels of the mean-reverting integrals over a lag Δ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Kernels {
    /// kX(Δ)² = (1 − e^{−2κ_XΔ}) / (2κ_X)
    pub kx2: f64,
    /// kT(Δ)² = (1 − e^{−2κ_TΔ}) / (2κ_T)
    pub kt2: f64,
    /// kXT(Δ)² = (1 − e^{−(κ_X+κ_T)Δ}) / (κ_X + κ_T)
    pub kxt2: f64,
}

fn decay_integral(rate: f64, delta: f64) -> f64 {
    // ∫₀^Δ e^{−rate·s} ds, stable as rate → 0
    if rate == 0.0 {
        delta
    } else {
        -(-rate * delta).exp_m1() / rate
    }
}

impl Kernels {
    pub fn new(kappa_x: f64, kappa_t: f64, delta: f64) -> Self {
        Kernels {
            kx2: decay_integral(2.0 * kappa_x, delta),
            kt2: decay_integral(2.0 * kappa_t, delta),
            kxt2: decay_integral(kappa_x + kappa_t, delta),
        }
    }
    pub fn kx(&self) -> f64 {
        self.kx2.sqrt()
    }
    pub fn kt(&self) -> f64 {
        self.kt2.sqrt()
    }
    /// Correlation ϱ = kXT² / (kX kT) of the two Brownian integrals.
    pub fn rho(&self) -> f64 {
        (self.kxt2 / (self.kx() * self.kt())).min(1.0)
    }
}

/// Covariance of `(∫e^{−κ_X(Δ−s)}dW, ∫e^{−κ_T(Δ−s)}dW)` and its factorization
/// `(ϱ, √(1−ϱ²))` against two independent normals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianPair {
    pub cov: [[f64; 2]; 2],
    pub rho: f64,
    pub rho_complement: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EtmParams {
    pub kappa_x: f64,
    pub kappa_t: f64,
    /// Standard deviation of the temperature noise (°C per √day).
    pub sigma_t: f64,
    pub lambda: f64,
    /// Centered NIG law of L₁.
    pub nig: NigParams,
    pub mu_x: SeasonalityX,
    pub mu_t: SeasonalityT,
    /// Weekday (Monday = 0) of day index 0.
    pub dow_anchor: u8,
    /// Calendar date of day index 0.
    pub epoch: NaiveDate,
}

impl EtmParams {
    /// Parameters fitted on French day-ahead prices and Paris temperatures,
    /// 2015-01-05 to 2018-12-31, with day 0 on Monday 2015-01-05.
    pub fn reference_france() -> Self {
        EtmParams {
            kappa_x: 0.226,
            kappa_t: 0.254,
            sigma_t: 2.413,
            lambda: -0.007,
            nig: NigParams::centered(4.189, -0.379, 0.125).expect("valid reference NIG"),
            mu_x: SeasonalityX {
                beta0: 0.0003,
                alpha1: -0.165,
                beta1: 0.187,
                dow: [3.523, 3.594, 3.594, 3.589, 3.566, 3.370, 3.175],
            },
            mu_t: SeasonalityT { alpha0: 6.578, beta0: 0.00004, alpha1: -4.139, beta1: -6.959 },
            dow_anchor: 0,
            epoch: NaiveDate::from_ymd_opt(2015, 1, 5).expect("valid date"),
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("kappa_x", self.kappa_x), ("kappa_t", self.kappa_t), ("sigma_t", self.sigma_t)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(EtmError::Domain(format!("{name} must be positive and finite, got {v}")));
            }
        }
        if !self.lambda.is_finite() {
            return Err(EtmError::Domain("lambda must be finite".into()));
        }
        if !self.nig.is_centered() {
            return Err(EtmError::Domain("model noise must be centered (m = -delta*beta/gamma)".into()));
        }
        if self.dow_anchor > 6 {
            return Err(EtmError::Domain(format!("dow_anchor must be in 0..=6, got {}", self.dow_anchor)));
        }
        Ok(())
    }

    pub fn with_lambda(&self, lambda: f64) -> Self {
        EtmParams { lambda, ..self.clone() }
    }

    pub fn mu_x(&self, t: f64) -> f64 {
        self.mu_x.eval(t, self.dow_anchor)
    }

    pub fn mu_t(&self, t: f64) -> f64 {
        self.mu_t.eval(t)
    }

    pub fn kernels(&self, delta: f64) -> Kernels {
        Kernels::new(self.kappa_x, self.kappa_t, delta)
    }

    /// Covariance of the one-lag residuals of X and T.
    pub fn residual_covariance(&self, delta: f64) -> f64 {
        let s = self.kappa_x + self.kappa_t;
        self.lambda * self.sigma_t * self.sigma_t * (1.0 - (-s * delta).exp()) / s
    }

    pub fn gaussian_pair_law(&self, delta: f64) -> GaussianPair {
        let k = self.kernels(delta);
        let rho = k.rho();
        GaussianPair {
            cov: [[k.kx2, k.kxt2], [k.kxt2, k.kt2]],
            rho,
            rho_complement: (1.0 - rho * rho).max(0.0).sqrt(),
        }
    }

    /// Regression of the X-integral on the T-integral: `(slope, residual variance)`.
    pub fn conditional_projection(&self, delta: f64) -> (f64, f64) {
        let k = self.kernels(delta);
        let slope = k.kxt2 / k.kt2;
        (slope, (k.kx2 - k.kxt2 * k.kxt2 / k.kt2).max(0.0))
    }

    /// Day index of a calendar date relative to the epoch.
    pub fn day_index(&self, date: NaiveDate) -> i64 {
        (date - self.epoch).num_days()
    }

    pub fn date_at(&self, t: i64) -> NaiveDate {
        self.epoch + chrono::Duration::days(t)
    }

    /// First and last day index of a calendar month.
    pub fn month_window(&self, year: i32, month: u32) -> Result<(i64, i64)> {
        let first = NaiveDate::from_ymd_opt(year, month, 1)
            .ok_or_else(|| EtmError::Usage(format!("invalid month {year}-{month}")))?;
        let next = if month == 12 {
            NaiveDate::from_ymd_opt(year + 1, 1, 1)
        } else {
            NaiveDate::from_ymd_opt(year, month + 1, 1)
        }
        .expect("valid date");
        Ok((self.day_index(first), self.day_index(next) - 1))
    }

    /// Serialize to the flat `key = value` parameter file.
    pub fn to_config_string(&self) -> String {
        let mut s = String::from("# coupled log-price / temperature model parameters\n");
        let mut put = |k: &str, v: f64| {
            let _ = writeln!(s, "{k} = {v:?}");
        };
        put("kappa_x", self.kappa_x);
        put("kappa_t", self.kappa_t);
        put("sigma_t", self.sigma_t);
        put("lambda", self.lambda);
        put("nig_alpha", self.nig.alpha());
        put("nig_beta", self.nig.beta());
        put("nig_delta", self.nig.delta());
        put("nig_m", self.nig.m());
        put("mux_beta0", self.mu_x.beta0);
        put("mux_alpha1", self.mu_x.alpha1);
        put("mux_beta1", self.mu_x.beta1);
        for (i, d) in self.mu_x.dow.iter().enumerate() {
            put(&format!("mux_dow{i}"), *d);
        }
        put("mut_alpha0", self.mu_t.alpha0);
        put("mut_beta0", self.mu_t.beta0);
        put("mut_alpha1", self.mu_t.alpha1);
        put("mut_beta1", self.mu_t.beta1);
        let _ = writeln!(s, "dow_anchor = {}", self.dow_anchor);
        let e = self.epoch;
        let _ = writeln!(s, "epoch = {}", e.year() as i64 * 10_000 + e.month() as i64 * 100 + e.day() as i64);
        s
    }

    /// Parse the flat parameter file. `nig_m` is informational: the location is always
    /// recomputed from the centering identity.
    pub fn from_config_str(text: &str) -> Result<Self> {
        let table: toml::Table = text.parse().map_err(|e| EtmError::Data(format!("parameter file: {e}")))?;
        let get = |k: &str| -> Result<f64> {
            match table.get(k) {
                Some(toml::Value::Float(v)) => Ok(*v),
                Some(toml::Value::Integer(v)) => Ok(*v as f64),
                Some(_) => Err(EtmError::Data(format!("parameter {k} is not a number"))),
                None => Err(EtmError::Data(format!("parameter {k} missing"))),
            }
        };
        let mut dow = [0.0; 7];
        for (i, d) in dow.iter_mut().enumerate() {
            *d = get(&format!("mux_dow{i}"))?;
        }
        let epoch_num = get("epoch")? as i64;
        let epoch = NaiveDate::from_ymd_opt((epoch_num / 10_000) as i32, (epoch_num / 100 % 100) as u32, (epoch_num % 100) as u32)
            .ok_or_else(|| EtmError::Data(format!("epoch {epoch_num} is not a yyyymmdd date")))?;
        let anchor = get("dow_anchor")?;
        if anchor.fract() != 0.0 || !(0.0..=6.0).contains(&anchor) {
            return Err(EtmError::Data(format!("dow_anchor must be an integer in 0..=6, got {anchor}")));
        }
        let p = EtmParams {
            kappa_x: get("kappa_x")?,
            kappa_t: get("kappa_t")?,
            sigma_t: get("sigma_t")?,
            lambda: get("lambda")?,
            nig: NigParams::centered(get("nig_alpha")?, get("nig_beta")?, get("nig_delta")?)?,
            mu_x: SeasonalityX { beta0: get("mux_beta0")?, alpha1: get("mux_alpha1")?, beta1: get("mux_beta1")?, dow },
            mu_t: SeasonalityT {
                alpha0: get("mut_alpha0")?,
                beta0: get("mut_beta0")?,
                alpha1: get("mut_alpha1")?,
                beta1: get("mut_beta1")?,
            },
            dow_anchor: anchor as u8,
            epoch,
        };
        p.validate()?;
        Ok(p)
    }
}

pub fn residual_covariance(p: &EtmParams, delta: f64) -> f64 {
    p.residual_covariance(delta)
}

pub fn gaussian_pair_law(p: &EtmParams, delta: f64) -> GaussianPair {
    p.gaussian_pair_law(delta)
}

pub fn conditional_projection(p: &EtmParams, delta: f64) -> (f64, f64) {
    p.conditional_projection(delta)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seasonal_means_by_hand() {
        let p = EtmParams::reference_france();
        assert!((p.mu_x(0.0) - 3.710).abs() < 1e-12);
        assert!((p.mu_t(0.0) - (-0.381)).abs() < 1e-12);
        let q = 365.0 / 4.0;
        assert!((p.mu_t(q) - (6.578 + 0.00004 * q - 4.139)).abs() < 0.02);
        let zero = SeasonalityX { beta0: 0.0, alpha1: 0.0, beta1: 0.0, dow: [0.0; 7] };
        assert_eq!(mu_x(17.3, &zero, 3), 0.0);
        assert_eq!(p.mu_x(0.5) - p.mu_x.beta0 * 0.5 - p.mu_x.alpha1 * (XI * 0.5).sin() - p.mu_x.beta1 * (XI * 0.5).cos(), 3.523);
    }

    #[test]
    fn kernels_by_hand() {
        let p = EtmParams::reference_france();
        let k = p.kernels(1.0);
        assert!((k.kx() - 0.8970).abs() < 5e-5);
        assert!((k.kt() - 0.8854).abs() < 1e-4);
        assert!((k.kxt2 - 0.79421).abs() < 2e-5);
        assert!((k.rho() - 0.99996).abs() < 1e-5);
        let (slope, rv) = p.conditional_projection(1.0);
        assert!((slope - 0.79421 / 0.78403).abs() < 1e-4);
        assert!(rv >= 0.0);
        assert!((p.residual_covariance(1.0) - (-0.007 * 2.413 * 2.413 * 0.79421)).abs() < 1e-6);
    }

    #[test]
    fn equal_speeds_make_integrals_identical() {
        let mut p = EtmParams::reference_france();
        p.kappa_t = p.kappa_x;
        let g = p.gaussian_pair_law(3.0);
        assert!((g.rho - 1.0).abs() < 1e-15);
        let (slope, rv) = p.conditional_projection(3.0);
        assert!((slope - 1.0).abs() < 1e-14 && rv < 1e-14);
    }

    #[test]
    fn config_round_trip_is_bit_exact() {
        let mut p = EtmParams::reference_france();
        p.kappa_x = 0.1 + 0.2;
        p.mu_t.beta0 = 4.0e-5 / 3.0;
        let q = EtmParams::from_config_str(&p.to_config_string()).unwrap();
        assert_eq!(p, q);
    }

    #[test]
    fn month_windows() {
        let p = EtmParams::reference_france();
        assert_eq!(p.month_window(2018, 1).unwrap(), (1092, 1122));
        assert_eq!(p.month_window(2018, 5).unwrap(), (1212, 1242));
        assert_eq!(p.month_window(2018, 2).unwrap().1 - p.month_window(2018, 2).unwrap().0, 27);
    }
}
