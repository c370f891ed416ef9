//! Characteristic functions of the integrated NIG noise and of the conditional log-price.

use num_complex::Complex64;

use crate::error::{EtmError, Result};
use crate::model::EtmParams;
use crate::quadrature::{integrate, simpson, QuadConfig};

/// How the time integral of the NIG cumulant is evaluated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CfRule {
    /// Adaptive Gauss–Kronrod to the context tolerance.
    Adaptive,
    /// Fixed composite Simpson rule with the given number of panels.
    Simpson(usize),
    /// Midpoint sum matching the simulation scheme with step `scheme_step`.
    Matched,
}

#[derive(Debug, Clone)]
pub struct CfContext {
    pub params: EtmParams,
    pub quad: QuadConfig,
    pub scheme_step: f64,
    pub rule: CfRule,
}

impl CfContext {
    pub fn new(params: EtmParams) -> Self {
        CfContext { params, quad: QuadConfig::default(), scheme_step: 1.0, rule: CfRule::Adaptive }
    }

    /// Context whose transforms are exactly those of the daily simulation scheme.
    pub fn matched(params: EtmParams) -> Self {
        CfContext { rule: CfRule::Matched, ..CfContext::new(params) }
    }

    pub fn with_rule(mut self, rule: CfRule) -> Self {
        self.rule = rule;
        self
    }

    pub fn with_lambda(&self, lambda: f64) -> Self {
        CfContext { params: self.params.with_lambda(lambda), ..self.clone() }
    }

    fn check_domain(&self, u: Complex64) -> Result<()> {
        let y = u.im.abs();
        let nig = &self.params.nig;
        if y > 0.0 && nig.alpha() <= nig.beta().abs() + y {
            return Err(EtmError::MomentDomain(format!(
                "exponential moment of order {y} needs alpha > |beta| + {y} (alpha = {}, beta = {})",
                nig.alpha(),
                nig.beta()
            )));
        }
        if !(u.re.is_finite() && u.im.is_finite()) {
            return Err(EtmError::Domain("non-finite transform argument".into()));
        }
        Ok(())
    }

    /// `ln φ(u; Δ)` with the integral evaluated by the adaptive or Simpson rule.
    pub fn ln_phi_integral(&self, u: Complex64, delta: f64) -> Result<Complex64> {
        if delta <= 0.0 {
            return Err(EtmError::Usage(format!("lag must be positive, got {delta}")));
        }
        self.check_domain(u)?;
        let nig = &self.params.nig;
        let kappa = self.params.kappa_x;
        let iu = Complex64::i() * u;
        let a2 = Complex64::from(nig.alpha() * nig.alpha());
        let root = |s: f64| {
            let z = nig.beta() + iu * (-kappa * s).exp();
            (a2 - z * z).sqrt()
        };
        let integral = match self.rule {
            CfRule::Simpson(panels) => simpson(root, 0.0, delta, panels),
            _ => integrate(root, 0.0, delta, &self.quad)?.value,
        };
        let drift = iu * nig.m() * (-(-kappa * delta).exp_m1()) / kappa;
        Ok(drift + nig.delta() * nig.gamma() * delta - nig.delta() * integral)
    }

    /// `ln φ` of the simulation scheme: the integral becomes `h Σ ψ(iu e^{−κ(ℓ+½)h})`.
    pub fn ln_phi_matched(&self, u: Complex64, total_lag: f64) -> Result<Complex64> {
        self.check_domain(u)?;
        let h = self.scheme_step;
        let steps = (total_lag / h).round();
        if total_lag <= 0.0 || (steps * h - total_lag).abs() > 1e-9 * total_lag.max(1.0) {
            return Err(EtmError::Usage(format!("lag {total_lag} is not a positive multiple of the scheme step {h}")));
        }
        let nig = &self.params.nig;
        let iu = Complex64::i() * u;
        let mut sum = Complex64::new(0.0, 0.0);
        for l in 0..steps as usize {
            let w = (-self.params.kappa_x * (l as f64 + 0.5) * h).exp();
            sum += nig.cumulant(iu * w);
        }
        Ok(sum * h)
    }

    /// `ln φ` following the context rule.
    pub fn ln_phi(&self, u: Complex64, delta: f64) -> Result<Complex64> {
        match self.rule {
            CfRule::Matched => self.ln_phi_matched(u, delta),
            _ => self.ln_phi_integral(u, delta),
        }
    }

    pub fn phi(&self, u: Complex64, delta: f64) -> Result<Complex64> {
        Ok(self.ln_phi(u, delta)?.exp())
    }

    /// Conditional mean of `X_{t+Δ}` without the NIG contribution.
    pub fn deterministic_mean(&self, x_t: f64, t: f64, delta: f64) -> f64 {
        let p = &self.params;
        p.mu_x(t + delta) + (-p.kappa_x * delta).exp() * (x_t - p.mu_x(t))
    }

    fn ln_psi_with(&self, u: Complex64, x_t: f64, t: f64, delta: f64, ln_phi: Complex64) -> Complex64 {
        let p = &self.params;
        let k = p.kernels(delta);
        let iu = Complex64::i() * u;
        let gauss = -0.5 * (p.lambda * p.sigma_t).powi(2) * k.kx2 * u * u;
        iu * self.deterministic_mean(x_t, t, delta) + gauss + ln_phi
    }

    /// Conditional characteristic function of `X_{t+Δ}` given `X_t = x_t`.
    pub fn psi_x(&self, u: Complex64, x_t: f64, t: f64, delta: f64) -> Result<Complex64> {
        let lp = self.ln_phi(u, delta)?;
        Ok(self.ln_psi_with(u, x_t, t, delta, lp).exp())
    }

    /// As [`CfContext::psi_x`] but always through the scheme-matched sum.
    pub fn psi_x_matched(&self, u: Complex64, x_t: f64, t: f64, total_lag: f64) -> Result<Complex64> {
        let lp = self.ln_phi_matched(u, total_lag)?;
        Ok(self.ln_psi_with(u, x_t, t, total_lag, lp).exp())
    }

    /// As [`CfContext::psi_x`] but always through the integral rule.
    pub fn psi_x_exact(&self, u: Complex64, x_t: f64, t: f64, delta: f64) -> Result<Complex64> {
        let lp = self.ln_phi_integral(u, delta)?;
        Ok(self.ln_psi_with(u, x_t, t, delta, lp).exp())
    }

    /// `E[S_{t+Δ} | F_t] = ψ_x(−i)`.
    pub fn mean_price(&self, x_t: f64, t: f64, delta: f64) -> Result<f64> {
        Ok(self.psi_x(Complex64::new(0.0, -1.0), x_t, t, delta)?.re)
    }

    /// `E[S²_{t+Δ} | F_t] = ψ_x(−2i)`.
    pub fn second_moment_price(&self, x_t: f64, t: f64, delta: f64) -> Result<f64> {
        Ok(self.psi_x(Complex64::new(0.0, -2.0), x_t, t, delta)?.re)
    }
}

pub fn phi(u: Complex64, delta: f64, ctx: &CfContext) -> Result<Complex64> {
    ctx.phi(u, delta)
}

pub fn psi_x(u: Complex64, x_t: f64, t: f64, delta: f64, ctx: &CfContext) -> Result<Complex64> {
    ctx.psi_x(u, x_t, t, delta)
}

pub fn psi_x_matched(u: Complex64, x_t: f64, t: f64, total_lag: f64, ctx: &CfContext) -> Result<Complex64> {
    ctx.psi_x_matched(u, x_t, t, total_lag)
}
