//! Conditional expectations of price/temperature functionals and contract prices
//! averaged over a delivery window, all with unit discounting.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::charfns::CfContext;
use crate::error::{EtmError, Result};
use crate::fourier::{call_price, call_sq_price, tail_probability, TransformConfig};
use crate::model::{EtmParams, Kernels};
use crate::quadrature::integrate_gl;
use crate::simulate::{mc_expect, McEngine, McReport, PathState};
use crate::special::{norm_cdf, norm_pdf};

/// Piecewise moments of `a + bG`, `G ~ N(0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PiecewiseKind {
    /// `E[(a + bG)⁺]`, `b > 0`
    Pos,
    /// `E[bG (a + bG)⁺]`
    GPos,
    /// `E[((a + bG)⁺)²]`, `b > 0`
    PosSq,
    /// `E[bG ((a + bG)⁺)²]`
    GPosSq,
}

pub fn gaussian_piecewise_moment(kind: PiecewiseKind, a: f64, b: f64) -> Result<f64> {
    match kind {
        PiecewiseKind::Pos | PiecewiseKind::PosSq if !(b > 0.0) => {
            Err(EtmError::Domain(format!("scale must be positive, got {b}")))
        }
        PiecewiseKind::Pos => Ok(a * norm_cdf(a / b) + b * norm_pdf(a / b)),
        PiecewiseKind::PosSq => Ok((a * a + b * b) * norm_cdf(a / b) + a * b * norm_pdf(a / b)),
        PiecewiseKind::GPos => Ok(if b == 0.0 { 0.0 } else { b * b * norm_cdf(a / b.abs()) }),
        PiecewiseKind::GPosSq => {
            if b == 0.0 {
                return Ok(0.0);
            }
            let z = a / b.abs();
            Ok(b.abs().powi(3) * ((2.0 / PI).sqrt() * (-0.5 * z * z).exp() + 2.0 * z * norm_cdf(z)))
        }
    }
}

/// Temperature integration range for the semi-explicit formulas.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruncationBounds {
    pub lower: f64,
    pub upper: f64,
}

impl Default for TruncationBounds {
    fn default() -> Self {
        TruncationBounds { lower: -100.0, upper: 100.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// `{T ≤ u}`
    Below,
    /// `{T ≥ u}`
    Above,
}

/// Relative agreement required between successive Gauss–Legendre refinements.
const GL_TOL: f64 = 1e-9;

/// Law of `(S_{t+Δ}, T_{t+Δ})` given the state at `t`, with cached moments.
#[derive(Debug, Clone)]
pub struct ConditionalLaw<'a> {
    ctx: &'a CfContext,
    pub state: PathState,
    pub delta: f64,
    pub kernels: Kernels,
    /// `E[T_{t+Δ}]`
    pub temp_mean: f64,
    /// `σ_T kT(Δ)`
    pub temp_sd: f64,
    /// `E[S_{t+Δ}] = ψ_x(−i)`
    pub e_s: f64,
    /// `E[S²_{t+Δ}] = ψ_x(−2i)`
    pub e_s2: f64,
    /// `λσ_T² kXT²(Δ)`: how far weighting by `S` moves the temperature mean.
    pub tilt: f64,
}

impl<'a> ConditionalLaw<'a> {
    pub fn new(ctx: &'a CfContext, state: PathState, delta: f64) -> Result<Self> {
        let p = &ctx.params;
        let k = p.kernels(delta);
        let temp_mean = p.mu_t(state.t + delta) + (-p.kappa_t * delta).exp() * (state.temp - p.mu_t(state.t));
        Ok(ConditionalLaw {
            ctx,
            state,
            delta,
            kernels: k,
            temp_mean,
            temp_sd: p.sigma_t * k.kt(),
            e_s: ctx.mean_price(state.x, state.t, delta)?,
            e_s2: ctx.second_moment_price(state.x, state.t, delta)?,
            tilt: p.lambda * p.sigma_t * p.sigma_t * k.kxt2,
        })
    }

    pub fn context(&self) -> &CfContext {
        self.ctx
    }

    /// Conditional characteristic function of `X_{t+Δ}`.
    pub fn log_price_cf(&self) -> impl Fn(Complex64) -> Result<Complex64> + Sync + '_ {
        move |u| self.ctx.psi_x(u, self.state.x, self.state.t, self.delta)
    }

    pub fn e_temp(&self) -> f64 {
        self.temp_mean
    }

    /// `E[(T̄ − T)⁺]`
    pub fn e_hdd(&self, t_bar: f64) -> f64 {
        gaussian_piecewise_moment(PiecewiseKind::Pos, t_bar - self.temp_mean, self.temp_sd).expect("positive sd")
    }

    /// `E[(T − T̄)⁺]`
    pub fn e_cdd(&self, t_bar: f64) -> f64 {
        gaussian_piecewise_moment(PiecewiseKind::Pos, self.temp_mean - t_bar, self.temp_sd).expect("positive sd")
    }

    /// `E[((T̄ − T)⁺)²]`
    pub fn e_hdd_sq(&self, t_bar: f64) -> f64 {
        gaussian_piecewise_moment(PiecewiseKind::PosSq, t_bar - self.temp_mean, self.temp_sd).expect("positive sd")
    }

    fn standardized(&self, u: f64) -> f64 {
        (u - self.temp_mean) / self.temp_sd
    }

    /// `E[S 1{T ≤ u}]` or `E[S 1{T ≥ u}]`.
    pub fn e_s_indicator(&self, u: f64, side: Side) -> f64 {
        let z = self.standardized(u) - self.tilt / self.temp_sd;
        match side {
            Side::Below => self.e_s * norm_cdf(z),
            Side::Above => self.e_s * norm_cdf(-z),
        }
    }

    /// `E[S² 1{T ≤ u}]`
    pub fn e_s2_indicator(&self, u: f64) -> f64 {
        self.e_s2 * norm_cdf(self.standardized(u) - 2.0 * self.tilt / self.temp_sd)
    }

    /// `E[S T]`
    pub fn e_st(&self) -> f64 {
        self.e_s * (self.temp_mean + self.tilt)
    }

    /// `E[S (T̄ − T)⁺]` by integrating the indicator expectation over `[T⁰, T̄]`.
    pub fn e_s_hdd(&self, t_bar: f64, bounds: &TruncationBounds) -> Result<f64> {
        if t_bar <= bounds.lower {
            return Ok(0.0);
        }
        integrate_gl(|u| self.e_s_indicator(u, Side::Below), bounds.lower, t_bar, GL_TOL)
    }

    /// `E[S (T − T̄)⁺]` over `[T̄, T_m]`.
    pub fn e_s_cdd(&self, t_bar: f64, bounds: &TruncationBounds) -> Result<f64> {
        if t_bar >= bounds.upper {
            return Ok(0.0);
        }
        integrate_gl(|u| self.e_s_indicator(u, Side::Above), t_bar, bounds.upper, GL_TOL)
    }

    /// `E[S ((T̄ − T)⁺)²] = 2∫(T̄ − u) E[S 1{T ≤ u}] du`.
    pub fn e_s_hdd_sq(&self, t_bar: f64, bounds: &TruncationBounds) -> Result<f64> {
        if t_bar <= bounds.lower {
            return Ok(0.0);
        }
        Ok(2.0 * integrate_gl(|u| (t_bar - u) * self.e_s_indicator(u, Side::Below), bounds.lower, t_bar, GL_TOL)?)
    }

    /// `E[S² (T̄ − T)⁺]`
    pub fn e_s2_hdd(&self, t_bar: f64, bounds: &TruncationBounds) -> Result<f64> {
        if t_bar <= bounds.lower {
            return Ok(0.0);
        }
        integrate_gl(|u| self.e_s2_indicator(u), bounds.lower, t_bar, GL_TOL)
    }

    /// Mass of `S` below the lower truncation bound, `E[S 1{T ≤ T⁰}]`.
    pub fn truncation_error(&self, bounds: &TruncationBounds) -> f64 {
        self.e_s_indicator(bounds.lower, Side::Below)
    }

    pub fn call(&self, s_bar: f64, cfg: &TransformConfig) -> Result<f64> {
        call_price(&self.log_price_cf(), s_bar, cfg)
    }

    pub fn call_sq(&self, s_bar: f64, cfg: &TransformConfig) -> Result<f64> {
        call_sq_price(&self.log_price_cf(), s_bar, cfg)
    }

    pub fn tail(&self, s_bar: f64, cfg: &TransformConfig) -> Result<f64> {
        tail_probability(&self.log_price_cf(), s_bar, cfg)
    }
}

/// Sign convention of the Φ argument in the first-order quanto term.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuantoVariant {
    /// `Φ(d)`: the sign obtained by projecting the price integral on the temperature one.
    Derived,
    /// `Φ(−d)`, kept for comparison.
    FlippedArgument,
}

/// First-order expansion in `λ` of the quanto-type expectations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuantoTaylor {
    pub value: f64,
    pub zeroth: f64,
    pub first_order: f64,
}

/// `λ = 0` marginal quantities of the option leg.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptionLeg {
    /// `E₀[(S − S̄)⁺]`
    pub call: f64,
    /// `P₀(S ≥ S̄)`
    pub tail: f64,
    /// `E₀[((S − S̄)⁺)²]`
    pub call_sq: f64,
}

impl OptionLeg {
    /// Evaluate the leg under the decoupled law (`λ = 0`) of `X_{t+Δ}`.
    pub fn decoupled(ctx: &CfContext, state: PathState, delta: f64, s_bar: f64, cfg: &TransformConfig) -> Result<Self> {
        let ctx0 = ctx.with_lambda(0.0);
        let cf = |u| ctx0.psi_x(u, state.x, state.t, delta);
        Ok(OptionLeg { call: call_price(&cf, s_bar, cfg)?, tail: tail_probability(&cf, s_bar, cfg)?, call_sq: call_sq_price(&cf, s_bar, cfg)? })
    }
}

impl ConditionalLaw<'_> {
    fn taylor_d(&self, t_bar: f64) -> f64 {
        (t_bar - self.temp_mean) / self.temp_sd
    }

    fn sigma2_kxt2(&self) -> f64 {
        let s = self.ctx.params.sigma_t;
        s * s * self.kernels.kxt2
    }

    /// `E[(S − S̄)⁺ (T̄ − T)⁺]` to first order in `λ`.
    pub fn quanto_taylor(&self, leg: &OptionLeg, s_bar: f64, t_bar: f64, variant: QuantoVariant) -> QuantoTaylor {
        let lambda = self.ctx.params.lambda;
        let d = self.taylor_d(t_bar);
        let phi = match variant {
            QuantoVariant::Derived => norm_cdf(d),
            QuantoVariant::FlippedArgument => norm_cdf(-d),
        };
        let zeroth = leg.call * self.e_hdd(t_bar);
        let first_order = -lambda * (leg.call + s_bar * leg.tail) * self.sigma2_kxt2() * phi;
        QuantoTaylor { value: zeroth + first_order, zeroth, first_order }
    }

    /// `E[(S − S̄)⁺ ((T̄ − T)⁺)²]` to first order in `λ`.
    pub fn quanto_hdd_sq_taylor(&self, leg: &OptionLeg, s_bar: f64, t_bar: f64) -> QuantoTaylor {
        let p = &self.ctx.params;
        let d = self.taylor_d(t_bar);
        let zeroth = leg.call * self.e_hdd_sq(t_bar);
        let shape = (2.0 / PI).sqrt() * (-0.5 * d * d).exp() + 2.0 * d * norm_cdf(d);
        let first_order =
            -p.lambda * (leg.call + s_bar * leg.tail) * p.sigma_t.powi(3) * self.kernels.kt() * self.kernels.kxt2 * shape;
        QuantoTaylor { value: zeroth + first_order, zeroth, first_order }
    }

    /// `E[((S − S̄)⁺)² (T̄ − T)⁺]` to first order in `λ`.
    pub fn quanto_sq_hdd_taylor(&self, leg: &OptionLeg, s_bar: f64, t_bar: f64) -> QuantoTaylor {
        let lambda = self.ctx.params.lambda;
        let d = self.taylor_d(t_bar);
        let zeroth = leg.call_sq * self.e_hdd(t_bar);
        let first_order = -2.0 * lambda * (leg.call_sq + s_bar * leg.call) * self.sigma2_kxt2() * norm_cdf(d);
        QuantoTaylor { value: zeroth + first_order, zeroth, first_order }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ContractKind {
    Future,
    Swap,
    Ehdd,
    Ecdd,
    Quanto,
}

impl std::str::FromStr for ContractKind {
    type Err = EtmError;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "future" => Ok(ContractKind::Future),
            "swap" => Ok(ContractKind::Swap),
            "ehdd" => Ok(ContractKind::Ehdd),
            "ecdd" => Ok(ContractKind::Ecdd),
            "quanto" => Ok(ContractKind::Quanto),
            other => Err(EtmError::Usage(format!("unknown contract kind {other:?}"))),
        }
    }
}

/// Payoff descriptor. The price is the sum of daily expected payoffs for
/// `t ∈ [t1, t2]`, conditioned on the state at `t0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContractSpec {
    pub kind: ContractKind,
    pub s_bar: f64,
    pub t_bar: f64,
    pub t0: i64,
    pub t1: i64,
    pub t2: i64,
}

impl ContractSpec {
    pub fn new(kind: ContractKind, t0: i64, t1: i64, t2: i64) -> Self {
        ContractSpec { kind, s_bar: 50.0, t_bar: 18.0, t0, t1, t2 }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t0 < self.t1 && self.t1 <= self.t2) {
            return Err(EtmError::Usage(format!("need t0 < t1 <= t2, got {} {} {}", self.t0, self.t1, self.t2)));
        }
        if matches!(self.kind, ContractKind::Quanto) && !(self.s_bar > 0.0) {
            return Err(EtmError::Usage("the price strike must be positive".into()));
        }
        Ok(())
    }

    pub fn days(&self) -> impl Iterator<Item = i64> {
        self.t1..=self.t2
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PriceBreakdown {
    pub value: f64,
    /// Daily expected payoffs for `t1..=t2`.
    pub daily: Vec<f64>,
    /// Quanto only: the `λ = 0` product term, summed over the window.
    pub zeroth: Option<f64>,
    pub first_order: Option<f64>,
    /// Bound on the mass cut off by the temperature truncation, summed over days.
    pub truncation_error: f64,
}

/// Prices contracts from a characteristic-function context.
#[derive(Debug, Clone)]
pub struct Pricer {
    pub ctx: CfContext,
    pub bounds: TruncationBounds,
    pub transform: TransformConfig,
    pub quanto_variant: QuantoVariant,
}

impl Pricer {
    pub fn new(ctx: CfContext) -> Self {
        Pricer { ctx, bounds: TruncationBounds::default(), transform: TransformConfig::default(), quanto_variant: QuantoVariant::Derived }
    }

    pub fn law(&self, state: PathState, delta: f64) -> Result<ConditionalLaw<'_>> {
        ConditionalLaw::new(&self.ctx, state, delta)
    }

    /// Direct form of the daily E-HDD term: `E[S] ∫_{T⁰}^{T̄} Φ(ũ/kT − λσ_T kXT²/kT) du`.
    pub fn ehdd_daily_direct(&self, law: &ConditionalLaw, t_bar: f64) -> Result<f64> {
        if t_bar <= self.bounds.lower {
            return Ok(0.0);
        }
        let p = &self.ctx.params;
        let k = &law.kernels;
        let shift = p.lambda * p.sigma_t * k.kxt2 / k.kt();
        let integral = integrate_gl(
            |u| norm_cdf((u - law.temp_mean) / p.sigma_t / k.kt() - shift),
            self.bounds.lower,
            t_bar,
            GL_TOL,
        )?;
        Ok(law.e_s * integral)
    }

    /// Direct form of the daily E-CDD term.
    pub fn ecdd_daily_direct(&self, law: &ConditionalLaw, t_bar: f64) -> Result<f64> {
        if t_bar >= self.bounds.upper {
            return Ok(0.0);
        }
        let p = &self.ctx.params;
        let k = &law.kernels;
        let shift = p.lambda * p.sigma_t * k.kxt2 / k.kt();
        let integral = integrate_gl(
            |u| norm_cdf(shift - (u - law.temp_mean) / p.sigma_t / k.kt()),
            t_bar,
            self.bounds.upper,
            GL_TOL,
        )?;
        Ok(law.e_s * integral)
    }

    pub fn price(&self, spec: &ContractSpec, state: &PathState) -> Result<PriceBreakdown> {
        spec.validate()?;
        let mut daily = Vec::new();
        let (mut zeroth, mut first) = (0.0, 0.0);
        let mut trunc = 0.0;
        for t in spec.days() {
            let delta = (t - spec.t0) as f64;
            let law = self.law(*state, delta)?;
            let v = match spec.kind {
                ContractKind::Future => law.e_st(),
                ContractKind::Swap => {
                    spec.t_bar * law.e_s - law.e_st() - spec.s_bar * spec.t_bar + spec.s_bar * law.e_temp()
                }
                ContractKind::Ehdd => {
                    trunc += law.truncation_error(&self.bounds);
                    self.ehdd_daily_direct(&law, spec.t_bar)?
                }
                ContractKind::Ecdd => {
                    trunc += law.e_s_indicator(self.bounds.upper, Side::Above);
                    self.ecdd_daily_direct(&law, spec.t_bar)?
                }
                ContractKind::Quanto => {
                    let leg = OptionLeg::decoupled(&self.ctx, *state, delta, spec.s_bar, &self.transform)?;
                    let q = law.quanto_taylor(&leg, spec.s_bar, spec.t_bar, self.quanto_variant);
                    zeroth += q.zeroth;
                    first += q.first_order;
                    q.value
                }
            };
            daily.push(v);
        }
        let is_quanto = matches!(spec.kind, ContractKind::Quanto);
        Ok(PriceBreakdown {
            value: daily.iter().sum(),
            daily,
            zeroth: is_quanto.then_some(zeroth),
            first_order: is_quanto.then_some(first),
            truncation_error: trunc,
        })
    }
}

impl ContractKind {
    /// Payoff of one delivery day given the realized price and temperature.
    pub fn daily_payoff(self, s_bar: f64, t_bar: f64, price: f64, temp: f64) -> f64 {
        match self {
            ContractKind::Future => price * temp,
            ContractKind::Swap => (price - s_bar) * (t_bar - temp),
            ContractKind::Ehdd => price * (t_bar - temp).max(0.0),
            ContractKind::Ecdd => price * (temp - t_bar).max(0.0),
            ContractKind::Quanto => (price - s_bar).max(0.0) * (t_bar - temp).max(0.0),
        }
    }
}

/// Monte Carlo value of the contract from `state` at `t0`, under the daily scheme.
pub fn mc_price(spec: &ContractSpec, params: &EtmParams, state: &PathState, engine: &McEngine) -> Result<McReport> {
    spec.validate()?;
    let horizon = (spec.t2 - spec.t0) as usize;
    let start = (spec.t1 - spec.t0) as usize;
    let initial = PathState { t: spec.t0 as f64, ..*state };
    mc_expect(initial, params, horizon, engine, |path| {
        path[start..].iter().map(|s| spec.kind.daily_payoff(spec.s_bar, spec.t_bar, s.price(), s.temp)).sum()
    })
}

pub fn future_price(spec: &ContractSpec, ctx: &CfContext, state: &PathState) -> Result<f64> {
    let s = ContractSpec { kind: ContractKind::Future, ..*spec };
    Ok(Pricer::new(ctx.clone()).price(&s, state)?.value)
}

pub fn swap_price(spec: &ContractSpec, ctx: &CfContext, state: &PathState) -> Result<f64> {
    let s = ContractSpec { kind: ContractKind::Swap, ..*spec };
    Ok(Pricer::new(ctx.clone()).price(&s, state)?.value)
}

pub fn ehdd_price(spec: &ContractSpec, ctx: &CfContext, state: &PathState, bounds: &TruncationBounds) -> Result<f64> {
    let s = ContractSpec { kind: ContractKind::Ehdd, ..*spec };
    let pricer = Pricer { bounds: *bounds, ..Pricer::new(ctx.clone()) };
    Ok(pricer.price(&s, state)?.value)
}

pub fn ecdd_price(spec: &ContractSpec, ctx: &CfContext, state: &PathState, bounds: &TruncationBounds) -> Result<f64> {
    let s = ContractSpec { kind: ContractKind::Ecdd, ..*spec };
    let pricer = Pricer { bounds: *bounds, ..Pricer::new(ctx.clone()) };
    Ok(pricer.price(&s, state)?.value)
}

/// `(value, zeroth term, first-order term)` of the quanto over the window.
pub fn quanto_price_taylor(spec: &ContractSpec, ctx: &CfContext, state: &PathState) -> Result<(f64, f64, f64)> {
    let s = ContractSpec { kind: ContractKind::Quanto, ..*spec };
    let b = Pricer::new(ctx.clone()).price(&s, state)?;
    Ok((b.value, b.zeroth.unwrap_or(0.0), b.first_order.unwrap_or(0.0)))
}
