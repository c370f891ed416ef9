//! Estimation from daily series: conditional least squares for both drifts, the
//! temperature noise scale, the coupling `λ`, the NIG law of the log-price noise and
//! rank-based dependence diagnostics.

mod dependence;
mod drift;
mod noise;
mod series;

pub use dependence::{dependence_diagnostics, fit_lambda, fit_lambda_window, variance_share, DependenceReport};
pub use drift::{fit_drift_t, fit_drift_x, fit_sigma_t, DriftFitT, DriftFitX, SigmaFit};
pub use noise::{fit_nig_cls, fit_nig_mle_init, nig_cls_objective, EmpiricalCf, NigClsFit, NigMleFit, DEFAULT_U_GRID};
pub use series::SeriesPair;

use chrono::NaiveDate;
use serde::Serialize;

use crate::charfns::CfContext;
use crate::error::Result;
use crate::model::EtmParams;
use crate::nig::NigParams;

#[derive(Debug, Clone, Default)]
pub struct EstimateOptions {
    /// Restrict the λ covariance to residual pairs dated inside this window.
    pub lambda_window: Option<(NaiveDate, NaiveDate)>,
    pub bins: Option<usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ResidualStats {
    pub n: usize,
    pub mean: f64,
    pub sd: f64,
    pub skewness: f64,
    pub excess_kurtosis: f64,
}

impl ResidualStats {
    pub fn of(xs: &[f64]) -> Self {
        let mut m = crate::simulate::Moments::default();
        xs.iter().for_each(|&x| m.push(x));
        ResidualStats { n: xs.len(), mean: m.mean, sd: m.sd(), skewness: m.skewness(), excess_kurtosis: m.excess_kurtosis() }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct NigSummary {
    pub alpha: f64,
    pub beta: f64,
    pub delta: f64,
    pub m: f64,
}

impl From<&NigParams> for NigSummary {
    fn from(p: &NigParams) -> Self {
        NigSummary { alpha: p.alpha(), beta: p.beta(), delta: p.delta(), m: p.m() }
    }
}

/// Diagnostics written next to the fitted parameter file.
#[derive(Debug, Clone, Serialize)]
pub struct EstimationReport {
    pub kappa_x: f64,
    pub kappa_t: f64,
    pub sigma_t: f64,
    pub lambda: f64,
    pub residuals_x: ResidualStats,
    pub residuals_t: ResidualStats,
    pub nig_mle: NigSummary,
    pub nig_mle_fallback: bool,
    pub nig_cls: NigSummary,
    pub nig_cls_converged: bool,
    pub dependence: DependenceReport,
    pub variance_share: f64,
}

/// Full pipeline: drifts, σ_T, λ, MLE initialization then the coupled CLS fit.
pub fn estimate_params(series: &SeriesPair, opts: &EstimateOptions) -> Result<(EtmParams, EstimationReport)> {
    let dx = fit_drift_x(series)?;
    let dt = fit_drift_t(series)?;
    let sig = fit_sigma_t(&dt.residuals, dt.kappa);
    let lambda = match opts.lambda_window {
        Some((from, to)) => fit_lambda_window(&dx.residuals, &dt.residuals, &dx.response_dates, dx.kappa, dt.kappa, sig.sigma, from, to)?,
        None => fit_lambda(&dx.residuals, &dt.residuals, dx.kappa, dt.kappa, sig.sigma),
    };
    let mle = fit_nig_mle_init(&dx.residuals, dx.kappa)?;
    let init = NigParams::centered(mle.params.alpha(), mle.params.beta(), mle.params.delta())?;
    let mut params = EtmParams {
        kappa_x: dx.kappa,
        kappa_t: dt.kappa,
        sigma_t: sig.sigma,
        lambda,
        nig: init,
        mu_x: dx.seasonality(series.anchor),
        mu_t: dt.seasonality(),
        dow_anchor: series.anchor,
        epoch: series.dates[0],
    };
    let ctx = CfContext::new(params.clone());
    let cls = fit_nig_cls(&dx.residuals, dx.kappa, sig.sigma, lambda, &init, &ctx)?;
    params.nig = cls.params;
    params.validate()?;
    let dependence = dependence_diagnostics(&dx.residuals, &dt.residuals, opts.bins.unwrap_or(3))?;
    let report = EstimationReport {
        kappa_x: dx.kappa,
        kappa_t: dt.kappa,
        sigma_t: sig.sigma,
        lambda,
        residuals_x: ResidualStats::of(&dx.residuals),
        residuals_t: ResidualStats::of(&dt.residuals),
        nig_mle: (&mle.params).into(),
        nig_mle_fallback: mle.fallback,
        nig_cls: (&cls.params).into(),
        nig_cls_converged: cls.converged,
        dependence,
        variance_share: variance_share(&params),
    };
    Ok((params, report))
}
