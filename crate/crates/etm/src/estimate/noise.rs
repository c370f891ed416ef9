use num_complex::Complex64;

use crate::charfns::CfContext;
use crate::error::{EtmError, Result};
use crate::nig::NigParams;
use crate::optim::{nelder_mead, NmOptions};

/// Frequencies used by the characteristic-function least squares.
pub const DEFAULT_U_GRID: [f64; 11] = [-5.0, -4.0, -3.0, -2.0, -1.0, 0.0, 1.0, 2.0, 3.0, 4.0, 5.0];

const BARRIER: f64 = 1e30;

/// Empirical characteristic-function sums `Σ_t e^{iu r_t}` on a frequency grid.
#[derive(Debug, Clone)]
pub struct EmpiricalCf {
    pub u: Vec<f64>,
    pub sums: Vec<Complex64>,
    pub n: f64,
}

impl EmpiricalCf {
    pub fn new(residuals: &[f64], u_grid: &[f64]) -> Self {
        let sums = u_grid
            .iter()
            .map(|&u| residuals.iter().map(|&r| Complex64::new(0.0, u * r).exp()).sum())
            .collect();
        EmpiricalCf { u: u_grid.to_vec(), sums, n: residuals.len() as f64 }
    }

    /// `Σ_u Σ_t |e^{iu r_t} − c_u|²`, expanded as `Σ_u [N(1 + |c_u|²) − 2 Re(c̄_u S_u)]`.
    pub fn distance(&self, model_cf: impl Fn(f64) -> Result<Complex64>) -> Result<f64> {
        let mut total = 0.0;
        for (&u, s) in self.u.iter().zip(&self.sums) {
            let c = model_cf(u)?;
            total += self.n * (1.0 + c.norm_sqr()) - 2.0 * (c.conj() * s).re;
        }
        Ok(total.max(0.0))
    }
}

fn residual_cf(ctx: &CfContext, nig: &NigParams, kappa_x: f64, sigma_t: f64, lambda: f64) -> impl Fn(f64) -> Result<Complex64> {
    let mut c = ctx.clone();
    c.params.nig = *nig;
    c.params.kappa_x = kappa_x;
    let k = c.params.kernels(1.0);
    let g = 0.5 * (lambda * sigma_t).powi(2) * k.kx2;
    move |u: f64| Ok((-g * u * u).exp() * c.phi(Complex64::from(u), 1.0)?)
}

/// Characteristic-function least squares objective for one-day log-price residuals.
pub fn nig_cls_objective(
    params: &NigParams,
    lambda: f64,
    residuals: &[f64],
    kappa_x: f64,
    sigma_t: f64,
    u_grid: &[f64],
    ctx: &CfContext,
) -> Result<f64> {
    EmpiricalCf::new(residuals, u_grid).distance(residual_cf(ctx, params, kappa_x, sigma_t, lambda))
}

#[derive(Debug, Clone)]
pub struct NigClsFit {
    pub params: NigParams,
    pub objective: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Nelder–Mead over (α, β, δ) with the location fixed by centering.
pub fn fit_nig_cls(residuals: &[f64], kappa_x: f64, sigma_t: f64, lambda: f64, init: &NigParams, ctx: &CfContext) -> Result<NigClsFit> {
    if NigParams::new(init.alpha(), init.beta(), init.delta(), 0.0).is_err() {
        return Err(EtmError::Domain("initial NIG point is infeasible".into()));
    }
    let emp = EmpiricalCf::new(residuals, &DEFAULT_U_GRID);
    let objective = |v: &[f64]| -> f64 {
        match NigParams::centered(v[0], v[1], v[2]) {
            Ok(p) => emp.distance(residual_cf(ctx, &p, kappa_x, sigma_t, lambda)).unwrap_or(BARRIER),
            Err(_) => BARRIER,
        }
    };
    let x0 = [init.alpha(), init.beta(), init.delta()];
    let step = [0.1 * init.alpha(), 0.1 * init.alpha().max(init.beta().abs()) * 0.5, 0.1 * init.delta()];
    let r = nelder_mead(objective, &x0, &step, &NmOptions { x_tol: 1e-8, max_iter: 4000 });
    let params = NigParams::centered(r.x[0], r.x[1], r.x[2])?;
    if !r.converged {
        return Err(EtmError::NoConvergence(format!(
            "NIG least squares stopped after {} iterations at alpha={}, beta={}, delta={} (objective {})",
            r.iterations, r.x[0], r.x[1], r.x[2], r.value
        )));
    }
    Ok(NigClsFit { params, objective: r.value, iterations: r.iterations, converged: r.converged })
}

#[derive(Debug, Clone)]
pub struct NigMleFit {
    pub params: NigParams,
    pub log_likelihood: f64,
    /// True when the likelihood search failed and the moment fit was returned.
    pub fallback: bool,
}

/// Moment-matching NIG fit; also the starting point of the likelihood search.
pub fn nig_method_of_moments(xs: &[f64]) -> Result<NigParams> {
    let mut m = crate::simulate::Moments::default();
    xs.iter().for_each(|&x| m.push(x));
    let var = m.variance();
    if !(var > 0.0) {
        return Err(EtmError::Data("degenerate residuals (zero variance)".into()));
    }
    let (s, k) = (m.skewness(), m.excess_kurtosis());
    // skew² = 9b²/(δγ), kurt = 3(1+4b²)/(δγ) with b = β/α
    let (b2, dg) = if k > 0.0 && 3.0 * k > 4.0 * s * s + 1e-12 {
        let b2 = (s * s / (3.0 * k - 4.0 * s * s)).min(0.81);
        (b2, 3.0 * (1.0 + 4.0 * b2) / k)
    } else {
        (0.0, 1.0)
    };
    let alpha = (dg / (var * (1.0 - b2).powi(2))).sqrt();
    let beta = s.signum() * b2.sqrt() * alpha;
    let gamma = alpha * (1.0 - b2).sqrt();
    let delta = dg / gamma;
    NigParams::new(alpha, beta, delta, m.mean - delta * beta / gamma)
}

fn log_likelihood(p: &NigParams, xs: &[f64]) -> f64 {
    xs.iter().map(|&x| p.ln_pdf(x)).sum()
}

/// Likelihood fit on residuals rescaled by `e^{κΔ/2}`; location and scale are returned
/// per unit time without further transformation.
pub fn fit_nig_mle_init(residuals: &[f64], kappa_x: f64) -> Result<NigMleFit> {
    if residuals.is_empty() {
        return Err(EtmError::Data("no residuals".into()));
    }
    let scale = (0.5 * kappa_x).exp();
    let ys: Vec<f64> = residuals.iter().map(|r| r * scale).collect();
    let start = nig_method_of_moments(&ys)?;
    let sd = start.moments().variance.sqrt();
    let nll = |v: &[f64]| -> f64 {
        match NigParams::new(v[0], v[1], v[2], v[3]) {
            Ok(p) => {
                let l = log_likelihood(&p, &ys);
                if l.is_finite() {
                    -l
                } else {
                    BARRIER
                }
            }
            Err(_) => BARRIER,
        }
    };
    let x0 = [start.alpha(), start.beta(), start.delta(), start.m()];
    let step = [0.2 * start.alpha(), 0.1 * start.alpha(), 0.2 * start.delta(), 0.1 * sd];
    let r = nelder_mead(nll, &x0, &step, &NmOptions { x_tol: 1e-9, max_iter: 6000 });
    match NigParams::new(r.x[0], r.x[1], r.x[2], r.x[3]) {
        Ok(p) if r.converged && r.value < BARRIER => Ok(NigMleFit { params: p, log_likelihood: -r.value, fallback: false }),
        _ => Ok(NigMleFit { params: start, log_likelihood: log_likelihood(&start, &ys), fallback: true }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::EtmParams;

    #[test]
    fn zero_frequency_contributes_nothing() {
        let ctx = CfContext::new(EtmParams::reference_france());
        let r = vec![0.1, -0.2, 0.05];
        let v = nig_cls_objective(&ctx.params.nig, -0.007, &r, 0.226, 2.413, &[0.0], &ctx).unwrap();
        assert!(v.abs() < 1e-12);
    }

    #[test]
    fn mirrored_frequencies_add_identical_terms() {
        let ctx = CfContext::new(EtmParams::reference_france());
        let r: Vec<f64> = (0..50).map(|i| ((i * 31 % 17) as f64 - 8.0) / 40.0).collect();
        let nig = ctx.params.nig;
        let a = nig_cls_objective(&nig, -0.007, &r, 0.226, 2.413, &[2.0], &ctx).unwrap();
        let b = nig_cls_objective(&nig, -0.007, &r, 0.226, 2.413, &[2.0, -2.0], &ctx).unwrap();
        assert!((b - 2.0 * a).abs() < 1e-9 * b);
    }

    #[test]
    fn expansion_matches_direct_sum() {
        let ctx = CfContext::new(EtmParams::reference_france());
        let r: Vec<f64> = (0..40).map(|i| ((i * 13 % 23) as f64 - 11.0) / 50.0).collect();
        let nig = ctx.params.nig;
        let f = residual_cf(&ctx, &nig, 0.226, 2.413, -0.007);
        let mut direct = 0.0;
        for &u in &DEFAULT_U_GRID {
            let c = f(u).unwrap();
            for &x in &r {
                direct += (Complex64::new(0.0, u * x).exp() - c).norm_sqr();
            }
        }
        let v = nig_cls_objective(&nig, -0.007, &r, 0.226, 2.413, &DEFAULT_U_GRID, &ctx).unwrap();
        assert!((v - direct).abs() < 1e-10 * direct);
    }
}
