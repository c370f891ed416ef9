use chrono::NaiveDate;
use nalgebra::{DMatrix, DVector};

use super::series::SeriesPair;
use crate::error::{EtmError, Result};
use crate::model::{Kernels, SeasonalityT, SeasonalityX, XI};

/// Least squares through the SVD of the column-equilibrated design matrix, refusing
/// rank-deficient designs. Equilibration keeps the rank test blind to column units
/// (the trend column grows with the sample length).
pub(crate) fn least_squares(design: &DMatrix<f64>, y: &DVector<f64>) -> Result<DVector<f64>> {
    let norms: Vec<f64> = design.column_iter().map(|c| c.norm()).collect();
    if let Some(j) = norms.iter().position(|&n| !(n > 0.0)) {
        return Err(EtmError::Rank(format!("design column {j} is zero")));
    }
    let mut scaled = design.clone();
    for (j, mut c) in scaled.column_iter_mut().enumerate() {
        c /= norms[j];
    }
    let svd = scaled.svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    if !(smin * smin > 1e-10 * smax * smax) {
        return Err(EtmError::Rank(format!("singular values range from {smin:e} to {smax:e}")));
    }
    let mut beta = svd.solve(y, 0.0).map_err(|e| EtmError::Rank(e.to_string()))?;
    for (j, b) in beta.iter_mut().enumerate() {
        *b /= norms[j];
    }
    Ok(beta)
}

fn harmonic_backsolve(kappa: f64, s_coef: f64, c_coef: f64) -> (f64, f64) {
    let c = XI.cos() - (-kappa).exp();
    let s = XI.sin();
    let d = c * c + s * s;
    ((c * s_coef + s * c_coef) / d, (c * c_coef - s * s_coef) / d)
}

fn reversion_speed(slope: f64) -> Result<f64> {
    if !(slope > 0.0) || slope == 1.0 || !slope.is_finite() {
        return Err(EtmError::NotMeanReverting(format!("autoregressive slope {slope}")));
    }
    Ok(-slope.ln())
}

/// Conditional least squares fit of the log-price drift.
#[derive(Debug, Clone)]
pub struct DriftFitX {
    /// Coefficients on (i, X_i, sin ξi, cos ξi, 1{i ≡ 0 mod 7}, …, 1{i ≡ 6 mod 7}).
    pub eta: [f64; 11],
    pub kappa: f64,
    pub beta0: f64,
    pub alpha1: f64,
    pub beta1: f64,
    /// Day-of-week levels indexed by sample offset modulo 7 (not by weekday).
    pub dow_offset: [f64; 7],
    pub residuals: Vec<f64>,
    pub fitted: Vec<f64>,
    /// Date of the response observation of each residual.
    pub response_dates: Vec<NaiveDate>,
}

impl DriftFitX {
    /// Regressor row for day offset `i` and log-price `x`.
    pub fn regressor(i: f64, x: f64) -> [f64; 11] {
        let mut r = [0.0; 11];
        r[0] = i;
        r[1] = x;
        r[2] = (XI * i).sin();
        r[3] = (XI * i).cos();
        r[4 + (i.round() as i64).rem_euclid(7) as usize] = 1.0;
        r
    }

    /// Regression coefficients implied by model parameters (inverse of the back-solve).
    pub fn eta_from(kappa: f64, beta0: f64, alpha1: f64, beta1: f64, dow_offset: &[f64; 7]) -> [f64; 11] {
        let q = (-kappa).exp();
        let (c, s) = (XI.cos() - q, XI.sin());
        let mut eta = [0.0; 11];
        eta[0] = beta0 * (1.0 - q);
        eta[1] = q;
        eta[2] = c * alpha1 - s * beta1;
        eta[3] = s * alpha1 + c * beta1;
        for j in 0..7 {
            eta[4 + j] = beta0 + dow_offset[(j + 1) % 7] - q * dow_offset[j];
        }
        eta
    }

    /// Seasonality with weekday-indexed levels for a series starting on `anchor`.
    pub fn seasonality(&self, anchor: u8) -> SeasonalityX {
        let mut dow = [0.0; 7];
        for j in 0..7 {
            dow[(j + anchor as usize) % 7] = self.dow_offset[j];
        }
        SeasonalityX { beta0: self.beta0, alpha1: self.alpha1, beta1: self.beta1, dow }
    }
}

pub fn fit_drift_x(series: &SeriesPair) -> Result<DriftFitX> {
    let idx = series.transitions();
    if idx.len() < 12 {
        return Err(EtmError::Data(format!("need at least 12 consecutive-day pairs, got {}", idx.len())));
    }
    let off = series.offsets();
    let design = DMatrix::from_fn(idx.len(), 11, |r, c| DriftFitX::regressor(off[idx[r]] as f64, series.x[idx[r]])[c]);
    let y = DVector::from_iterator(idx.len(), idx.iter().map(|&k| series.x[k + 1]));
    let eta_v = least_squares(&design, &y)?;
    let mut eta = [0.0; 11];
    eta.copy_from_slice(eta_v.as_slice());

    let kappa = reversion_speed(eta[1])?;
    let q = eta[1];
    let beta0 = eta[0] / (1.0 - q);
    let (alpha1, beta1) = harmonic_backsolve(kappa, eta[2], eta[3]);
    let q7 = q.powi(7);
    let mut dow_offset = [0.0; 7];
    for (j, d) in dow_offset.iter_mut().enumerate() {
        let mut acc = 0.0;
        for k in 0..7 {
            acc += (eta[4 + (j + k) % 7] - beta0) * q.powi(6 - k as i32);
        }
        *d = acc / (1.0 - q7);
    }
    let fitted: Vec<f64> = (&design * &eta_v).iter().copied().collect();
    let residuals = y.iter().zip(&fitted).map(|(a, b)| a - b).collect();
    Ok(DriftFitX {
        eta,
        kappa,
        beta0,
        alpha1,
        beta1,
        dow_offset,
        residuals,
        fitted,
        response_dates: idx.iter().map(|&k| series.dates[k + 1]).collect(),
    })
}

/// Conditional least squares fit of the temperature drift.
#[derive(Debug, Clone)]
pub struct DriftFitT {
    /// Coefficients on (1, i, T_i, sin ξi, cos ξi).
    pub zeta: [f64; 5],
    pub kappa: f64,
    pub alpha0: f64,
    pub beta0: f64,
    pub alpha1: f64,
    pub beta1: f64,
    pub residuals: Vec<f64>,
    pub response_dates: Vec<NaiveDate>,
}

impl DriftFitT {
    pub fn seasonality(&self) -> SeasonalityT {
        SeasonalityT { alpha0: self.alpha0, beta0: self.beta0, alpha1: self.alpha1, beta1: self.beta1 }
    }
}

pub fn fit_drift_t(series: &SeriesPair) -> Result<DriftFitT> {
    let idx = series.transitions();
    if idx.len() < 6 {
        return Err(EtmError::Data(format!("need at least 6 consecutive-day pairs, got {}", idx.len())));
    }
    let off = series.offsets();
    let design = DMatrix::from_fn(idx.len(), 5, |r, c| {
        let i = off[idx[r]] as f64;
        match c {
            0 => 1.0,
            1 => i,
            2 => series.temp[idx[r]],
            3 => (XI * i).sin(),
            _ => (XI * i).cos(),
        }
    });
    let y = DVector::from_iterator(idx.len(), idx.iter().map(|&k| series.temp[k + 1]));
    let z = least_squares(&design, &y)?;
    let mut zeta = [0.0; 5];
    zeta.copy_from_slice(z.as_slice());
    if !(zeta[2] > 0.0 && zeta[2] < 1.0) {
        return Err(EtmError::NotMeanReverting(format!("temperature autoregressive slope {}", zeta[2])));
    }
    let kappa = -zeta[2].ln();
    let one_q = 1.0 - zeta[2];
    let beta0 = zeta[1] / one_q;
    let alpha0 = zeta[0] / one_q - zeta[1] / (one_q * one_q);
    let (alpha1, beta1) = harmonic_backsolve(kappa, zeta[3], zeta[4]);
    let fitted = &design * &z;
    let residuals = y.iter().zip(fitted.iter()).map(|(a, b)| a - b).collect();
    Ok(DriftFitT {
        zeta,
        kappa,
        alpha0,
        beta0,
        alpha1,
        beta1,
        residuals,
        response_dates: idx.iter().map(|&k| series.dates[k + 1]).collect(),
    })
}

#[derive(Debug, Clone, Copy)]
pub struct SigmaFit {
    pub mean: f64,
    pub sigma: f64,
}

/// `σ̂_T = sd(residuals) / kT(1)`; the standard deviation is the maximum-likelihood one.
pub fn fit_sigma_t(residuals: &[f64], kappa_t: f64) -> SigmaFit {
    let n = residuals.len() as f64;
    let mean = residuals.iter().sum::<f64>() / n;
    let var = residuals.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / n;
    let kt = Kernels::new(kappa_t, kappa_t, 1.0).kt();
    SigmaFit { mean, sigma: var.sqrt() / kt }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dates(n: usize) -> Vec<NaiveDate> {
        let d0 = NaiveDate::from_ymd_opt(2015, 1, 5).unwrap();
        (0..n).map(|i| d0 + chrono::Duration::days(i as i64)).collect()
    }

    #[test]
    fn noiseless_x_recovers_eta() {
        let dow = [3.5, 3.6, 3.55, 3.58, 3.52, 3.3, 3.1];
        let eta = DriftFitX::eta_from(0.226, 3e-4, -0.165, 0.187, &dow);
        let n = 120;
        let mut x2 = vec![5.0];
        for i in 0..n - 1 {
            let r = DriftFitX::regressor(i as f64, x2[i]);
            x2.push(r.iter().zip(&eta).map(|(a, b)| a * b).sum());
        }
        let s = SeriesPair::new(dates(n), x2, vec![0.0; n], false).unwrap();
        let fit = fit_drift_x(&s).unwrap();
        for j in 0..11 {
            assert!((fit.eta[j] - eta[j]).abs() < 1e-8, "eta[{j}] {} vs {}", fit.eta[j], eta[j]);
        }
        assert!((fit.kappa - 0.226).abs() < 1e-8);
        for j in 0..7 {
            assert!((fit.dow_offset[j] - dow[j]).abs() < 1e-6);
        }
        assert!(fit.residuals.iter().all(|r| r.abs() < 1e-9));
    }

    #[test]
    fn gaps_and_misalignment_are_data_errors() {
        let mut d = dates(5);
        d[3] = d[4] + chrono::Duration::days(1);
        assert!(SeriesPair::new(d.clone(), vec![0.0; 5], vec![0.0; 5], false).is_err());
        assert!(SeriesPair::new(dates(5), vec![0.0; 4], vec![0.0; 5], false).is_err());
        let mut g = dates(6);
        g.remove(2);
        assert!(SeriesPair::new(g.clone(), vec![0.0; 5], vec![0.0; 5], false).is_err());
        let s = SeriesPair::new(g, vec![0.0; 5], vec![0.0; 5], true).unwrap();
        assert_eq!(s.transitions(), vec![0, 2, 3]);
    }

    #[test]
    fn sigma_scale_equivariance() {
        let r: Vec<f64> = (0..1000).map(|i| (i * 7919 % 1000) as f64 / 1000.0 - 0.5).collect();
        let a = fit_sigma_t(&r, 0.254);
        let r2: Vec<f64> = r.iter().map(|v| 2.0 * v).collect();
        let b = fit_sigma_t(&r2, 0.254);
        assert!((b.sigma - 2.0 * a.sigma).abs() < 1e-12);
    }
}
