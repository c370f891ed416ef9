use chrono::NaiveDate;
use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{EtmError, Result};
use crate::model::EtmParams;

/// `λ̂ = (κ_X+κ_T) Ĉov / (σ_T² (1 − e^{−(κ_X+κ_T)}))`, with the unbiased covariance.
pub fn fit_lambda(res_x: &[f64], res_t: &[f64], kappa_x: f64, kappa_t: f64, sigma_t: f64) -> f64 {
    let s = kappa_x + kappa_t;
    s * covariance(res_x, res_t) / (sigma_t * sigma_t * (1.0 - (-s).exp()))
}

/// As [`fit_lambda`], restricted to residual pairs whose response date lies in `[from, to]`.
#[allow(clippy::too_many_arguments)]
pub fn fit_lambda_window(
    res_x: &[f64],
    res_t: &[f64],
    dates: &[NaiveDate],
    kappa_x: f64,
    kappa_t: f64,
    sigma_t: f64,
    from: NaiveDate,
    to: NaiveDate,
) -> Result<f64> {
    let keep: Vec<usize> = (0..dates.len()).filter(|&i| dates[i] >= from && dates[i] <= to).collect();
    if keep.len() < 2 {
        return Err(EtmError::Data(format!("fewer than two residual pairs between {from} and {to}")));
    }
    let a: Vec<f64> = keep.iter().map(|&i| res_x[i]).collect();
    let b: Vec<f64> = keep.iter().map(|&i| res_t[i]).collect();
    Ok(fit_lambda(&a, &b, kappa_x, kappa_t, sigma_t))
}

fn covariance(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len().min(b.len()) as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum::<f64>() / (n - 1.0)
}

/// Share of the one-day log-price noise standard deviation carried by temperature.
pub fn variance_share(p: &EtmParams) -> f64 {
    let g = (p.sigma_t * p.lambda).abs();
    g / (g * g + p.nig.moments().variance).sqrt()
}

#[derive(Debug, Clone, Serialize)]
pub struct DependenceReport {
    pub pearson: f64,
    /// `table[i][j]`: count with X-rank in bin `i` and T-rank in bin `j`.
    pub table: Vec<Vec<u64>>,
    pub chi2: f64,
    pub dof: usize,
    pub p_value: f64,
    /// Some expected cell count is below 5.
    pub low_expected_count: bool,
}

fn rank_bins(xs: &[f64], bins: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..xs.len()).collect();
    idx.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]).then(a.cmp(&b)));
    let mut out = vec![0; xs.len()];
    for (rank, &i) in idx.iter().enumerate() {
        out[i] = rank * bins / xs.len();
    }
    out
}

/// Pearson correlation and the χ² independence test on quantile-binned ranks.
pub fn dependence_diagnostics(res_x: &[f64], res_t: &[f64], bins: usize) -> Result<DependenceReport> {
    if !(2..=5).contains(&bins) {
        return Err(EtmError::Usage(format!("bins must be in 2..=5, got {bins}")));
    }
    if res_x.len() != res_t.len() || res_x.len() < bins {
        return Err(EtmError::Data("residual series must have equal length of at least the bin count".into()));
    }
    let n = res_x.len();
    let (bx, bt) = (rank_bins(res_x, bins), rank_bins(res_t, bins));
    let mut table = vec![vec![0u64; bins]; bins];
    for (i, j) in bx.iter().zip(&bt) {
        table[*i][*j] += 1;
    }
    let rows: Vec<f64> = table.iter().map(|r| r.iter().sum::<u64>() as f64).collect();
    let cols: Vec<f64> = (0..bins).map(|j| table.iter().map(|r| r[j]).sum::<u64>() as f64).collect();
    let mut chi2 = 0.0;
    let mut low = false;
    for i in 0..bins {
        for j in 0..bins {
            let e = rows[i] * cols[j] / n as f64;
            low |= e < 5.0;
            chi2 += (table[i][j] as f64 - e).powi(2) / e;
        }
    }
    let dof = (bins - 1) * (bins - 1);
    let law = ChiSquared::new(dof as f64).map_err(|e| EtmError::Domain(e.to_string()))?;
    let sx = covariance(res_x, res_x).sqrt();
    let st = covariance(res_t, res_t).sqrt();
    Ok(DependenceReport {
        pearson: covariance(res_x, res_t) / (sx * st),
        table,
        chi2,
        dof,
        p_value: law.sf(chi2),
        low_expected_count: low,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_covariance_gives_zero_lambda() {
        let a = [1.0, -1.0, 1.0, -1.0];
        let b = [1.0, 1.0, -1.0, -1.0];
        assert_eq!(fit_lambda(&a, &b, 0.2, 0.3, 2.0), 0.0);
    }

    #[test]
    fn comonotone_series_reject_independence() {
        let a: Vec<f64> = (0..3000).map(|i| (i as f64 * 0.37).sin()).collect();
        let b: Vec<f64> = a.iter().map(|x| x.powi(3)).collect();
        let r = dependence_diagnostics(&a, &b, 3).unwrap();
        assert!(r.p_value < 1e-300);
        assert_eq!(r.table[0][0], 1000);
        assert!((r.pearson - 1.0).abs() > 0.0);
    }

    #[test]
    fn share_limits() {
        let p = EtmParams::reference_france();
        assert_eq!(variance_share(&p.with_lambda(0.0)), 0.0);
        let mut q = p.clone();
        q.nig = crate::nig::NigParams::centered(4.189, -0.379, 1e9).unwrap();
        assert!(variance_share(&q) < 1e-4);
    }
}
