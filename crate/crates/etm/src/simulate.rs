//! Path simulation (exact in temperature, midpoint NIG integral in log-price) and a
//! Monte Carlo engine with per-path substreams and mergeable moment accumulators.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{EtmError, Result};
use crate::model::EtmParams;
use crate::nig::NigParams;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathState {
    pub t: f64,
    pub x: f64,
    pub temp: f64,
}

impl PathState {
    /// State sitting exactly on both seasonal means (X̃ = T̃ = 0).
    pub fn on_mean(p: &EtmParams, t: f64) -> Self {
        PathState { t, x: p.mu_x(t), temp: p.mu_t(t) }
    }

    pub fn price(&self) -> f64 {
        self.x.exp()
    }
}

/// Precomputed one-step transition for a fixed step size.
#[derive(Debug, Clone)]
pub struct Stepper {
    params: EtmParams,
    dt: f64,
    decay_x: f64,
    decay_t: f64,
    gauss_x: f64,
    gauss_t: f64,
    rho: f64,
    rho_c: f64,
    noise: NigParams,
    noise_scale: f64,
}

impl Stepper {
    pub fn new(p: &EtmParams, dt: f64) -> Result<Self> {
        if dt <= 0.0 {
            return Err(EtmError::Usage(format!("step must be positive, got {dt}")));
        }
        let k = p.kernels(dt);
        let g = p.gaussian_pair_law(dt);
        Ok(Stepper {
            params: p.clone(),
            dt,
            decay_x: (-p.kappa_x * dt).exp(),
            decay_t: (-p.kappa_t * dt).exp(),
            gauss_x: p.lambda * p.sigma_t * k.kx(),
            gauss_t: p.sigma_t * k.kt(),
            rho: g.rho,
            rho_c: g.rho_complement,
            noise: p.nig.over_time(dt)?,
            noise_scale: (-0.5 * p.kappa_x * dt).exp(),
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn params(&self) -> &EtmParams {
        &self.params
    }

    pub fn step<R: Rng + ?Sized>(&self, s: &PathState, rng: &mut R) -> PathState {
        let p = &self.params;
        let n1: f64 = rng.sample(StandardNormal);
        let n2: f64 = rng.sample(StandardNormal);
        let z = self.noise.draw(rng);
        let t1 = s.t + self.dt;
        let x_dev = s.x - p.mu_x(s.t);
        let t_dev = s.temp - p.mu_t(s.t);
        PathState {
            t: t1,
            x: p.mu_x(t1) + self.decay_x * x_dev + self.gauss_x * n1 + self.noise_scale * z,
            temp: p.mu_t(t1) + self.decay_t * t_dev + self.gauss_t * (self.rho * n1 + self.rho_c * n2),
        }
    }
}

/// One daily step of the joint scheme.
pub fn step<R: Rng + ?Sized>(state: &PathState, p: &EtmParams, rng: &mut R) -> Result<PathState> {
    Ok(Stepper::new(p, 1.0)?.step(state, rng))
}

/// Draw of `∫₀^Δ e^{−κ(Δ−v)} dL_v` using `substeps` midpoint increments.
pub fn integrated_noise<R: Rng + ?Sized>(nig: &NigParams, kappa: f64, delta: f64, substeps: usize, rng: &mut R) -> Result<f64> {
    let h = delta / substeps as f64;
    let inc = nig.over_time(h)?;
    let mut acc = 0.0;
    for j in 0..substeps {
        let w = (-kappa * (delta - (j as f64 + 0.5) * h)).exp();
        acc += w * inc.draw(rng);
    }
    Ok(acc)
}

/// Random stream for path `i`: the same seed with stream number `i`.
pub fn path_rng(seed: u64, i: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(i);
    r
}

/// Streaming mean/central-moment accumulator; merging is exact and order-stable.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Moments {
    pub n: f64,
    pub mean: f64,
    m2: f64,
    m3: f64,
    m4: f64,
}

impl Moments {
    pub fn push(&mut self, x: f64) {
        let n1 = self.n;
        self.n += 1.0;
        let n = self.n;
        let delta = x - self.mean;
        let dn = delta / n;
        let dn2 = dn * dn;
        let term1 = delta * dn * n1;
        self.mean += dn;
        self.m4 += term1 * dn2 * (n * n - 3.0 * n + 3.0) + 6.0 * dn2 * self.m2 - 4.0 * dn * self.m3;
        self.m3 += term1 * dn * (n - 2.0) - 3.0 * dn * self.m2;
        self.m2 += term1;
    }

    pub fn merge(&mut self, o: &Moments) {
        if o.n == 0.0 {
            return;
        }
        if self.n == 0.0 {
            *self = *o;
            return;
        }
        let (na, nb) = (self.n, o.n);
        let n = na + nb;
        let d = o.mean - self.mean;
        let d2 = d * d;
        let m2 = self.m2 + o.m2 + d2 * na * nb / n;
        let m3 = self.m3 + o.m3 + d * d2 * na * nb * (na - nb) / (n * n) + 3.0 * d * (na * o.m2 - nb * self.m2) / n;
        let m4 = self.m4
            + o.m4
            + d2 * d2 * na * nb * (na * na - na * nb + nb * nb) / (n * n * n)
            + 6.0 * d2 * (na * na * o.m2 + nb * nb * self.m2) / (n * n)
            + 4.0 * d * (na * o.m3 - nb * self.m3) / n;
        *self = Moments { n, mean: self.mean + d * nb / n, m2, m3, m4 };
    }

    /// Unbiased sample variance.
    pub fn variance(&self) -> f64 {
        if self.n < 2.0 {
            0.0
        } else {
            self.m2 / (self.n - 1.0)
        }
    }

    pub fn sd(&self) -> f64 {
        self.variance().sqrt()
    }

    pub fn skewness(&self) -> f64 {
        if self.m2 == 0.0 {
            0.0
        } else {
            self.n.sqrt() * self.m3 / self.m2.powf(1.5)
        }
    }

    pub fn excess_kurtosis(&self) -> f64 {
        if self.m2 == 0.0 {
            0.0
        } else {
            self.n * self.m4 / (self.m2 * self.m2) - 3.0
        }
    }

    pub fn report(&self) -> McReport {
        let se = (self.variance() / self.n).sqrt();
        McReport {
            estimate: self.mean,
            std_error: se,
            n_paths: self.n as usize,
            ci99: (self.mean - 2.576 * se, self.mean + 2.576 * se),
            heavy_tail: self.excess_kurtosis() > 100.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct McReport {
    pub estimate: f64,
    pub std_error: f64,
    pub n_paths: usize,
    pub ci99: (f64, f64),
    /// Set when the sample excess kurtosis exceeds 100.
    pub heavy_tail: bool,
}

impl McReport {
    pub fn contains(&self, v: f64) -> bool {
        self.ci99.0 <= v && v <= self.ci99.1
    }

    /// Distance to `v` in standard errors.
    pub fn z_score(&self, v: f64) -> f64 {
        if self.std_error == 0.0 {
            if self.estimate == v {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            (self.estimate - v) / self.std_error
        }
    }
}

/// Monte Carlo driver. Path `i` always draws from substream `i`, and batches are merged
/// in index order, so results do not depend on the thread count.
#[derive(Debug, Clone, Copy)]
pub struct McEngine {
    pub n_paths: usize,
    pub seed: u64,
    pub batch_size: usize,
}

impl McEngine {
    pub fn new(n_paths: usize, seed: u64) -> Self {
        McEngine { n_paths, seed, batch_size: 4096 }
    }

    fn batches(&self) -> Result<Vec<(usize, usize)>> {
        if self.n_paths == 0 {
            return Err(EtmError::Usage("n_paths must be at least 1".into()));
        }
        let b = self.batch_size.max(1);
        Ok((0..self.n_paths.div_ceil(b)).map(|k| (k * b, ((k + 1) * b).min(self.n_paths))).collect())
    }

    /// Expectation of `dim` path functionals at once.
    pub fn run<F>(&self, dim: usize, f: F) -> Result<Vec<McReport>>
    where
        F: Fn(usize, &mut ChaCha8Rng, &mut [f64]) + Sync,
    {
        let parts: Vec<Vec<Moments>> = self
            .batches()?
            .into_par_iter()
            .map(|(lo, hi)| {
                let mut acc = vec![Moments::default(); dim];
                let mut out = vec![0.0; dim];
                for i in lo..hi {
                    let mut rng = path_rng(self.seed, i as u64);
                    f(i, &mut rng, &mut out);
                    for (a, v) in acc.iter_mut().zip(&out) {
                        a.push(*v);
                    }
                }
                acc
            })
            .collect();
        let mut total = vec![Moments::default(); dim];
        for part in &parts {
            for (t, p) in total.iter_mut().zip(part) {
                t.merge(p);
            }
        }
        Ok(total.iter().map(Moments::report).collect())
    }

    /// Per-path outputs, in path order: `result[i][j]` is functional `j` on path `i`.
    pub fn collect<F>(&self, dim: usize, f: F) -> Result<Vec<Vec<f64>>>
    where
        F: Fn(usize, &mut ChaCha8Rng, &mut [f64]) + Sync,
    {
        let parts: Vec<Vec<Vec<f64>>> = self
            .batches()?
            .into_par_iter()
            .map(|(lo, hi)| {
                (lo..hi)
                    .map(|i| {
                        let mut rng = path_rng(self.seed, i as u64);
                        let mut out = vec![0.0; dim];
                        f(i, &mut rng, &mut out);
                        out
                    })
                    .collect()
            })
            .collect();
        Ok(parts.into_iter().flatten().collect())
    }
}

/// Simulate `horizon` daily steps from `initial` on every path and hand the whole
/// trajectory (initial state first) to `payoff`, which fills `dim` outputs.
pub fn simulate_window<F>(initial: PathState, p: &EtmParams, horizon: usize, engine: &McEngine, dim: usize, payoff: F) -> Result<Vec<McReport>>
where
    F: Fn(&[PathState], &mut [f64]) + Sync,
{
    if horizon == 0 {
        return Err(EtmError::Usage("horizon must be at least one day".into()));
    }
    let stepper = Stepper::new(p, 1.0)?;
    engine.run(dim, |_, rng, out| {
        let path = trajectory(&stepper, initial, horizon, rng);
        payoff(&path, out);
    })
}

/// Expectation of a single path functional.
pub fn mc_expect<F>(initial: PathState, p: &EtmParams, horizon: usize, engine: &McEngine, payoff: F) -> Result<McReport>
where
    F: Fn(&[PathState]) -> f64 + Sync,
{
    Ok(simulate_window(initial, p, horizon, engine, 1, |path, out| out[0] = payoff(path))?[0])
}

pub fn trajectory<R: Rng + ?Sized>(stepper: &Stepper, initial: PathState, horizon: usize, rng: &mut R) -> Vec<PathState> {
    let mut path = Vec::with_capacity(horizon + 1);
    path.push(initial);
    for k in 0..horizon {
        let next = stepper.step(&path[k], rng);
        path.push(next);
    }
    path
}

/// Write a trajectory as CSV rows `t,x,temp`.
pub fn write_path_csv<W: Write>(path: &[PathState], w: W) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(["t", "x", "temp"]).map_err(|e| EtmError::Data(e.to_string()))?;
    for s in path {
        wr.write_record([format!("{:?}", s.t), format!("{:.17e}", s.x), format!("{:.17e}", s.temp)])
            .map_err(|e| EtmError::Data(e.to_string()))?;
    }
    wr.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn noiseless_mean_reversion() {
        let mut p = EtmParams::reference_france();
        p.lambda = 0.0;
        p.sigma_t = 1e-60;
        p.nig = NigParams::new(1.0, 0.0, 1e-60, 0.0).unwrap();
        let s0 = PathState { t: 3.0, x: p.mu_x(3.0) + 0.5, temp: p.mu_t(3.0) };
        let s1 = step(&s0, &p, &mut path_rng(1, 0)).unwrap();
        assert!((s1.x - p.mu_x(4.0) - 0.5 * (-p.kappa_x).exp()).abs() < 1e-14, "{:?}", s1.x - p.mu_x(4.0) - 0.5 * (-p.kappa_x).exp());
    }

    #[test]
    fn same_seed_same_path() {
        let p = EtmParams::reference_france();
        let st = Stepper::new(&p, 1.0).unwrap();
        let a = trajectory(&st, PathState::on_mean(&p, 0.0), 20, &mut path_rng(9, 4));
        let b = trajectory(&st, PathState::on_mean(&p, 0.0), 20, &mut path_rng(9, 4));
        assert_eq!(a, b);
        let c = trajectory(&st, PathState::on_mean(&p, 0.0), 20, &mut path_rng(9, 5));
        assert_ne!(a, c);
    }

    #[test]
    fn constant_payoff_has_zero_error() {
        let p = EtmParams::reference_france();
        let r = mc_expect(PathState::on_mean(&p, 0.0), &p, 1, &McEngine::new(500, 1), |_| 2.5).unwrap();
        assert_eq!(r.estimate, 2.5);
        assert_eq!(r.std_error, 0.0);
        assert!(McEngine::new(0, 1).run(1, |_, _, o| o[0] = 1.0).is_err());
    }

    #[test]
    fn moment_merge_matches_single_pass() {
        let xs: Vec<f64> = (0..1000).map(|i| ((i * 37 % 101) as f64).sqrt() + 1e3).collect();
        let mut whole = Moments::default();
        xs.iter().for_each(|&x| whole.push(x));
        let mut a = Moments::default();
        let mut b = Moments::default();
        xs[..313].iter().for_each(|&x| a.push(x));
        xs[313..].iter().for_each(|&x| b.push(x));
        a.merge(&b);
        assert!((a.mean - whole.mean).abs() < 1e-12 * whole.mean);
        assert!((a.variance() - whole.variance()).abs() < 1e-10);
        assert!((a.skewness() - whole.skewness()).abs() < 1e-9);
        assert!((a.excess_kurtosis() - whole.excess_kurtosis()).abs() < 1e-9);
    }

    #[test]
    fn results_independent_of_batching() {
        let p = EtmParams::reference_france();
        let mut e = McEngine::new(3000, 11);
        let a = mc_expect(PathState::on_mean(&p, 0.0), &p, 3, &e, |path| path[3].price()).unwrap();
        e.batch_size = 257;
        let b = mc_expect(PathState::on_mean(&p, 0.0), &p, 3, &e, |path| path[3].price()).unwrap();
        assert!((a.estimate - b.estimate).abs() < 1e-12 * a.estimate);
    }
}
