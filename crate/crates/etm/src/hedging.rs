//! Minimum-variance static hedges of E-HDD and double-sided quanto payoffs, and the
//! Monte Carlo PnL studies that assess them.

use serde::Serialize;

use crate::charfns::CfContext;
use crate::error::{EtmError, Result};
use crate::fourier::TransformConfig;
use crate::pricing::{ConditionalLaw, OptionLeg, QuantoVariant, TruncationBounds};
use crate::simulate::{trajectory, McEngine, Moments, PathState, Stepper};

/// Largest accepted 1-norm condition number of a Gram matrix.
pub const MAX_CONDITION: f64 = 1e12;

/// A 3×3 first-order system `gram · solution = rhs`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HedgeSystem {
    pub gram: [[f64; 3]; 3],
    pub rhs: [f64; 3],
    pub solution: [f64; 3],
    pub cond_estimate: f64,
}

/// `P A Pᵀ = L D Lᵀ` with diagonal pivoting on the largest remaining diagonal entry.
struct Ldl {
    perm: [usize; 3],
    l: [[f64; 3]; 3],
    d: [f64; 3],
}

impl Ldl {
    fn factor(a: &[[f64; 3]; 3]) -> Result<Self> {
        let mut m = *a;
        let mut perm = [0, 1, 2];
        let mut l = [[0.0; 3]; 3];
        let mut d = [0.0; 3];
        for k in 0..3 {
            let p = (k..3).max_by(|&i, &j| m[i][i].abs().total_cmp(&m[j][j].abs())).expect("nonempty");
            if p != k {
                m.swap(k, p);
                for row in m.iter_mut() {
                    row.swap(k, p);
                }
                perm.swap(k, p);
                l.swap(k, p);
                for row in l.iter_mut() {
                    row.swap(k, p);
                }
            }
            let pivot = m[k][k];
            if !(pivot.abs() > 0.0) || !pivot.is_finite() {
                return Err(EtmError::IllConditioned(f64::INFINITY));
            }
            d[k] = pivot;
            l[k][k] = 1.0;
            for i in k + 1..3 {
                l[i][k] = m[i][k] / pivot;
            }
            for i in k + 1..3 {
                for j in k + 1..3 {
                    m[i][j] -= l[i][k] * pivot * l[j][k];
                }
            }
        }
        Ok(Ldl { perm, l, d })
    }

    fn solve(&self, b: &[f64; 3]) -> [f64; 3] {
        let mut y = [b[self.perm[0]], b[self.perm[1]], b[self.perm[2]]];
        for i in 0..3 {
            for k in 0..i {
                y[i] -= self.l[i][k] * y[k];
            }
        }
        for i in 0..3 {
            y[i] /= self.d[i];
        }
        for i in (0..3).rev() {
            for k in i + 1..3 {
                y[i] -= self.l[k][i] * y[k];
            }
        }
        let mut x = [0.0; 3];
        for i in 0..3 {
            x[self.perm[i]] = y[i];
        }
        x
    }
}

fn norm1(a: &[[f64; 3]; 3]) -> f64 {
    (0..3).map(|j| (0..3).map(|i| a[i][j].abs()).sum::<f64>()).fold(0.0, f64::max)
}

impl HedgeSystem {
    pub fn solve(gram: [[f64; 3]; 3], rhs: [f64; 3]) -> Result<Self> {
        for i in 0..3 {
            for j in 0..i {
                let scale = gram[i][j].abs().max(gram[j][i].abs()).max(1e-300);
                if (gram[i][j] - gram[j][i]).abs() > 1e-12 * scale {
                    return Err(EtmError::Domain("Gram matrix is not symmetric".into()));
                }
            }
        }
        let f = Ldl::factor(&gram)?;
        let mut inv = [[0.0; 3]; 3];
        for j in 0..3 {
            let mut e = [0.0; 3];
            e[j] = 1.0;
            let c = f.solve(&e);
            for i in 0..3 {
                inv[i][j] = c[i];
            }
        }
        let cond = norm1(&gram) * norm1(&inv);
        if !(cond <= MAX_CONDITION) {
            return Err(EtmError::IllConditioned(cond));
        }
        Ok(HedgeSystem { gram, rhs, solution: f.solve(&rhs), cond_estimate: cond })
    }

    /// `‖rhs − gram·solution‖ / ‖rhs‖` (max norms).
    pub fn relative_residual(&self) -> f64 {
        let mut r: f64 = 0.0;
        let mut n: f64 = 0.0;
        for i in 0..3 {
            let gx: f64 = (0..3).map(|j| self.gram[i][j] * self.solution[j]).sum();
            r = r.max((self.rhs[i] - gx).abs());
            n = n.max(self.rhs[i].abs());
        }
        r / n
    }

    /// Smallest eigenvalue of the Gram matrix.
    pub fn min_eigenvalue(&self) -> f64 {
        let m = nalgebra::Matrix3::from_fn(|i, j| self.gram[i][j]);
        m.symmetric_eigenvalues().min()
    }
}

/// Instruments `(1, (T̄ − T)⁺, S)` against the target `S (T̄ − T)⁺`.
pub fn ehdd_hedge_coeffs(ctx: &CfContext, state: PathState, delta: f64, t_bar: f64, bounds: &TruncationBounds) -> Result<HedgeSystem> {
    let law = ConditionalLaw::new(ctx, state, delta)?;
    let (h, h2) = (law.e_hdd(t_bar), law.e_hdd_sq(t_bar));
    let (s, s2) = (law.e_s, law.e_s2);
    let sh = law.e_s_hdd(t_bar, bounds)?;
    let sh2 = law.e_s_hdd_sq(t_bar, bounds)?;
    let s2h = law.e_s2_hdd(t_bar, bounds)?;
    HedgeSystem::solve([[1.0, h, s], [h, h2, sh], [s, sh, s2]], [sh, sh2, s2h])
}

/// Instruments `(1, (T̄ − T)⁺, (S − S̄)⁺)` against the target `(S − S̄)⁺ (T̄ − T)⁺`;
/// cross moments to first order in `λ`.
pub fn quanto_hedge_coeffs(ctx: &CfContext, state: PathState, delta: f64, s_bar: f64, t_bar: f64, cfg: &TransformConfig) -> Result<HedgeSystem> {
    let law = ConditionalLaw::new(ctx, state, delta)?;
    let leg = OptionLeg::decoupled(ctx, state, delta, s_bar, cfg)?;
    let (h, h2) = (law.e_hdd(t_bar), law.e_hdd_sq(t_bar));
    let c = law.call(s_bar, cfg)?;
    let c2 = law.call_sq(s_bar, cfg)?;
    let ch = law.quanto_taylor(&leg, s_bar, t_bar, QuantoVariant::Derived).value;
    let ch2 = law.quanto_hdd_sq_taylor(&leg, s_bar, t_bar).value;
    let c2h = law.quanto_sq_hdd_taylor(&leg, s_bar, t_bar).value;
    HedgeSystem::solve([[1.0, h, c], [h, h2, ch], [c, ch, c2]], [ch, ch2, c2h])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum HedgeTarget {
    Ehdd,
    Quanto,
}

/// Static hedge for every delivery day `t1..=t2`, all computed at `t0 = t1 − 30`.
#[derive(Debug, Clone, Serialize)]
pub struct HedgeCoefficients {
    pub target: HedgeTarget,
    pub t0: i64,
    pub t1: i64,
    pub t2: i64,
    pub s_bar: f64,
    pub t_bar: f64,
    pub systems: Vec<HedgeSystem>,
}

impl HedgeCoefficients {
    pub fn compute(target: HedgeTarget, ctx: &CfContext, t1: i64, t2: i64, s_bar: f64, t_bar: f64) -> Result<Self> {
        if t2 < t1 {
            return Err(EtmError::Usage(format!("empty delivery window {t1}..{t2}")));
        }
        let t0 = t1 - 30;
        let state = PathState::on_mean(&ctx.params, t0 as f64);
        let bounds = TruncationBounds::default();
        let cfg = TransformConfig::default();
        let systems = (t1..=t2)
            .map(|t| {
                let delta = (t - t0) as f64;
                match target {
                    HedgeTarget::Ehdd => ehdd_hedge_coeffs(ctx, state, delta, t_bar, &bounds),
                    HedgeTarget::Quanto => quanto_hedge_coeffs(ctx, state, delta, s_bar, t_bar, &cfg),
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(HedgeCoefficients { target, t0, t1, t2, s_bar, t_bar, systems })
    }

    pub fn zero(target: HedgeTarget, t1: i64, t2: i64, s_bar: f64, t_bar: f64) -> Self {
        let sys = HedgeSystem { gram: [[0.0; 3]; 3], rhs: [0.0; 3], solution: [0.0; 3], cond_estimate: 0.0 };
        HedgeCoefficients { target, t0: t1 - 30, t1, t2, s_bar, t_bar, systems: vec![sys; (t2 - t1 + 1) as usize] }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Histogram {
    pub lo: f64,
    pub hi: f64,
    pub counts: Vec<u64>,
}

impl Histogram {
    pub fn of(xs: &[f64], bins: usize) -> Self {
        let lo = xs.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut counts = vec![0u64; bins];
        let w = (hi - lo) / bins as f64;
        for &x in xs {
            let b = if w > 0.0 { (((x - lo) / w) as usize).min(bins - 1) } else { 0 };
            counts[b] += 1;
        }
        Histogram { lo, hi, counts }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PnlSummary {
    pub mean: f64,
    pub sd: f64,
    pub histogram: Histogram,
}

impl PnlSummary {
    fn of(xs: &[f64]) -> Self {
        let mut m = Moments::default();
        xs.iter().for_each(|&x| m.push(x));
        PnlSummary { mean: m.mean, sd: m.sd(), histogram: Histogram::of(xs, 60) }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PnlReport {
    pub n_paths: usize,
    pub unhedged: PnlSummary,
    pub hedged: PnlSummary,
}

/// Simulate monthly paths under `sim` and evaluate the hedge `coeffs` on each:
/// unhedged PnL `−Σ payoff`, hedged `Σ (c⁰ + c¹ hdd + c² instrument − payoff)`.
pub fn pnl_study(coeffs: &HedgeCoefficients, sim: &crate::model::EtmParams, engine: &McEngine) -> Result<PnlReport> {
    let stepper = Stepper::new(sim, 1.0)?;
    let t0 = coeffs.t0;
    let initial = PathState::on_mean(sim, t0 as f64);
    let horizon = (coeffs.t2 - t0) as usize;
    let rows = engine.collect(2, |_, rng, out| {
        let path = trajectory(&stepper, initial, horizon, rng);
        let (mut unhedged, mut hedged) = (0.0, 0.0);
        for (k, sys) in coeffs.systems.iter().enumerate() {
            let s = path[(coeffs.t1 - t0) as usize + k];
            let hdd = (coeffs.t_bar - s.temp).max(0.0);
            let price = s.price();
            let (payoff, instrument) = match coeffs.target {
                HedgeTarget::Ehdd => (price * hdd, price),
                HedgeTarget::Quanto => {
                    let call = (price - coeffs.s_bar).max(0.0);
                    (call * hdd, call)
                }
            };
            let c = &sys.solution;
            unhedged -= payoff;
            hedged += c[0] + c[1] * hdd + c[2] * instrument - payoff;
        }
        out[0] = unhedged;
        out[1] = hedged;
    })?;
    let un: Vec<f64> = rows.iter().map(|r| r[0]).collect();
    let he: Vec<f64> = rows.iter().map(|r| r[1]).collect();
    Ok(PnlReport { n_paths: rows.len(), unhedged: PnlSummary::of(&un), hedged: PnlSummary::of(&he) })
}

/// Hedges built with the true coupling and with `λ = 0`, both simulated under the true law.
#[derive(Debug, Clone, Serialize)]
pub struct MisspecificationReport {
    pub true_lambda: PnlReport,
    pub zero_lambda: PnlReport,
}

pub fn lambda_misspecification_study(target: HedgeTarget, ctx: &CfContext, t1: i64, t2: i64, s_bar: f64, t_bar: f64, engine: &McEngine) -> Result<MisspecificationReport> {
    let truth = HedgeCoefficients::compute(target, ctx, t1, t2, s_bar, t_bar)?;
    let zero = HedgeCoefficients::compute(target, &ctx.with_lambda(0.0), t1, t2, s_bar, t_bar)?;
    Ok(MisspecificationReport {
        true_lambda: pnl_study(&truth, &ctx.params, engine)?,
        zero_lambda: pnl_study(&zero, &ctx.params, engine)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pivoted_solve_recovers_known_solution() {
        let g = [[4.0, 1.0, 2.0], [1.0, 9.0, 3.0], [2.0, 3.0, 16.0]];
        let x = [0.5, -1.25, 2.0];
        let b = [0, 1, 2].map(|i| (0..3).map(|j| g[i][j] * x[j]).sum::<f64>());
        let s = HedgeSystem::solve(g, b).unwrap();
        for i in 0..3 {
            assert!((s.solution[i] - x[i]).abs() < 1e-14);
        }
        assert!(s.relative_residual() < 1e-15);
        assert!(s.min_eigenvalue() > 0.0);
    }

    #[test]
    fn singular_and_asymmetric_systems_are_rejected() {
        let g = [[1.0, 2.0, 3.0], [2.0, 4.0, 6.0], [3.0, 6.0, 9.0]];
        assert!(matches!(HedgeSystem::solve(g, [1.0, 2.0, 3.0]), Err(EtmError::IllConditioned(_))));
        let g = [[1.0, 2.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
        assert!(HedgeSystem::solve(g, [1.0, 2.0, 3.0]).is_err());
    }

    #[test]
    fn histogram_mass() {
        let xs: Vec<f64> = (0..1000).map(|i| (i as f64).sin()).collect();
        assert_eq!(Histogram::of(&xs, 60).counts.iter().sum::<u64>(), 1000);
    }
}
