//! Conditional characteristic function of the log-price and its moments, against a
//! small simulation.
//!
//! ```bash
//! cargo run --release -p etm --example charfn
//! ```

use num_complex::Complex64;

use etm::simulate::mc_expect;
use etm::{CfContext, CfRule, EtmParams, McEngine, PathState};

fn main() -> etm::Result<()> {
    let p = EtmParams::reference_france();
    let state = PathState::on_mean(&p, 1062.0);
    let exact = CfContext::new(p.clone());
    let matched = CfContext::matched(p.clone());
    let simpson = CfContext::new(p.clone()).with_rule(CfRule::Simpson(64));

    for delta in [1.0, 7.0, 30.0] {
        let u = Complex64::new(1.5, 0.0);
        let a = exact.psi_x(u, state.x, state.t, delta)?;
        let b = simpson.psi_x(u, state.x, state.t, delta)?;
        let c = matched.psi_x_matched(u, state.x, state.t, delta)?;
        println!("Δ={delta:>4}: ψ(1.5) adaptive {a:.8}  simpson {b:.8}  daily-scheme {c:.8}");
    }

    let delta = 30;
    let es = matched.mean_price(state.x, state.t, delta as f64)?;
    let mc = mc_expect(state, &p, delta, &McEngine::new(50_000, 3), |path| path[delta].price())?;
    println!("E[S] in {delta} days: transform {es:.4}, simulated {:.4} ± {:.4}", mc.estimate, mc.std_error);
    Ok(())
}
