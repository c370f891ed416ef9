//! Transform prices of an electricity call, its square and the exercise probability,
//! across strikes and damping parameters.
//!
//! ```bash
//! cargo run --release -p etm --example fourier
//! ```

use etm::fourier::{call_price, call_sq_price, tail_probability, TransformConfig};
use etm::pricing::ConditionalLaw;
use etm::{CfContext, EtmParams, PathState};

fn main() -> etm::Result<()> {
    let p = EtmParams::reference_france();
    let ctx = CfContext::matched(p.clone());
    let law = ConditionalLaw::new(&ctx, PathState::on_mean(&p, 1062.0), 30.0)?;
    let cf = law.log_price_cf();
    println!("E[S] = {:.6}", law.e_s);
    for strike in [40.0, 50.0, 60.0] {
        print!("K={strike:>4}: tail {:.6}", tail_probability(&cf, strike, &TransformConfig::default())?);
        for a in [0.25, 0.5, 0.75] {
            let cfg = TransformConfig::default().with_damping(a);
            print!("  a={a}: C={:.8} C²={:.6}", call_price(&cf, strike, &cfg)?, call_sq_price(&cf, strike, &cfg)?);
        }
        println!();
    }
    Ok(())
}
