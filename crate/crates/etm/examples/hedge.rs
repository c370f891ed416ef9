//! Static minimum-variance hedge of a monthly E-HDD and of a double-sided quanto,
//! with the hedged/unhedged PnL from simulated paths.
//!
//! ```bash
//! cargo run --release -p etm --example hedge -- 2018 1 20000
//! ```

use etm::hedging::{lambda_misspecification_study, HedgeCoefficients, HedgeTarget};
use etm::{CfContext, EtmParams, McEngine};

fn main() -> etm::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let year: i32 = args.first().map_or(2018, |s| s.parse().expect("year"));
    let month: u32 = args.get(1).map_or(1, |s| s.parse().expect("month"));
    let n_paths: usize = args.get(2).map_or(20_000, |s| s.parse().expect("path count"));

    let p = EtmParams::reference_france();
    let ctx = CfContext::matched(p.clone());
    let (t1, t2) = p.month_window(year, month)?;
    let engine = McEngine::new(n_paths, 2018);

    for target in [HedgeTarget::Ehdd, HedgeTarget::Quanto] {
        let coeffs = HedgeCoefficients::compute(target, &ctx, t1, t2, 50.0, 18.0)?;
        let first = coeffs.systems[0].solution;
        println!("{target:?} {year}-{month:02}: day-1 coefficients {first:.4?}");
        let study = lambda_misspecification_study(target, &ctx, t1, t2, 50.0, 18.0, &engine)?;
        let r = &study.true_lambda;
        println!("  unhedged  mean {:>10.3}  sd {:>9.3}", r.unhedged.mean, r.unhedged.sd);
        println!("  hedged    mean {:>10.3}  sd {:>9.3}", r.hedged.mean, r.hedged.sd);
        let z = &study.zero_lambda;
        println!("  λ=0 hedge mean {:>10.3}  sd {:>9.3}", z.hedged.mean, z.hedged.sd);
    }
    Ok(())
}
