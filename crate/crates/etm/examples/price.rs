//! Monthly prices of futures, swaps, E-HDD, E-CDD and the quanto, each next to its
//! Monte Carlo 99% interval.
//!
//! ```bash
//! cargo run --release -p etm --example price -- 2018 1 50000
//! ```

use etm::pricing::{mc_price, ContractKind, ContractSpec, Pricer};
use etm::{CfContext, EtmParams, McEngine, PathState};

fn main() -> etm::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let year: i32 = args.first().map_or(2018, |s| s.parse().expect("year"));
    let month: u32 = args.get(1).map_or(1, |s| s.parse().expect("month"));
    let n_paths: usize = args.get(2).map_or(50_000, |s| s.parse().expect("path count"));

    let p = EtmParams::reference_france();
    let pricer = Pricer::new(CfContext::matched(p.clone()));
    let (t1, t2) = p.month_window(year, month)?;
    let state = PathState::on_mean(&p, (t1 - 30) as f64);
    let engine = McEngine::new(n_paths, 5);

    for kind in [ContractKind::Future, ContractKind::Swap, ContractKind::Ehdd, ContractKind::Ecdd, ContractKind::Quanto] {
        let spec = ContractSpec::new(kind, t1 - 30, t1, t2);
        let f = pricer.price(&spec, &state)?;
        let mc = mc_price(&spec, &p, &state, &engine)?;
        let verdict = match (mc.std_error == 0.0, mc.contains(f.value)) {
            (true, _) => "no simulated path paid",
            (false, true) => "in",
            (false, false) => "out",
        };
        println!(
            "{:<7} formula {:>12.3}   mc {:>12.3}  [{:>11.3}, {:>11.3}]  {verdict}",
            format!("{kind:?}"),
            f.value,
            mc.estimate,
            mc.ci99.0,
            mc.ci99.1
        );
        if let Some(z) = f.zeroth {
            println!("        λ=0 value {z:.3}");
        }
    }
    Ok(())
}
