//! Recover the model from a synthetic series: drifts, temperature scale, coupling,
//! NIG noise and the rank-dependence diagnostics.
//!
//! ```bash
//! cargo run --release -p etm --example estimate -- 8000
//! ```

use etm::estimate::{estimate_params, EstimateOptions};
use etm::validation::synthetic_series;
use etm::EtmParams;

fn main() -> etm::Result<()> {
    let days: usize = std::env::args().nth(1).map_or(8000, |s| s.parse().expect("day count"));
    let truth = EtmParams::reference_france();
    let series = synthetic_series(&truth, days, 0, 42)?;
    let (fit, report) = estimate_params(&series, &EstimateOptions::default())?;

    println!("{:>8} {:>10} {:>10}", "", "truth", "fit");
    for (name, a, b) in [
        ("kappa_x", truth.kappa_x, fit.kappa_x),
        ("kappa_t", truth.kappa_t, fit.kappa_t),
        ("sigma_t", truth.sigma_t, fit.sigma_t),
        ("lambda", truth.lambda, fit.lambda),
        ("alpha", truth.nig.alpha(), fit.nig.alpha()),
        ("beta", truth.nig.beta(), fit.nig.beta()),
        ("delta", truth.nig.delta(), fit.nig.delta()),
    ] {
        println!("{name:>8} {a:>10.5} {b:>10.5}");
    }
    let d = &report.dependence;
    println!("residual correlation {:.4}, χ²={:.2} on {} dof, p={:.3}", d.pearson, d.chi2, d.dof, d.p_value);
    println!("variance share of the coupling {:.2}%", 100.0 * report.variance_share);
    Ok(())
}
