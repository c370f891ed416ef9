//! Residual dependence between price and temperature: the coupling estimate, its share
//! of the price noise variance and a rank χ² test, with and without coupling.
//!
//! ```bash
//! cargo run --release -p etm --example dependence
//! ```

use etm::estimate::{dependence_diagnostics, fit_drift_t, fit_drift_x, fit_lambda, fit_sigma_t, variance_share};
use etm::validation::synthetic_series;
use etm::EtmParams;

fn main() -> etm::Result<()> {
    let reference = EtmParams::reference_france();
    println!("variance share at the reference parameters: {:.3}%", 100.0 * variance_share(&reference));
    for lambda in [0.0, -0.007, -0.05] {
        let p = reference.with_lambda(lambda);
        let s = synthetic_series(&p, 10_000, 0, 9)?;
        let (dx, dt) = (fit_drift_x(&s)?, fit_drift_t(&s)?);
        let sig = fit_sigma_t(&dt.residuals, dt.kappa);
        let lam = fit_lambda(&dx.residuals, &dt.residuals, dx.kappa, dt.kappa, sig.sigma);
        let d = dependence_diagnostics(&dx.residuals, &dt.residuals, 4)?;
        println!(
            "λ={lambda:>7}: fitted {lam:>9.5}  pearson {:>7.4}  χ²={:>7.2} ({} dof) p={:.4}",
            d.pearson, d.chi2, d.dof, d.p_value
        );
    }
    Ok(())
}
