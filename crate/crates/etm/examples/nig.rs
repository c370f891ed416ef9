//! NIG law of the daily log-price noise: density, moments, cumulant and sampling.
//!
//! ```bash
//! cargo run --release -p etm --example nig
//! ```

use etm::simulate::{path_rng, Moments};
use etm::NigParams;

fn main() -> etm::Result<()> {
    let nig = NigParams::centered(4.189, -0.379, 0.125)?;
    println!("alpha {} beta {} delta {} m {:.6}", nig.alpha(), nig.beta(), nig.delta(), nig.m());

    let exact = nig.moments();
    let mut rng = path_rng(11, 0);
    let mut m = Moments::default();
    nig.sample(&mut rng, 200_000).into_iter().for_each(|x| m.push(x));
    println!("{:>16} {:>12} {:>12}", "", "closed form", "sample");
    println!("{:>16} {:>12.6} {:>12.6}", "mean", exact.mean, m.mean);
    println!("{:>16} {:>12.6} {:>12.6}", "variance", exact.variance, m.variance());
    println!("{:>16} {:>12.4} {:>12.4}", "skewness", exact.skewness, m.skewness());
    println!("{:>16} {:>12.3} {:>12.3}", "excess kurtosis", exact.excess_kurtosis, m.excess_kurtosis());

    for x in [-0.6, -0.2, 0.0, 0.2, 0.6] {
        println!("pdf({x:>5}) = {:.6}", nig.pdf(x));
    }
    println!("cf(1)  = {:.6}", nig.cf(1.0));
    Ok(())
}
