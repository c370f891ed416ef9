//! Write a synthetic daily dataset at the reference France parameters, plus the
//! parameter file itself, for use with the `etm` command line.
//!
//! ```bash
//! cargo run --release -p etm --example simulate -- out/ 3000 7
//! ```

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use etm::simulate::{path_rng, trajectory, Stepper};
use etm::{EtmParams, PathState};

fn main() -> etm::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let dir = PathBuf::from(args.first().map_or("synthetic", String::as_str));
    let days: usize = args.get(1).map_or(3000, |s| s.parse().expect("day count"));
    let seed: u64 = args.get(2).map_or(7, |s| s.parse().expect("seed"));
    std::fs::create_dir_all(&dir)?;

    let p = EtmParams::reference_france();
    etm::io::write_params_file(&p, &dir.join("france.toml"))?;

    let stepper = Stepper::new(&p, 1.0)?;
    let path = trajectory(&stepper, PathState::on_mean(&p, 0.0), days - 1, &mut path_rng(seed, 0));
    let mut prices = BufWriter::new(File::create(dir.join("prices.csv"))?);
    let mut temps = BufWriter::new(File::create(dir.join("temps.csv"))?);
    writeln!(prices, "date,value")?;
    writeln!(temps, "date,value")?;
    for s in &path {
        let date = p.date_at(s.t.round() as i64);
        writeln!(prices, "{date},{:?}", s.price())?;
        writeln!(temps, "{date},{:?}", s.temp)?;
    }
    let mut full = BufWriter::new(File::create(dir.join("path.csv"))?);
    etm::simulate::write_path_csv(&path, &mut full)?;
    full.flush()?;
    println!("wrote {days} days to {}", dir.display());
    Ok(())
}
