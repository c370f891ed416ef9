//! CSV and JSON plumbing for the command line and the examples.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use chrono::NaiveDate;
use serde::Serialize;

use crate::error::{EtmError, Result};
use crate::estimate::SeriesPair;
use crate::hedging::HedgeCoefficients;
use crate::model::EtmParams;

/// One observation per row: `date,value`, ISO dates, optional header.
pub fn read_series<R: Read>(input: R) -> Result<Vec<(NaiveDate, f64)>> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(false).trim(csv::Trim::All).comment(Some(b'#')).from_reader(input);
    let mut out = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| EtmError::Data(format!("row {}: {e}", line + 1)))?;
        if rec.len() != 2 {
            return Err(EtmError::Data(format!("row {}: expected 2 fields, found {}", line + 1, rec.len())));
        }
        let date = match NaiveDate::parse_from_str(&rec[0], "%Y-%m-%d") {
            Ok(d) => d,
            Err(_) if line == 0 => continue,
            Err(e) => return Err(EtmError::Data(format!("row {}: bad date {:?}: {e}", line + 1, &rec[0]))),
        };
        let v: f64 = rec[1].parse().map_err(|_| EtmError::Data(format!("row {}: bad value {:?}", line + 1, &rec[1])))?;
        out.push((date, v));
    }
    if out.is_empty() {
        return Err(EtmError::Data("no observations".into()));
    }
    Ok(out)
}

pub fn read_series_file(path: &Path) -> Result<Vec<(NaiveDate, f64)>> {
    let f = File::open(path).map_err(|e| EtmError::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))?;
    read_series(f).map_err(|e| match e {
        EtmError::Data(m) => EtmError::Data(format!("{}: {m}", path.display())),
        other => other,
    })
}

/// Pair price levels with temperatures on identical dates; prices are logged.
pub fn align(prices: &[(NaiveDate, f64)], temps: &[(NaiveDate, f64)], allow_gaps: bool) -> Result<SeriesPair> {
    if prices.len() != temps.len() {
        return Err(EtmError::Data(format!("{} price rows vs {} temperature rows", prices.len(), temps.len())));
    }
    let mut dates = Vec::with_capacity(prices.len());
    let mut x = Vec::with_capacity(prices.len());
    let mut temp = Vec::with_capacity(prices.len());
    for (&(dp, s), &(dt, t)) in prices.iter().zip(temps) {
        if dp != dt {
            return Err(EtmError::Data(format!("date misalignment: price {dp} vs temperature {dt}")));
        }
        if !(s > 0.0) {
            return Err(EtmError::Data(format!("non-positive price {s} on {dp}")));
        }
        dates.push(dp);
        x.push(s.ln());
        temp.push(t);
    }
    SeriesPair::new(dates, x, temp, allow_gaps)
}

/// 17 significant digits.
pub fn fmt_machine(v: f64) -> String {
    format!("{v:.16e}")
}

/// 6 significant digits, fixed notation where it stays readable.
pub fn fmt_human(v: f64) -> String {
    if v == 0.0 || !v.is_finite() {
        return format!("{v}");
    }
    let mag = v.abs().log10().floor() as i32;
    if (-4..15).contains(&mag) {
        format!("{:.*}", (5 - mag).max(0) as usize, v)
    } else {
        format!("{v:.5e}")
    }
}

/// JSON keeps the shortest representation that round-trips each double.
pub fn write_json<T: Serialize, W: Write>(value: &T, mut w: W) -> Result<()> {
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| EtmError::Io(std::io::Error::other(e.to_string())))?;
    writeln!(w).map_err(|e| EtmError::Io(std::io::Error::other(e.to_string())))
}

pub fn write_json_file<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    let f = File::create(path).map_err(|e| EtmError::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))?;
    write_json(value, BufWriter::new(f))
}

/// Rows `date,c0,c1,c2`, one per delivery day.
pub fn write_coefficients_csv<W: Write>(coeffs: &HedgeCoefficients, params: &EtmParams, w: W) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    let io = |e: csv::Error| EtmError::Io(std::io::Error::other(e.to_string()));
    wr.write_record(["date", "c0", "c1", "c2"]).map_err(io)?;
    for (k, sys) in coeffs.systems.iter().enumerate() {
        let date = params.date_at(coeffs.t1 + k as i64).to_string();
        let [c0, c1, c2] = sys.solution.map(fmt_machine);
        wr.write_record([date, c0, c1, c2]).map_err(io)?;
    }
    wr.flush().map_err(|e| EtmError::Io(std::io::Error::other(e.to_string())))
}

pub fn read_params_file(path: &Path) -> Result<EtmParams> {
    let s = std::fs::read_to_string(path).map_err(|e| EtmError::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))?;
    EtmParams::from_config_str(&s)
}

pub fn write_params_file(params: &EtmParams, path: &Path) -> Result<()> {
    std::fs::write(path, params.to_config_string()).map_err(|e| EtmError::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn series_with_header_and_misalignment() {
        let p = read_series("date,value\n2018-01-01,50.5\n2018-01-02,48\n".as_bytes()).unwrap();
        let t = read_series("2018-01-01,3.5\n2018-01-03,4\n".as_bytes()).unwrap();
        assert_eq!(p.len(), 2);
        assert!(matches!(align(&p, &t, false), Err(EtmError::Data(_))));
        assert!(matches!(read_series("2018-01-01,abc\n".as_bytes()), Err(EtmError::Data(_))));
        assert!(matches!(read_series("2018-01-01,1\n2018-13-01,2\n".as_bytes()), Err(EtmError::Data(_))));
    }

    #[test]
    fn number_formats() {
        assert_eq!(fmt_human(22055.123456), "22055.1");
        assert_eq!(fmt_human(-0.000754321), "-0.000754321");
        let s = fmt_machine(0.1);
        assert_eq!(s.parse::<f64>().unwrap(), 0.1);
        assert_eq!(s, "1.0000000000000001e-1");
    }
}
