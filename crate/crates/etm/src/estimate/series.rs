use chrono::{Datelike, NaiveDate};

use crate::error::{EtmError, Result};
use crate::simulate::PathState;

/// Aligned daily observations of log-price and temperature.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesPair {
    pub dates: Vec<NaiveDate>,
    pub x: Vec<f64>,
    pub temp: Vec<f64>,
    /// Weekday of the first sample, Monday = 0.
    pub anchor: u8,
}

impl SeriesPair {
    /// Build a pair; missing calendar days are rejected unless `allow_gaps` is set.
    pub fn new(dates: Vec<NaiveDate>, x: Vec<f64>, temp: Vec<f64>, allow_gaps: bool) -> Result<Self> {
        if dates.len() != x.len() || dates.len() != temp.len() {
            return Err(EtmError::Data(format!(
                "series lengths differ: {} dates, {} prices, {} temperatures",
                dates.len(),
                x.len(),
                temp.len()
            )));
        }
        if dates.is_empty() {
            return Err(EtmError::Data("empty series".into()));
        }
        for w in dates.windows(2) {
            let gap = (w[1] - w[0]).num_days();
            if gap <= 0 {
                return Err(EtmError::Data(format!("dates not strictly increasing at {}", w[1])));
            }
            if gap > 1 && !allow_gaps {
                return Err(EtmError::Data(format!("missing days between {} and {}", w[0], w[1])));
            }
        }
        if let Some(i) = x.iter().chain(&temp).position(|v| !v.is_finite()) {
            return Err(EtmError::Data(format!("non-finite observation at position {i}")));
        }
        let anchor = dates[0].weekday().num_days_from_monday() as u8;
        Ok(SeriesPair { dates, x, temp, anchor })
    }

    /// Series from a simulated trajectory whose day 0 falls on `epoch`.
    pub fn from_path(path: &[PathState], epoch: NaiveDate) -> Result<Self> {
        let dates = path.iter().map(|s| epoch + chrono::Duration::days(s.t.round() as i64)).collect();
        SeriesPair::new(dates, path.iter().map(|s| s.x).collect(), path.iter().map(|s| s.temp).collect(), false)
    }

    pub fn len(&self) -> usize {
        self.dates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dates.is_empty()
    }

    /// Day offset of every sample from the first one.
    pub fn offsets(&self) -> Vec<i64> {
        self.dates.iter().map(|d| (*d - self.dates[0]).num_days()).collect()
    }

    /// Indices `k` such that samples `k` and `k+1` are one day apart.
    pub fn transitions(&self) -> Vec<usize> {
        let off = self.offsets();
        (0..self.len().saturating_sub(1)).filter(|&k| off[k + 1] == off[k] + 1).collect()
    }
}
