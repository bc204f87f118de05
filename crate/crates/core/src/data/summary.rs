use serde::Serialize;

use super::dataset::SurvivalDataset;
use crate::error::{Error, Result};

/// One treatment-by-stratum cell.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRow {
    pub treatment: f64,
    pub stratum: usize,
    pub n: usize,
    pub events: usize,
    pub risk_time: f64,
}

/// Sample size, event count and total risk time per (treatment, stratum)
/// cell, ordered by treatment value then stratum.
pub fn summarize(data: &SurvivalDataset) -> Result<Vec<SummaryRow>> {
    if data.is_empty() {
        return Err(Error::Summary("dataset has no subjects".into()));
    }
    let mut rows: Vec<SummaryRow> = Vec::new();
    for i in 0..data.len() {
        let trt = data.covariate_row(i)[0];
        let s = data.strata()[i];
        let pos = rows
            .iter()
            .position(|r| r.treatment.to_bits() == trt.to_bits() && r.stratum == s);
        let row = match pos {
            Some(p) => &mut rows[p],
            None => {
                rows.push(SummaryRow {
                    treatment: trt,
                    stratum: s,
                    n: 0,
                    events: 0,
                    risk_time: 0.0,
                });
                rows.last_mut().expect("just pushed")
            }
        };
        row.n += 1;
        row.events += usize::from(data.events()[i]);
        row.risk_time += data.times()[i];
    }
    rows.sort_by(|a, b| a.treatment.total_cmp(&b.treatment).then(a.stratum.cmp(&b.stratum)));
    Ok(rows)
}
