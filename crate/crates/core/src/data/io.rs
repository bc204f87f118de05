use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::dataset::{DatasetRole, StratumMap, SurvivalDataset};
use crate::error::{Error, Result};

/// Maps logical columns onto header names of a delimited file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Schema {
    pub time: String,
    pub event: String,
    /// Without a stratum column every row falls in one stratum.
    #[serde(default)]
    pub stratum: Option<String>,
    /// First entry is the treatment indicator.
    pub covariates: Vec<String>,
    /// Optional `(column, value)` row selector, e.g. a study label.
    #[serde(default)]
    pub filter: Option<(String, String)>,
}

impl Schema {
    pub fn new(time: &str, event: &str, stratum: Option<&str>, covariates: &[&str]) -> Self {
        Self {
            time: time.into(),
            event: event.into(),
            stratum: stratum.map(Into::into),
            covariates: covariates.iter().map(|c| c.to_string()).collect(),
            filter: None,
        }
    }

    pub fn with_filter(mut self, column: &str, value: &str) -> Self {
        self.filter = Some((column.into(), value.into()));
        self
    }
}

pub fn load_dataset(
    path: impl AsRef<Path>,
    schema: &Schema,
    role: DatasetRole,
    strata: &mut StratumMap,
) -> Result<SurvivalDataset> {
    let file = std::fs::File::open(path.as_ref()).map_err(|e| {
        Error::config(
            "data.path",
            format!("cannot open {}: {e}", path.as_ref().display()),
        )
    })?;
    read_dataset(file, schema, role, strata)
}

/// Reader-based form of [`load_dataset`].
pub fn read_dataset<R: Read>(
    reader: R,
    schema: &Schema,
    role: DatasetRole,
    strata: &mut StratumMap,
) -> Result<SurvivalDataset> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers()?.clone();
    let col = |name: &str| -> Result<usize> {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::MissingColumn(name.to_string()))
    };
    let time_col = col(&schema.time)?;
    let event_col = col(&schema.event)?;
    let stratum_col = schema.stratum.as_deref().map(&col).transpose()?;
    let cov_cols = schema
        .covariates
        .iter()
        .map(|c| col(c))
        .collect::<Result<Vec<_>>>()?;
    if cov_cols.is_empty() {
        return Err(Error::config(
            "data.covariates",
            "at least the treatment column must be listed",
        ));
    }
    let filter = match &schema.filter {
        Some((c, v)) => Some((col(c)?, v.as_str())),
        None => None,
    };

    let mut times = Vec::new();
    let mut events = Vec::new();
    let mut covariates = Vec::new();
    let mut labels: Vec<String> = Vec::new();
    for (idx, rec) in rdr.records().enumerate() {
        // 1-based data row, header excluded
        let row = idx + 1;
        let rec = rec?;
        if let Some((c, v)) = filter {
            if rec.get(c) != Some(v) {
                continue;
            }
        }
        let field = |c: usize, name: &str| -> Result<&str> {
            match rec.get(c) {
                Some(s) if !s.is_empty() && s != "NA" => Ok(s),
                _ => Err(Error::Parse {
                    row,
                    msg: format!("missing value in column `{name}`"),
                }),
            }
        };
        let t: f64 = field(time_col, &schema.time)?
            .parse()
            .map_err(|_| Error::Parse {
                row,
                msg: format!("column `{}` is not numeric", schema.time),
            })?;
        if !(t.is_finite() && t >= 0.0) {
            return Err(Error::Parse {
                row,
                msg: format!("time {t} must be finite and nonnegative"),
            });
        }
        let e = match field(event_col, &schema.event)? {
            "0" | "0.0" => false,
            "1" | "1.0" => true,
            other => {
                return Err(Error::Parse {
                    row,
                    msg: format!("event value `{other}` is not coded 0/1"),
                })
            }
        };
        for (&c, name) in cov_cols.iter().zip(&schema.covariates) {
            let x: f64 = field(c, name)?.parse().map_err(|_| Error::Parse {
                row,
                msg: format!("covariate `{name}` is not numeric"),
            })?;
            covariates.push(x);
        }
        let label = match stratum_col {
            Some(c) => field(c, schema.stratum.as_deref().unwrap_or_default())?.to_string(),
            None => "1".to_string(),
        };
        times.push(t);
        events.push(e);
        labels.push(label);
    }
    strata.intern_sorted(labels.iter().map(String::as_str));
    let idx = labels
        .iter()
        .map(|l| strata.index_of(l).expect("interned above"))
        .collect();
    SurvivalDataset::new(times, events, covariates, cov_cols.len(), idx, role)
}

/// Writes a dataset in the same delimited layout [`load_dataset`] reads,
/// with columns `time,event,stratum,<covariates>`.
pub fn write_dataset<W: Write>(
    writer: W,
    data: &SurvivalDataset,
    covariate_names: &[String],
    strata: &StratumMap,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let mut header = vec!["time".to_string(), "event".into(), "stratum".into()];
    header.extend(covariate_names.iter().cloned());
    w.write_record(&header)?;
    for i in 0..data.len() {
        let s = data.strata()[i];
        let label = strata
            .label(s)
            .map(str::to_string)
            .unwrap_or_else(|| (s + 1).to_string());
        let mut rec = vec![
            format!("{}", data.times()[i]),
            if data.events()[i] { "1" } else { "0" }.to_string(),
            label,
        ];
        rec.extend(data.covariate_row(i).iter().map(|x| format!("{x}")));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}
