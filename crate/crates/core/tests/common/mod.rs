#![allow(dead_code)]

pub mod checks;
pub mod oracles;
pub mod stats;

use std::path::PathBuf;

use ppsurv::data::{load_dataset, DatasetRole, Schema, StratumMap, SurvivalDataset};

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name)
}

/// (current E1690, historical E1684) with a shared stratum map.
pub fn melanoma() -> (SurvivalDataset, SurvivalDataset, StratumMap) {
    let mut strata = StratumMap::new();
    let path = fixture("melanoma.csv");
    let schema = |study: &str| Schema::new("failtime", "rfscens", Some("stratum"), &["trt"]).with_filter("study", study);
    let hist = load_dataset(&path, &schema("1684"), DatasetRole::Historical, &mut strata).unwrap();
    let cur = load_dataset(&path, &schema("1690"), DatasetRole::Current, &mut strata).unwrap();
    (cur, hist, strata)
}

pub fn mean_var(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    (m, v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0))
}
