//! C interface to the ppsurv engine.
//!
//! Objects cross the boundary as opaque handles that the caller releases
//! with the matching `*_free` function. Every fallible call returns a
//! [`PpsStatus`]; on failure a description is available from
//! [`pps_last_error`] on the same thread. Strings returned by the library
//! are owned by the caller and released with [`pps_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;
use std::slice;

use ppsurv::cli::parse_config;
use ppsurv::data::{default_partition, load_dataset, DatasetRole, IntervalPartition, Schema, StratumMap, SurvivalDataset};
use ppsurv::model::{BetaHyper, MvnMixture, PriorSpec};
use ppsurv::samplers::{approximate_prior_beta, fit_single_mvn, phm_fixed_a0, phm_random_a0, PosteriorDraws, SamplerConfig};
use ppsurv::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PpsStatus {
    Ok = 0,
    NullPointer = 1,
    /// Malformed data, configuration or arguments.
    InvalidInput = 2,
    /// A computation failed (sampler, fitting, aborted design run).
    Runtime = 3,
    /// A panic was caught at the boundary.
    Panic = 4,
    /// The output buffer is shorter than required.
    BufferTooSmall = 5,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PpsRole {
    Current = 0,
    Historical = 1,
}

/// MCMC settings; obtain defaults from [`pps_sampler_default`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PpsSampler {
    pub n_mc: usize,
    pub n_burnin: usize,
    pub beta_width: f64,
    pub log_hazard_width: f64,
    pub max_steps: u32,
    pub seed: u64,
}

impl From<PpsSampler> for SamplerConfig {
    fn from(s: PpsSampler) -> Self {
        SamplerConfig {
            n_mc: s.n_mc,
            n_burnin: s.n_burnin,
            beta_width: s.beta_width,
            log_hazard_width: s.log_hazard_width,
            max_steps: s.max_steps,
            seed: s.seed,
        }
    }
}

pub struct PpsStrata(StratumMap);
pub struct PpsDataset(SurvivalDataset);
pub struct PpsPartition(IntervalPartition);
pub struct PpsPosterior(PosteriorDraws);
pub struct PpsMixture(MvnMixture);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

enum Failure {
    Status(PpsStatus, String),
    Engine(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Engine(e)
    }
}

fn null(what: &str) -> Failure {
    Failure::Status(PpsStatus::NullPointer, format!("`{what}` is null"))
}

fn invalid(msg: impl Into<String>) -> Failure {
    Failure::Status(PpsStatus::InvalidInput, msg.into())
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> PpsStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => PpsStatus::Ok,
        Ok(Err(Failure::Status(status, msg))) => {
            set_error(msg);
            status
        }
        Ok(Err(Failure::Engine(e))) => {
            let status = if e.is_validation() { PpsStatus::InvalidInput } else { PpsStatus::Runtime };
            set_error(e.to_string());
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            PpsStatus::Panic
        }
    }
}

unsafe fn out_ptr<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn borrow<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

/// Slice from a pointer that may be null when `len` is zero.
unsafe fn array<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], Failure> {
    if len == 0 {
        Ok(&[])
    } else if p.is_null() {
        Err(null(what))
    } else {
        Ok(slice::from_raw_parts(p, len))
    }
}

unsafe fn string<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| invalid(format!("`{what}` is not valid UTF-8")))
}

unsafe fn opt_string<'a>(p: *const c_char, what: &str) -> Result<Option<&'a str>, Failure> {
    if p.is_null() {
        Ok(None)
    } else {
        string(p, what).map(Some)
    }
}

unsafe fn datasets(handles: *const *const PpsDataset, n: usize) -> Result<Vec<SurvivalDataset>, Failure> {
    array(handles, n, "historical")?
        .iter()
        .map(|&h| borrow(h, "historical[i]").map(|d| d.0.clone()))
        .collect()
}

unsafe fn prior(json: *const c_char) -> Result<PriorSpec, Failure> {
    match opt_string(json, "prior_json")? {
        None => Ok(PriorSpec::default()),
        Some(text) => serde_json::from_str(text).map_err(|e| invalid(format!("prior_json: {e}"))),
    }
}

fn into_c_string(s: String) -> Result<*mut c_char, Failure> {
    CString::new(s)
        .map(CString::into_raw)
        .map_err(|_| invalid("string contains an interior NUL"))
}

fn copy_out(src: impl ExactSizeIterator<Item = f64>, out: *mut f64, len: usize) -> Result<(), Failure> {
    if src.len() > len {
        return Err(Failure::Status(
            PpsStatus::BufferTooSmall,
            format!("buffer holds {len} values, {} needed", src.len()),
        ));
    }
    if src.len() > 0 && out.is_null() {
        return Err(null("out"));
    }
    for (i, v) in src.enumerate() {
        // SAFETY: bounded by the length check above.
        unsafe { *out.add(i) = v };
    }
    Ok(())
}

/// Message of the last failed call on this thread, or null. Valid until
/// the next call into the library from the same thread.
#[no_mangle]
pub extern "C" fn pps_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// # Safety
/// `s` must come from this library or be null.
#[no_mangle]
pub unsafe extern "C" fn pps_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

#[no_mangle]
pub extern "C" fn pps_sampler_default() -> PpsSampler {
    let d = SamplerConfig::default();
    PpsSampler {
        n_mc: d.n_mc,
        n_burnin: d.n_burnin,
        beta_width: d.beta_width,
        log_hazard_width: d.log_hazard_width,
        max_steps: d.max_steps,
        seed: d.seed,
    }
}

/// Label-to-index map shared by datasets loaded from files, so that equal
/// stratum labels map to the same index across datasets.
#[no_mangle]
pub extern "C" fn pps_strata_new() -> *mut PpsStrata {
    Box::into_raw(Box::new(PpsStrata(StratumMap::new())))
}

/// # Safety
/// `strata` must come from [`pps_strata_new`] or be null.
#[no_mangle]
pub unsafe extern "C" fn pps_strata_free(strata: *mut PpsStrata) {
    if !strata.is_null() {
        drop(Box::from_raw(strata));
    }
}

/// Dataset from arrays: `covariates` is row-major `n x p` with the
/// treatment indicator first; `strata` holds 0-based indices or is null for
/// a single stratum.
///
/// # Safety
/// Arrays must hold the stated number of elements.
#[no_mangle]
pub unsafe extern "C" fn pps_dataset_new(
    times: *const f64,
    events: *const u8,
    covariates: *const f64,
    n: usize,
    p: usize,
    strata: *const u32,
    role: PpsRole,
    out: *mut *mut PpsDataset,
) -> PpsStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let times = array(times, n, "times")?.to_vec();
        let events = array(events, n, "events")?.iter().map(|&e| e != 0).collect();
        let covariates = array(covariates, n * p, "covariates")?.to_vec();
        let strata = if strata.is_null() {
            vec![0; n]
        } else {
            array(strata, n, "strata")?.iter().map(|&s| s as usize).collect()
        };
        let d = SurvivalDataset::new(times, events, covariates, p, strata, role.into())?;
        *out = Box::into_raw(Box::new(PpsDataset(d)));
        Ok(())
    })
}

impl From<PpsRole> for DatasetRole {
    fn from(r: PpsRole) -> Self {
        match r {
            PpsRole::Current => DatasetRole::Current,
            PpsRole::Historical => DatasetRole::Historical,
        }
    }
}

/// Loads a delimited file. `stratum`, `filter_column` and `filter_value`
/// may be null.
///
/// # Safety
/// Strings must be NUL-terminated; `covariates` must hold `n_covariates`
/// strings; `strata` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn pps_dataset_load(
    path: *const c_char,
    time: *const c_char,
    event: *const c_char,
    stratum: *const c_char,
    covariates: *const *const c_char,
    n_covariates: usize,
    filter_column: *const c_char,
    filter_value: *const c_char,
    role: PpsRole,
    strata: *mut PpsStrata,
    out: *mut *mut PpsDataset,
) -> PpsStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let strata = out_ptr(strata, "strata")?;
        let covs = array(covariates, n_covariates, "covariates")?
            .iter()
            .map(|&c| string(c, "covariates[i]"))
            .collect::<Result<Vec<_>, _>>()?;
        let mut schema = Schema::new(string(time, "time")?, string(event, "event")?, opt_string(stratum, "stratum")?, &covs);
        match (opt_string(filter_column, "filter_column")?, opt_string(filter_value, "filter_value")?) {
            (Some(c), Some(v)) => schema = schema.with_filter(c, v),
            (None, None) => {}
            _ => return Err(invalid("filter_column and filter_value must be given together")),
        }
        let d = load_dataset(Path::new(string(path, "path")?), &schema, role.into(), &mut strata.0)?;
        *out = Box::into_raw(Box::new(PpsDataset(d)));
        Ok(())
    })
}

/// # Safety
/// `d` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn pps_dataset_len(d: *const PpsDataset) -> usize {
    d.as_ref().map_or(0, |d| d.0.len())
}

/// # Safety
/// `d` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn pps_dataset_n_events(d: *const PpsDataset) -> usize {
    d.as_ref().map_or(0, |d| d.0.n_events())
}

/// # Safety
/// `d` must come from this library or be null.
#[no_mangle]
pub unsafe extern "C" fn pps_dataset_free(d: *mut PpsDataset) {
    if !d.is_null() {
        drop(Box::from_raw(d));
    }
}

/// Partition from explicit interior change points: stratum `s` owns
/// `counts[s]` consecutive entries of `cuts`.
///
/// # Safety
/// `counts` holds `n_strata` entries and `cuts` their sum.
#[no_mangle]
pub unsafe extern "C" fn pps_partition_from_cuts(
    cuts: *const f64,
    counts: *const usize,
    n_strata: usize,
    out: *mut *mut PpsPartition,
) -> PpsStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let counts = array(counts, n_strata, "counts")?;
        let flat = array(cuts, counts.iter().sum(), "cuts")?;
        let mut rest = flat;
        let mut per = Vec::with_capacity(n_strata);
        for &c in counts {
            let (head, tail) = rest.split_at(c);
            per.push(head.to_vec());
            rest = tail;
        }
        *out = Box::into_raw(Box::new(PpsPartition(IntervalPartition::new(per)?)));
        Ok(())
    })
}

/// Equal-events partition from the pooled event times of `datasets`, with
/// `intervals[s]` intervals in stratum `s`.
///
/// # Safety
/// Arrays must hold the stated number of elements of live handles.
#[no_mangle]
pub unsafe extern "C" fn pps_partition_default(
    datasets: *const *const PpsDataset,
    n_datasets: usize,
    intervals: *const usize,
    n_strata: usize,
    out: *mut *mut PpsPartition,
) -> PpsStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let sets = array(datasets, n_datasets, "datasets")?
            .iter()
            .map(|&h| borrow(h, "datasets[i]").map(|d| &d.0))
            .collect::<Result<Vec<_>, _>>()?;
        let part = default_partition(&sets, array(intervals, n_strata, "intervals")?)?;
        *out = Box::into_raw(Box::new(PpsPartition(part)));
        Ok(())
    })
}

/// Interior change points of stratum `s` copied into `out`; `n_out`
/// receives the count.
///
/// # Safety
/// `out` must hold `len` values.
#[no_mangle]
pub unsafe extern "C" fn pps_partition_cuts(
    part: *const PpsPartition,
    stratum: usize,
    out: *mut f64,
    len: usize,
    n_out: *mut usize,
) -> PpsStatus {
    guard(|| {
        let part = &borrow(part, "part")?.0;
        if stratum >= part.n_strata() {
            return Err(invalid(format!("stratum {stratum} out of range")));
        }
        let cuts = part.cuts(stratum);
        *out_ptr(n_out, "n_out")? = cuts.len();
        copy_out(cuts.iter().copied(), out, len)
    })
}

/// # Safety
/// `part` must come from this library or be null.
#[no_mangle]
pub unsafe extern "C" fn pps_partition_free(part: *mut PpsPartition) {
    if !part.is_null() {
        drop(Box::from_raw(part));
    }
}

/// Power-prior posterior with fixed `a0` (one entry per historical
/// dataset). `current` may be null; `prior_json` null selects the default
/// priors.
///
/// # Safety
/// Handles must be live; arrays must hold the stated number of elements.
#[no_mangle]
pub unsafe extern "C" fn pps_fit_fixed(
    current: *const PpsDataset,
    historical: *const *const PpsDataset,
    n_historical: usize,
    a0: *const f64,
    part: *const PpsPartition,
    prior_json: *const c_char,
    sampler: PpsSampler,
    out: *mut *mut PpsPosterior,
) -> PpsStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let hist = datasets(historical, n_historical)?;
        let draws = phm_fixed_a0(
            current.as_ref().map(|d| &d.0),
            &hist,
            array(a0, n_historical, "a0")?,
            &borrow(part, "part")?.0,
            &prior(prior_json)?,
            &sampler.into(),
        )?;
        *out = Box::into_raw(Box::new(PpsPosterior(draws)));
        Ok(())
    })
}

/// Normalized-power-prior posterior with random `a0`, using `mixture` as
/// the prior on `beta`.
///
/// # Safety
/// Handles must be live.
#[no_mangle]
pub unsafe extern "C" fn pps_fit_random(
    current: *const PpsDataset,
    mixture: *const PpsMixture,
    part: *const PpsPartition,
    prior_json: *const c_char,
    sampler: PpsSampler,
    out: *mut *mut PpsPosterior,
) -> PpsStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let draws = phm_random_a0(
            &borrow(current, "current")?.0,
            &borrow(mixture, "mixture")?.0,
            &borrow(part, "part")?.0,
            &prior(prior_json)?,
            &sampler.into(),
        )?;
        *out = Box::into_raw(Box::new(PpsPosterior(draws)));
        Ok(())
    })
}

/// # Safety
/// `post` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn pps_posterior_n_draws(post: *const PpsPosterior) -> usize {
    post.as_ref().map_or(0, |p| p.0.n_draws())
}

/// # Safety
/// `post` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn pps_posterior_n_beta(post: *const PpsPosterior) -> usize {
    post.as_ref().map_or(0, |p| p.0.beta.cols())
}

/// # Safety
/// `post` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn pps_posterior_n_strata(post: *const PpsPosterior) -> usize {
    post.as_ref().map_or(0, |p| p.0.lambda.len())
}

/// Number of hazard intervals of stratum `s`, or 0 when out of range.
///
/// # Safety
/// `post` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn pps_posterior_n_intervals(post: *const PpsPosterior, stratum: usize) -> usize {
    post.as_ref()
        .and_then(|p| p.0.lambda.get(stratum))
        .map_or(0, |m| m.cols())
}

/// `beta` draws, row-major `n_draws x P`.
///
/// # Safety
/// `out` must hold `len` values.
#[no_mangle]
pub unsafe extern "C" fn pps_posterior_beta(post: *const PpsPosterior, out: *mut f64, len: usize) -> PpsStatus {
    guard(|| {
        let m = &borrow(post, "post")?.0.beta;
        copy_out(m.as_slice().iter().copied(), out, len)
    })
}

/// Baseline hazard draws of stratum `s`, row-major `n_draws x K_s`.
///
/// # Safety
/// `out` must hold `len` values.
#[no_mangle]
pub unsafe extern "C" fn pps_posterior_lambda(
    post: *const PpsPosterior,
    stratum: usize,
    out: *mut f64,
    len: usize,
) -> PpsStatus {
    guard(|| {
        let post = &borrow(post, "post")?.0;
        let m = post
            .lambda
            .get(stratum)
            .ok_or_else(|| invalid(format!("stratum {stratum} out of range")))?;
        copy_out(m.as_slice().iter().copied(), out, len)
    })
}

/// Per-parameter mean, SD and equal-tailed interval as JSON.
///
/// # Safety
/// `post` must be a live handle; free the result with [`pps_string_free`].
#[no_mangle]
pub unsafe extern "C" fn pps_posterior_summary_json(
    post: *const PpsPosterior,
    level: f64,
    out: *mut *mut c_char,
) -> PpsStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        if !(level > 0.0 && level < 1.0) {
            return Err(invalid("level must lie in (0, 1)"));
        }
        let post = &borrow(post, "post")?.0;
        let text = serde_json::json!({
            "parameters": post.summarize(level),
            "a0": post.a0,
            "diagnostics": post.diagnostics,
        })
        .to_string();
        *out = into_c_string(text)?;
        Ok(())
    })
}

/// # Safety
/// `post` must come from this library or be null.
#[no_mangle]
pub unsafe extern "C" fn pps_posterior_free(post: *mut PpsPosterior) {
    if !post.is_null() {
        drop(Box::from_raw(post));
    }
}

/// Approximates the prior on `beta` induced by Beta(`shape1[j]`,
/// `shape2[j]`) discounting of each historical dataset with `n_draws`
/// outer draws, and fits one multivariate normal to it.
///
/// # Safety
/// Arrays must hold `n_historical` elements; handles must be live.
#[no_mangle]
pub unsafe extern "C" fn pps_approximate_prior(
    historical: *const *const PpsDataset,
    n_historical: usize,
    part: *const PpsPartition,
    prior_json: *const c_char,
    shape1: *const f64,
    shape2: *const f64,
    n_draws: usize,
    sampler: PpsSampler,
    out: *mut *mut PpsMixture,
) -> PpsStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let hist = datasets(historical, n_historical)?;
        let hypers = array(shape1, n_historical, "shape1")?
            .iter()
            .zip(array(shape2, n_historical, "shape2")?)
            .map(|(&a, &b)| BetaHyper::new(a, b))
            .collect::<Result<Vec<_>, _>>()?;
        let approx = approximate_prior_beta(&hist, &borrow(part, "part")?.0, &prior(prior_json)?, &hypers, n_draws, &sampler.into())?;
        *out = Box::into_raw(Box::new(PpsMixture(fit_single_mvn(&approx.beta)?)));
        Ok(())
    })
}

/// Mixture from its JSON form: `{"components": [{"mean", "covariance",
/// "weight"}, ...]}`.
///
/// # Safety
/// `json` must be NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn pps_mixture_from_json(json: *const c_char, out: *mut *mut PpsMixture) -> PpsStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        *out = Box::into_raw(Box::new(PpsMixture(MvnMixture::from_json(string(json, "json")?)?)));
        Ok(())
    })
}

/// # Safety
/// `m` must be a live handle; free the result with [`pps_string_free`].
#[no_mangle]
pub unsafe extern "C" fn pps_mixture_to_json(m: *const PpsMixture, out: *mut *mut c_char) -> PpsStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        *out = into_c_string(borrow(m, "m")?.0.to_json()?)?;
        Ok(())
    })
}

/// # Safety
/// `m` must come from this library or be null.
#[no_mangle]
pub unsafe extern "C" fn pps_mixture_free(m: *mut PpsMixture) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// Runs a design study described by a TOML configuration in the format
/// read by the `ppsurv` command line (fixed `a0` when `random` is 0) and
/// returns its JSON result. Files are also written under the configured
/// output directory.
///
/// # Safety
/// `config_toml` must be NUL-terminated; free the result with
/// [`pps_string_free`].
#[no_mangle]
pub unsafe extern "C" fn pps_design_from_toml(
    config_toml: *const c_char,
    random: i32,
    out: *mut *mut c_char,
) -> PpsStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let cfg = parse_config(string(config_toml, "config_toml")?, &[])?;
        let result = ppsurv::cli::run_design(cfg, random != 0)?;
        *out = into_c_string(result.to_string())?;
        Ok(())
    })
}
