use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::json;

use super::config::{RunConfig, SamplingPriorConfig, SourceConfig};
use crate::data::{
    default_partition, load_dataset, summarize, write_dataset, DatasetRole, IntervalPartition, StratumMap,
    SurvivalDataset,
};
use crate::design::{
    build_default_sampling_priors, build_point_mass_prior, decide_sample_size, estimate_operating_characteristic,
    A0Mode, DefaultSamplingPriors, DesignProblem, DesignResult, FitPartition, SamplingPrior,
};
use crate::error::{Error, Result};
use crate::matrix::DrawMatrix;
use crate::model::{BetaHyper, MvnMixture};
use crate::rng::{stream, Purpose};
use crate::samplers::{
    approximate_prior_beta, fit_single_mvn, phm_fixed_a0, phm_random_a0, PosteriorDraws, SamplerConfig,
};
use crate::sim::{construct_observed_data, simulate_complete_data, CovariatePool, TrialDesignConfig};

/// Loaded inputs shared by every command.
pub(crate) struct Context {
    pub cfg: RunConfig,
    pub seed: u64,
    pub strata: StratumMap,
    pub current: Option<SurvivalDataset>,
    pub historical: Vec<SurvivalDataset>,
}

impl Context {
    pub fn load(cfg: RunConfig, seed: u64) -> Result<Self> {
        let mut strata = StratumMap::new();
        let load = |src: &SourceConfig, role, strata: &mut StratumMap| {
            load_dataset(&src.path, &cfg.data.schema(src), role, strata)
        };
        let mut historical = Vec::new();
        for src in &cfg.data.historical {
            historical.push(load(src, DatasetRole::Historical, &mut strata)?);
        }
        let current = match &cfg.data.current {
            Some(src) => Some(load(src, DatasetRole::Current, &mut strata)?),
            None => None,
        };
        Ok(Self {
            cfg,
            seed,
            strata,
            current,
            historical,
        })
    }

    fn sampler(&self) -> Result<SamplerConfig> {
        self.cfg.sampler.to_config(self.seed)
    }

    fn out_dir(&self) -> Result<&Path> {
        fs::create_dir_all(&self.cfg.out)?;
        Ok(&self.cfg.out)
    }

    fn require_current(&self) -> Result<&SurvivalDataset> {
        self.current
            .as_ref()
            .ok_or_else(|| Error::config("data.current", "this command needs current data"))
    }

    fn require_historical(&self) -> Result<&[SurvivalDataset]> {
        if self.historical.is_empty() {
            return Err(Error::config("data.historical", "this command needs at least one historical dataset"));
        }
        Ok(&self.historical)
    }

    fn n_strata(&self) -> usize {
        self.strata.len().max(1)
    }

    fn intervals(&self) -> Vec<usize> {
        if self.cfg.partition.intervals.is_empty() {
            vec![1; self.n_strata()]
        } else {
            self.cfg.partition.intervals.clone()
        }
    }

    /// Explicit change points if configured, otherwise equal-event
    /// quantiles of the pooled `datasets`.
    fn partition(&self, datasets: &[&SurvivalDataset], intervals: &[usize]) -> Result<IntervalPartition> {
        let part = match &self.cfg.partition.cuts {
            Some(cuts) => IntervalPartition::new(cuts.clone())?,
            None => default_partition(datasets, intervals)?,
        };
        if part.n_strata() != self.n_strata() {
            return Err(Error::config(
                "partition",
                format!("{} strata configured, data have {}", part.n_strata(), self.n_strata()),
            ));
        }
        Ok(part)
    }

    fn fixed_a0(&self) -> Result<Vec<f64>> {
        self.cfg
            .a0
            .value
            .clone()
            .ok_or_else(|| Error::config("a0.value", "a fixed discounting vector is required"))
    }

    fn beta_hypers(&self) -> Result<Vec<BetaHyper>> {
        let (s1, s2) = match (&self.cfg.a0.shape1, &self.cfg.a0.shape2) {
            (Some(a), Some(b)) => (a, b),
            _ => return Err(Error::config("a0.shape1", "Beta prior shapes for a0 are required")),
        };
        if s1.len() != s2.len() {
            return Err(Error::config("a0.shape2", "shape1 and shape2 differ in length"));
        }
        s1.iter().zip(s2).map(|(&a, &b)| BetaHyper::new(a, b)).collect()
    }

    /// Mixture from file, or the single-normal fit of the approximated
    /// discounting prior. Returns the draws when approximated.
    fn mixture(&self) -> Result<(MvnMixture, Option<DrawMatrix>)> {
        if let Some(path) = &self.cfg.mixture.path {
            let text = fs::read_to_string(path)
                .map_err(|e| Error::config("mixture.path", format!("cannot read {}: {e}", path.display())))?;
            return Ok((MvnMixture::from_json(&text)?, None));
        }
        let approx = self.approximate()?;
        Ok((fit_single_mvn(&approx.beta)?, Some(approx.beta)))
    }

    fn approximate(&self) -> Result<crate::samplers::PriorApproximation> {
        let hist = self.require_historical()?;
        let refs: Vec<&SurvivalDataset> = hist.iter().collect();
        let part = self.partition(&refs, &self.intervals())?;
        let cfg = self.sampler()?;
        let n = self.cfg.mixture.n_draws.unwrap_or(cfg.n_mc);
        approximate_prior_beta(hist, &part, &self.cfg.prior, &self.beta_hypers()?, n, &cfg)
    }

    fn echo(&self) -> serde_json::Value {
        let mut cfg = self.cfg.clone();
        cfg.seed = Some(self.seed);
        json!({
            "config": cfg,
            "strata": self.strata.labels(),
        })
    }
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let file = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(file, value)?;
    Ok(())
}

fn write_matrix(path: &Path, m: &DrawMatrix, names: &[String]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(names)?;
    for i in 0..m.rows() {
        w.write_record(m.row(i).iter().map(|v| v.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

/// Reads an all-numeric delimited matrix with a header row.
pub(crate) fn read_matrix(path: &Path) -> Result<DrawMatrix> {
    let mut r = csv::Reader::from_path(path)
        .map_err(|e| Error::config("design", format!("cannot read {}: {e}", path.display())))?;
    let mut rows = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        let row = rec
            .iter()
            .map(|v| {
                v.trim().parse::<f64>().map_err(|_| Error::Parse {
                    row: i + 1,
                    msg: format!("`{v}` in {} is not a number", path.display()),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    DrawMatrix::from_rows(&rows)
}

fn write_posterior(ctx: &Context, draws: &PosteriorDraws, part: &IntervalPartition, extra: serde_json::Value) -> Result<PathBuf> {
    let out = ctx.out_dir()?;
    draws.write_csv(BufWriter::new(File::create(out.join("draws.csv"))?))?;
    let summary = json!({
        "seed": ctx.seed,
        "n_draws": draws.n_draws(),
        "level": ctx.cfg.sampler.level,
        "parameters": draws.summarize(ctx.cfg.sampler.level),
        "a0": draws.a0,
        "diagnostics": draws.diagnostics,
        "partition": part.all_cuts(),
        "extra": extra,
        "echo": ctx.echo(),
    });
    let path = out.join("summary.json");
    write_json(&path, &summary)?;
    Ok(path)
}

pub(crate) fn analyze_fixed(ctx: &Context) -> Result<()> {
    let a0 = ctx.fixed_a0()?;
    let current = ctx.current.as_ref();
    let mut all: Vec<&SurvivalDataset> = current.into_iter().collect();
    all.extend(&ctx.historical);
    if all.is_empty() {
        return Err(Error::config("data", "no datasets configured"));
    }
    let part = ctx.partition(&all, &ctx.intervals())?;
    let draws = phm_fixed_a0(current, &ctx.historical, &a0, &part, &ctx.cfg.prior, &ctx.sampler()?)?;
    let path = write_posterior(ctx, &draws, &part, json!(null))?;
    print_summary(&draws, ctx.cfg.sampler.level);
    log::info!("wrote {}", path.display());
    Ok(())
}

pub(crate) fn analyze_random(ctx: &Context) -> Result<()> {
    let current = ctx.require_current()?;
    let (mixture, approx) = ctx.mixture()?;
    let mut all: Vec<&SurvivalDataset> = vec![current];
    all.extend(&ctx.historical);
    let part = ctx.partition(&all, &ctx.intervals())?;
    let draws = phm_random_a0(current, &mixture, &part, &ctx.cfg.prior, &ctx.sampler()?)?;
    if approx.is_some() {
        fs::write(ctx.out_dir()?.join("mixture.json"), mixture.to_json()?)?;
    }
    write_posterior(ctx, &draws, &part, json!({ "mixture": mixture }))?;
    print_summary(&draws, ctx.cfg.sampler.level);
    Ok(())
}

pub(crate) fn approximate_prior(ctx: &Context) -> Result<()> {
    let approx = ctx.approximate()?;
    let mixture = fit_single_mvn(&approx.beta)?;
    let out = ctx.out_dir()?;
    let p = approx.beta.cols();
    let j = approx.a0.cols();
    let mut names: Vec<String> = (1..=p).map(|i| format!("beta_{i}")).collect();
    names.extend((1..=j).map(|i| format!("a0_{i}")));
    let joined: Vec<Vec<f64>> = (0..approx.beta.rows())
        .map(|r| approx.beta.row(r).iter().chain(approx.a0.row(r)).copied().collect())
        .collect();
    write_matrix(&out.join("prior_beta_draws.csv"), &DrawMatrix::from_rows(&joined)?, &names)?;
    fs::write(out.join("mixture.json"), mixture.to_json()?)?;
    write_json(
        &out.join("approximation.json"),
        &json!({ "seed": ctx.seed, "n_draws": approx.beta.rows(), "mixture": mixture, "echo": ctx.echo() }),
    )?;
    let c = &mixture.components()[0];
    println!("fitted normal: mean {:?}, covariance {:?}", c.mean, c.covariance);
    Ok(())
}

fn print_summary(draws: &PosteriorDraws, level: f64) {
    println!("{:<14} {:>10} {:>10} {:>10} {:>10}", "parameter", "mean", "sd", "lower", "upper");
    for s in draws.summarize(level) {
        println!("{:<14} {:>10.4} {:>10.4} {:>10.4} {:>10.4}", s.name, s.mean, s.sd, s.lower, s.upper);
    }
}

pub(crate) fn summarize_cmd(ctx: &Context) -> Result<()> {
    let mut sets: Vec<(String, &SurvivalDataset, &SourceConfig)> = Vec::new();
    for (j, (d, src)) in ctx.historical.iter().zip(&ctx.cfg.data.historical).enumerate() {
        sets.push((dataset_label(src, &format!("historical_{}", j + 1)), d, src));
    }
    if let (Some(d), Some(src)) = (&ctx.current, &ctx.cfg.data.current) {
        sets.push((dataset_label(src, "current"), d, src));
    }
    if sets.is_empty() {
        return Err(Error::config("data", "no datasets configured"));
    }
    let out = ctx.out_dir()?;
    let mut w = csv::Writer::from_path(out.join("summary.csv"))?;
    w.write_record(["dataset", "treatment", "stratum", "n", "events", "risk_time"])?;
    println!("{:<12} {:>9} {:>8} {:>6} {:>7} {:>10}", "dataset", "treatment", "stratum", "n", "events", "risk_time");
    for (label, d, _) in &sets {
        for row in summarize(d)? {
            let stratum = ctx.strata.label(row.stratum).unwrap_or("1").to_string();
            w.write_record([
                label.clone(),
                row.treatment.to_string(),
                stratum.clone(),
                row.n.to_string(),
                row.events.to_string(),
                format!("{:.4}", row.risk_time),
            ])?;
            println!(
                "{:<12} {:>9} {:>8} {:>6} {:>7} {:>10.1}",
                label, row.treatment, stratum, row.n, row.events, row.risk_time
            );
        }
    }
    w.flush()?;
    Ok(())
}

fn dataset_label(src: &SourceConfig, fallback: &str) -> String {
    src.filter.as_ref().map(|f| f.value.clone()).unwrap_or_else(|| fallback.to_string())
}

/// Resolved sampling priors for the null and alternative scenarios.
struct Scenarios {
    null: Option<SamplingPrior>,
    alternative: Option<SamplingPrior>,
}

fn generation_partition(ctx: &Context) -> Result<IntervalPartition> {
    let hist = ctx.require_historical()?;
    let refs: Vec<&SurvivalDataset> = hist.iter().collect();
    let k = if ctx.cfg.design.generation_intervals.is_empty() {
        ctx.intervals()
    } else {
        ctx.cfg.design.generation_intervals.clone()
    };
    ctx.partition(&refs, &k)
}

fn scenarios(ctx: &Context, gen: &IntervalPartition) -> Result<Scenarios> {
    let d = &ctx.cfg.design;
    if d.null_prior.is_none() && d.alternative_prior.is_none() {
        return Err(Error::config(
            "design.null_prior",
            "no sampling prior configured; set design.null_prior and/or design.alternative_prior \
             (kind = \"default\" builds them from the historical data)",
        ));
    }
    let needs_default = [&d.null_prior, &d.alternative_prior]
        .iter()
        .any(|p| matches!(p, Some(SamplingPriorConfig::Default)));
    let defaults = if needs_default {
        let built = build_default_sampling_priors(ctx.require_historical()?, gen, &ctx.cfg.prior, &ctx.sampler()?)?;
        export_defaults(ctx, &built)?;
        Some(built)
    } else {
        None
    };
    let resolve = |cfg: &Option<SamplingPriorConfig>, null: bool| -> Result<Option<SamplingPrior>> {
        Ok(match cfg {
            None => None,
            Some(SamplingPriorConfig::Default) => {
                let built = defaults.as_ref().expect("built above");
                Some(if null { built.null.clone() } else { built.alternative.clone() })
            }
            Some(SamplingPriorConfig::Point { beta, lambda }) => Some(build_point_mass_prior(beta, lambda)?),
            Some(SamplingPriorConfig::Files {
                beta,
                lambda,
                resampling,
            }) => {
                let b = read_matrix(beta)?;
                let l = lambda.iter().map(|p| read_matrix(p)).collect::<Result<Vec<_>>>()?;
                Some(SamplingPrior::new(b, l, *resampling)?)
            }
        })
    };
    Ok(Scenarios {
        null: resolve(&d.null_prior, true)?,
        alternative: resolve(&d.alternative_prior, false)?,
    })
}

/// Writes the default priors as re-readable matrices with aligned rows.
fn export_defaults(ctx: &Context, built: &DefaultSamplingPriors) -> Result<()> {
    let out = ctx.out_dir()?.join("sampling_priors");
    fs::create_dir_all(&out)?;
    for (tag, prior) in [("null", &built.null), ("alternative", &built.alternative)] {
        let p = prior.beta().cols();
        let names: Vec<String> = (1..=p).map(|i| format!("beta_{i}")).collect();
        write_matrix(&out.join(format!("{tag}_beta.csv")), prior.beta(), &names)?;
        for (s, m) in prior.lambda().iter().enumerate() {
            let names: Vec<String> = (1..=m.cols()).map(|k| format!("lambda_{}_{k}", s + 1)).collect();
            write_matrix(&out.join(format!("{tag}_lambda_{}.csv", s + 1)), m, &names)?;
        }
    }
    Ok(())
}

fn trial_config(ctx: &Context, events: usize, index: usize) -> Result<TrialDesignConfig> {
    let d = &ctx.cfg.design;
    let n_subjects = match &d.n_subjects {
        Some(n) => *n.get(index).ok_or_else(|| {
            Error::config("design.n_subjects", "needs one entry per target_events entry")
        })?,
        None => (d.subjects_per_event * events as f64).round() as usize,
    };
    let cfg = TrialDesignConfig {
        n_subjects,
        target_events: events,
        enrollment: d.enrollment,
        randomization: d.randomization,
        treatment_value: d.treatment_value,
        censoring: d.censoring,
        dropout: d.dropout,
        t_min: d.t_min,
        t_max: d.t_max,
    };
    cfg.validate()?;
    Ok(cfg)
}

#[derive(Serialize)]
struct OcRow {
    a0: String,
    target_events: usize,
    n_subjects: usize,
    type1_error: Option<f64>,
    type1_mc_se: Option<f64>,
    power: Option<f64>,
    power_mc_se: Option<f64>,
    failed_trials: usize,
}

pub(crate) fn design(ctx: &Context, random: bool) -> Result<serde_json::Value> {
    let hist = ctx.require_historical()?.to_vec();
    let d = &ctx.cfg.design;
    if d.target_events.is_empty() {
        return Err(Error::config("design.target_events", "at least one target event count is required"));
    }
    let gen = generation_partition(ctx)?;
    let scen = scenarios(ctx, &gen)?;
    let fit_partition = match &ctx.cfg.partition.cuts {
        Some(c) => FitPartition::Fixed(IntervalPartition::new(c.clone())?),
        None => FitPartition::Pooled(ctx.intervals()),
    };
    let mut mixture_echo = None;
    let modes: Vec<(String, A0Mode)> = if random {
        let (mixture, _) = ctx.mixture()?;
        mixture_echo = Some(mixture.clone());
        vec![("random".into(), A0Mode::Random { mixture })]
    } else {
        let grid = match (&ctx.cfg.a0.grid, &ctx.cfg.a0.value) {
            (Some(g), _) => g.clone(),
            (None, Some(v)) => vec![v.clone()],
            _ => return Err(Error::config("a0.grid", "design-fixed needs a0.grid or a0.value")),
        };
        grid.into_iter()
            .map(|a0| (format_a0(&a0), A0Mode::Fixed { a0 }))
            .collect()
    };
    let sampler = ctx.sampler()?;

    let mut rows = Vec::new();
    let mut runs = Vec::new();
    for (label, mode) in &modes {
        for (i, &events) in d.target_events.iter().enumerate() {
            let trial = trial_config(ctx, events, i)?;
            let run = |sampling: &SamplingPrior| -> Result<DesignResult> {
                let problem = DesignProblem {
                    historical: hist.clone(),
                    a0: mode.clone(),
                    trial: trial.clone(),
                    sampling: sampling.clone(),
                    hypothesis: ctx.cfg.hypothesis,
                    generation_partition: gen.clone(),
                    fit_partition: fit_partition.clone(),
                    prior: ctx.cfg.prior.clone(),
                    sampler: sampler.clone(),
                    n_trials: d.n_trials,
                    max_failure_rate: d.max_failure_rate,
                };
                let mut r = estimate_operating_characteristic(&problem, ctx.cfg.workers)?;
                if !d.keep_trials {
                    r.trials.clear();
                }
                Ok(r)
            };
            let null_run = scen.null.as_ref().map(run).transpose()?;
            let alt_run = scen.alternative.as_ref().map(run).transpose()?;
            rows.push(OcRow {
                a0: label.clone(),
                target_events: events,
                n_subjects: trial.n_subjects,
                type1_error: null_run.as_ref().map(|r| r.estimate),
                type1_mc_se: null_run.as_ref().map(|r| r.mc_se),
                power: alt_run.as_ref().map(|r| r.estimate),
                power_mc_se: alt_run.as_ref().map(|r| r.mc_se),
                failed_trials: null_run.iter().chain(&alt_run).map(|r| r.failures.len()).sum(),
            });
            println!(
                "a0 {label:>8}  events {events:>5}  n {:>6}  type I {}  power {}",
                trial.n_subjects,
                fmt_opt(null_run.as_ref().map(|r| r.estimate)),
                fmt_opt(alt_run.as_ref().map(|r| r.estimate)),
            );
            runs.push(json!({
                "a0": label,
                "target_events": events,
                "n_subjects": trial.n_subjects,
                "null": null_run,
                "alternative": alt_run,
            }));
        }
    }

    let decisions = match (d.alpha0, d.alpha1) {
        (Some(a0), Some(a1)) => {
            let mut out = BTreeMap::new();
            for (label, _) in &modes {
                let grid: BTreeMap<usize, (f64, f64)> = rows
                    .iter()
                    .filter(|r| &r.a0 == label)
                    .filter_map(|r| Some((r.n_subjects, (r.type1_error?, r.power?))))
                    .collect();
                if !grid.is_empty() {
                    let decision = decide_sample_size(&grid, a0, a1)?;
                    println!("a0 {label}: {decision}");
                    out.insert(label.clone(), decision);
                }
            }
            Some(out)
        }
        _ => None,
    };

    let out = ctx.out_dir()?;
    let mut w = csv::Writer::from_path(out.join("oc_table.csv"))?;
    for r in &rows {
        w.serialize(r)?;
    }
    w.flush()?;
    let result = json!({
        "seed": ctx.seed,
        "generation_partition": gen.all_cuts(),
        "runs": runs,
        "sample_size": decisions,
        "mixture": mixture_echo,
        "echo": ctx.echo(),
    });
    write_json(&out.join("design.json"), &result)?;
    Ok(result)
}

fn format_a0(a0: &[f64]) -> String {
    a0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(";")
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.4}")).unwrap_or_else(|| "-".into())
}

/// One simulated trial from the alternative (else null) sampling prior,
/// written as complete and observed data.
pub(crate) fn simulate(ctx: &Context) -> Result<()> {
    let hist = ctx.require_historical()?;
    let events = *ctx
        .cfg
        .design
        .target_events
        .first()
        .ok_or_else(|| Error::config("design.target_events", "at least one target event count is required"))?;
    let trial = trial_config(ctx, events, 0)?;
    let gen = generation_partition(ctx)?;
    let scen = scenarios(ctx, &gen)?;
    let sampling = scen.alternative.or(scen.null).expect("checked in scenarios");
    let pool = CovariatePool::from_datasets(hist)?;
    let mut rng = stream(ctx.seed, 0, Purpose::Generate);
    let (beta, lambda) = sampling.draw(&mut rng);
    let complete = simulate_complete_data(&trial, &beta, &lambda, &pool, &gen, &mut rng)?;
    let observed = construct_observed_data(&complete, trial.target_events, trial.t_min, trial.t_max)?;

    let out = ctx.out_dir()?;
    let mut w = csv::Writer::from_path(out.join("complete.csv"))?;
    let mut header = vec!["enrollment".to_string(), "stratum".into()];
    header.extend(ctx.cfg.data.covariates.iter().cloned());
    header.extend(["event_time", "censor_time", "time", "event", "elapsed"].map(String::from));
    w.write_record(&header)?;
    for c in &complete {
        let mut rec = vec![
            c.enrollment.to_string(),
            ctx.strata.label(c.stratum).unwrap_or("1").to_string(),
        ];
        rec.extend(c.covariates.iter().map(|x| x.to_string()));
        rec.extend([
            c.event_time.to_string(),
            c.censor_time.to_string(),
            c.time.to_string(),
            (c.event as u8).to_string(),
            c.elapsed.to_string(),
        ]);
        w.write_record(&rec)?;
    }
    w.flush()?;
    write_dataset(
        BufWriter::new(File::create(out.join("observed.csv"))?),
        &observed.data,
        &ctx.cfg.data.covariates,
        &ctx.strata,
    )?;
    write_json(
        &out.join("simulation.json"),
        &json!({
            "seed": ctx.seed,
            "generating_beta": beta,
            "generating_lambda": lambda,
            "cutoff": observed.cutoff,
            "n_observed": observed.data.len(),
            "n_events": observed.data.n_events(),
            "echo": ctx.echo(),
        }),
    )?;
    println!(
        "cutoff {:.4}: {} subjects, {} events",
        observed.cutoff,
        observed.data.len(),
        observed.data.n_events()
    );
    Ok(())
}
