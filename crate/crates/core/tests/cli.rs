mod common;

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use ppsurv::data::{load_dataset, DatasetRole, Schema, StratumMap};
use serde_json::Value;

fn base_config() -> String {
    let data = common::fixture("melanoma.csv");
    let data = data.display();
    format!(
        r#"
seed = 99
out = "out"

[data]
time = "failtime"
event = "rfscens"
stratum = "stratum"
covariates = ["trt"]
current = {{ path = "{data}", filter = {{ column = "study", value = "1690" }} }}
historical = [{{ path = "{data}", filter = {{ column = "study", value = "1684" }} }}]

[partition]
intervals = [4, 3]

[a0]
value = [0.5]
grid = [[0.0], [0.6]]
shape1 = [1.0]
shape2 = [1.0]

[sampler]
n_mc = 400
n_burnin = 20

[mixture]
n_draws = 200

[design]
n_trials = 6
target_events = [60]
subjects_per_event = 3.0
enrollment = {{ kind = "uniform", period = 4.0 }}
null_prior = {{ kind = "default" }}
alternative_prior = {{ kind = "default" }}
alpha0 = 0.05
alpha1 = 0.2
"#
    )
}

fn write_config(dir: &Path, text: &str) -> std::path::PathBuf {
    let path = dir.join("run.toml");
    fs::write(&path, text).unwrap();
    path
}

fn ppsurv(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ppsurv")).current_dir(dir).args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn validation_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &base_config());
    let cfg = cfg.to_str().unwrap();

    assert_eq!(code(&ppsurv(dir.path(), &["analyze-fixed", "-c", cfg, "--set", "sampler.bogus=1"])), 2);
    assert_eq!(code(&ppsurv(dir.path(), &["analyze-fixed", "-c", cfg, "--set", "a0.value=[0.5, 0.5]"])), 2);
    assert_eq!(code(&ppsurv(dir.path(), &["no-such-command"])), 2);

    let bare = base_config().replace("null_prior = { kind = \"default\" }\n", "").replace("alternative_prior = { kind = \"default\" }\n", "");
    let bare = write_config(dir.path(), &bare);
    let o = ppsurv(dir.path(), &["design-fixed", "-c", bare.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("design.null_prior"));

    fs::write(dir.path().join("broken.toml"), "seed = [").unwrap();
    assert_eq!(code(&ppsurv(dir.path(), &["summarize", "-c", "broken.toml"])), 2);
}

#[test]
fn repeated_seed_gives_identical_files() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &base_config());
    let cfg = cfg.to_str().unwrap();
    for out in ["a", "b"] {
        let o = ppsurv(dir.path(), &["analyze-fixed", "-c", cfg, "--out", out]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    }
    let read = |p: &str| fs::read(dir.path().join(p)).unwrap();
    assert_eq!(read("a/draws.csv"), read("b/draws.csv"));
    let (a, b) = (json(&dir.path().join("a/summary.json")), json(&dir.path().join("b/summary.json")));
    assert_eq!(a["parameters"], b["parameters"]);
    assert_eq!(a["seed"], 99);
}

#[test]
fn missing_seed_is_drawn_and_recorded() {
    let dir = tempfile::tempdir().unwrap();
    let text = base_config().replace("seed = 99\n", "");
    let cfg = write_config(dir.path(), &text);
    let o = ppsurv(dir.path(), &["analyze-fixed", "-c", cfg.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let s = json(&dir.path().join("out/summary.json"));
    assert!(s["seed"].is_u64());
    assert_eq!(s["seed"], s["echo"]["config"]["seed"]);
}

#[test]
fn summarize_writes_counts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &base_config());
    assert_eq!(code(&ppsurv(dir.path(), &["summarize", "-c", cfg.to_str().unwrap()])), 0);
    let text = fs::read_to_string(dir.path().join("out/summary.csv")).unwrap();
    assert!(text.starts_with("dataset,treatment,stratum,n,events,risk_time"));
    assert_eq!(text.lines().count(), 1 + 8);
}

#[test]
fn simulated_trial_reads_back() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &base_config());
    let o = ppsurv(dir.path(), &["simulate", "-c", cfg.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let mut strata = StratumMap::new();
    let schema = Schema::new("time", "event", Some("stratum"), &["trt"]);
    let d = load_dataset(dir.path().join("out/observed.csv"), &schema, DatasetRole::Current, &mut strata).unwrap();
    let meta = json(&dir.path().join("out/simulation.json"));
    assert_eq!(d.n_events(), 60);
    assert_eq!(meta["n_events"], 60);
    assert_eq!(meta["n_observed"].as_u64().unwrap() as usize, d.len());
}

#[test]
fn approximated_mixture_feeds_random_analysis() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &base_config());
    let cfg = cfg.to_str().unwrap();
    let o = ppsurv(dir.path(), &["approximate-prior", "-c", cfg, "--out", "prior"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let draws = fs::read_to_string(dir.path().join("prior/prior_beta_draws.csv")).unwrap();
    assert_eq!(draws.lines().count(), 201);

    let o = ppsurv(dir.path(), &["analyze-random", "-c", cfg, "--set", "mixture.path=\"prior/mixture.json\""]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let s = json(&dir.path().join("out/summary.json"));
    let written = json(&dir.path().join("prior/mixture.json"));
    assert_eq!(s["extra"]["mixture"], written);
}

#[test]
fn default_priors_round_trip_through_files() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &base_config());
    let cfg = cfg.to_str().unwrap();
    let o = ppsurv(dir.path(), &["design-fixed", "-c", cfg, "--out", "first"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let first = json(&dir.path().join("first/design.json"));

    let files = |tag: &str| {
        format!(
            "{{ kind = \"files\", beta = \"first/sampling_priors/{tag}_beta.csv\", lambda = [\"first/sampling_priors/{tag}_lambda_1.csv\", \"first/sampling_priors/{tag}_lambda_2.csv\"], resampling = \"joint\" }}"
        )
    };
    let o = ppsurv(
        dir.path(),
        &[
            "design-fixed",
            "-c",
            cfg,
            "--out",
            "second",
            "--set",
            &format!("design.null_prior={}", files("null")),
            "--set",
            &format!("design.alternative_prior={}", files("alternative")),
        ],
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let second = json(&dir.path().join("second/design.json"));
    for key in ["null", "alternative"] {
        let (a, b) = (&first["runs"][0][key], &second["runs"][0][key]);
        assert_eq!(a["estimate"], b["estimate"], "{key}");
    }
    let table = fs::read_to_string(dir.path().join("first/oc_table.csv")).unwrap();
    assert!(table.starts_with("a0,target_events,n_subjects,type1_error,type1_mc_se,power,power_mc_se,failed_trials"));
    assert_eq!(table.lines().count(), 1 + 2);
}

#[test]
fn random_design_echoes_a_two_component_mixture() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("mix.json"),
        r#"{"components": [
            {"mean": [-0.3], "covariance": [[0.02]], "weight": 0.6},
            {"mean": [0.0], "covariance": [[0.05]], "weight": 0.4}
        ]}"#,
    )
    .unwrap();
    let cfg = write_config(dir.path(), &base_config());
    let o = ppsurv(
        dir.path(),
        &["design-random", "-c", cfg.to_str().unwrap(), "--set", "mixture.path=\"mix.json\"", "--set", "design.n_trials=1"],
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let d = json(&dir.path().join("out/design.json"));
    let comps = d["mixture"]["components"].as_array().unwrap();
    assert_eq!(comps.len(), 2);
    assert_eq!(comps[0]["weight"], 0.6);
    let table = fs::read_to_string(dir.path().join("out/oc_table.csv")).unwrap();
    let row: Vec<&str> = table.lines().nth(1).unwrap().split(',').collect();
    assert_eq!((row[4].parse::<f64>().unwrap(), row[6].parse::<f64>().unwrap()), (0.0, 0.0));
}

#[test]
fn runtime_failures_exit_with_three_and_report_the_seed() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &base_config());
    let o = ppsurv(
        dir.path(),
        &[
            "analyze-fixed",
            "-c",
            cfg.to_str().unwrap(),
            "--set",
            "prior.lambda={ kind = \"improper\" }",
            "--set",
            "partition.cuts=[[1.0, 500.0], [500.0]]",
        ],
    );
    assert_eq!(code(&o), 3, "{}", String::from_utf8_lossy(&o.stderr));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("degenerate") && err.contains("seed: 99"), "{err}");
}
