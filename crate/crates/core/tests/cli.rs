use std::path::{Path, PathBuf};
use std::process::Command;

use srbm_rare::estimators::Algorithm;
use srbm_rare::experiment::{load_config, parse_config, run, to_csv, to_json, RunManifest, RunOptions, StartUnits};
use srbm_rare::subsolution::SubsolutionKind;

const SMALL: &str = r#"{
  "model": {
    "theta": [-2.0, 1.0],
    "sigma": [[1.0, 0.0], [0.0, 1.0]],
    "refl": [[1.0, 0.0], [-1.0, 1.0]]
  },
  "scenario": { "epsilon": 0.15, "start": [0.1, 0.1], "start_units": "unscaled", "n": [2, 3] },
  "algorithm": { "name": "restart", "replications": 60 },
  "seed": 17,
  "record_timing": false
}"#;

fn examples_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("examples")
}

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_srbm-rare"));
    c.env_remove("SRBM_RARE_THREADS");
    c
}

fn write_config(dir: &Path, text: &str) -> PathBuf {
    let p = dir.join("config.json");
    std::fs::write(&p, text).unwrap();
    p
}

fn small_manifest() -> RunManifest {
    run(&parse_config(SMALL).unwrap(), &RunOptions { threads: Some(1) }).unwrap()
}

#[test]
fn csv_header_is_fixed() {
    let csv = to_csv(&small_manifest());
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "n,estimate,std_error,ci_lo,ci_hi,particles_mean,particles_std,particles_max,timeouts,wall_time"
    );
    assert_eq!(lines.count(), 2);
}

#[test]
fn empty_manifest_gives_header_only_csv() {
    let mut m = small_manifest();
    m.results.clear();
    assert_eq!(
        to_csv(&m),
        "n,estimate,std_error,ci_lo,ci_hi,particles_mean,particles_std,particles_max,timeouts,wall_time\n"
    );
}

#[test]
fn manifest_json_round_trips() {
    let m = small_manifest();
    let text = to_json(&m);
    let back: RunManifest = serde_json::from_str(&text).unwrap();
    assert_eq!(back, m);
    assert_eq!(to_json(&back), text);
}

#[test]
fn config_echo_reparses_to_the_same_config() {
    let m = small_manifest();
    assert_eq!(parse_config(&m.config.to_json()).unwrap(), m.config);
}

#[test]
fn shipped_two_dimensional_config() {
    let cfg = load_config(&examples_dir().join("2d_paper.json")).unwrap();
    assert_eq!(cfg.model.theta, vec![-2.0, 1.0]);
    assert_eq!(cfg.model.sigma, vec![vec![1.0, 0.0], vec![0.0, 1.0]]);
    assert_eq!(cfg.model.refl, vec![vec![1.0, 0.0], vec![-1.0, 1.0]]);
    assert_eq!(cfg.scenario.epsilon, 0.15);
    assert_eq!(cfg.scenario.start_units, StartUnits::Unscaled);
    assert_eq!(cfg.scenario.n, vec![5, 10, 15]);
    assert_eq!(cfg.algorithm.name, Algorithm::Split);
    assert_eq!(cfg.algorithm.split_r, 2);
    assert_eq!(cfg.algorithm.replications, 1000);
    assert_eq!(cfg.algorithm.step.step(5), 1.0 / 5000.0);
    assert_eq!(cfg.subsolution.kind, Some(SubsolutionKind::Exact2D));
}

#[test]
fn shipped_three_dimensional_config() {
    let cfg = load_config(&examples_dir().join("3d_paper.json")).unwrap();
    assert_eq!(cfg.model.theta, vec![-2.0, -1.0, -1.0]);
    assert!(cfg.model.m_matrix);
    assert_eq!(cfg.scenario.start_for(5), vec![0.02, 0.02, 0.02]);
    assert_eq!(cfg.subsolution.kind, Some(SubsolutionKind::ScaledL1));
    assert!(cfg.params().is_ok());
}

#[test]
fn bin_writes_csv_and_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let out = dir.path().join("out.csv");
    let st = bin()
        .args(["run", "--config"])
        .arg(&cfg)
        .args(["--n", "2", "--threads", "1", "--out"])
        .arg(&out)
        .args(["--format", "csv"])
        .status()
        .unwrap();
    assert_eq!(st.code(), Some(0));
    let text = std::fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().count(), 2);
    assert!(text.lines().nth(1).unwrap().starts_with("2,"));
}

#[test]
fn bin_prints_json_without_an_output_path() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let out = bin()
        .args(["run", "--config"])
        .arg(&cfg)
        .args(["--n", "2", "--algorithm", "mc", "--replications", "200"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let m: RunManifest = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(m.config.algorithm.name, Algorithm::Mc);
    assert_eq!(m.results[0].report.as_ref().unwrap().replications, 200);
    assert!(m.subsolution.is_none());
}

#[test]
fn threads_env_var_and_flag_agree() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let with_flag = bin()
        .args(["run", "--config"])
        .arg(&cfg)
        .args(["--threads", "1"])
        .output()
        .unwrap();
    let with_env = bin()
        .args(["run", "--config"])
        .arg(&cfg)
        .env("SRBM_RARE_THREADS", "3")
        .output()
        .unwrap();
    assert_eq!(with_flag.status.code(), Some(0));
    assert_eq!(with_env.status.code(), Some(0));
    assert_eq!(with_flag.stdout, with_env.stdout);
}

#[test]
fn bin_exit_codes_for_bad_input() {
    let dir = tempfile::tempdir().unwrap();
    let code = |args: &[&str], cfg_text: Option<&str>| {
        let mut c = bin();
        c.arg("run");
        if let Some(t) = cfg_text {
            c.arg("--config").arg(write_config(dir.path(), t));
        }
        c.args(args).output().unwrap().status.code()
    };
    // missing file
    assert_eq!(code(&["--config", "/definitely/not/here.json"], None), Some(1));
    // malformed JSON
    assert_eq!(code(&[], Some("{ \"model\": ")), Some(1));
    // missing theta
    assert_eq!(code(&[], Some(&SMALL.replace("\"theta\": [-2.0, 1.0],", ""))), Some(1));
    // unknown algorithm override
    assert_eq!(code(&["--algorithm", "bogus"], Some(SMALL)), Some(1));
    // missing --config
    assert_eq!(code(&[], None), Some(1));
    // reflection matrix that is not completely-S
    assert_eq!(
        code(
            &[],
            Some(&SMALL.replace("[[1.0, 0.0], [-1.0, 1.0]]", "[[1.0, 0.0], [-1.0, -1.0]]"))
        ),
        Some(1)
    );
    // unwritable output path
    assert_eq!(
        code(&["--n", "2", "--out", "/definitely/not/here/out.json"], Some(SMALL)),
        Some(2)
    );
}

#[test]
fn bin_reports_help_with_success() {
    let out = bin().arg("--help").output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("run"));
}
