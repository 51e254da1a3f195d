//! End-to-end tests of the `qsparse` binary: exit codes, file outputs,
//! determinism, and the reproducibility of the summary's config echo.

use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_qsparse"))
}

fn run_ok(args: &[&str]) -> Output {
    let out = bin().args(args).output().expect("binary runs");
    assert!(
        out.status.success(),
        "expected success for {args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

const CONFIG: &str = r#"
[run]
R = 3
T = 60
b = 2
seed = 7
record_every = 5

[operator]
type = "sign-comp"
m = 2
[operator.sparsifier]
type = "top-k"
k = 4

[schedule]
mode = "periodic"
H = 4

[lr]
type = "strongly-convex"

[objective]
type = "quadratic"
dim = 20

[output]
dir = "OUTDIR"
"#;

fn write_config(dir: &Path, out_dir: &Path) -> std::path::PathBuf {
    let path = dir.join("exp.toml");
    std::fs::write(&path, CONFIG.replace("OUTDIR", &out_dir.display().to_string())).unwrap();
    path
}

#[test]
fn run_writes_csv_and_json_and_prints_summary() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("out");
    let config = write_config(dir.path(), &out_dir);
    let out = run_ok(&["run", config.to_str().unwrap()]);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("final_loss="), "{stdout}");
    assert!(stdout.contains("total_uplink_bits="), "{stdout}");
    assert!(out_dir.join("metrics.csv").exists());
    assert!(out_dir.join("summary.json").exists());
    let csv = std::fs::read_to_string(out_dir.join("metrics.csv")).unwrap();
    assert!(csv.starts_with("t,loss,grad_norm,bits,mem_norm_mean,local_dev,virtual_gap\n"));
    // records at t = 0, 5, ..., 60 plus the final state
    assert_eq!(csv.lines().count(), 1 + 13);
}

#[test]
fn run_is_deterministic_across_invocations_and_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let out_a = dir.path().join("a");
    let out_b = dir.path().join("b");
    let out_c = dir.path().join("c");
    let config = write_config(dir.path(), Path::new("PLACEHOLDER"));

    for (out_dir, threads) in [(&out_a, "0"), (&out_b, "0"), (&out_c, "4")] {
        let mut cmd = bin();
        cmd.args(["run", config.to_str().unwrap()])
            .arg("--set")
            .arg(format!("output.dir={:?}", out_dir.display().to_string()))
            .env("QSPARSE_THREADS", threads);
        let out = cmd.output().unwrap();
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let a = std::fs::read(out_a.join("metrics.csv")).unwrap();
    let b = std::fs::read(out_b.join("metrics.csv")).unwrap();
    let c = std::fs::read(out_c.join("metrics.csv")).unwrap();
    assert_eq!(a, b, "same config twice gives identical CSV bytes");
    assert_eq!(a, c, "serial and 4-thread runs give identical CSV bytes");
}

#[test]
fn missing_lr_section_exits_2_naming_it() {
    let dir = tempfile::tempdir().unwrap();
    let broken = CONFIG
        .replace("[lr]\ntype = \"strongly-convex\"\n", "")
        .replace("OUTDIR", "unused");
    let path = dir.path().join("broken.toml");
    std::fs::write(&path, broken).unwrap();
    let out = bin().args(["run", path.to_str().unwrap()]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("lr"), "{stderr}");
}

#[test]
fn unknown_key_exits_2_naming_it() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.toml");
    std::fs::write(&path, CONFIG.replace("OUTDIR", "x").replace("b = 2", "b = 2\nwat = 1")).unwrap();
    let out = bin().args(["run", path.to_str().unwrap()]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("wat"));
}

#[test]
fn override_applied_and_echoed_in_summary() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("out");
    let config = write_config(dir.path(), &out_dir);
    run_ok(&[
        "run",
        config.to_str().unwrap(),
        "--set",
        "run.T=40",
        "--set",
        "run.record_every=10",
    ]);
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out_dir.join("summary.json")).unwrap())
            .unwrap();
    assert_eq!(summary["config"]["run"]["T"], 40);
    assert_eq!(summary["config"]["run"]["record_every"], 10);
}

// The summary's config echo re-runs to an identical result.
#[test]
fn summary_config_echo_reproduces_run() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("first");
    let config = write_config(dir.path(), &out_dir);
    run_ok(&["run", config.to_str().unwrap()]);

    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out_dir.join("summary.json")).unwrap())
            .unwrap();
    let echoed: qsparse::config::ConfigFile =
        serde_json::from_value(summary["config"].clone()).unwrap();
    let replay_dir = dir.path().join("replay");
    let mut replay = echoed.clone();
    replay.output.dir = replay_dir.display().to_string();
    let replay_toml = dir.path().join("replay.toml");
    std::fs::write(&replay_toml, toml::to_string(&replay).unwrap()).unwrap();
    run_ok(&["run", replay_toml.to_str().unwrap()]);

    let first = std::fs::read(out_dir.join("metrics.csv")).unwrap();
    let second = std::fs::read(replay_dir.join("metrics.csv")).unwrap();
    assert_eq!(first, second, "config echo must reproduce the run exactly");
}

#[test]
fn preset_runs_and_rejects_unknown() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("preset-out");
    run_ok(&[
        "run",
        "--preset",
        "paper-convex",
        "--set",
        "run.T=50",
        "--set",
        "run.record_every=10",
        "--set",
        &format!("output.dir={:?}", out_dir.display().to_string()),
    ]);
    assert!(out_dir.join("metrics.csv").exists());

    let out = bin().args(["run", "--preset", "nope"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn check_ops_passes_on_default_catalog() {
    // smaller trial count than the acceptance criterion keeps this test quick
    let out = run_ok(&["check-ops", "--dim", "64", "--trials", "150", "--seed", "1"]);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("PASS"));
    assert!(!stdout.contains(" FAIL"), "{stdout}");
    assert!(stdout.contains("REJECTED"), "the unscaled β≥1 row is reported: {stdout}");
}

#[test]
fn check_ops_heavy_and_sparse_distributions() {
    for dist in ["heavy", "sparse"] {
        let out = run_ok(&["check-ops", "--dim", "32", "--trials", "100", "--dist", dist]);
        assert!(!String::from_utf8_lossy(&out.stdout).contains(" FAIL"));
    }
    let out = bin().args(["check-ops", "--dist", "bogus"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn gradcheck_all_objectives() {
    for objective in ["quadratic", "softmax", "nonconvex-logistic"] {
        let out = run_ok(&["gradcheck", "--objective", objective]);
        let stdout = String::from_utf8_lossy(&out.stdout);
        assert!(stdout.contains("max_relative_error"), "{stdout}");
    }
    let out = bin().args(["gradcheck", "--objective", "mystery"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn gen_data_roundtrips_and_rejects_empty() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("data");
    run_ok(&[
        "gen-data", "--kind", "classification", "--n", "40", "--d-in", "6", "--classes", "4",
        "--margin", "2.0", "--seed", "9", "--out", out_dir.to_str().unwrap(),
    ]);
    let loaded = qsparse::data::load_idx(&out_dir.join("images.idx"), &out_dir.join("labels.idx"))
        .unwrap();
    assert_eq!(loaded.len(), 40);
    assert_eq!(loaded.d_in(), 6);

    // same seed → byte-identical files
    let out_dir2 = dir.path().join("data2");
    run_ok(&[
        "gen-data", "--kind", "classification", "--n", "40", "--d-in", "6", "--classes", "4",
        "--margin", "2.0", "--seed", "9", "--out", out_dir2.to_str().unwrap(),
    ]);
    assert_eq!(
        std::fs::read(out_dir.join("images.idx")).unwrap(),
        std::fs::read(out_dir2.join("images.idx")).unwrap()
    );

    let out = bin()
        .args(["gen-data", "--n", "0", "--d-in", "4", "--classes", "2", "--out", "/tmp/unused"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn help_lists_subcommands() {
    let out = run_ok(&["--help"]);
    let stdout = String::from_utf8_lossy(&out.stdout);
    for sub in ["run", "check-ops", "gradcheck", "gen-data"] {
        assert!(stdout.contains(sub), "--help must list {sub}");
    }
}

#[test]
fn idx_config_source_trains_on_generated_data() {
    let dir = tempfile::tempdir().unwrap();
    let data_dir = dir.path().join("data");
    run_ok(&[
        "gen-data", "--kind", "classification", "--n", "60", "--d-in", "5", "--classes", "3",
        "--margin", "3.0", "--seed", "4", "--out", data_dir.to_str().unwrap(),
    ]);
    let out_dir = dir.path().join("out");
    let config = format!(
        r#"
[run]
R = 2
T = 30
b = 2
seed = 5
record_every = 10

[operator]
type = "top-k"
k = 6

[schedule]
mode = "periodic"
H = 2

[lr]
type = "fixed"
eta = 0.05

[objective]
type = "softmax"

[data]
source = "idx"
images = {images:?}
labels = {labels:?}
shard = "round-robin"

[output]
dir = {out:?}
"#,
        images = data_dir.join("images.idx").display().to_string(),
        labels = data_dir.join("labels.idx").display().to_string(),
        out = out_dir.display().to_string(),
    );
    let path = dir.path().join("idx.toml");
    std::fs::write(&path, config).unwrap();
    run_ok(&["run", path.to_str().unwrap()]);
    assert!(out_dir.join("metrics.csv").exists());
}
