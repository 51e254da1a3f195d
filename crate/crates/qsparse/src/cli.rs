//! Implementations behind the `qsparse` binary's subcommands. Each returns a
//! process exit code: 0 success, 1 runtime failure, 2 validation failure.

use std::path::Path;

use crate::config::{build_run_config, load_config, preset, ConfigFile};
use crate::data::{synthetic_classification, write_idx};
use crate::engine::{run_async, run_sync, Parallelism, RunResult};
use crate::metrics::{emit_csv, emit_summary_json, target_ladder, RunSummary};
use crate::objectives::{grad, loss, random_quadratic, ObjectiveSpec};
use crate::ops::{
    empirical_compression_check, theoretical_gamma, InputDistribution, OperatorSpec,
};
use crate::rng::{global_stream, Purpose};
use crate::{Error, Result};

pub const EXIT_OK: i32 = 0;
pub const EXIT_RUNTIME: i32 = 1;
pub const EXIT_VALIDATION: i32 = 2;

fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Config(_) | Error::Parameter(_) => EXIT_VALIDATION,
        _ => EXIT_RUNTIME,
    }
}

fn report(err: &Error) -> i32 {
    eprintln!("error: {err}");
    exit_code(err)
}

/// Where a run's config comes from.
pub enum ConfigSource<'a> {
    File(&'a Path),
    Preset(&'a str),
}

/// Execute a run config end to end: run the engine per the schedule mode,
/// write `metrics.csv` and `summary.json` into the output dir, print a
/// one-line summary.
pub fn cmd_run(
    source: ConfigSource<'_>,
    overrides: &[(String, String)],
    threads: Option<usize>,
) -> i32 {
    match run_impl(source, overrides, threads) {
        Ok(line) => {
            println!("{line}");
            EXIT_OK
        }
        Err(e) => report(&e),
    }
}

fn run_impl(
    source: ConfigSource<'_>,
    overrides: &[(String, String)],
    threads: Option<usize>,
) -> Result<String> {
    let cfg = match source {
        ConfigSource::File(path) => load_config(path, overrides)?,
        ConfigSource::Preset(name) => {
            let base = preset(name)?;
            let text = toml::to_string(&base)
                .map_err(|e| Error::Format(format!("preset serialization: {e}")))?;
            crate::config::parse_config(&text, overrides)?
        }
    };
    let result = execute_config(&cfg, Parallelism::from_thread_count(threads))?;
    let out_dir = Path::new(&cfg.output.dir);
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir.display().to_string(), e))?;
    emit_csv(&result.records, &out_dir.join("metrics.csv"))?;
    let summary = RunSummary {
        final_loss: result.final_loss(),
        best_loss: result.best_loss(),
        total_uplink_bits: result.total_uplink_bits,
        total_downlink_bits: result.total_downlink_bits,
        bits_to_target: target_ladder(&result.records, 8),
        diagnostics: result.diagnostics.clone(),
        config: cfg.clone(),
    };
    emit_summary_json(&summary, &out_dir.join("summary.json"))?;
    for w in &result.diagnostics.warnings {
        eprintln!("warning: {w}");
    }
    Ok(format!(
        "final_loss={:.6e} total_uplink_bits={}",
        result.final_loss(),
        result.total_uplink_bits
    ))
}

/// Build and run a parsed config, dispatching on the schedule mode.
pub fn execute_config(cfg: &ConfigFile, parallelism: Parallelism) -> Result<RunResult> {
    let rc = build_run_config(cfg, parallelism)?;
    if rc.schedule.is_synchronous() {
        run_sync(&rc)
    } else {
        run_async(&rc)
    }
}

/// The operator catalog exercised by `check-ops`, scaled to dimension `d`.
/// The final entry is deliberately outside the unscaled-composition regime and
/// is expected to be rejected at validation.
pub fn check_ops_catalog(d: usize) -> Vec<OperatorSpec> {
    let k_small = (d / 16).max(1);
    let k_mid = (d / 6).max(1);
    use OperatorSpec as Op;
    vec![
        Op::Identity,
        Op::TopK { k: k_small },
        Op::RandK { k: k_small },
        Op::Qsgd { s: 2 * (d as u32).isqrt().max(1) },
        Op::StochasticLevels { s: (d as f64 / 2.0).sqrt().ceil() as u32 + 1 },
        Op::RotatedLevels { s: 8 },
        Op::composed(Op::Qsgd { s: 15 }, Op::TopK { k: k_mid }, false),
        Op::composed(Op::Qsgd { s: 2 }, Op::TopK { k: k_mid }, true),
        Op::composed(Op::StochasticLevels { s: 4 }, Op::RandK { k: k_mid }, true),
        Op::composed(Op::RotatedLevels { s: 6 }, Op::TopK { k: k_mid }, true),
        Op::sign_comp(Op::TopK { k: k_small }, 1),
        Op::sign_comp(Op::TopK { k: k_small }, 2),
        Op::sign_comp(Op::RandK { k: k_small }, 2),
        Op::sign_comp(Op::TopK { k: k_small }, 64),
        Op::Piecewise {
            segments: vec![
                crate::ops::Segment {
                    start: 0,
                    end: d / 2,
                    spec: Op::TopK { k: k_small.min(d / 2).max(1) },
                },
                crate::ops::Segment {
                    start: d / 2,
                    end: d,
                    spec: Op::composed(
                        Op::Qsgd { s: 15 },
                        Op::TopK { k: k_small.min(d - d / 2).max(1) },
                        true,
                    ),
                },
            ],
        },
        // Outside the β < 1 regime without scaling: must fail validation.
        Op::composed(Op::Qsgd { s: 2 }, Op::TopK { k: k_mid }, false),
    ]
}

/// `γ` used for the PASS verdict: the static coefficient, or the
/// input-independent floor `1/d` for the `m = 1` sign composition.
fn verdict_gamma(spec: &OperatorSpec, d: usize) -> Option<f64> {
    theoretical_gamma(spec, d).or(match spec {
        OperatorSpec::SignComp { norm_order: 1, .. } => Some(1.0 / d as f64),
        _ => None,
    })
}

/// Verify `E‖x − C(x)‖² ≤ (1−γ)‖x‖²` empirically across the catalog and print
/// one row per operator. Nonzero exit on any FAIL.
pub fn cmd_check_ops(d: usize, trials: usize, seed: u64, distribution: InputDistribution) -> i32 {
    match check_ops_impl(d, trials, seed, distribution) {
        Ok(true) => EXIT_OK,
        Ok(false) => EXIT_RUNTIME,
        Err(e) => report(&e),
    }
}

fn check_ops_impl(
    d: usize,
    trials: usize,
    seed: u64,
    distribution: InputDistribution,
) -> Result<bool> {
    if trials == 0 {
        return Err(Error::parameter("check-ops: trials must be >= 1"));
    }
    let mut rng = global_stream(seed, Purpose::Operator);
    let mut all_pass = true;
    println!(
        "{:<44} {:>8} {:>9} {:>9} {:>9} {:>9}  verdict",
        "operator", "beta", "gamma", "mean", "max", "bound"
    );
    for spec in check_ops_catalog(d) {
        let name = spec.to_string();
        if let Err(e) = spec.validate(d) {
            println!("{name:<44} {:>8} {:>9} {:>9} {:>9} {:>9}  REJECTED ({e})", "-", "-", "-", "-", "-");
            continue;
        }
        let report = empirical_compression_check(&spec, d, trials, 4, &mut rng, distribution)?;
        let gamma = verdict_gamma(&spec, d);
        let pass = report.passes(gamma);
        all_pass &= pass;
        let fmt_opt = |v: Option<f64>| v.map_or("-".to_string(), |v| format!("{v:.5}"));
        println!(
            "{name:<44} {:>8} {:>9} {:>9.5} {:>9.5} {:>9}  {}",
            report.beta.map_or("-".to_string(), |b| format!("{b:.4}")),
            fmt_opt(report.gamma_theoretical),
            report.empirical_ratio,
            report.max_ratio,
            fmt_opt(gamma.map(|g| 1.0 - g)),
            if pass { "PASS" } else { "FAIL" }
        );
    }
    Ok(all_pass)
}

fn gradcheck_objective(name: &str, seed: u64) -> Result<(ObjectiveSpec, crate::data::Dataset)> {
    match name {
        "quadratic" => {
            let mut rng = global_stream(seed, Purpose::Objective);
            Ok((random_quadratic(10, 10.0, &mut rng)?, crate::data::Dataset::empty()))
        }
        "softmax" => {
            let data = synthetic_classification(60, 5, 3, 2.0, seed)?;
            Ok((ObjectiveSpec::Softmax { lambda: 1.0 / 60.0 }, data))
        }
        "nonconvex-logistic" => {
            let data = synthetic_classification(60, 5, 2, 2.0, seed)?;
            Ok((ObjectiveSpec::NonConvexLogistic { alpha: 0.2 }, data))
        }
        other => Err(Error::parameter(format!(
            "unknown objective '{other}' (quadratic|softmax|nonconvex-logistic)"
        ))),
    }
}

/// Maximum relative error between the analytic gradient and central finite
/// differences over `points` random parameter vectors.
pub fn gradcheck_max_error(
    obj: &ObjectiveSpec,
    data: &crate::data::Dataset,
    points: usize,
    seed: u64,
) -> Result<f64> {
    use rand_distr::{Distribution, StandardNormal};
    let mut rng = global_stream(seed, Purpose::Probe);
    let dim = obj.param_dim(data);
    let subset: Vec<usize> = (0..data.len()).collect();
    let h = 1e-5;
    let mut worst: f64 = 0.0;
    for _ in 0..points {
        let mut w: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(&mut rng)).collect();
        let g = grad(obj, &w, data, &subset)?;
        for i in 0..dim {
            let orig = w[i];
            w[i] = orig + h;
            let up = loss(obj, &w, data, &subset)?;
            w[i] = orig - h;
            let down = loss(obj, &w, data, &subset)?;
            w[i] = orig;
            let fd = (up - down) / (2.0 * h);
            worst = worst.max((fd - g[i]).abs() / g[i].abs().max(1.0));
        }
    }
    Ok(worst)
}

/// Finite-difference check at 100 random points; nonzero exit if the max
/// relative error exceeds 1e−5.
pub fn cmd_gradcheck(objective: &str, seed: u64) -> i32 {
    let run = || -> Result<f64> {
        let (obj, data) = gradcheck_objective(objective, seed)?;
        gradcheck_max_error(&obj, &data, 100, seed)
    };
    match run() {
        Ok(worst) => {
            println!("objective={objective} max_relative_error={worst:.3e}");
            if worst <= 1e-5 {
                EXIT_OK
            } else {
                EXIT_RUNTIME
            }
        }
        Err(e) => report(&e),
    }
}

/// Generate a synthetic dataset and write it as an IDX image/label pair that
/// `load_idx` round-trips exactly.
#[allow(clippy::too_many_arguments)]
pub fn cmd_gen_data(
    kind: &str,
    n: usize,
    d_in: usize,
    classes: usize,
    margin: f64,
    seed: u64,
    out_dir: &Path,
) -> i32 {
    let run = || -> Result<(String, String)> {
        if kind != "classification" {
            return Err(Error::parameter(format!(
                "unknown dataset kind '{kind}' (classification)"
            )));
        }
        let data = synthetic_classification(n, d_in, classes, margin, seed)?.quantized_to_unit();
        std::fs::create_dir_all(out_dir)
            .map_err(|e| Error::io(out_dir.display().to_string(), e))?;
        let images = out_dir.join("images.idx");
        let labels = out_dir.join("labels.idx");
        write_idx(&data, &images, &labels)?;
        Ok((
            images.display().to_string(),
            labels.display().to_string(),
        ))
    };
    match run() {
        Ok((images, labels)) => {
            println!("wrote {images} and {labels}");
            EXIT_OK
        }
        Err(e) => report(&e),
    }
}
