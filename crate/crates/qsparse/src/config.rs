//! Declarative experiment configs: TOML with `[run]`, `[operator]`,
//! `[schedule]`, `[lr]`, `[objective]`, `[data]`, and `[output]` sections.
//! Unknown keys are rejected; every run is fully specified after defaults.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::data::{load_idx, shard, synthetic_classification, Dataset, ShardMode};
use crate::engine::{LrSchedule, Parallelism, RunConfig};
use crate::objectives::{estimate_constants, quadratic_spectrum, random_quadratic, ObjectiveSpec};
use crate::ops::{theoretical_gamma, OperatorSpec, Segment};
use crate::rng::{global_stream, Purpose};
use crate::schedule::{make_periodic, make_random_async, SyncSchedule};
use crate::{Error, Result};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub run: RunSection,
    pub operator: OperatorSection,
    pub schedule: ScheduleSection,
    pub lr: LrSection,
    pub objective: ObjectiveSection,
    #[serde(default)]
    pub data: DataSection,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    #[serde(rename = "R")]
    pub workers: usize,
    #[serde(rename = "T")]
    pub horizon: usize,
    pub b: usize,
    pub seed: u64,
    #[serde(default = "default_record_every")]
    pub record_every: usize,
    #[serde(default = "default_true")]
    pub track_virtual: bool,
}

fn default_record_every() -> usize {
    1
}

fn default_true() -> bool {
    true
}

/// One table describes any operator; which keys apply depends on `type`.
/// Keys that do not belong to the declared type are rejected.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperatorSection {
    #[serde(rename = "type")]
    pub kind: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub s: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scaled: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub quantizer: Option<Box<OperatorSection>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sparsifier: Option<Box<OperatorSection>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub segments: Option<Vec<SegmentSection>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SegmentSection {
    pub start: usize,
    pub end: usize,
    pub operator: OperatorSection,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleSection {
    /// periodic | random-async | explicit
    pub mode: String,
    #[serde(rename = "H", skip_serializing_if = "Option::is_none")]
    pub h: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lists: Option<Vec<Vec<usize>>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LrSection {
    /// fixed | fixed-sqrt | inverse-time | strongly-convex | experiment-convex
    #[serde(rename = "type")]
    pub kind: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c_hat: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub xi: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mu: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObjectiveSection {
    /// quadratic | softmax | nonconvex-logistic
    #[serde(rename = "type")]
    pub kind: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cond: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    /// Expected class count; the dataset is rejected if a label exceeds it.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub classes: Option<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataSection {
    /// none | synthetic | idx
    #[serde(default = "default_source")]
    pub source: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d_in: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub classes: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub margin: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub images: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub labels: Option<String>,
    /// contiguous | round-robin | iid-random
    #[serde(default = "default_shard_mode")]
    pub shard: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub shard_seed: Option<u64>,
}

fn default_source() -> String {
    "none".into()
}

fn default_shard_mode() -> String {
    "iid-random".into()
}

impl Default for DataSection {
    fn default() -> Self {
        DataSection {
            source: default_source(),
            n: None,
            d_in: None,
            classes: None,
            margin: None,
            seed: None,
            images: None,
            labels: None,
            shard: default_shard_mode(),
            shard_seed: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default = "default_out_dir")]
    pub dir: String,
}

fn default_out_dir() -> String {
    "out".into()
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection {
            dir: default_out_dir(),
        }
    }
}

/// Parse a TOML string into a config, with `--set section.key=value`
/// overrides spliced in before deserialization.
pub fn parse_config(text: &str, overrides: &[(String, String)]) -> Result<ConfigFile> {
    let mut table: toml::Table = text
        .parse()
        .map_err(|e| Error::Config(vec![format!("config parse error: {e}")]))?;
    for (key, value) in overrides {
        apply_override(&mut table, key, value)?;
    }
    toml::Value::Table(table)
        .try_into()
        .map_err(|e| Error::Config(vec![format!("config error: {e}")]))
}

pub fn load_config(path: &Path, overrides: &[(String, String)]) -> Result<ConfigFile> {
    let text =
        std::fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    parse_config(&text, overrides)
}

fn apply_override(table: &mut toml::Table, key: &str, raw: &str) -> Result<()> {
    let parts: Vec<&str> = key.split('.').collect();
    if parts.is_empty() || parts.iter().any(|p| p.is_empty()) {
        return Err(Error::Config(vec![format!(
            "override key '{key}' must look like section.key (or a bare section \
             to replace the whole table)"
        )]));
    }
    // Parse the value as TOML, falling back to a plain string.
    let value = format!("v = {raw}")
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()));
    let mut current = table;
    for part in &parts[..parts.len() - 1] {
        current = current
            .entry(part.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()))
            .as_table_mut()
            .ok_or_else(|| {
                Error::Config(vec![format!("override '{key}': '{part}' is not a table")])
            })?;
    }
    current.insert(parts.last().unwrap().to_string(), value);
    Ok(())
}

/// The built-in experiment presets.
pub fn preset(name: &str) -> Result<ConfigFile> {
    match name {
        "paper-convex" => {
            let text = r#"
[run]
R = 15
T = 3000
b = 8
seed = 1
record_every = 1

[operator]
type = "sign-comp"
m = 2
[operator.sparsifier]
type = "top-k"
k = 40

[schedule]
mode = "periodic"
H = 8

[lr]
type = "experiment-convex"
c = 0.004

[objective]
type = "softmax"

[data]
source = "synthetic"
n = 2000
d_in = 20
classes = 10
margin = 3.0
shard = "iid-random"

[output]
dir = "out/paper-convex"
"#;
            parse_config(text, &[])
        }
        other => Err(Error::Config(vec![format!(
            "unknown preset '{other}' (available: paper-convex)"
        )])),
    }
}

fn operator_from_section(section: &OperatorSection) -> Result<OperatorSpec> {
    let fail = |msg: String| Err(Error::Config(vec![msg]));
    let no_extras = |section: &OperatorSection, allowed: &[&str]| -> Result<()> {
        let mut stray = Vec::new();
        if section.k.is_some() && !allowed.contains(&"k") {
            stray.push("k");
        }
        if section.s.is_some() && !allowed.contains(&"s") {
            stray.push("s");
        }
        if section.m.is_some() && !allowed.contains(&"m") {
            stray.push("m");
        }
        if section.scaled.is_some() && !allowed.contains(&"scaled") {
            stray.push("scaled");
        }
        if section.quantizer.is_some() && !allowed.contains(&"quantizer") {
            stray.push("quantizer");
        }
        if section.sparsifier.is_some() && !allowed.contains(&"sparsifier") {
            stray.push("sparsifier");
        }
        if section.segments.is_some() && !allowed.contains(&"segments") {
            stray.push("segments");
        }
        if stray.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(vec![format!(
                "operator type '{}' does not take key(s): {}",
                section.kind,
                stray.join(", ")
            )]))
        }
    };
    let need_k = |section: &OperatorSection| {
        section.k.ok_or_else(|| {
            Error::Config(vec![format!("operator.{}: missing k", section.kind)])
        })
    };
    let need_s = |section: &OperatorSection| {
        section.s.ok_or_else(|| {
            Error::Config(vec![format!("operator.{}: missing s", section.kind)])
        })
    };
    match section.kind.as_str() {
        "identity" => {
            no_extras(section, &[])?;
            Ok(OperatorSpec::Identity)
        }
        "top-k" => {
            no_extras(section, &["k"])?;
            Ok(OperatorSpec::TopK { k: need_k(section)? })
        }
        "rand-k" => {
            no_extras(section, &["k"])?;
            Ok(OperatorSpec::RandK { k: need_k(section)? })
        }
        "qsgd" => {
            no_extras(section, &["s"])?;
            Ok(OperatorSpec::Qsgd { s: need_s(section)? })
        }
        "stochastic-levels" => {
            no_extras(section, &["s"])?;
            Ok(OperatorSpec::StochasticLevels { s: need_s(section)? })
        }
        "rotated-levels" => {
            no_extras(section, &["s"])?;
            Ok(OperatorSpec::RotatedLevels { s: need_s(section)? })
        }
        "sign" => {
            no_extras(section, &[])?;
            Ok(OperatorSpec::Sign)
        }
        "composed" => {
            no_extras(section, &["scaled", "quantizer", "sparsifier"])?;
            let quantizer = section
                .quantizer
                .as_ref()
                .ok_or_else(|| Error::Config(vec!["operator.composed: missing [operator.quantizer]".into()]))?;
            let sparsifier = section
                .sparsifier
                .as_ref()
                .ok_or_else(|| Error::Config(vec!["operator.composed: missing [operator.sparsifier]".into()]))?;
            Ok(OperatorSpec::composed(
                operator_from_section(quantizer)?,
                operator_from_section(sparsifier)?,
                section.scaled.unwrap_or(true),
            ))
        }
        "sign-comp" => {
            no_extras(section, &["m", "sparsifier"])?;
            let sparsifier = section
                .sparsifier
                .as_ref()
                .ok_or_else(|| Error::Config(vec!["operator.sign-comp: missing [operator.sparsifier]".into()]))?;
            Ok(OperatorSpec::sign_comp(
                operator_from_section(sparsifier)?,
                section.m.unwrap_or(2),
            ))
        }
        "piecewise" => {
            no_extras(section, &["segments"])?;
            let segments = section
                .segments
                .as_ref()
                .ok_or_else(|| Error::Config(vec!["operator.piecewise: missing segments".into()]))?
                .iter()
                .map(|seg| {
                    Ok(Segment {
                        start: seg.start,
                        end: seg.end,
                        spec: operator_from_section(&seg.operator)?,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(OperatorSpec::Piecewise { segments })
        }
        other => fail(format!(
            "operator.type '{other}' unknown (identity|top-k|rand-k|qsgd|stochastic-levels|\
             rotated-levels|sign|composed|sign-comp|piecewise)"
        )),
    }
}

fn dataset_from_section(cfg: &ConfigFile) -> Result<Dataset> {
    let data = &cfg.data;
    match data.source.as_str() {
        "none" => Ok(Dataset::empty()),
        "synthetic" => {
            let n = data.n.ok_or_else(|| Error::Config(vec!["data.n required for synthetic data".into()]))?;
            let d_in = data
                .d_in
                .ok_or_else(|| Error::Config(vec!["data.d_in required for synthetic data".into()]))?;
            let classes = data
                .classes
                .ok_or_else(|| Error::Config(vec!["data.classes required for synthetic data".into()]))?;
            let margin = data.margin.unwrap_or(1.0);
            let seed = data.seed.unwrap_or(cfg.run.seed);
            synthetic_classification(n, d_in, classes, margin, seed)
        }
        "idx" => {
            let images = data
                .images
                .as_ref()
                .ok_or_else(|| Error::Config(vec!["data.images required for idx data".into()]))?;
            let labels = data
                .labels
                .as_ref()
                .ok_or_else(|| Error::Config(vec!["data.labels required for idx data".into()]))?;
            load_idx(Path::new(images), Path::new(labels))
        }
        other => Err(Error::Config(vec![format!(
            "data.source '{other}' unknown (none|synthetic|idx)"
        )])),
    }
}

fn objective_from_section(cfg: &ConfigFile, dataset: &Dataset) -> Result<ObjectiveSpec> {
    let section = &cfg.objective;
    if let Some(expected) = section.classes {
        ObjectiveSpec::check_expected_classes(dataset, expected)
            .map_err(|e| Error::Config(vec![format!("objective: {e}")]))?;
    }
    match section.kind.as_str() {
        "quadratic" => {
            let dim = section
                .dim
                .ok_or_else(|| Error::Config(vec!["objective.dim required for quadratic".into()]))?;
            let cond = section.cond.unwrap_or(10.0);
            let mut rng = global_stream(cfg.run.seed, Purpose::Objective);
            random_quadratic(dim, cond, &mut rng)
        }
        "softmax" => {
            let lambda = section.lambda.unwrap_or_else(|| {
                if dataset.is_empty() {
                    1.0
                } else {
                    1.0 / dataset.len() as f64
                }
            });
            Ok(ObjectiveSpec::Softmax { lambda })
        }
        "nonconvex-logistic" => Ok(ObjectiveSpec::NonConvexLogistic {
            alpha: section.alpha.unwrap_or(0.1),
        }),
        other => Err(Error::Config(vec![format!(
            "objective.type '{other}' unknown (quadratic|softmax|nonconvex-logistic)"
        )])),
    }
}

fn schedule_from_section(cfg: &ConfigFile) -> Result<SyncSchedule> {
    let section = &cfg.schedule;
    let horizon = cfg.run.horizon;
    let workers = cfg.run.workers;
    match section.mode.as_str() {
        "periodic" => {
            let h = section
                .h
                .ok_or_else(|| Error::Config(vec!["schedule.H required for periodic mode".into()]))?;
            make_periodic(horizon, h, workers)
        }
        "random-async" => {
            let h = section
                .h
                .ok_or_else(|| Error::Config(vec!["schedule.H required for random-async mode".into()]))?;
            make_random_async(horizon, h, workers, section.seed.unwrap_or(cfg.run.seed))
        }
        "explicit" => {
            let lists = section
                .lists
                .as_ref()
                .ok_or_else(|| Error::Config(vec!["schedule.lists required for explicit mode".into()]))?;
            let h = section.h.unwrap_or(horizon);
            SyncSchedule::explicit(lists.clone(), horizon, h)
        }
        other => Err(Error::Config(vec![format!(
            "schedule.mode '{other}' unknown (periodic|random-async|explicit)"
        )])),
    }
}

fn lr_from_section(
    cfg: &ConfigFile,
    objective: &ObjectiveSpec,
    operator: &OperatorSpec,
    schedule: &SyncSchedule,
    dataset: &Dataset,
    shards: &crate::data::ShardPlan,
) -> Result<LrSchedule> {
    let section = &cfg.lr;
    let dim = objective.param_dim(dataset);
    match section.kind.as_str() {
        "fixed" => {
            let eta = section
                .eta
                .ok_or_else(|| Error::Config(vec!["lr.eta required for fixed rate".into()]))?;
            Ok(LrSchedule::Fixed { eta })
        }
        "fixed-sqrt" => {
            // η = Ĉ/√T with Ĉ defaulting to 1/(2L̂) so that η ≤ 1/(2L) when
            // the estimate is faithful.
            let c_hat = match section.c_hat {
                Some(c) => c,
                None => {
                    let mut rng = global_stream(cfg.run.seed, Purpose::Probe);
                    let est = estimate_constants(objective, dataset, shards, 20, &mut rng)?;
                    if est.l_hat <= 0.0 {
                        return Err(Error::Config(vec![
                            "lr.fixed-sqrt: smoothness estimate is zero; give c_hat explicitly".into(),
                        ]));
                    }
                    1.0 / (2.0 * est.l_hat)
                }
            };
            Ok(LrSchedule::fixed_sqrt(c_hat, cfg.run.horizon))
        }
        "inverse-time" => {
            let xi = section
                .xi
                .ok_or_else(|| Error::Config(vec!["lr.xi required for inverse-time rate".into()]))?;
            let a = section
                .a
                .ok_or_else(|| Error::Config(vec!["lr.a required for inverse-time rate".into()]))?;
            Ok(LrSchedule::InverseTime { xi, a })
        }
        "strongly-convex" => {
            let mu = match section.mu {
                Some(mu) => mu,
                None => {
                    let (mu, _) = quadratic_spectrum(objective).map_err(|_| {
                        Error::Config(vec![
                            "lr.mu required: it can only be derived for the quadratic objective".into(),
                        ])
                    })?;
                    mu
                }
            };
            let a = match section.a {
                Some(a) => a,
                None => {
                    // a > max{4H/γ, 32κ, H}
                    let h = schedule.gap_bound() as f64;
                    let gamma = theoretical_gamma(operator, dim).ok_or_else(|| {
                        Error::Config(vec![
                            "lr.a required: operator has no static compression coefficient".into(),
                        ])
                    })?;
                    let kappa = quadratic_spectrum(objective)
                        .map(|(mu, l)| l / mu)
                        .unwrap_or(1.0);
                    (4.0 * h / gamma).max(32.0 * kappa).max(h) + 1.0
                }
            };
            Ok(LrSchedule::StronglyConvex { mu, a })
        }
        "experiment-convex" => {
            let c = section
                .c
                .ok_or_else(|| Error::Config(vec!["lr.c required for experiment-convex rate".into()]))?;
            let lambda = match section.lambda {
                Some(l) => l,
                None => match objective {
                    ObjectiveSpec::Softmax { lambda } => *lambda,
                    _ if !dataset.is_empty() => 1.0 / dataset.len() as f64,
                    _ => {
                        return Err(Error::Config(vec![
                            "lr.lambda required when the objective defines none".into(),
                        ]))
                    }
                },
            };
            let a = match section.a {
                Some(a) => a,
                None => {
                    // a = dH/k, with k read from the operator's sparsifier.
                    let h = schedule.gap_bound() as f64;
                    let k = sparsity_of(operator).ok_or_else(|| {
                        Error::Config(vec![
                            "lr.a required: operator has no sparsifier to derive a = dH/k from".into(),
                        ])
                    })?;
                    dim as f64 * h / k as f64
                }
            };
            Ok(LrSchedule::ExperimentConvex { c, lambda, a })
        }
        other => Err(Error::Config(vec![format!(
            "lr.type '{other}' unknown (fixed|fixed-sqrt|inverse-time|strongly-convex|experiment-convex)"
        )])),
    }
}

fn sparsity_of(op: &OperatorSpec) -> Option<usize> {
    match op {
        OperatorSpec::TopK { k } | OperatorSpec::RandK { k } => Some(*k),
        OperatorSpec::Composed { sparsifier, .. } | OperatorSpec::SignComp { sparsifier, .. } => {
            sparsity_of(sparsifier)
        }
        _ => None,
    }
}

fn shard_mode_from_section(cfg: &ConfigFile) -> Result<ShardMode> {
    match cfg.data.shard.as_str() {
        "contiguous" => Ok(ShardMode::Contiguous),
        "round-robin" => Ok(ShardMode::RoundRobin),
        "iid-random" => Ok(ShardMode::IidRandom {
            seed: cfg.data.shard_seed.unwrap_or(cfg.run.seed),
        }),
        other => Err(Error::Config(vec![format!(
            "data.shard '{other}' unknown (contiguous|round-robin|iid-random)"
        )])),
    }
}

/// Assemble the runnable config. Collects section-level problems into one
/// `Error::Config`; the engine re-validates cross-cutting invariants.
pub fn build_run_config(cfg: &ConfigFile, parallelism: Parallelism) -> Result<RunConfig> {
    let dataset = dataset_from_section(cfg)?;
    let objective = objective_from_section(cfg, &dataset)?;
    let shard_mode = shard_mode_from_section(cfg)?;
    let shards = shard(&dataset, cfg.run.workers, shard_mode)
        .map_err(|e| Error::Config(vec![format!("data: {e}")]))?;
    let operator = operator_from_section(&cfg.operator)?;
    let schedule = schedule_from_section(cfg)?;
    let lr = lr_from_section(cfg, &objective, &operator, &schedule, &dataset, &shards)?;

    Ok(RunConfig {
        workers: cfg.run.workers,
        horizon: cfg.run.horizon,
        batch_size: cfg.run.b,
        operator,
        schedule,
        lr,
        objective,
        dataset,
        shards,
        master_seed: cfg.run.seed,
        track_virtual: cfg.run.track_virtual,
        record_every: cfg.run.record_every,
        parallelism,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
[run]
R = 2
T = 10
b = 1
seed = 3

[operator]
type = "top-k"
k = 2

[schedule]
mode = "periodic"
H = 2

[lr]
type = "fixed"
eta = 0.1

[objective]
type = "quadratic"
dim = 6
"#;

    #[test]
    fn parses_minimal_config() {
        let cfg = parse_config(MINIMAL, &[]).unwrap();
        assert_eq!(cfg.run.workers, 2);
        assert_eq!(cfg.operator.kind, "top-k");
        let rc = build_run_config(&cfg, Parallelism::Serial).unwrap();
        assert_eq!(rc.schedule.worker_indices(0), &[2, 4, 6, 8, 10]);
        assert!(rc.validate().is_empty(), "{:?}", rc.validate());
    }

    #[test]
    fn rejects_unknown_keys() {
        let text = MINIMAL.replace("seed = 3", "seed = 3\nbogus = 1");
        let err = parse_config(&text, &[]).unwrap_err();
        assert!(err.to_string().contains("bogus"), "{err}");
    }

    #[test]
    fn rejects_missing_section() {
        let text = MINIMAL.replace("[lr]\ntype = \"fixed\"\neta = 0.1\n", "");
        let err = parse_config(&text, &[]).unwrap_err();
        assert!(err.to_string().contains("lr"), "{err}");
    }

    #[test]
    fn rejects_irrelevant_operator_key() {
        let text = MINIMAL.replace("k = 2", "k = 2\ns = 4");
        let err = build_run_config(&parse_config(&text, &[]).unwrap(), Parallelism::Serial)
            .unwrap_err();
        assert!(err.to_string().contains("does not take key"), "{err}");
    }

    #[test]
    fn override_applies() {
        let overrides = vec![("run.T".to_string(), "100".to_string())];
        let cfg = parse_config(MINIMAL, &overrides).unwrap();
        assert_eq!(cfg.run.horizon, 100);
    }

    #[test]
    fn override_nested_table() {
        let text = r#"
[run]
R = 1
T = 4
b = 1
seed = 0

[operator]
type = "sign-comp"
[operator.sparsifier]
type = "top-k"
k = 3

[schedule]
mode = "periodic"
H = 2

[lr]
type = "fixed"
eta = 0.05

[objective]
type = "quadratic"
dim = 8
"#;
        let overrides = vec![("operator.sparsifier.k".to_string(), "5".to_string())];
        let cfg = parse_config(text, &overrides).unwrap();
        let rc = build_run_config(&cfg, Parallelism::Serial).unwrap();
        assert_eq!(
            rc.operator,
            OperatorSpec::sign_comp(OperatorSpec::TopK { k: 5 }, 2)
        );
    }

    #[test]
    fn preset_paper_convex_builds() {
        let cfg = preset("paper-convex").unwrap();
        assert_eq!(cfg.run.workers, 15);
        assert_eq!(cfg.run.b, 8);
        let rc = build_run_config(&cfg, Parallelism::Serial).unwrap();
        // λ defaults to 1/n and a to dH/k = 210·8/40
        match rc.lr {
            LrSchedule::ExperimentConvex { lambda, a, .. } => {
                assert!((lambda - 1.0 / 2000.0).abs() < 1e-15);
                assert!((a - 210.0 * 8.0 / 40.0).abs() < 1e-12);
            }
            other => panic!("unexpected lr {other:?}"),
        }
        assert!(rc.validate().is_empty());
    }

    #[test]
    fn config_roundtrips_through_toml() {
        let cfg = preset("paper-convex").unwrap();
        let text = toml::to_string(&cfg).unwrap();
        let back: ConfigFile = toml::from_str(&text).unwrap();
        assert_eq!(back.run.workers, cfg.run.workers);
        assert_eq!(back.operator.kind, cfg.operator.kind);
    }

    #[test]
    fn explicit_schedule_mode() {
        let text = MINIMAL
            .replace("mode = \"periodic\"\nH = 2", "mode = \"explicit\"\nH = 4\nlists = [[4, 8, 10], [2, 6, 10]]");
        let cfg = parse_config(&text, &[]).unwrap();
        let rc = build_run_config(&cfg, Parallelism::Serial).unwrap();
        assert!(!rc.schedule.is_synchronous());
        assert_eq!(rc.schedule.worker_indices(1), &[2, 6, 10]);
    }
}
