//! Uplink bit accounting, per-step records, and CSV/JSON emission.
//!
//! The payload model is fixed-width rather than entropy-coded: reproducible
//! and conservative. Raw values cost 32 bits, norms 32 bits, indices
//! `⌈log₂ d⌉` bits, quantization levels `⌈log₂(s+1)⌉` bits, signs 1 bit.
//! Downlink broadcast traffic is not part of the headline budget.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use crate::{Error, Result};

pub const VALUE_BITS: u64 = 32;
pub const NORM_BITS: u64 = 32;
pub const SIGN_BITS: u64 = 1;

/// `⌈log₂ d⌉`, floored at 1 so every index costs at least one bit.
pub fn index_bits(d: usize) -> u64 {
    (usize::BITS - (d - 1).leading_zeros()).max(1) as u64
}

/// `⌈log₂(s+1)⌉` bits to name one of the levels `{0, …, s}`.
pub fn level_bits(s: u32) -> u64 {
    (u32::BITS - s.leading_zeros()).max(1) as u64
}

/// What the worker would put on the wire for one compressed update.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Payload {
    /// Raw dense vector.
    Dense,
    /// `nnz` index/value pairs.
    SparseRaw { nnz: usize },
    /// `nnz` index/sign pairs plus one norm scalar.
    SparseSign { nnz: usize },
    /// One norm scalar plus `nnz` index/level/sign triples (coordinates the
    /// quantizer zeroed are not sent).
    SparseLevels { nnz: usize, s: u32 },
    /// Min/max scalars plus a level for each of `n` coordinates.
    DenseLevels { n: usize, s: u32 },
    /// One sign bit per coordinate.
    SignDense,
    /// Concatenated segment payloads, each with its own dimension.
    Piecewise(Vec<(usize, Payload)>),
    /// Nothing to send (zero input to a norm-scaled operator).
    Empty,
}

/// Bits on the wire for a payload produced against a `d`-dimensional target.
pub fn bit_cost(payload: &Payload, d: usize) -> u64 {
    match payload {
        Payload::Dense => VALUE_BITS * d as u64,
        Payload::SparseRaw { nnz } => *nnz as u64 * (index_bits(d) + VALUE_BITS),
        Payload::SparseSign { nnz } => *nnz as u64 * (index_bits(d) + SIGN_BITS) + NORM_BITS,
        Payload::SparseLevels { nnz, s } => {
            NORM_BITS + *nnz as u64 * (index_bits(d) + level_bits(*s) + SIGN_BITS)
        }
        Payload::DenseLevels { n, s } => 2 * NORM_BITS + *n as u64 * level_bits(*s),
        Payload::SignDense => SIGN_BITS * d as u64,
        Payload::Piecewise(parts) => parts.iter().map(|(dd, p)| bit_cost(p, *dd)).sum(),
        Payload::Empty => 0,
    }
}

/// Per-iteration metrics. `t` indexes the state *before* step `t` runs, so
/// `cumulative_bits` counts uplink traffic from syncs strictly before `t`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepRecord {
    pub t: usize,
    pub loss: f64,
    pub grad_norm_sq: Option<f64>,
    pub cumulative_bits: u64,
    pub mem_norm_sq_mean: f64,
    pub local_deviation: f64,
    pub virtual_gap: Option<f64>,
}

/// Cumulative bits at the first recorded step whose loss is at or below
/// `target`; `None` if the run never reaches it.
pub fn bits_to_target(records: &[StepRecord], target: f64) -> Option<u64> {
    records
        .iter()
        .find(|r| r.loss <= target)
        .map(|r| r.cumulative_bits)
}

fn fmt_f64(v: f64) -> String {
    // 17 significant digits round-trip any f64 exactly.
    format!("{v:.16e}")
}

/// Write records as CSV with the fixed header
/// `t,loss,grad_norm,bits,mem_norm_mean,local_dev,virtual_gap`.
pub fn emit_csv(records: &[StepRecord], path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    let mut w = BufWriter::new(file);
    let io_err = |e| Error::io(path.display().to_string(), e);
    writeln!(w, "t,loss,grad_norm,bits,mem_norm_mean,local_dev,virtual_gap").map_err(io_err)?;
    for r in records {
        writeln!(
            w,
            "{},{},{},{},{},{},{}",
            r.t,
            fmt_f64(r.loss),
            r.grad_norm_sq.map(fmt_f64).unwrap_or_default(),
            r.cumulative_bits,
            fmt_f64(r.mem_norm_sq_mean),
            fmt_f64(r.local_deviation),
            r.virtual_gap.map(fmt_f64).unwrap_or_default(),
        )
        .map_err(io_err)?;
    }
    w.flush().map_err(io_err)?;
    Ok(())
}

/// Run summary: headline numbers, a bits-to-target ladder, diagnostic maxima,
/// and the full effective config so the run can be reproduced byte for byte.
#[derive(Debug, Serialize)]
pub struct RunSummary<C: Serialize> {
    pub final_loss: f64,
    pub best_loss: f64,
    pub total_uplink_bits: u64,
    pub total_downlink_bits: u64,
    pub bits_to_target: Vec<TargetBits>,
    pub diagnostics: crate::engine::DiagnosticsSummary,
    pub config: C,
}

#[derive(Debug, Serialize)]
pub struct TargetBits {
    pub target_loss: f64,
    pub bits: Option<u64>,
}

/// Geometric ladder of loss targets between the initial and best loss.
pub fn target_ladder(records: &[StepRecord], rungs: usize) -> Vec<TargetBits> {
    let (Some(first), Some(best)) = (
        records.first().map(|r| r.loss),
        records
            .iter()
            .map(|r| r.loss)
            .min_by(|a, b| a.partial_cmp(b).expect("finite losses")),
    ) else {
        return Vec::new();
    };
    if !(first.is_finite() && best.is_finite()) || best <= 0.0 || best >= first {
        return Vec::new();
    }
    (1..=rungs)
        .map(|i| {
            let frac = i as f64 / rungs as f64;
            let target = first * (best / first).powf(frac);
            TargetBits {
                target_loss: target,
                bits: bits_to_target(records, target),
            }
        })
        .collect()
}

pub fn emit_summary_json<C: Serialize>(summary: &RunSummary<C>, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    let mut w = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut w, summary)
        .map_err(|e| Error::Format(format!("summary serialization failed: {e}")))?;
    w.write_all(b"\n")
        .and_then(|_| w.flush())
        .map_err(|e| Error::io(path.display().to_string(), e))?;
    Ok(())
}
