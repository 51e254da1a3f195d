//! Deterministic discrete-time simulator for error-compensated compressed SGD
//! with local iterations, in synchronous and asynchronous master–worker modes.
//!
//! Within one time step the workers' gradient computations are independent and
//! may run in parallel; a barrier precedes every master aggregation, and master
//! state is only mutated between barriers. Serial and parallel execution
//! produce bit-identical results because every worker owns its RNG streams and
//! the master folds worker payloads in ascending worker id with pairwise
//! summation.

mod lr;

pub use lr::LrSchedule;

use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::data::{Dataset, ShardPlan};
use crate::metrics::StepRecord;
use crate::objectives::{grad, loss, sample_batch, ObjectiveSpec};
use crate::ops::{apply_operator, theoretical_gamma, OperatorSpec};
use crate::rng::{stream, Purpose};
use crate::schedule::SyncSchedule;
use crate::vector::DenseVector;
use crate::{Error, Result};

/// How worker steps execute within a time step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parallelism {
    Serial,
    /// Worker loop on a rayon pool; `threads = None` uses the default size.
    Parallel { threads: Option<usize> },
}

impl Parallelism {
    /// Resolve from the `QSPARSE_THREADS` convention: unset → default pool,
    /// `0` → serial, `k` → pool of `k` threads.
    pub fn from_thread_count(threads: Option<usize>) -> Self {
        match threads {
            Some(0) => Parallelism::Serial,
            Some(k) => Parallelism::Parallel { threads: Some(k) },
            None => Parallelism::Parallel { threads: None },
        }
    }
}

/// Everything a run needs. Construct directly or via [`crate::config`].
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub workers: usize,
    pub horizon: usize,
    pub batch_size: usize,
    pub operator: OperatorSpec,
    pub schedule: SyncSchedule,
    pub lr: LrSchedule,
    pub objective: ObjectiveSpec,
    pub dataset: Dataset,
    pub shards: ShardPlan,
    pub master_seed: u64,
    pub track_virtual: bool,
    pub record_every: usize,
    pub parallelism: Parallelism,
}

impl RunConfig {
    /// Collect every validation failure before any step runs.
    pub fn validate(&self) -> Vec<String> {
        let mut errors = Vec::new();
        if self.workers == 0 {
            errors.push("run.R: need at least one worker".into());
        }
        if self.horizon == 0 {
            errors.push("run.T: horizon must be >= 1".into());
        }
        if self.batch_size == 0 {
            errors.push("run.b: batch size must be >= 1".into());
        }
        if self.record_every == 0 {
            errors.push("run.record_every: must be >= 1".into());
        }
        if self.schedule.workers() != self.workers {
            errors.push(format!(
                "schedule: built for {} workers but run.R = {}",
                self.schedule.workers(),
                self.workers
            ));
        }
        if self.schedule.horizon() != self.horizon {
            errors.push(format!(
                "schedule: horizon {} does not match run.T = {}",
                self.schedule.horizon(),
                self.horizon
            ));
        }
        if let Err(e) = self.lr.validate() {
            errors.push(format!("lr: {e}"));
        }
        if let Err(e) = self.objective.validate(&self.dataset) {
            errors.push(format!("objective: {e}"));
        } else if let Err(e) = self.operator.validate(self.objective.param_dim(&self.dataset)) {
            errors.push(format!("operator: {e}"));
        }
        if self.shards.workers() != self.workers {
            errors.push(format!(
                "data: shard plan covers {} workers but run.R = {}",
                self.shards.workers(),
                self.workers
            ));
        } else {
            if self.objective.requires_data() && self.dataset.is_empty() {
                errors.push("data: objective needs data but the dataset is empty".into());
            }
            if self.objective.samples_data(&self.dataset) {
                for r in 0..self.workers {
                    if self.shards.shard(r).is_empty() {
                        errors.push(format!("data: worker {r} has an empty shard"));
                    }
                }
            }
        }
        errors
    }
}

/// Per-worker simulator state.
#[derive(Debug, Clone)]
pub struct WorkerState {
    pub id: usize,
    /// Local parameter `x̂_t^{(r)}`.
    pub x_hat: Vec<f64>,
    /// Error-compensation memory `m_t^{(r)}`; starts at zero.
    pub memory: Vec<f64>,
    /// Last global parameter this worker received.
    pub anchor: Vec<f64>,
    /// Virtual sequence `x̃_t^{(r)}`, when tracked.
    pub virtual_x: Option<Vec<f64>>,
    shard: Vec<usize>,
    batch_rng: ChaCha8Rng,
    op_rng: ChaCha8Rng,
    sync_indices: Vec<usize>,
    next_sync: usize,
    g_hat_sq: f64,
}

impl WorkerState {
    fn new(id: usize, dim: usize, config: &RunConfig) -> Self {
        WorkerState {
            id,
            x_hat: vec![0.0; dim],
            memory: vec![0.0; dim],
            anchor: vec![0.0; dim],
            virtual_x: config.track_virtual.then(|| vec![0.0; dim]),
            shard: config.shards.shard(id).to_vec(),
            batch_rng: stream(config.master_seed, Purpose::Batch, id as u64),
            op_rng: stream(config.master_seed, Purpose::Operator, id as u64),
            sync_indices: config.schedule.worker_indices(id).to_vec(),
            next_sync: 0,
            g_hat_sq: 0.0,
        }
    }

    fn syncs_at(&self, t_plus_1: usize) -> bool {
        self.sync_indices.get(self.next_sync) == Some(&t_plus_1)
    }

    /// One local SGD step: sample a mini-batch from the shard, move `x̂` to
    /// `x̂_{t+½}` in place, and return the gradient for the virtual tracker.
    pub fn local_step(
        &mut self,
        obj: &ObjectiveSpec,
        data: &Dataset,
        batch_size: usize,
        eta: f64,
    ) -> Result<Vec<f64>> {
        let g = if obj.samples_data(data) {
            let picks = sample_batch(&mut self.batch_rng, self.shard.len(), batch_size)?;
            let batch: Vec<usize> = picks.into_iter().map(|i| self.shard[i]).collect();
            grad(obj, &self.x_hat, data, &batch)?
        } else {
            grad(obj, &self.x_hat, data, &[])?
        };
        let norm_sq: f64 = g.iter().map(|x| x * x).sum();
        self.g_hat_sq = self.g_hat_sq.max(norm_sq);
        for (x, gi) in self.x_hat.iter_mut().zip(&g) {
            *x -= eta * gi;
        }
        if let Some(v) = &mut self.virtual_x {
            for (vi, gi) in v.iter_mut().zip(&g) {
                *vi -= eta * gi;
            }
        }
        Ok(g)
    }

    /// Compress the error-compensated net progress since the last received
    /// global parameter and absorb the compression residual into memory.
    /// Returns the reconstruction the master will apply plus its bit cost.
    pub fn sync_round(&mut self, operator: &OperatorSpec) -> Result<(Vec<f64>, u64)> {
        let delta: Vec<f64> = self
            .memory
            .iter()
            .zip(&self.anchor)
            .zip(&self.x_hat)
            .map(|((m, a), x)| m + a - x)
            .collect();
        let dv = DenseVector::new(delta)
            .map_err(|e| Error::data(format!("worker {} produced a bad update: {e}", self.id)))?;
        let (rec, bits) = apply_operator(operator, &dv, &mut self.op_rng)?;
        for ((m, d), r) in self.memory.iter_mut().zip(dv.as_slice()).zip(rec.as_slice()) {
            *m = d - r;
        }
        self.next_sync += 1;
        Ok((rec.into_vec(), bits))
    }
}

/// Diagnostic maxima over a run, each against its theoretical ceiling where
/// one is defined. Ratios above 1 are reported as warnings, not failures: the
/// ceilings hold in expectation and `Ĝ` is itself an estimate.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct DiagnosticsSummary {
    /// Largest observed per-batch gradient norm² (the measured `Ĝ²`).
    pub g_hat_sq: f64,
    /// Largest per-worker memory norm² over the run.
    pub max_memory_norm_sq: f64,
    /// max over t of memory norm² / its ceiling.
    pub memory_bound_ratio: Option<f64>,
    /// Largest mean local deviation `(1/R)Σ‖x̂_t − x̂_t^{(r)}‖²`.
    pub max_local_deviation: f64,
    pub local_deviation_bound_ratio: Option<f64>,
    /// Largest `‖x̂_t − x̃_t‖²` (virtual tracker on).
    pub max_virtual_gap_sq: Option<f64>,
    pub virtual_gap_bound_ratio: Option<f64>,
    /// Sync mode only: max over t of
    /// `‖(x̂_t − x̃_t) − (1/R)Σ m_t^{(r)}‖∞ / (1 + ‖x̂_t‖∞)`. This is exact
    /// algebra, so anything above accumulation error indicates a bug.
    pub max_memory_identity_dev: Option<f64>,
    pub warnings: Vec<String>,
}

/// Output of a run.
#[derive(Debug, Clone)]
pub struct RunResult {
    /// Global parameter after the final synchronization.
    pub final_param: Vec<f64>,
    /// `x̄_T`: the weight-`w_t` running average of the mean local parameter.
    pub weighted_average: Vec<f64>,
    pub records: Vec<StepRecord>,
    pub total_uplink_bits: u64,
    /// Master-to-worker broadcast traffic (raw dense parameters), kept out of
    /// the headline uplink budget.
    pub total_downlink_bits: u64,
    pub diagnostics: DiagnosticsSummary,
}

impl RunResult {
    pub fn final_loss(&self) -> f64 {
        self.records.last().map(|r| r.loss).unwrap_or(f64::NAN)
    }

    pub fn best_loss(&self) -> f64 {
        self.records
            .iter()
            .map(|r| r.loss)
            .fold(f64::INFINITY, f64::min)
    }
}

/// Run the synchronous algorithm: every worker shares one schedule, and at a
/// synchronization step the master averages all `R` compressed updates and
/// broadcasts the new parameter to everyone.
pub fn run_sync(config: &RunConfig) -> Result<RunResult> {
    let mut errors = config.validate();
    if !config.schedule.is_synchronous() {
        errors.push("schedule: run_sync requires identical per-worker schedules".into());
    }
    if !errors.is_empty() {
        return Err(Error::Config(errors));
    }
    run_inner(config, true)
}

/// Run the asynchronous algorithm: workers synchronize on their own schedules;
/// at each step the master folds in updates from exactly the synchronizing
/// subset and returns the new parameter only to them.
pub fn run_async(config: &RunConfig) -> Result<RunResult> {
    let errors = config.validate();
    if !errors.is_empty() {
        return Err(Error::Config(errors));
    }
    run_inner(config, false)
}

/// Compensated (Kahan) accumulator for the weighted parameter average.
struct WeightedAverage {
    sum: Vec<f64>,
    comp: Vec<f64>,
    total_weight: f64,
    weight_comp: f64,
}

impl WeightedAverage {
    fn new(dim: usize) -> Self {
        WeightedAverage {
            sum: vec![0.0; dim],
            comp: vec![0.0; dim],
            total_weight: 0.0,
            weight_comp: 0.0,
        }
    }

    fn add(&mut self, weight: f64, x: &[f64]) {
        for i in 0..x.len() {
            let term = weight * x[i] - self.comp[i];
            let next = self.sum[i] + term;
            self.comp[i] = (next - self.sum[i]) - term;
            self.sum[i] = next;
        }
        let term = weight - self.weight_comp;
        let next = self.total_weight + term;
        self.weight_comp = (next - self.total_weight) - term;
        self.total_weight = next;
    }

    fn mean(&self) -> Vec<f64> {
        self.sum.iter().map(|s| s / self.total_weight).collect()
    }
}

/// Sum vectors pairwise in the given (ascending worker id) order.
fn pairwise_sum(vectors: &[Vec<f64>]) -> Vec<f64> {
    fn sum_range(vectors: &[Vec<f64>], lo: usize, hi: usize) -> Vec<f64> {
        if hi - lo == 1 {
            return vectors[lo].clone();
        }
        let mid = lo + (hi - lo) / 2;
        let mut left = sum_range(vectors, lo, mid);
        let right = sum_range(vectors, mid, hi);
        for (l, r) in left.iter_mut().zip(&right) {
            *l += r;
        }
        left
    }
    sum_range(vectors, 0, vectors.len())
}

fn mean_of<'a>(parts: impl Iterator<Item = &'a [f64]>, dim: usize, count: usize) -> Vec<f64> {
    let mut mean = vec![0.0; dim];
    for p in parts {
        for (m, v) in mean.iter_mut().zip(p) {
            *m += v;
        }
    }
    let inv = 1.0 / count as f64;
    mean.iter_mut().for_each(|m| *m *= inv);
    mean
}

fn norm_sq(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum()
}

/// Diagnostic ceilings all scale as `η_t²·K·Ĝ²`, so we track the maximum of
/// `measured/η_t²` online and divide by `K·Ĝ²` once `Ĝ` is known.
struct CeilingTracker {
    max_measured: f64,
    max_over_eta_sq: f64,
}

impl CeilingTracker {
    fn new() -> Self {
        CeilingTracker {
            max_measured: 0.0,
            max_over_eta_sq: 0.0,
        }
    }

    fn observe(&mut self, measured: f64, eta: f64) {
        self.max_measured = self.max_measured.max(measured);
        self.max_over_eta_sq = self.max_over_eta_sq.max(measured / (eta * eta));
    }

    fn ratio(&self, factor_times_g_sq: Option<f64>) -> Option<f64> {
        match factor_times_g_sq {
            Some(f) if f > 0.0 => Some(self.max_over_eta_sq / f),
            Some(_) => (self.max_over_eta_sq == 0.0).then_some(0.0),
            None => None,
        }
    }
}

/// The `η_t²Ĝ²`-free factors of the diagnostic ceilings for this run.
struct CeilingFactors {
    memory: Option<f64>,
    deviation: Option<f64>,
    virtual_gap: Option<f64>,
    warnings: Vec<String>,
}

fn ceiling_factors(config: &RunConfig, synchronous: bool, dim: usize) -> CeilingFactors {
    let mut warnings = Vec::new();
    let h = config.schedule.gap_bound() as f64;
    let Some(gamma) = theoretical_gamma(&config.operator, dim) else {
        warnings.push(format!(
            "operator {} has no static compression coefficient; diagnostic ceilings skipped",
            config.operator
        ));
        return CeilingFactors {
            memory: None,
            deviation: None,
            virtual_gap: None,
            warnings,
        };
    };
    if gamma <= 0.0 {
        warnings.push(format!(
            "operator {} has compression coefficient 0; diagnostic ceilings skipped",
            config.operator
        ));
        return CeilingFactors {
            memory: None,
            deviation: None,
            virtual_gap: None,
            warnings,
        };
    }
    let g2 = gamma * gamma;
    let h2 = h * h;

    // Memory ceiling: fixed rate 4(1−γ²)/γ²·H², decaying rate 4C/γ²·H² with
    // C = 4aγ(1−γ²)/(aγ−4H), defined only when a > 4H/γ.
    let memory = if config.lr.is_decaying() {
        let a = config.lr.offset().expect("decaying schedules have an offset");
        if a * gamma > 4.0 * h {
            let c = 4.0 * a * gamma * (1.0 - g2) / (a * gamma - 4.0 * h);
            Some(4.0 * c / g2 * h2)
        } else {
            warnings.push(format!(
                "memory-contraction ceiling undefined: needs a > 4H/γ, got a={a}, H={h}, γ={gamma:.4}"
            ));
            None
        }
    } else {
        Some(4.0 * (1.0 - g2) / g2 * h2)
    };

    let (deviation, virtual_gap) = if synchronous {
        let dev = if config.lr.is_decaying() { 4.0 * h2 } else { h2 };
        // The true-vs-virtual gap equals the average memory, so its ceiling
        // is the per-worker memory ceiling.
        (Some(dev), memory)
    } else {
        // Asynchronous counterparts.
        let c_for_decay = config.lr.offset().and_then(|a| {
            (a * gamma > 4.0 * h).then(|| 4.0 * a * gamma * (1.0 - g2) / (a * gamma - 4.0 * h))
        });
        if config.lr.is_decaying() {
            match c_for_decay {
                Some(c) => {
                    let c_dd = 8.0 * (4.0 - 2.0 * gamma) * (1.0 + c / g2);
                    let dev = 8.0 * (1.0 + c_dd * h2) * h2;
                    let c1 = 192.0 * (4.0 - 2.0 * gamma) * (1.0 + c / g2);
                    let gap = c1 * h2 * h2 + 12.0 * c / g2 * h2;
                    (Some(dev), Some(gap))
                }
                None => (None, None),
            }
        } else {
            let c_p = (16.0 / g2 - 12.0) * (4.0 - 2.0 * gamma);
            let dev = (2.0 + h2 * c_p) * h2;
            let c2 = (4.0 - 2.0 * gamma) * (8.0 / g2 - 6.0);
            let gap = 6.0 * c2 * h2 * h2 + 12.0 * (1.0 - g2) / g2 * h2;
            (Some(dev), Some(gap))
        }
    };

    CeilingFactors {
        memory,
        deviation,
        virtual_gap,
        warnings,
    }
}

fn run_inner(config: &RunConfig, synchronous: bool) -> Result<RunResult> {
    match config.parallelism {
        Parallelism::Parallel { threads: Some(k) } => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(k)
                .build()
                .map_err(|e| Error::parameter(format!("thread pool: {e}")))?;
            pool.install(|| run_loop(config, synchronous, true))
        }
        Parallelism::Parallel { threads: None } => run_loop(config, synchronous, true),
        Parallelism::Serial => run_loop(config, synchronous, false),
    }
}

fn run_loop(config: &RunConfig, synchronous: bool, parallel: bool) -> Result<RunResult> {
    let obj = &config.objective;
    let data = &config.dataset;
    let dim = obj.param_dim(data);
    let big_r = config.workers;
    let horizon = config.horizon;

    let mut workers: Vec<WorkerState> =
        (0..big_r).map(|r| WorkerState::new(r, dim, config)).collect();
    let mut x_global = vec![0.0; dim];
    let mut average = WeightedAverage::new(dim);
    let mut total_bits: u64 = 0;
    let mut downlink_bits: u64 = 0;
    let mut records = Vec::new();
    let full_subset: Vec<usize> = if obj.samples_data(data) {
        (0..data.len()).collect()
    } else {
        Vec::new()
    };

    let factors = ceiling_factors(config, synchronous, dim);
    let mut memory_tracker = CeilingTracker::new();
    let mut deviation_tracker = CeilingTracker::new();
    let mut gap_tracker = CeilingTracker::new();
    let mut max_identity_dev: Option<f64> = None;

    // Diagnostics at the current state, returning what the step record needs.
    let observe_state =
        |workers: &[WorkerState],
         eta: f64,
         memory_tracker: &mut CeilingTracker,
         deviation_tracker: &mut CeilingTracker,
         gap_tracker: &mut CeilingTracker,
         max_identity_dev: &mut Option<f64>|
         -> (Vec<f64>, f64, f64, Option<f64>) {
            let x_mean = mean_of(workers.iter().map(|w| w.x_hat.as_slice()), dim, big_r);
            let mut mem_mean_norm_sq = 0.0;
            for w in workers {
                let m = norm_sq(&w.memory);
                mem_mean_norm_sq += m / big_r as f64;
                memory_tracker.observe(m, eta);
            }
            let mut deviation = 0.0;
            for w in workers {
                deviation += w
                    .x_hat
                    .iter()
                    .zip(&x_mean)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    / big_r as f64;
            }
            deviation_tracker.observe(deviation, eta);

            let mut virtual_gap = None;
            if config.track_virtual {
                let v_mean = mean_of(
                    workers.iter().map(|w| w.virtual_x.as_deref().expect("tracked")),
                    dim,
                    big_r,
                );
                let gap_sq: f64 = x_mean
                    .iter()
                    .zip(&v_mean)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum();
                gap_tracker.observe(gap_sq, eta);
                virtual_gap = Some(gap_sq);

                if synchronous {
                    // Exact algebra: x̂_t − x̃_t = average memory.
                    let mem_mean = mean_of(workers.iter().map(|w| w.memory.as_slice()), dim, big_r);
                    let mut worst = 0.0f64;
                    let mut x_inf = 0.0f64;
                    for i in 0..dim {
                        let lhs = x_mean[i] - v_mean[i];
                        worst = worst.max((lhs - mem_mean[i]).abs());
                        x_inf = x_inf.max(x_mean[i].abs());
                    }
                    let rel = worst / (1.0 + x_inf);
                    *max_identity_dev = Some(max_identity_dev.unwrap_or(0.0).max(rel));
                }
            }
            (x_mean, mem_mean_norm_sq, deviation, virtual_gap)
        };

    for t in 0..horizon {
        let eta = config.lr.eta(t);
        let (x_mean, mem_mean, deviation, virtual_gap) = observe_state(
            &workers,
            eta,
            &mut memory_tracker,
            &mut deviation_tracker,
            &mut gap_tracker,
            &mut max_identity_dev,
        );
        average.add(config.lr.weight(t), &x_mean);
        if t % config.record_every == 0 {
            records.push(StepRecord {
                t,
                loss: loss(obj, &x_mean, data, &full_subset)?,
                grad_norm_sq: Some(norm_sq(&grad(obj, &x_mean, data, &full_subset)?)),
                cumulative_bits: total_bits,
                mem_norm_sq_mean: mem_mean,
                local_deviation: deviation,
                virtual_gap,
            });
        }

        // Worker phase; the master aggregates only after the barrier.
        let step = |w: &mut WorkerState| -> Result<Option<(Vec<f64>, u64)>> {
            w.local_step(obj, data, config.batch_size, eta)?;
            if w.syncs_at(t + 1) {
                Ok(Some(w.sync_round(&config.operator)?))
            } else {
                Ok(None)
            }
        };
        let outputs: Vec<Option<(Vec<f64>, u64)>> = if parallel {
            workers
                .par_iter_mut()
                .map(step)
                .collect::<Result<Vec<_>>>()?
        } else {
            workers.iter_mut().map(step).collect::<Result<Vec<_>>>()?
        };

        let sync_set: Vec<usize> = outputs
            .iter()
            .enumerate()
            .filter_map(|(r, o)| o.is_some().then_some(r))
            .collect();
        if !sync_set.is_empty() {
            let mut payloads = Vec::with_capacity(sync_set.len());
            for r in &sync_set {
                let (rec, bits) = outputs[*r].as_ref().expect("member of sync set");
                payloads.push(rec.clone());
                total_bits += bits;
            }
            let sum = pairwise_sum(&payloads);
            for (xg, s) in x_global.iter_mut().zip(&sum) {
                *xg -= s / big_r as f64;
            }
            downlink_bits +=
                sync_set.len() as u64 * crate::metrics::bit_cost(&crate::metrics::Payload::Dense, dim);
            for r in sync_set {
                workers[r].x_hat.copy_from_slice(&x_global);
                workers[r].anchor.copy_from_slice(&x_global);
            }
        }
    }

    // Final state T.
    let eta_final = config.lr.eta(horizon);
    let (x_mean, mem_mean, deviation, virtual_gap) = observe_state(
        &workers,
        eta_final,
        &mut memory_tracker,
        &mut deviation_tracker,
        &mut gap_tracker,
        &mut max_identity_dev,
    );
    records.push(StepRecord {
        t: horizon,
        loss: loss(obj, &x_mean, data, &full_subset)?,
        grad_norm_sq: Some(norm_sq(&grad(obj, &x_mean, data, &full_subset)?)),
        cumulative_bits: total_bits,
        mem_norm_sq_mean: mem_mean,
        local_deviation: deviation,
        virtual_gap,
    });

    let g_hat_sq = workers.iter().map(|w| w.g_hat_sq).fold(0.0f64, f64::max);
    let mut warnings = factors.warnings;
    let memory_bound_ratio = memory_tracker.ratio(factors.memory.map(|f| f * g_hat_sq));
    let local_deviation_bound_ratio =
        deviation_tracker.ratio(factors.deviation.map(|f| f * g_hat_sq));
    let virtual_gap_bound_ratio = if config.track_virtual {
        gap_tracker.ratio(factors.virtual_gap.map(|f| f * g_hat_sq))
    } else {
        None
    };
    for (name, ratio) in [
        ("memory norm", memory_bound_ratio),
        ("local deviation", local_deviation_bound_ratio),
        ("virtual gap", virtual_gap_bound_ratio),
    ] {
        if let Some(r) = ratio {
            if r > 1.0 {
                warnings.push(format!(
                    "{name} exceeded its theoretical ceiling: ratio {r:.3} (measured Ĝ is an estimate)"
                ));
            }
        }
    }

    Ok(RunResult {
        final_param: x_global,
        weighted_average: average.mean(),
        records,
        total_uplink_bits: total_bits,
        total_downlink_bits: downlink_bits,
        diagnostics: DiagnosticsSummary {
            g_hat_sq,
            max_memory_norm_sq: memory_tracker.max_measured,
            memory_bound_ratio,
            max_local_deviation: deviation_tracker.max_measured,
            local_deviation_bound_ratio,
            max_virtual_gap_sq: config.track_virtual.then_some(gap_tracker.max_measured),
            virtual_gap_bound_ratio,
            max_memory_identity_dev: max_identity_dev,
            warnings,
        },
    })
}
