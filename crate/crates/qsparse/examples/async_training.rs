//! Asynchronous operation: each worker synchronizes on its own random
//! schedule (intervals uniform on 1..=H); the master folds in whichever
//! subset arrives and replies only to that subset. Compared against the
//! synchronous run with the same budget.
//!
//! ```bash
//! cargo run --release --example async_training
//! ```

use qsparse::data::{linear_perturbations, shard, ShardMode};
use qsparse::engine::{run_async, run_sync, LrSchedule, Parallelism, RunConfig};
use qsparse::objectives::{loss, optimum, quadratic_spectrum, random_quadratic};
use qsparse::ops::OperatorSpec;
use qsparse::rng::{global_stream, Purpose};
use qsparse::schedule::{make_periodic, make_random_async};

fn main() {
    let dim = 50;
    let workers = 8;
    let horizon = 3000;
    let h = 8;

    let mut obj_rng = global_stream(5, Purpose::Objective);
    let objective = random_quadratic(dim, 5.0, &mut obj_rng).unwrap();
    let (mu, l) = quadratic_spectrum(&objective).unwrap();
    let (_, f_star) = optimum(&objective).unwrap();
    let dataset = linear_perturbations(1024, dim, 0.5, 5).unwrap();
    let shards = shard(&dataset, workers, ShardMode::IidRandom { seed: 5 }).unwrap();
    let operator = OperatorSpec::sign_comp(OperatorSpec::TopK { k: 5 }, 2);
    let gamma = qsparse::ops::theoretical_gamma(&operator, dim).unwrap();
    let a = (4.0 * h as f64 / gamma).max(32.0 * l / mu).max(h as f64) + 1.0;

    let base = RunConfig {
        workers,
        horizon,
        batch_size: 8,
        operator,
        schedule: make_periodic(horizon, h, workers).unwrap(),
        lr: LrSchedule::StronglyConvex { mu, a },
        objective: objective.clone(),
        dataset: dataset.clone(),
        shards,
        master_seed: 5,
        track_virtual: true,
        record_every: 500,
        parallelism: Parallelism::Serial,
    };

    let sync_result = run_sync(&base).unwrap();

    let mut async_cfg = base.clone();
    async_cfg.schedule = make_random_async(horizon, h, workers, 5).unwrap();
    let async_result = run_async(&async_cfg).unwrap();

    let sub = |r: &qsparse::engine::RunResult| {
        loss(&objective, &r.weighted_average, &dataset, &[]).unwrap() - f_star
    };
    println!("quadratic d={dim}, R={workers}, H={h}, sign∘top-5, T={horizon}");
    println!(
        "synchronous : f(x̄)-f* = {:.4e}, uplink bits = {}",
        sub(&sync_result),
        sync_result.total_uplink_bits
    );
    println!(
        "asynchronous: f(x̄)-f* = {:.4e}, uplink bits = {}",
        sub(&async_result),
        async_result.total_uplink_bits
    );
    println!(
        "async/sync suboptimality ratio: {:.3}",
        sub(&async_result) / sub(&sync_result)
    );
    println!(
        "async virtual-gap max ‖x̂-x̃‖² = {:.3e} (sync: {:.3e})",
        async_result.diagnostics.max_virtual_gap_sq.unwrap(),
        sync_result.diagnostics.max_virtual_gap_sq.unwrap()
    );
}
