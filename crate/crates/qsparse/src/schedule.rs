//! Synchronization-index sets with a bounded gap.
//!
//! Each worker `r` owns a strictly increasing set of step indices in `[1, T]`
//! at which it exchanges with the master; `T` itself is always a member. The
//! gap of a set is the largest interval between consecutive indices, counting
//! an implicit leading 0, so the steps before the first synchronization count
//! toward the gap too.

use rand::Rng;

use crate::rng::{global_stream, Purpose};
use crate::{Error, Result};

/// Per-worker synchronization indices plus the horizon and gap bound they
/// were built for. Immutable after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct SyncSchedule {
    per_worker: Vec<Vec<usize>>,
    horizon: usize,
    gap_bound: usize,
}

/// Maximum difference between consecutive indices, with an implicit 0
/// prepended: a singleton `{t}` has gap `t`.
pub fn gap(indices: &[usize]) -> Result<usize> {
    if indices.is_empty() {
        return Err(Error::parameter("gap of an empty index set is undefined"));
    }
    let mut prev = 0;
    let mut max = 0;
    for &i in indices {
        if i <= prev && prev != 0 {
            return Err(Error::parameter(format!(
                "indices must be strictly increasing: {prev} then {i}"
            )));
        }
        if i == 0 {
            return Err(Error::parameter("sync indices start at 1"));
        }
        max = max.max(i - prev);
        prev = i;
    }
    Ok(max)
}

/// Every worker synchronizes at `{H, 2H, …} ∪ {T}`.
pub fn make_periodic(horizon: usize, h: usize, workers: usize) -> Result<SyncSchedule> {
    validate_params(horizon, h, workers)?;
    let mut indices: Vec<usize> = (1..=horizon / h).map(|i| i * h).collect();
    if indices.last() != Some(&horizon) {
        indices.push(horizon);
    }
    Ok(SyncSchedule {
        per_worker: vec![indices; workers],
        horizon,
        gap_bound: h,
    })
}

/// Each worker's next interval is drawn uniformly from `{1, …, H}` after every
/// synchronization, so the gap bound holds by construction. `T` is appended;
/// the appended point only shortens the final interval.
pub fn make_random_async(
    horizon: usize,
    h: usize,
    workers: usize,
    master_seed: u64,
) -> Result<SyncSchedule> {
    validate_params(horizon, h, workers)?;
    let mut rng = global_stream(master_seed, Purpose::Schedule);
    let per_worker = (0..workers)
        .map(|_| {
            let mut indices = Vec::new();
            let mut t = 0;
            loop {
                t += rng.random_range(1..=h);
                if t >= horizon {
                    break;
                }
                indices.push(t);
            }
            indices.push(horizon);
            indices
        })
        .collect();
    Ok(SyncSchedule {
        per_worker,
        horizon,
        gap_bound: h,
    })
}

fn validate_params(horizon: usize, h: usize, workers: usize) -> Result<()> {
    if horizon == 0 {
        return Err(Error::parameter("horizon T must be >= 1"));
    }
    if h == 0 || h > horizon {
        return Err(Error::parameter(format!(
            "gap bound H={h} out of range for T={horizon}"
        )));
    }
    if workers == 0 {
        return Err(Error::parameter("need at least one worker"));
    }
    Ok(())
}

impl SyncSchedule {
    /// Build from explicit per-worker index lists, checking the gap bound.
    pub fn explicit(per_worker: Vec<Vec<usize>>, horizon: usize, h: usize) -> Result<Self> {
        validate_params(horizon, h, per_worker.len())?;
        for (r, indices) in per_worker.iter().enumerate() {
            let g = gap(indices)
                .map_err(|e| Error::parameter(format!("worker {r}: {e}")))?;
            if g > h {
                return Err(Error::parameter(format!(
                    "worker {r}: gap {g} exceeds bound H={h}"
                )));
            }
            if indices.last() != Some(&horizon) {
                return Err(Error::parameter(format!(
                    "worker {r}: schedule must contain T={horizon}"
                )));
            }
            if indices.iter().any(|&i| i > horizon) {
                return Err(Error::parameter(format!(
                    "worker {r}: index beyond horizon T={horizon}"
                )));
            }
        }
        Ok(SyncSchedule {
            per_worker,
            horizon,
            gap_bound: h,
        })
    }

    pub fn workers(&self) -> usize {
        self.per_worker.len()
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn gap_bound(&self) -> usize {
        self.gap_bound
    }

    pub fn worker_indices(&self, r: usize) -> &[usize] {
        &self.per_worker[r]
    }

    /// True iff all per-worker sequences are identical, which is exactly the
    /// synchronous operation mode.
    pub fn is_synchronous(&self) -> bool {
        self.per_worker.windows(2).all(|w| w[0] == w[1])
    }
}
