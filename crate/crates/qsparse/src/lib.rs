//! Communication-efficient distributed SGD with quantization, sparsification,
//! error-compensation memory, and local iterations.
//!
//! The crate simulates a master/worker training loop in which workers compress
//! the net progress they made since the last synchronization before sending it
//! uplink, and keep the compression residual in a local memory that is folded
//! into future updates. Both synchronous and asynchronous (per-worker schedule)
//! operation are supported, with exact bit accounting and runtime verification
//! of the operator and memory invariants.
//!
//! Entry points:
//!
//! - [`ops`] — the compression operator catalog (`Top_k`, `Rand_k`, stochastic
//!   quantizers, sign, compositions, piecewise) behind one
//!   "compress to reconstruction + bit cost" interface.
//! - [`schedule`] — synchronization index sets with a bounded gap.
//! - [`objectives`] — loss/gradient oracles (quadratic, softmax regression,
//!   a smooth non-convex test objective).
//! - [`data`] — IDX ingestion, synthetic data, worker sharding.
//! - [`engine`] — the synchronous and asynchronous training loops.
//! - [`metrics`] — bit-cost model, per-step records, CSV/JSON emission.
//! - [`config`] / [`cli`] — TOML experiment configs and the `qsparse` binary.
//!
//! Every randomized component takes an explicit RNG handle derived from a
//! single master seed (see [`rng`]), so a full run is reproducible bit for bit,
//! serial or parallel.

pub mod cli;
pub mod config;
pub mod data;
pub mod engine;
pub mod metrics;
pub mod objectives;
pub mod ops;
pub mod rng;
pub mod schedule;
pub mod vector;

pub use vector::{DenseVector, SparseUpdate};

/// Crate-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A caller-supplied parameter is out of range or inconsistent.
    #[error("invalid parameter: {0}")]
    Parameter(String),
    /// Input data violates an invariant (non-finite values, bad labels, ...).
    #[error("invalid data: {0}")]
    Data(String),
    /// A binary file does not match the expected format.
    #[error("format error: {0}")]
    Format(String),
    /// Configuration problems, all collected before a run starts.
    #[error("invalid config:\n{}", .0.join("\n"))]
    Config(Vec<String>),
    /// The operation is not defined for this input variant.
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn parameter(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }

    pub fn data(msg: impl Into<String>) -> Self {
        Error::Data(msg.into())
    }

    pub fn format(msg: impl Into<String>) -> Self {
        Error::Format(msg.into())
    }

    pub fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
