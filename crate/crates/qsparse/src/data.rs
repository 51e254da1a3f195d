//! Dataset ingestion (IDX binary format), synthetic data, and worker sharding.

use std::fs::File;
use std::io::{BufWriter, Cursor, Read, Write};
use std::path::Path;

use byteorder::{BigEndian, ReadBytesExt, WriteBytesExt};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::rng::{global_stream, Purpose};
use crate::{Error, Result};

const IMAGES_MAGIC: u32 = 0x0000_0803;
const LABELS_MAGIC: u32 = 0x0000_0801;

/// A labeled dataset: `n` feature rows of width `d_in`, integer labels in
/// `[0, classes)`. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    features: Vec<f64>,
    labels: Vec<usize>,
    n: usize,
    d_in: usize,
    classes: usize,
}

impl Dataset {
    pub fn new(features: Vec<f64>, labels: Vec<usize>, d_in: usize) -> Result<Self> {
        if d_in == 0 {
            return Err(Error::data("feature dimension must be positive"));
        }
        if features.len() != labels.len() * d_in {
            return Err(Error::data(format!(
                "feature matrix size {} does not match {} labels × d_in {}",
                features.len(),
                labels.len(),
                d_in
            )));
        }
        if let Some(bad) = features.iter().position(|f| !f.is_finite()) {
            return Err(Error::data(format!("non-finite feature at flat index {bad}")));
        }
        let classes = labels.iter().max().map_or(0, |m| m + 1);
        Ok(Dataset {
            n: labels.len(),
            features,
            labels,
            d_in,
            classes,
        })
    }

    /// Empty dataset for objectives that take no data.
    pub fn empty() -> Self {
        Dataset {
            features: Vec::new(),
            labels: Vec::new(),
            n: 0,
            d_in: 1,
            classes: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn d_in(&self) -> usize {
        self.d_in
    }

    pub fn classes(&self) -> usize {
        self.classes
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.features[i * self.d_in..(i + 1) * self.d_in]
    }

    pub fn label(&self, i: usize) -> usize {
        self.labels[i]
    }

    /// Min-max normalize to `[0, 1]` and snap to the 1/255 grid, so an IDX
    /// write/read cycle reproduces the dataset exactly.
    pub fn quantized_to_unit(&self) -> Dataset {
        let lo = self.features.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = self.features.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let span = if hi > lo { hi - lo } else { 1.0 };
        let features = self
            .features
            .iter()
            .map(|&f| ((f - lo) / span * 255.0).round() / 255.0)
            .collect();
        Dataset {
            features,
            labels: self.labels.clone(),
            n: self.n,
            d_in: self.d_in,
            classes: self.classes,
        }
    }
}

/// Parse big-endian IDX image + label files. Pixels are scaled to `[0, 1]`.
pub fn load_idx(images_path: &Path, labels_path: &Path) -> Result<Dataset> {
    let images = read_file(images_path)?;
    let labels = read_file(labels_path)?;
    parse_idx(&images, &labels)
}

fn read_file(path: &Path) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    File::open(path)
        .and_then(|mut f| f.read_to_end(&mut buf))
        .map_err(|e| Error::io(path.display().to_string(), e))?;
    Ok(buf)
}

fn parse_idx(images: &[u8], labels: &[u8]) -> Result<Dataset> {
    let mut img = Cursor::new(images);
    let magic = img
        .read_u32::<BigEndian>()
        .map_err(|_| Error::format("images: truncated before magic"))?;
    if magic != IMAGES_MAGIC {
        return Err(Error::format(format!(
            "images: unexpected magic {magic:#010x}, want {IMAGES_MAGIC:#010x}"
        )));
    }
    let count = img
        .read_u32::<BigEndian>()
        .map_err(|_| Error::format("images: truncated at count"))? as usize;
    let rows = img
        .read_u32::<BigEndian>()
        .map_err(|_| Error::format("images: truncated at rows"))? as usize;
    let cols = img
        .read_u32::<BigEndian>()
        .map_err(|_| Error::format("images: truncated at cols"))? as usize;
    let d_in = rows * cols;
    if d_in == 0 {
        return Err(Error::format("images: rows*cols must be positive"));
    }
    let mut pixels = vec![0u8; count * d_in];
    img.read_exact(&mut pixels)
        .map_err(|_| Error::format(format!("images: truncated pixel data, want {} bytes", count * d_in)))?;

    let mut lab = Cursor::new(labels);
    let magic = lab
        .read_u32::<BigEndian>()
        .map_err(|_| Error::format("labels: truncated before magic"))?;
    if magic != LABELS_MAGIC {
        return Err(Error::format(format!(
            "labels: unexpected magic {magic:#010x}, want {LABELS_MAGIC:#010x}"
        )));
    }
    let label_count = lab
        .read_u32::<BigEndian>()
        .map_err(|_| Error::format("labels: truncated at count"))? as usize;
    if label_count != count {
        return Err(Error::format(format!(
            "count mismatch: {count} images but {label_count} labels"
        )));
    }
    let mut raw_labels = vec![0u8; label_count];
    lab.read_exact(&mut raw_labels)
        .map_err(|_| Error::format("labels: truncated label data"))?;

    let features = pixels.iter().map(|&p| p as f64 / 255.0).collect();
    let labels = raw_labels.iter().map(|&l| l as usize).collect();
    Dataset::new(features, labels, d_in)
}

/// Write the dataset as an IDX image/label pair (inverse of [`load_idx`]).
/// Features must already lie on the `[0, 1]` 1/255 grid; see
/// [`Dataset::quantized_to_unit`].
pub fn write_idx(data: &Dataset, images_path: &Path, labels_path: &Path) -> Result<()> {
    if data.classes > 256 {
        return Err(Error::parameter("IDX labels are bytes; need classes <= 256"));
    }
    let to_byte = |f: f64| -> Result<u8> {
        let scaled = f * 255.0;
        let rounded = scaled.round();
        if !(0.0..=255.0).contains(&rounded) || (scaled - rounded).abs() > 1e-9 {
            return Err(Error::parameter(format!(
                "feature {f} is not on the [0,1] 1/255 grid; quantize before writing IDX"
            )));
        }
        Ok(rounded as u8)
    };

    let img_file =
        File::create(images_path).map_err(|e| Error::io(images_path.display().to_string(), e))?;
    let mut img = BufWriter::new(img_file);
    let img_err = |e| Error::io(images_path.display().to_string(), e);
    img.write_u32::<BigEndian>(IMAGES_MAGIC).map_err(img_err)?;
    img.write_u32::<BigEndian>(data.n as u32).map_err(img_err)?;
    // one row of d_in columns per sample
    img.write_u32::<BigEndian>(1).map_err(img_err)?;
    img.write_u32::<BigEndian>(data.d_in as u32).map_err(img_err)?;
    for &f in &data.features {
        img.write_u8(to_byte(f)?).map_err(img_err)?;
    }
    img.flush().map_err(img_err)?;

    let lab_file =
        File::create(labels_path).map_err(|e| Error::io(labels_path.display().to_string(), e))?;
    let mut lab = BufWriter::new(lab_file);
    let lab_err = |e| Error::io(labels_path.display().to_string(), e);
    lab.write_u32::<BigEndian>(LABELS_MAGIC).map_err(lab_err)?;
    lab.write_u32::<BigEndian>(data.n as u32).map_err(lab_err)?;
    for &l in &data.labels {
        lab.write_u8(l as u8).map_err(lab_err)?;
    }
    lab.flush().map_err(lab_err)?;
    Ok(())
}

/// `classes` Gaussian clusters with pairwise class-mean separation `margin`,
/// near-balanced labels, deterministic in the seed.
pub fn synthetic_classification(
    n: usize,
    d_in: usize,
    classes: usize,
    margin: f64,
    seed: u64,
) -> Result<Dataset> {
    if classes < 2 {
        return Err(Error::parameter("need at least 2 classes"));
    }
    if n < classes {
        return Err(Error::parameter(format!(
            "need n >= classes, got n={n} classes={classes}"
        )));
    }
    if d_in == 0 {
        return Err(Error::parameter("d_in must be positive"));
    }
    let mut rng = global_stream(seed, Purpose::Data);

    // Class means: random unit directions scaled so every pair is `margin`
    // apart in expectation; for margin 0 all classes share the origin.
    let mut means = vec![vec![0.0; d_in]; classes];
    for mean in means.iter_mut() {
        let dir: Vec<f64> = (0..d_in).map(|_| StandardNormal.sample(&mut rng)).collect();
        let norm = dir.iter().map(|x| x * x).sum::<f64>().sqrt().max(1e-12);
        // Independent Gaussian directions are nearly orthogonal in moderate
        // dimension, so scaling each mean to margin/√2 puts pairs ≈ margin apart.
        let scale = margin / std::f64::consts::SQRT_2 / norm;
        for (m, d) in mean.iter_mut().zip(dir) {
            *m = d * scale;
        }
    }

    let mut features = Vec::with_capacity(n * d_in);
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let class = i % classes; // near-balanced
        for j in 0..d_in {
            let noise: f64 = StandardNormal.sample(&mut rng);
            features.push(means[class][j] + noise);
        }
        labels.push(class);
    }
    // Make sure every class id up to `classes` is represented in the metadata
    // even if n is small.
    let mut data = Dataset::new(features, labels, d_in)?;
    data.classes = classes;
    Ok(data)
}

/// `n` Gaussian rows of width `dim` scaled by `sigma` and centered so they
/// sum to zero exactly. Feeding these to the quadratic objective makes its
/// mini-batch gradients noisy while leaving the full objective, and hence the
/// optimum, untouched.
pub fn linear_perturbations(n: usize, dim: usize, sigma: f64, seed: u64) -> Result<Dataset> {
    if n < 2 {
        return Err(Error::parameter("need at least 2 perturbation rows to center"));
    }
    if sigma < 0.0 {
        return Err(Error::parameter("sigma must be nonnegative"));
    }
    let mut rng = global_stream(seed, Purpose::Data);
    let mut features: Vec<f64> = (0..n * dim)
        .map(|_| {
            let z: f64 = StandardNormal.sample(&mut rng);
            sigma * z
        })
        .collect();
    for j in 0..dim {
        let mean = (0..n).map(|i| features[i * dim + j]).sum::<f64>() / n as f64;
        for i in 0..n {
            features[i * dim + j] -= mean;
        }
    }
    Dataset::new(features, vec![0; n], dim)
}

/// How data points are assigned to workers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShardMode {
    /// Consecutive blocks; maximally heterogeneous when the data is sorted.
    Contiguous,
    /// Point `i` goes to worker `i mod R`.
    RoundRobin,
    /// Shuffle with the given seed, then split contiguously.
    IidRandom { seed: u64 },
}

/// Partition of `[0, n)` across workers.
#[derive(Debug, Clone, PartialEq)]
pub struct ShardPlan {
    assignment: Vec<Vec<usize>>,
    mode: ShardMode,
}

impl ShardPlan {
    pub fn workers(&self) -> usize {
        self.assignment.len()
    }

    pub fn shard(&self, r: usize) -> &[usize] {
        &self.assignment[r]
    }

    pub fn mode(&self) -> ShardMode {
        self.mode
    }
}

/// Split the dataset across `workers` shards.
pub fn shard(data: &Dataset, workers: usize, mode: ShardMode) -> Result<ShardPlan> {
    if workers == 0 {
        return Err(Error::parameter("need at least one worker"));
    }
    if data.is_empty() {
        // Data-free objectives: every worker gets an empty shard.
        return Ok(ShardPlan {
            assignment: vec![Vec::new(); workers],
            mode,
        });
    }
    let n = data.len();
    if workers > n {
        return Err(Error::parameter(format!(
            "more workers ({workers}) than data points ({n})"
        )));
    }
    let assignment = match mode {
        ShardMode::Contiguous => split_contiguous(&(0..n).collect::<Vec<_>>(), workers),
        ShardMode::RoundRobin => {
            let mut shards = vec![Vec::new(); workers];
            for i in 0..n {
                shards[i % workers].push(i);
            }
            shards
        }
        ShardMode::IidRandom { seed } => {
            let mut order: Vec<usize> = (0..n).collect();
            let mut rng = global_stream(seed, Purpose::Data);
            // Fisher-Yates
            for i in (1..n).rev() {
                let j = rng.random_range(0..=i);
                order.swap(i, j);
            }
            split_contiguous(&order, workers)
        }
    };
    Ok(ShardPlan { assignment, mode })
}

fn split_contiguous(order: &[usize], workers: usize) -> Vec<Vec<usize>> {
    let n = order.len();
    let base = n / workers;
    let extra = n % workers;
    let mut shards = Vec::with_capacity(workers);
    let mut start = 0;
    for r in 0..workers {
        let len = base + usize::from(r < extra);
        shards.push(order[start..start + len].to_vec());
        start += len;
    }
    shards
}
