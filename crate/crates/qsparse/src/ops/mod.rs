//! Compression operators: sparsifiers, quantizers, and their compositions,
//! all behind one "compress to reconstruction + bit cost" interface.

mod check;
pub mod quantize;
pub mod sparsify;

pub use check::{empirical_compression_check, CompressionReport, InputDistribution};
pub use quantize::{
    qsgd_quantize, rotated_levels_quantize, sign_quantize, stochastic_levels_quantize,
};
pub use sparsify::{rand_k, top_k};

use rand::Rng;

use crate::metrics::{bit_cost, Payload};
use crate::vector::{m_norm, DenseVector, SparseUpdate};
use crate::{Error, Result};

/// Declarative description of a (possibly composed or piecewise) compression
/// operator. Validate against the target dimension with [`OperatorSpec::validate`]
/// before applying.
#[derive(Debug, Clone, PartialEq)]
pub enum OperatorSpec {
    /// Pass-through; transmits the dense vector.
    Identity,
    /// Keep the `k` largest-magnitude coordinates.
    TopK { k: usize },
    /// Keep `k` uniformly random coordinates.
    RandK { k: usize },
    /// QSGD-style quantizer with `s` levels.
    Qsgd { s: u32 },
    /// Stochastic s-level min/max quantizer.
    StochasticLevels { s: u32 },
    /// Randomized Hadamard rotation followed by the s-level quantizer.
    RotatedLevels { s: u32 },
    /// Deterministic ±1 quantizer.
    Sign,
    /// Quantizer applied to the sparsifier's retained values, optionally
    /// rescaled by `1/(1+β_{k,s})`.
    Composed {
        quantizer: Box<OperatorSpec>,
        sparsifier: Box<OperatorSpec>,
        scaled: bool,
    },
    /// Sign of the retained values, rescaled by `‖Comp_k(x)‖_m / k`.
    SignComp {
        sparsifier: Box<OperatorSpec>,
        norm_order: u32,
    },
    /// Different operators on disjoint coordinate ranges covering `[0, d)`.
    Piecewise { segments: Vec<Segment> },
}

/// One piecewise segment: `spec` applies to coordinates `start..end`.
#[derive(Debug, Clone, PartialEq)]
pub struct Segment {
    pub start: usize,
    pub end: usize,
    pub spec: OperatorSpec,
}

impl OperatorSpec {
    pub fn composed(quantizer: OperatorSpec, sparsifier: OperatorSpec, scaled: bool) -> Self {
        OperatorSpec::Composed {
            quantizer: Box::new(quantizer),
            sparsifier: Box::new(sparsifier),
            scaled,
        }
    }

    pub fn sign_comp(sparsifier: OperatorSpec, norm_order: u32) -> Self {
        OperatorSpec::SignComp {
            sparsifier: Box::new(sparsifier),
            norm_order,
        }
    }

    fn is_quantizer(&self) -> bool {
        matches!(
            self,
            OperatorSpec::Qsgd { .. }
                | OperatorSpec::StochasticLevels { .. }
                | OperatorSpec::RotatedLevels { .. }
        )
    }

    fn sparsifier_k(&self) -> Option<usize> {
        match self {
            OperatorSpec::TopK { k } | OperatorSpec::RandK { k } => Some(*k),
            _ => None,
        }
    }

    /// Check the spec against the dimension it will be applied to.
    ///
    /// An unscaled composition is rejected here (not per call) when its
    /// quantizer's variance blow-up `β_{k,s} >= 1`, since outside that regime
    /// the composition is not a compression operator.
    pub fn validate(&self, d: usize) -> Result<()> {
        if d == 0 {
            return Err(Error::parameter("operator target dimension must be positive"));
        }
        match self {
            OperatorSpec::Identity | OperatorSpec::Sign => Ok(()),
            OperatorSpec::TopK { k } | OperatorSpec::RandK { k } => {
                if *k == 0 || *k > d {
                    Err(Error::parameter(format!(
                        "sparsifier k={k} out of range for d={d}"
                    )))
                } else {
                    Ok(())
                }
            }
            OperatorSpec::Qsgd { s } => {
                if *s == 0 {
                    Err(Error::parameter("qsgd: s must be >= 1"))
                } else {
                    Ok(())
                }
            }
            OperatorSpec::StochasticLevels { s } | OperatorSpec::RotatedLevels { s } => {
                if *s < 2 {
                    Err(Error::parameter("level quantizer: s must be >= 2"))
                } else {
                    Ok(())
                }
            }
            OperatorSpec::Composed {
                quantizer,
                sparsifier,
                scaled,
            } => {
                if !quantizer.is_quantizer() {
                    return Err(Error::parameter(format!(
                        "composed quantizer must be a stochastic quantizer, got {quantizer}"
                    )));
                }
                let k = sparsifier.sparsifier_k().ok_or_else(|| {
                    Error::parameter(format!(
                        "composed sparsifier must be top-k or rand-k, got {sparsifier}"
                    ))
                })?;
                sparsifier.validate(d)?;
                quantizer.validate(k.max(1))?;
                if !*scaled {
                    let b = beta(quantizer, k)?;
                    if b >= 1.0 {
                        return Err(Error::parameter(format!(
                            "unscaled composition requires beta < 1, got beta_{{k={k}}} = {b:.4}; \
                             use the scaled variant"
                        )));
                    }
                }
                Ok(())
            }
            OperatorSpec::SignComp {
                sparsifier,
                norm_order,
            } => {
                if *norm_order == 0 {
                    return Err(Error::parameter("sign-comp norm order m must be >= 1"));
                }
                if sparsifier.sparsifier_k().is_none() {
                    return Err(Error::parameter(format!(
                        "sign-comp sparsifier must be top-k or rand-k, got {sparsifier}"
                    )));
                }
                sparsifier.validate(d)
            }
            OperatorSpec::Piecewise { segments } => {
                if segments.is_empty() {
                    return Err(Error::parameter("piecewise operator needs at least one segment"));
                }
                let mut cursor = 0;
                for seg in segments {
                    if seg.start != cursor {
                        return Err(Error::parameter(format!(
                            "piecewise segments must tile [0, {d}) contiguously; \
                             expected start {cursor}, got {}",
                            seg.start
                        )));
                    }
                    if seg.end <= seg.start {
                        return Err(Error::parameter(format!(
                            "piecewise segment [{}, {}) is empty",
                            seg.start, seg.end
                        )));
                    }
                    seg.spec.validate(seg.end - seg.start)?;
                    cursor = seg.end;
                }
                if cursor != d {
                    return Err(Error::parameter(format!(
                        "piecewise segments cover [0, {cursor}) but d={d}"
                    )));
                }
                Ok(())
            }
        }
    }
}

/// Variance blow-up coefficient `β_{n,s}` of a stochastic quantizer applied to
/// an `n`-dimensional vector:
///
/// - QSGD: `min(n/s², √n/s)`
/// - stochastic s-level: `n/(2s²)`
/// - rotated s-level: `2·log₂(2n')/s²` with `n'` the padded power-of-two length
pub fn beta(spec: &OperatorSpec, n: usize) -> Result<f64> {
    let n_f = n as f64;
    match spec {
        OperatorSpec::Qsgd { s } => {
            let s_f = *s as f64;
            Ok((n_f / (s_f * s_f)).min(n_f.sqrt() / s_f))
        }
        OperatorSpec::StochasticLevels { s } => {
            let s_f = *s as f64;
            Ok(n_f / (2.0 * s_f * s_f))
        }
        OperatorSpec::RotatedLevels { s } => {
            let s_f = *s as f64;
            let padded = quantize::padded_dim(n) as f64;
            Ok(2.0 * (2.0 * padded).log2() / (s_f * s_f))
        }
        other => Err(Error::parameter(format!(
            "beta is defined for stochastic quantizers only, got {other}"
        ))),
    }
}

/// Static compression coefficient `γ` of the operator, when one exists.
///
/// `None` means no input-independent coefficient is available: bare `Sign`,
/// an unscaled composition outside its `β < 1` regime, or `SignComp` with
/// `m = 1`, whose coefficient carries a data-dependent term (only the `1/d`
/// floor is input-independent).
pub fn theoretical_gamma(spec: &OperatorSpec, d: usize) -> Option<f64> {
    let d_f = d as f64;
    match spec {
        OperatorSpec::Identity => Some(1.0),
        OperatorSpec::TopK { k } | OperatorSpec::RandK { k } => Some(*k as f64 / d_f),
        OperatorSpec::Qsgd { .. }
        | OperatorSpec::StochasticLevels { .. }
        | OperatorSpec::RotatedLevels { .. } => {
            let b = beta(spec, d).expect("quantizer variant");
            if b <= 1.0 {
                Some(1.0 - b)
            } else {
                None
            }
        }
        OperatorSpec::Sign => None,
        OperatorSpec::Composed {
            quantizer,
            sparsifier,
            scaled,
        } => {
            let k = sparsifier.sparsifier_k()? as f64;
            let b = beta(quantizer, k as usize).ok()?;
            if *scaled {
                Some(k / (d_f * (1.0 + b)))
            } else if b < 1.0 {
                Some((1.0 - b) * k / d_f)
            } else {
                None
            }
        }
        OperatorSpec::SignComp {
            sparsifier,
            norm_order,
        } => {
            let k = sparsifier.sparsifier_k()? as f64;
            if *norm_order >= 2 {
                Some(k.powf(2.0 / *norm_order as f64 - 1.0) / d_f)
            } else {
                None
            }
        }
        OperatorSpec::Piecewise { segments } => {
            let mut min = f64::INFINITY;
            for seg in segments {
                let g = theoretical_gamma(&seg.spec, seg.end - seg.start)?;
                min = min.min(g);
            }
            Some(min)
        }
    }
}

/// Apply the operator to `x`, returning the reconstruction the master would
/// use plus the uplink bit cost under the fixed-width payload model.
pub fn apply_operator<R: Rng + ?Sized>(
    spec: &OperatorSpec,
    x: &DenseVector,
    rng: &mut R,
) -> Result<(DenseVector, u64)> {
    let d = x.dim();
    let (rec, payload) = apply_inner(spec, x, rng)?;
    Ok((rec, bit_cost(&payload, d)))
}

fn apply_inner<R: Rng + ?Sized>(
    spec: &OperatorSpec,
    x: &DenseVector,
    rng: &mut R,
) -> Result<(DenseVector, Payload)> {
    let d = x.dim();
    match spec {
        OperatorSpec::Identity => Ok((x.clone(), Payload::Dense)),
        OperatorSpec::TopK { k } => {
            let s = top_k(x, *k)?;
            let nnz = s.support_size();
            Ok((s.densify(), Payload::SparseRaw { nnz }))
        }
        OperatorSpec::RandK { k } => {
            let s = rand_k(x, *k, rng)?;
            let nnz = s.support_size();
            Ok((s.densify(), Payload::SparseRaw { nnz }))
        }
        OperatorSpec::Qsgd { s } => {
            if x.norm_sq() == 0.0 {
                return Ok((DenseVector::zeros(d), Payload::Empty));
            }
            let q = qsgd_quantize(x, *s, rng)?;
            let nnz = q.as_slice().iter().filter(|v| **v != 0.0).count();
            Ok((q, Payload::SparseLevels { nnz, s: *s }))
        }
        OperatorSpec::StochasticLevels { s } => {
            let q = stochastic_levels_quantize(x, *s, rng)?;
            Ok((q, Payload::DenseLevels { n: d, s: *s }))
        }
        OperatorSpec::RotatedLevels { s } => {
            let q = rotated_levels_quantize(x, *s, rng)?;
            Ok((
                q,
                Payload::DenseLevels {
                    n: quantize::padded_dim(d),
                    s: *s,
                },
            ))
        }
        OperatorSpec::Sign => Ok((sign_quantize(x), Payload::SignDense)),
        OperatorSpec::Composed {
            quantizer,
            sparsifier,
            scaled,
        } => {
            let sparse = apply_sparsifier(sparsifier, x, rng)?;
            let values = sparse.values();
            if values.iter().all(|v| *v == 0.0) {
                return Ok((DenseVector::zeros(d), Payload::Empty));
            }
            // The k retained values are quantized as a k-length vector, so the
            // quantizer's norm is over the support only.
            let k = values.len();
            let kvec = DenseVector::new(values)?;
            let (q, s_levels) = match quantizer.as_ref() {
                OperatorSpec::Qsgd { s } => (qsgd_quantize(&kvec, *s, rng)?, *s),
                OperatorSpec::StochasticLevels { s } => {
                    (stochastic_levels_quantize(&kvec, *s, rng)?, *s)
                }
                OperatorSpec::RotatedLevels { s } => {
                    (rotated_levels_quantize(&kvec, *s, rng)?, *s)
                }
                other => {
                    return Err(Error::parameter(format!(
                        "composed quantizer must be a stochastic quantizer, got {other}"
                    )))
                }
            };
            let scale = if *scaled {
                1.0 + beta(quantizer, k)?
            } else {
                1.0
            };
            let mut coords = vec![0.0; d];
            let mut nnz = 0;
            for (&(i, _), &qv) in sparse.entries().iter().zip(q.as_slice()) {
                if qv != 0.0 {
                    nnz += 1;
                }
                coords[i] = qv / scale;
            }
            Ok((DenseVector::new(coords)?, Payload::SparseLevels { nnz, s: s_levels }))
        }
        OperatorSpec::SignComp {
            sparsifier,
            norm_order,
        } => {
            let sparse = apply_sparsifier(sparsifier, x, rng)?;
            let values = sparse.values();
            let norm = m_norm(&values, *norm_order);
            if norm == 0.0 {
                return Ok((DenseVector::zeros(d), Payload::Empty));
            }
            let scale = norm / sparse.support_size() as f64;
            let mut coords = vec![0.0; d];
            for &(i, v) in sparse.entries() {
                coords[i] = scale * if v >= 0.0 { 1.0 } else { -1.0 };
            }
            Ok((
                DenseVector::new(coords)?,
                Payload::SparseSign {
                    nnz: sparse.support_size(),
                },
            ))
        }
        OperatorSpec::Piecewise { segments } => {
            let mut coords = Vec::with_capacity(d);
            let mut payloads = Vec::with_capacity(segments.len());
            for seg in segments {
                let slice = DenseVector::new(x.as_slice()[seg.start..seg.end].to_vec())?;
                let (rec, payload) = apply_inner(&seg.spec, &slice, rng)?;
                coords.extend_from_slice(rec.as_slice());
                payloads.push((seg.end - seg.start, payload));
            }
            Ok((DenseVector::new(coords)?, Payload::Piecewise(payloads)))
        }
    }
}

fn apply_sparsifier<R: Rng + ?Sized>(
    spec: &OperatorSpec,
    x: &DenseVector,
    rng: &mut R,
) -> Result<SparseUpdate> {
    match spec {
        OperatorSpec::TopK { k } => top_k(x, *k),
        OperatorSpec::RandK { k } => rand_k(x, *k, rng),
        other => Err(Error::parameter(format!(
            "expected top-k or rand-k sparsifier, got {other}"
        ))),
    }
}

impl std::fmt::Display for OperatorSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            OperatorSpec::Identity => write!(f, "identity"),
            OperatorSpec::TopK { k } => write!(f, "top-k(k={k})"),
            OperatorSpec::RandK { k } => write!(f, "rand-k(k={k})"),
            OperatorSpec::Qsgd { s } => write!(f, "qsgd(s={s})"),
            OperatorSpec::StochasticLevels { s } => write!(f, "levels(s={s})"),
            OperatorSpec::RotatedLevels { s } => write!(f, "rotated(s={s})"),
            OperatorSpec::Sign => write!(f, "sign"),
            OperatorSpec::Composed {
                quantizer,
                sparsifier,
                scaled,
            } => write!(
                f,
                "{}∘{}{}",
                quantizer,
                sparsifier,
                if *scaled { " scaled" } else { "" }
            ),
            OperatorSpec::SignComp {
                sparsifier,
                norm_order,
            } => write!(f, "sign∘{sparsifier}(m={norm_order})"),
            OperatorSpec::Piecewise { segments } => {
                write!(f, "piecewise[")?;
                for (i, seg) in segments.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{}..{}: {}", seg.start, seg.end, seg.spec)?;
                }
                write!(f, "]")
            }
        }
    }
}
