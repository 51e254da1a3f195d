//! Stochastic and deterministic quantizers.

use rand::Rng;

use crate::vector::DenseVector;
use crate::{Error, Result};

/// QSGD-style quantizer: each coordinate's magnitude ratio `|x_i|/‖x‖₂` is
/// stochastically rounded to the grid `{0, 1/s, …, s/s}`, preserving the sign
/// and scaling back by `‖x‖₂`. Unbiased per coordinate; the zero vector maps
/// to zero.
pub fn qsgd_quantize<R: Rng + ?Sized>(x: &DenseVector, s: u32, rng: &mut R) -> Result<DenseVector> {
    if s == 0 {
        return Err(Error::parameter("qsgd: s must be >= 1"));
    }
    let norm = x.norm();
    if norm == 0.0 {
        return Ok(DenseVector::zeros(x.dim()));
    }
    let s_f = s as f64;
    let coords = x
        .as_slice()
        .iter()
        .map(|&xi| {
            let ratio = xi.abs() / norm;
            let level = stochastic_round(ratio * s_f, rng);
            norm * xi.signum() * level / s_f
        })
        .collect();
    DenseVector::new(coords)
}

/// Stochastic s-level quantizer: every coordinate is rounded on the uniform
/// grid of `s` intervals (`s+1` points) between `min(x)` and `max(x)`. The
/// interval convention is what makes `β = d/(2s²)` valid: the extreme
/// coordinates quantize exactly and each interior one contributes variance at
/// most `(max−min)²/(4s²)`. Constant vectors come back exactly.
pub fn stochastic_levels_quantize<R: Rng + ?Sized>(
    x: &DenseVector,
    s: u32,
    rng: &mut R,
) -> Result<DenseVector> {
    if s < 2 {
        return Err(Error::parameter("stochastic levels: s must be >= 2"));
    }
    let lo = x.as_slice().iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = x.as_slice().iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if lo == hi {
        return Ok(x.clone());
    }
    let step = (hi - lo) / s as f64;
    let coords = x
        .as_slice()
        .iter()
        .map(|&xi| {
            let level = stochastic_round((xi - lo) / step, rng);
            lo + level * step
        })
        .collect();
    DenseVector::new(coords)
}

/// Stochastic rotated quantizer: randomized Hadamard rotation (random ±1
/// diagonal followed by the normalized Walsh–Hadamard transform on the
/// zero-padded power-of-two length), then [`stochastic_levels_quantize`], then
/// the inverse rotation with the padding truncated.
pub fn rotated_levels_quantize<R: Rng + ?Sized>(
    x: &DenseVector,
    s: u32,
    rng: &mut R,
) -> Result<DenseVector> {
    if s < 2 {
        return Err(Error::parameter("rotated levels: s must be >= 2"));
    }
    let d = x.dim();
    let signs = random_signs(padded_dim(d), rng);
    let rotated = rotate(x.as_slice(), &signs);
    let quantized = stochastic_levels_quantize(&DenseVector::new(rotated)?, s, rng)?;
    let mut back = rotate_inverse(quantized.as_slice(), &signs);
    back.truncate(d);
    DenseVector::new(back)
}

/// Deterministic sign quantizer; `sign(0) = +1`.
pub fn sign_quantize(x: &DenseVector) -> DenseVector {
    let coords = x
        .as_slice()
        .iter()
        .map(|&xi| if xi >= 0.0 { 1.0 } else { -1.0 })
        .collect();
    DenseVector::new(coords).expect("signs are finite")
}

/// Round `p >= 0` to `floor(p)` or `floor(p)+1` with probability equal to the
/// fractional part, so the result is unbiased.
fn stochastic_round<R: Rng + ?Sized>(p: f64, rng: &mut R) -> f64 {
    let base = p.floor();
    let frac = p - base;
    if frac > 0.0 && rng.random::<f64>() < frac {
        base + 1.0
    } else {
        base
    }
}

/// Next power of two; the rotation operates on this padded length.
pub fn padded_dim(d: usize) -> usize {
    d.next_power_of_two()
}

/// Fresh ±1 diagonal for the randomized rotation.
pub fn random_signs<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<f64> {
    (0..n)
        .map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 })
        .collect()
}

/// `y = (1/√n)·H·(D·pad(x))` for the ±1 diagonal `D` in `signs`. Public so
/// oracles can drive the rotation separately from the quantization.
pub fn rotate(x: &[f64], signs: &[f64]) -> Vec<f64> {
    let n = signs.len();
    debug_assert!(n.is_power_of_two() && x.len() <= n);
    let mut buf = vec![0.0; n];
    for (i, &xi) in x.iter().enumerate() {
        buf[i] = xi * signs[i];
    }
    walsh_hadamard(&mut buf);
    buf
}

/// Inverse of [`rotate`]: `x = D·(1/√n)·H·y`, valid because the normalized
/// transform is orthonormal and `D` is its own inverse.
pub fn rotate_inverse(y: &[f64], signs: &[f64]) -> Vec<f64> {
    let mut buf = y.to_vec();
    walsh_hadamard(&mut buf);
    for (b, &s) in buf.iter_mut().zip(signs) {
        *b *= s;
    }
    buf
}

/// In-place normalized Walsh–Hadamard transform; length must be a power of two.
fn walsh_hadamard(buf: &mut [f64]) {
    let n = buf.len();
    debug_assert!(n.is_power_of_two());
    let mut stride = 1;
    while stride < n {
        for block in (0..n).step_by(stride * 2) {
            for j in block..block + stride {
                let a = buf[j];
                let b = buf[j + stride];
                buf[j] = a + b;
                buf[j + stride] = a - b;
            }
        }
        stride *= 2;
    }
    let scale = 1.0 / (n as f64).sqrt();
    for b in buf.iter_mut() {
        *b *= scale;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{global_stream, Purpose};
    use approx::assert_relative_eq;

    fn dv(v: &[f64]) -> DenseVector {
        DenseVector::new(v.to_vec()).unwrap()
    }

    fn op_rng(seed: u64) -> impl Rng {
        global_stream(seed, Purpose::Operator)
    }

    #[test]
    fn qsgd_exact_on_grid() {
        // ratio of the only nonzero coordinate is exactly 1 = s/s.
        let mut rng = op_rng(0);
        for _ in 0..32 {
            let q = qsgd_quantize(&dv(&[1.0, 0.0, 0.0]), 4, &mut rng).unwrap();
            assert_eq!(q.as_slice(), &[1.0, 0.0, 0.0]);
        }
    }

    #[test]
    fn qsgd_two_point_expectation() {
        // x=[3,4], s=1: coordinate 0 has ratio 0.6, so it is 5 w.p. 0.6 else 0,
        // giving E[q_0] = 3. Checked by Monte-Carlo against the closed form.
        let x = dv(&[3.0, 4.0]);
        let mut rng = op_rng(1);
        let n = 200_000;
        let mut sum0 = 0.0;
        let mut values_ok = true;
        for _ in 0..n {
            let q = qsgd_quantize(&x, 1, &mut rng).unwrap();
            sum0 += q[0];
            values_ok &= q[0] == 0.0 || (q[0] - 5.0).abs() < 1e-12;
        }
        assert!(values_ok, "coordinate 0 must land on {{0, 5}}");
        let mean = sum0 / n as f64;
        // variance per draw = 25·0.6·0.4 = 6 → 3σ of the mean ≈ 0.0164
        let sigma = (25.0 * 0.6 * 0.4 / n as f64).sqrt();
        assert!((mean - 3.0).abs() < 3.0 * sigma, "mean {mean}");
    }

    #[test]
    fn qsgd_zero_maps_to_zero() {
        let q = qsgd_quantize(&dv(&[0.0, 0.0]), 3, &mut op_rng(2)).unwrap();
        assert_eq!(q.as_slice(), &[0.0, 0.0]);
    }

    #[test]
    fn levels_constant_vector_exact() {
        let x = dv(&[2.5, 2.5, 2.5]);
        let q = stochastic_levels_quantize(&x, 4, &mut op_rng(3)).unwrap();
        assert_eq!(q, x);
    }

    #[test]
    fn levels_on_grid_exact() {
        // min and max are always grid points, so [0, 1] reproduces exactly.
        let x = dv(&[0.0, 1.0]);
        let mut rng = op_rng(4);
        for _ in 0..32 {
            let q = stochastic_levels_quantize(&x, 2, &mut rng).unwrap();
            assert_eq!(q, x);
        }
    }

    #[test]
    fn levels_grid_has_s_intervals() {
        // with s=2 the midpoint is a grid point and maps to itself
        let x = dv(&[0.0, 0.5, 1.0]);
        let mut rng = op_rng(8);
        for _ in 0..32 {
            let q = stochastic_levels_quantize(&x, 2, &mut rng).unwrap();
            assert_eq!(q, x);
        }
    }

    #[test]
    fn rotated_zero_is_zero() {
        let q = rotated_levels_quantize(&dv(&[0.0; 5]), 3, &mut op_rng(5)).unwrap();
        assert_eq!(q.as_slice(), &[0.0; 5]);
    }

    #[test]
    fn rotation_inverts_to_1e12() {
        // rotate → inverse-rotate without quantization (the s→∞ grid limit).
        let x = [0.3, -1.2, 4.0, 0.07];
        let mut rng = op_rng(6);
        let signs = random_signs(padded_dim(x.len()), &mut rng);
        let y = rotate(&x, &signs);
        let back = rotate_inverse(&y, &signs);
        for (a, b) in x.iter().zip(&back) {
            assert_relative_eq!(a, b, epsilon = 1e-12);
        }
    }

    #[test]
    fn rotation_pads_to_power_of_two() {
        let mut rng = op_rng(7);
        let x = dv(&[1.0, 2.0, 3.0, 4.0, 5.0]);
        let q = rotated_levels_quantize(&x, 64, &mut rng).unwrap();
        assert_eq!(q.dim(), 5);
    }

    #[test]
    fn sign_indicator_formula() {
        let q = sign_quantize(&dv(&[-0.5, 0.0, 2.0]));
        assert_eq!(q.as_slice(), &[-1.0, 1.0, 1.0]);
    }

    #[test]
    fn sign_all_positive_is_ones() {
        let q = sign_quantize(&dv(&[0.1, 3.0, 7.0]));
        assert_eq!(q.as_slice(), &[1.0, 1.0, 1.0]);
    }

    #[test]
    fn sign_idempotent() {
        let x = dv(&[-2.0, 0.0, 5.0, -0.1]);
        let once = sign_quantize(&x);
        let twice = sign_quantize(&once);
        assert_eq!(once, twice);
    }

    #[test]
    fn hadamard_preserves_energy() {
        let mut buf = vec![1.0, 2.0, 3.0, 4.0];
        let before: f64 = buf.iter().map(|b| b * b).sum();
        walsh_hadamard(&mut buf);
        let after: f64 = buf.iter().map(|b| b * b).sum();
        assert_relative_eq!(before, after, epsilon = 1e-12);
    }
}
