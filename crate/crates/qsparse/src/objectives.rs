//! Loss/gradient oracles: a strongly convex quadratic, ℓ2-regularized softmax
//! regression, and a smooth non-convex logistic objective, plus mini-batch
//! sampling and constant estimation.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::data::{Dataset, ShardPlan};
use crate::{Error, Result};

/// Flat parameter vector. For softmax regression this is the flattening of
/// `(x_1 … x_L, z)`: the L weight columns followed by the L biases.
pub type ParamVector = Vec<f64>;

/// The objective being optimized.
#[derive(Debug, Clone, PartialEq)]
pub enum ObjectiveSpec {
    /// `f(w) = ½ wᵀAw − cᵀw` with `A` symmetric positive definite. With an
    /// empty dataset the gradient is exact (zero noise floor). A non-empty
    /// dataset is read as centered per-sample linear perturbations `ζ_i`
    /// (see [`crate::data::linear_perturbations`]): a mini-batch sees
    /// `Aw − c − mean(ζ_i)`, while the full objective and its optimum are
    /// unchanged because the perturbations sum to zero.
    Quadratic { a: DMatrix<f64>, c: DVector<f64> },
    /// Softmax regression with an ℓ2 regularizer on the weights (biases are
    /// not regularized).
    Softmax { lambda: f64 },
    /// Binary logistic loss plus the smooth non-convex regularizer
    /// `α·Σ wᵢ²/(1+wᵢ²)`; bounded below with an analytic gradient.
    NonConvexLogistic { alpha: f64 },
}

impl ObjectiveSpec {
    /// Validate internal consistency and compatibility with the dataset.
    pub fn validate(&self, data: &Dataset) -> Result<()> {
        match self {
            ObjectiveSpec::Quadratic { a, c } => {
                if !a.is_square() || a.nrows() == 0 {
                    return Err(Error::parameter("quadratic matrix must be square and nonempty"));
                }
                if !data.is_empty() && data.d_in() != a.nrows() {
                    return Err(Error::parameter(format!(
                        "quadratic perturbation width {} does not match dimension {}",
                        data.d_in(),
                        a.nrows()
                    )));
                }
                if a.nrows() != c.len() {
                    return Err(Error::parameter(format!(
                        "quadratic dimensions disagree: A is {}×{}, c has {}",
                        a.nrows(),
                        a.ncols(),
                        c.len()
                    )));
                }
                let sym_err = (a - a.transpose()).abs().max();
                if sym_err > 1e-10 {
                    return Err(Error::parameter(format!(
                        "quadratic matrix not symmetric (max asymmetry {sym_err:.3e})"
                    )));
                }
                if a.clone().cholesky().is_none() {
                    return Err(Error::parameter(
                        "quadratic matrix not positive definite (Cholesky failed)",
                    ));
                }
                Ok(())
            }
            ObjectiveSpec::Softmax { lambda } => {
                if *lambda <= 0.0 {
                    return Err(Error::parameter("softmax lambda must be positive"));
                }
                if data.classes() < 2 {
                    return Err(Error::parameter(format!(
                        "softmax needs at least 2 classes, dataset has {}",
                        data.classes()
                    )));
                }
                Ok(())
            }
            ObjectiveSpec::NonConvexLogistic { alpha } => {
                if *alpha <= 0.0 {
                    return Err(Error::parameter("non-convex regularizer alpha must be positive"));
                }
                if data.classes() != 2 {
                    return Err(Error::parameter(format!(
                        "logistic objective needs binary labels, dataset has {} classes",
                        data.classes()
                    )));
                }
                Ok(())
            }
        }
    }

    /// Reject a dataset whose labels exceed an expected class count. Data
    /// files are accepted as-is at load time; the range check lives here.
    pub fn check_expected_classes(data: &Dataset, expected: usize) -> Result<()> {
        if data.classes() > expected {
            return Err(Error::parameter(format!(
                "dataset contains label {} but only {expected} classes are expected",
                data.classes() - 1
            )));
        }
        Ok(())
    }

    /// Dimension of the parameter vector for this objective over `data`.
    pub fn param_dim(&self, data: &Dataset) -> usize {
        match self {
            ObjectiveSpec::Quadratic { a, .. } => a.nrows(),
            ObjectiveSpec::Softmax { .. } => data.d_in() * data.classes() + data.classes(),
            ObjectiveSpec::NonConvexLogistic { .. } => data.d_in(),
        }
    }

    /// True when mini-batches should be drawn from `data` for this objective.
    pub fn samples_data(&self, data: &Dataset) -> bool {
        match self {
            ObjectiveSpec::Quadratic { .. } => !data.is_empty(),
            _ => true,
        }
    }

    /// True when the objective cannot run without a dataset.
    pub fn requires_data(&self) -> bool {
        !matches!(self, ObjectiveSpec::Quadratic { .. })
    }
}

/// Mean loss over `subset` plus the regularizer.
pub fn loss(obj: &ObjectiveSpec, w: &[f64], data: &Dataset, subset: &[usize]) -> Result<f64> {
    match obj {
        ObjectiveSpec::Quadratic { a, c } => {
            let wv = DVector::from_column_slice(w);
            let mut value = 0.5 * (a * &wv).dot(&wv) - c.dot(&wv);
            if !data.is_empty() && !subset.is_empty() {
                let mean = mean_row(data, subset);
                value -= mean.iter().zip(w).map(|(z, wi)| z * wi).sum::<f64>();
            }
            Ok(value)
        }
        ObjectiveSpec::Softmax { lambda } => {
            require_nonempty(subset)?;
            let (d_in, classes) = (data.d_in(), data.classes());
            let mut total = 0.0;
            let mut logits = vec![0.0; classes];
            for &i in subset {
                softmax_logits(w, data.row(i), d_in, classes, &mut logits);
                total -= log_softmax_at(&logits, data.label(i));
            }
            let weight_sq: f64 = w[..d_in * classes].iter().map(|x| x * x).sum();
            Ok(total / subset.len() as f64 + 0.5 * lambda * weight_sq)
        }
        ObjectiveSpec::NonConvexLogistic { alpha } => {
            require_nonempty(subset)?;
            let mut total = 0.0;
            for &i in subset {
                let margin = dot(w, data.row(i));
                let y = if data.label(i) == 1 { 1.0 } else { -1.0 };
                total += softplus(-y * margin);
            }
            let reg: f64 = w.iter().map(|x| x * x / (1.0 + x * x)).sum();
            Ok(total / subset.len() as f64 + alpha * reg)
        }
    }
}

/// Exact analytic gradient of [`loss`] over the same subset.
pub fn grad(obj: &ObjectiveSpec, w: &[f64], data: &Dataset, subset: &[usize]) -> Result<ParamVector> {
    match obj {
        ObjectiveSpec::Quadratic { a, c } => {
            let wv = DVector::from_column_slice(w);
            let mut g: ParamVector = ((a * &wv) - c).data.into();
            if !data.is_empty() && !subset.is_empty() {
                let mean = mean_row(data, subset);
                for (gi, z) in g.iter_mut().zip(&mean) {
                    *gi -= z;
                }
            }
            Ok(g)
        }
        ObjectiveSpec::Softmax { lambda } => {
            require_nonempty(subset)?;
            let (d_in, classes) = (data.d_in(), data.classes());
            let mut g = vec![0.0; w.len()];
            let mut logits = vec![0.0; classes];
            let inv = 1.0 / subset.len() as f64;
            for &i in subset {
                let row = data.row(i);
                softmax_logits(w, row, d_in, classes, &mut logits);
                softmax_inplace(&mut logits);
                for j in 0..classes {
                    let coeff = (logits[j] - f64::from(data.label(i) == j)) * inv;
                    let col = &mut g[j * d_in..(j + 1) * d_in];
                    for (gc, &xc) in col.iter_mut().zip(row) {
                        *gc += coeff * xc;
                    }
                    g[d_in * classes + j] += coeff;
                }
            }
            for (gc, &wc) in g[..d_in * classes].iter_mut().zip(w) {
                *gc += lambda * wc;
            }
            Ok(g)
        }
        ObjectiveSpec::NonConvexLogistic { alpha } => {
            require_nonempty(subset)?;
            let mut g = vec![0.0; w.len()];
            let inv = 1.0 / subset.len() as f64;
            for &i in subset {
                let row = data.row(i);
                let y = if data.label(i) == 1 { 1.0 } else { -1.0 };
                let margin = dot(w, row);
                let coeff = -y * sigmoid(-y * margin) * inv;
                for (gc, &xc) in g.iter_mut().zip(row) {
                    *gc += coeff * xc;
                }
            }
            for (gc, &wc) in g.iter_mut().zip(w) {
                let denom = 1.0 + wc * wc;
                *gc += alpha * 2.0 * wc / (denom * denom);
            }
            Ok(g)
        }
    }
}

fn mean_row(data: &Dataset, subset: &[usize]) -> Vec<f64> {
    let mut mean = vec![0.0; data.d_in()];
    for &i in subset {
        for (m, v) in mean.iter_mut().zip(data.row(i)) {
            *m += v;
        }
    }
    let inv = 1.0 / subset.len() as f64;
    mean.iter_mut().for_each(|m| *m *= inv);
    mean
}

fn require_nonempty(subset: &[usize]) -> Result<()> {
    if subset.is_empty() {
        Err(Error::parameter("loss/grad need a non-empty subset"))
    } else {
        Ok(())
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn softmax_logits(w: &[f64], row: &[f64], d_in: usize, classes: usize, out: &mut [f64]) {
    for (j, o) in out.iter_mut().enumerate().take(classes) {
        *o = dot(&w[j * d_in..(j + 1) * d_in], row) + w[d_in * classes + j];
    }
}

/// `log p_label` computed stably from raw logits.
fn log_softmax_at(logits: &[f64], label: usize) -> f64 {
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let log_z = logits.iter().map(|l| (l - max).exp()).sum::<f64>().ln() + max;
    logits[label] - log_z
}

fn softmax_inplace(logits: &mut [f64]) {
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut z = 0.0;
    for l in logits.iter_mut() {
        *l = (*l - max).exp();
        z += *l;
    }
    for l in logits.iter_mut() {
        *l /= z;
    }
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// `ln(1 + eˣ)` without overflow.
fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

/// `b` indices drawn uniformly with replacement from `[0, n)`.
pub fn sample_batch<R: Rng + ?Sized>(rng: &mut R, n: usize, b: usize) -> Result<Vec<usize>> {
    if b == 0 {
        return Err(Error::parameter("batch size must be >= 1"));
    }
    if n == 0 {
        return Err(Error::parameter("cannot sample from an empty shard"));
    }
    Ok((0..b).map(|_| rng.random_range(0..n)).collect())
}

/// Ground-truth minimizer of the quadratic objective via Cholesky.
pub fn optimum(obj: &ObjectiveSpec) -> Result<(ParamVector, f64)> {
    match obj {
        ObjectiveSpec::Quadratic { a, c } => {
            let chol = a
                .clone()
                .cholesky()
                .ok_or_else(|| Error::parameter("quadratic matrix not positive definite"))?;
            let w_star = chol.solve(c);
            let f_star = 0.5 * (a * &w_star).dot(&w_star) - c.dot(&w_star);
            Ok((w_star.data.into(), f_star))
        }
        other => Err(Error::Unsupported(format!(
            "optimum is only available for the quadratic objective, got {other:?}"
        ))),
    }
}

/// Smallest and largest eigenvalues of the quadratic's matrix (μ and L).
pub fn quadratic_spectrum(obj: &ObjectiveSpec) -> Result<(f64, f64)> {
    match obj {
        ObjectiveSpec::Quadratic { a, .. } => {
            let eig = a.clone().symmetric_eigen();
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            for &v in eig.eigenvalues.iter() {
                lo = lo.min(v);
                hi = hi.max(v);
            }
            Ok((lo, hi))
        }
        other => Err(Error::Unsupported(format!(
            "spectrum is only available for the quadratic objective, got {other:?}"
        ))),
    }
}

/// Random SPD matrix with eigenvalues evenly spaced on `[1, cond]` plus a
/// standard normal linear term; deterministic in the rng.
pub fn random_quadratic<R: Rng + ?Sized>(dim: usize, cond: f64, rng: &mut R) -> Result<ObjectiveSpec> {
    if dim == 0 {
        return Err(Error::parameter("quadratic dimension must be positive"));
    }
    if cond < 1.0 {
        return Err(Error::parameter("condition number must be >= 1"));
    }
    let gauss: DMatrix<f64> = DMatrix::from_fn(dim, dim, |_, _| StandardNormal.sample(rng));
    let q = gauss.qr().q();
    let eigs = DVector::from_fn(dim, |i, _| {
        if dim == 1 {
            1.0
        } else {
            1.0 + (cond - 1.0) * i as f64 / (dim - 1) as f64
        }
    });
    let a: DMatrix<f64> = &q * DMatrix::from_diagonal(&eigs) * q.transpose();
    // Symmetrize away the last bits of rounding noise.
    let a = (&a + a.transpose()) * 0.5;
    let c = DVector::from_fn(dim, |_, _| StandardNormal.sample(rng));
    Ok(ObjectiveSpec::Quadratic { a, c })
}

/// Estimated problem constants, fed into the diagnostic ceilings.
#[derive(Debug, Clone)]
pub struct ConstantEstimates {
    /// `Ĝ`: square root of the largest observed per-sample gradient norm².
    pub g_hat: f64,
    /// Per-worker gradient-variance estimates.
    pub sigma_hat: Vec<f64>,
    /// Largest observed gradient-difference quotient (smoothness estimate).
    pub l_hat: f64,
}

/// Probe the objective along a deterministic random walk: `probes` points
/// after the origin. `Ĝ²` is the running max of per-sample gradient norms,
/// `σ̂_r` the per-shard gradient variance, `L̂` the max difference quotient
/// between consecutive probe points.
pub fn estimate_constants<R: Rng + ?Sized>(
    obj: &ObjectiveSpec,
    data: &Dataset,
    shards: &ShardPlan,
    probes: usize,
    rng: &mut R,
) -> Result<ConstantEstimates> {
    if probes == 0 {
        return Err(Error::parameter("need at least one probe point"));
    }
    let dim = obj.param_dim(data);
    let mut points = Vec::with_capacity(probes + 1);
    points.push(vec![0.0; dim]);
    for _ in 0..probes {
        points.push((0..dim).map(|_| StandardNormal.sample(rng)).collect());
    }

    let workers = shards.workers();
    let mut g_hat_sq = 0.0f64;
    let mut sigma_sq = vec![0.0f64; workers];
    let mut l_hat = 0.0f64;
    let mut prev_full: Option<(Vec<f64>, ParamVector)> = None;

    for point in &points {
        for r in 0..workers {
            let shard = shards.shard(r);
            if obj.samples_data(data) {
                let shard_mean = grad(obj, point, data, shard)?;
                let mut var = 0.0;
                for &i in shard {
                    let gi = grad(obj, point, data, &[i])?;
                    let norm_sq: f64 = gi.iter().map(|g| g * g).sum();
                    g_hat_sq = g_hat_sq.max(norm_sq);
                    var += gi
                        .iter()
                        .zip(&shard_mean)
                        .map(|(a, b)| (a - b) * (a - b))
                        .sum::<f64>();
                }
                if !shard.is_empty() {
                    sigma_sq[r] = sigma_sq[r].max(var / shard.len() as f64);
                }
            } else {
                let g = grad(obj, point, data, &[])?;
                let norm_sq: f64 = g.iter().map(|x| x * x).sum();
                g_hat_sq = g_hat_sq.max(norm_sq);
            }
        }
        let full_subset: Vec<usize> = (0..data.len()).collect();
        let full = grad(obj, point, data, if obj.samples_data(data) { &full_subset } else { &[] })?;
        if let Some((prev_point, prev_grad)) = &prev_full {
            let dw: f64 = point
                .iter()
                .zip(prev_point)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            let dg: f64 = full
                .iter()
                .zip(prev_grad)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            if dw > 1e-12 {
                l_hat = l_hat.max(dg / dw);
            }
        }
        prev_full = Some((point.clone(), full));
    }

    Ok(ConstantEstimates {
        g_hat: g_hat_sq.sqrt(),
        sigma_hat: sigma_sq.iter().map(|s| s.sqrt()).collect(),
        l_hat,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{shard, synthetic_classification, ShardMode};
    use crate::rng::{global_stream, Purpose};
    use approx::assert_relative_eq;

    fn identity_quadratic(dim: usize) -> ObjectiveSpec {
        ObjectiveSpec::Quadratic {
            a: DMatrix::identity(dim, dim),
            c: DVector::zeros(dim),
        }
    }

    #[test]
    fn quadratic_zero_loss_at_origin() {
        let obj = identity_quadratic(3);
        let l = loss(&obj, &[0.0, 0.0, 0.0], &Dataset::empty(), &[]).unwrap();
        assert_eq!(l, 0.0);
    }

    #[test]
    fn quadratic_gradient_is_aw_minus_c() {
        let obj = identity_quadratic(3);
        let w = [1.0, -2.0, 0.5];
        let g = grad(&obj, &w, &Dataset::empty(), &[]).unwrap();
        assert_eq!(g.as_slice(), &w);
    }

    #[test]
    fn quadratic_optimum_diag_example() {
        // A = diag(1,2), c = (1,2) → w* = (1,1), f* = −1.5
        let obj = ObjectiveSpec::Quadratic {
            a: DMatrix::from_diagonal(&DVector::from_column_slice(&[1.0, 2.0])),
            c: DVector::from_column_slice(&[1.0, 2.0]),
        };
        let (w_star, f_star) = optimum(&obj).unwrap();
        assert_relative_eq!(w_star[0], 1.0, epsilon = 1e-12);
        assert_relative_eq!(w_star[1], 1.0, epsilon = 1e-12);
        assert_relative_eq!(f_star, -1.5, epsilon = 1e-12);
    }

    #[test]
    fn optimum_gradient_vanishes() {
        let mut rng = global_stream(5, Purpose::Objective);
        let obj = random_quadratic(8, 10.0, &mut rng).unwrap();
        let (w_star, _) = optimum(&obj).unwrap();
        let g = grad(&obj, &w_star, &Dataset::empty(), &[]).unwrap();
        let norm = g.iter().map(|x| x * x).sum::<f64>().sqrt();
        assert!(norm <= 1e-10, "gradient norm at optimum: {norm}");
    }

    #[test]
    fn optimum_rejects_non_quadratic() {
        assert!(optimum(&ObjectiveSpec::Softmax { lambda: 0.1 }).is_err());
    }

    #[test]
    fn validate_rejects_indefinite_matrix() {
        let obj = ObjectiveSpec::Quadratic {
            a: DMatrix::from_diagonal(&DVector::from_column_slice(&[1.0, -1.0])),
            c: DVector::zeros(2),
        };
        assert!(obj.validate(&Dataset::empty()).is_err());
    }

    #[test]
    fn softmax_uniform_loss_at_zero() {
        // balanced labels, w = 0, tiny λ → loss ≈ log L
        let data = synthetic_classification(100, 4, 5, 1.0, 3).unwrap();
        let obj = ObjectiveSpec::Softmax { lambda: 1e-12 };
        let w = vec![0.0; obj.param_dim(&data)];
        let subset: Vec<usize> = (0..data.len()).collect();
        let l = loss(&obj, &w, &data, &subset).unwrap();
        assert_relative_eq!(l, 5.0f64.ln(), epsilon = 1e-9);
    }

    #[test]
    fn softmax_bias_gradient_at_zero() {
        let data = synthetic_classification(60, 3, 3, 1.0, 7).unwrap();
        let obj = ObjectiveSpec::Softmax { lambda: 0.01 };
        let w = vec![0.0; obj.param_dim(&data)];
        let subset: Vec<usize> = (0..data.len()).collect();
        let g = grad(&obj, &w, &data, &subset).unwrap();
        let mut freq = vec![0.0; 3];
        for &i in &subset {
            freq[data.label(i)] += 1.0 / subset.len() as f64;
        }
        for j in 0..3 {
            let bias_grad = g[3 * 3 + j];
            assert_relative_eq!(bias_grad, 1.0 / 3.0 - freq[j], epsilon = 1e-12);
        }
    }

    // Straight-line scalar reference for a 3-point synthetic set.
    #[test]
    fn softmax_matches_reference_evaluation() {
        let data = Dataset::new(
            vec![1.0, 0.0, 0.0, 1.0, 1.0, 1.0],
            vec![0, 1, 1],
            2,
        )
        .unwrap();
        let lambda = 0.5;
        let obj = ObjectiveSpec::Softmax { lambda };
        // layout: x_0 = (w0,w1), x_1 = (w2,w3), z = (w4,w5)
        let w = [0.3, -0.2, 0.1, 0.4, 0.05, -0.1];

        let mut reference = 0.0;
        for (row, label) in [([1.0f64, 0.0], 0usize), ([0.0, 1.0], 1), ([1.0, 1.0], 1)] {
            let logit0: f64 = w[0] * row[0] + w[1] * row[1] + w[4];
            let logit1: f64 = w[2] * row[0] + w[3] * row[1] + w[5];
            let z = logit0.exp() + logit1.exp();
            let p = [logit0.exp() / z, logit1.exp() / z];
            reference -= p[label].ln();
        }
        reference /= 3.0;
        reference += 0.5 * lambda * (w[0] * w[0] + w[1] * w[1] + w[2] * w[2] + w[3] * w[3]);

        let l = loss(&obj, &w, &data, &[0, 1, 2]).unwrap();
        assert_relative_eq!(l, reference, epsilon = 1e-12);
    }

    fn finite_diff_check(obj: &ObjectiveSpec, data: &Dataset, subset: &[usize], w: &mut [f64]) -> f64 {
        let g = grad(obj, w, data, subset).unwrap();
        let h = 1e-5;
        let mut worst: f64 = 0.0;
        for i in 0..w.len() {
            let orig = w[i];
            w[i] = orig + h;
            let up = loss(obj, w, data, subset).unwrap();
            w[i] = orig - h;
            let down = loss(obj, w, data, subset).unwrap();
            w[i] = orig;
            let fd = (up - down) / (2.0 * h);
            worst = worst.max((fd - g[i]).abs() / g[i].abs().max(1.0));
        }
        worst
    }

    #[test]
    fn gradients_match_finite_differences() {
        let mut rng = global_stream(11, Purpose::Probe);
        let empty = Dataset::empty();
        let softmax_data = synthetic_classification(40, 3, 3, 2.0, 1).unwrap();
        let logistic_data = synthetic_classification(40, 4, 2, 2.0, 2).unwrap();
        let quad = random_quadratic(6, 8.0, &mut rng).unwrap();
        let cases: Vec<(ObjectiveSpec, &Dataset)> = vec![
            (quad, &empty),
            (ObjectiveSpec::Softmax { lambda: 0.05 }, &softmax_data),
            (ObjectiveSpec::NonConvexLogistic { alpha: 0.3 }, &logistic_data),
        ];
        for (obj, data) in cases {
            let dim = obj.param_dim(data);
            let subset: Vec<usize> = (0..data.len()).collect();
            for _ in 0..25 {
                let mut w: Vec<f64> =
                    (0..dim).map(|_| StandardNormal.sample(&mut rng)).collect();
                let worst = finite_diff_check(&obj, data, &subset, &mut w);
                assert!(worst <= 1e-5, "{obj:?}: finite-difference mismatch {worst}");
            }
        }
    }

    #[test]
    fn softmax_midpoint_convexity() {
        let data = synthetic_classification(30, 3, 3, 1.5, 4).unwrap();
        let obj = ObjectiveSpec::Softmax { lambda: 0.05 };
        let dim = obj.param_dim(&data);
        let subset: Vec<usize> = (0..data.len()).collect();
        let mut rng = global_stream(12, Purpose::Probe);
        for _ in 0..50 {
            let u: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(&mut rng)).collect();
            let v: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(&mut rng)).collect();
            let mid: Vec<f64> = u.iter().zip(&v).map(|(a, b)| (a + b) / 2.0).collect();
            let fu = loss(&obj, &u, &data, &subset).unwrap();
            let fv = loss(&obj, &v, &data, &subset).unwrap();
            let fm = loss(&obj, &mid, &data, &subset).unwrap();
            assert!(fm <= (fu + fv) / 2.0 + 1e-12);
        }
    }

    #[test]
    fn quadratic_strong_convexity_lower_bound() {
        let mut rng = global_stream(13, Purpose::Probe);
        let obj = random_quadratic(6, 12.0, &mut rng).unwrap();
        let (w_star, f_star) = optimum(&obj).unwrap();
        let (mu, _) = quadratic_spectrum(&obj).unwrap();
        assert_relative_eq!(mu, 1.0, epsilon = 1e-8);
        for _ in 0..50 {
            let w: Vec<f64> = (0..6).map(|_| StandardNormal.sample(&mut rng)).collect();
            let f = loss(&obj, &w, &Dataset::empty(), &[]).unwrap();
            let dist_sq: f64 = w.iter().zip(&w_star).map(|(a, b)| (a - b) * (a - b)).sum();
            assert!(f - f_star >= 0.5 * mu * dist_sq - 1e-9);
        }
    }

    #[test]
    fn sample_batch_degenerate_and_deterministic() {
        let mut rng = global_stream(14, Purpose::Batch);
        let batch = sample_batch(&mut rng, 1, 5).unwrap();
        assert_eq!(batch, vec![0; 5]);

        let a = sample_batch(&mut global_stream(15, Purpose::Batch), 100, 10).unwrap();
        let b = sample_batch(&mut global_stream(15, Purpose::Batch), 100, 10).unwrap();
        assert_eq!(a, b);
        assert!(sample_batch(&mut rng, 10, 0).is_err());
    }

    #[test]
    fn sample_batch_uniform_chi_square() {
        let n = 20;
        let draws = 100_000;
        let mut rng = global_stream(16, Purpose::Batch);
        let batch = sample_batch(&mut rng, n, draws).unwrap();
        let mut counts = vec![0.0f64; n];
        for i in batch {
            counts[i] += 1.0;
        }
        let expected = draws as f64 / n as f64;
        let chi_sq: f64 = counts.iter().map(|c| (c - expected) * (c - expected) / expected).sum();
        // chi-square with n−1 dof: mean n−1, sd √(2(n−1))
        let dof = (n - 1) as f64;
        assert!(chi_sq <= dof + 3.0 * (2.0 * dof).sqrt(), "chi-square {chi_sq}");
    }

    #[test]
    fn constants_identity_quadratic() {
        let obj = identity_quadratic(4);
        let data = Dataset::empty();
        let shards = shard(&data, 2, ShardMode::Contiguous).unwrap();
        let mut rng = global_stream(17, Purpose::Probe);
        let est = estimate_constants(&obj, &data, &shards, 10, &mut rng).unwrap();
        assert_relative_eq!(est.l_hat, 1.0, epsilon = 0.05);
        assert!(est.sigma_hat.iter().all(|s| *s == 0.0));
    }

    #[test]
    fn constants_g_hat_monotone_in_probes() {
        let data = synthetic_classification(30, 3, 2, 1.0, 6).unwrap();
        let obj = ObjectiveSpec::NonConvexLogistic { alpha: 0.2 };
        let shards = shard(&data, 2, ShardMode::RoundRobin).unwrap();
        let mut prev = 0.0;
        for probes in [1, 3, 6, 12] {
            let mut rng = global_stream(19, Purpose::Probe);
            let est = estimate_constants(&obj, &data, &shards, probes, &mut rng).unwrap();
            assert!(est.g_hat >= prev, "probes={probes}");
            prev = est.g_hat;
        }
    }

    #[test]
    fn sigma_zero_for_identical_points() {
        // all points byte-identical (features and labels) → σ̂ = 0 exactly;
        // build a two-class metadata dataset but probe a single-class shard
        let mut features = vec![1.0, 2.0].repeat(10);
        features.extend_from_slice(&[1.0, 2.0]);
        let mut labels = vec![1usize; 10];
        labels.push(0);
        let data = Dataset::new(features, labels, 2).unwrap();
        let obj = ObjectiveSpec::NonConvexLogistic { alpha: 0.2 };
        // contiguous sharding puts the lone class-0 point in the last shard
        let plan = shard(&data, 11, ShardMode::Contiguous).unwrap();
        let mut rng = global_stream(20, Purpose::Probe);
        let est = estimate_constants(&obj, &data, &plan, 2, &mut rng).unwrap();
        for r in 0..10 {
            assert_eq!(est.sigma_hat[r], 0.0, "shard {r} has identical points");
        }
    }
}
