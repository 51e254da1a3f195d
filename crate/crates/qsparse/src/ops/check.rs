//! Empirical verification of the compression property
//! `E‖x − C(x)‖² ≤ (1 − γ)‖x‖²`.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal, StudentT};

use super::{apply_operator, beta, theoretical_gamma, OperatorSpec};
use crate::vector::DenseVector;
use crate::Result;

/// Input distribution used to draw test vectors.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InputDistribution {
    /// Independent standard normal coordinates.
    StandardNormal,
    /// Student-t with 3 degrees of freedom; stresses heavy tails.
    HeavyTailed,
    /// 90% of coordinates zero, the rest standard normal; stresses Top_k vs Rand_k.
    Sparse,
}

impl InputDistribution {
    pub fn draw<R: Rng + ?Sized>(&self, d: usize, rng: &mut R) -> DenseVector {
        loop {
            let coords: Vec<f64> = match self {
                InputDistribution::StandardNormal => {
                    (0..d).map(|_| StandardNormal.sample(rng)).collect()
                }
                InputDistribution::HeavyTailed => {
                    let t = StudentT::new(3.0).expect("valid dof");
                    (0..d).map(|_| t.sample(rng)).collect()
                }
                InputDistribution::Sparse => (0..d)
                    .map(|_| {
                        if rng.random::<f64>() < 0.9 {
                            0.0
                        } else {
                            StandardNormal.sample(rng)
                        }
                    })
                    .collect(),
            };
            let v = DenseVector::new(coords).expect("finite draws");
            if v.norm_sq() > 0.0 {
                return v;
            }
        }
    }
}

impl std::str::FromStr for InputDistribution {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "normal" => Ok(InputDistribution::StandardNormal),
            "heavy" => Ok(InputDistribution::HeavyTailed),
            "sparse" => Ok(InputDistribution::Sparse),
            other => Err(crate::Error::parameter(format!(
                "unknown distribution '{other}' (expected normal|heavy|sparse)"
            ))),
        }
    }
}

/// Outcome of an empirical compression check.
#[derive(Debug, Clone)]
pub struct CompressionReport {
    /// Static coefficient `γ`, when the operator has one.
    pub gamma_theoretical: Option<f64>,
    /// Quantizer blow-up `β` where applicable (bare quantizer: dimension `d`;
    /// composition: support size `k`).
    pub beta: Option<f64>,
    /// Mean over trials of the per-vector error ratio `E_C‖x−C(x)‖²/‖x‖²`.
    pub empirical_ratio: f64,
    /// Standard error of that mean.
    pub std_error: f64,
    /// Largest per-vector ratio observed.
    pub max_ratio: f64,
    pub trials: usize,
}

impl CompressionReport {
    /// PASS when the mean ratio respects `1 − γ` up to three standard errors
    /// of Monte-Carlo noise. Operators without a static `γ` (the `m = 1`
    /// sign composition) are judged against their input-independent floor.
    pub fn passes(&self, bound_gamma: Option<f64>) -> bool {
        match bound_gamma.or(self.gamma_theoretical) {
            Some(g) => self.empirical_ratio <= (1.0 - g) + 3.0 * self.std_error,
            None => false,
        }
    }
}

fn beta_of(spec: &OperatorSpec, d: usize) -> Option<f64> {
    match spec {
        OperatorSpec::Qsgd { .. }
        | OperatorSpec::StochasticLevels { .. }
        | OperatorSpec::RotatedLevels { .. } => beta(spec, d).ok(),
        OperatorSpec::Composed {
            quantizer,
            sparsifier,
            ..
        } => {
            let k = match sparsifier.as_ref() {
                OperatorSpec::TopK { k } | OperatorSpec::RandK { k } => *k,
                _ => return None,
            };
            beta(quantizer, k).ok()
        }
        _ => None,
    }
}

/// Draw `trials` vectors from `distribution`, estimate the error ratio of the
/// operator on each (averaging `inner` draws of the operator's own
/// randomness), and summarize against the theoretical coefficient.
pub fn empirical_compression_check<R: Rng + ?Sized>(
    spec: &OperatorSpec,
    d: usize,
    trials: usize,
    inner: usize,
    rng: &mut R,
    distribution: InputDistribution,
) -> Result<CompressionReport> {
    if trials == 0 {
        return Err(crate::Error::parameter("trials must be >= 1"));
    }
    spec.validate(d)?;
    let inner = inner.max(1);
    let mut ratios = Vec::with_capacity(trials);
    for _ in 0..trials {
        let x = distribution.draw(d, rng);
        let norm_sq = x.norm_sq();
        let mut acc = 0.0;
        for _ in 0..inner {
            let (rec, _) = apply_operator(spec, &x, rng)?;
            let err: f64 = x
                .as_slice()
                .iter()
                .zip(rec.as_slice())
                .map(|(a, b)| (a - b) * (a - b))
                .sum();
            acc += err / norm_sq;
        }
        ratios.push(acc / inner as f64);
    }
    let n = ratios.len() as f64;
    let mean = ratios.iter().sum::<f64>() / n;
    let var = ratios.iter().map(|r| (r - mean) * (r - mean)).sum::<f64>() / n.max(2.0);
    let max_ratio = ratios.iter().cloned().fold(0.0f64, f64::max);
    Ok(CompressionReport {
        gamma_theoretical: theoretical_gamma(spec, d),
        beta: beta_of(spec, d),
        empirical_ratio: mean,
        std_error: (var / n).sqrt(),
        max_ratio,
        trials,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{global_stream, Purpose};
    use approx::assert_relative_eq;

    #[test]
    fn identity_ratio_is_zero() {
        let mut rng = global_stream(0, Purpose::Operator);
        let report = empirical_compression_check(
            &OperatorSpec::Identity,
            16,
            50,
            1,
            &mut rng,
            InputDistribution::StandardNormal,
        )
        .unwrap();
        assert_eq!(report.empirical_ratio, 0.0);
        assert_eq!(report.max_ratio, 0.0);
        assert!(report.passes(None));
    }

    // Brute force over both C(2,1) subsets: the ratio is exactly 1/2 for
    // every x, so the estimator must sit tight on it.
    #[test]
    fn rand_1_of_2_ratio_exactly_half() {
        let mut rng = global_stream(1, Purpose::Operator);
        let report = empirical_compression_check(
            &OperatorSpec::RandK { k: 1 },
            2,
            200,
            64,
            &mut rng,
            InputDistribution::StandardNormal,
        )
        .unwrap();
        // Exhaustive oracle: dropping either coordinate loses exactly that
        // coordinate's energy, and the two subsets average to ‖x‖²/2.
        assert_relative_eq!(report.empirical_ratio, 0.5, epsilon = 0.05);
        assert!(report.passes(None));
    }

    #[test]
    fn composed_meets_compression_bound() {
        let mut rng = global_stream(2, Purpose::Operator);
        let spec = OperatorSpec::composed(
            OperatorSpec::Qsgd { s: 15 },
            OperatorSpec::TopK { k: 40 },
            false,
        );
        let report = empirical_compression_check(
            &spec,
            256,
            300,
            4,
            &mut rng,
            InputDistribution::StandardNormal,
        )
        .unwrap();
        let gamma = report.gamma_theoretical.unwrap();
        assert!(report.empirical_ratio <= 1.0 - gamma + 3.0 * report.std_error);
    }

    // The worked full-scale case: qsgd(s=15)∘top-40 on d=7850 against the
    // composed-operator bound 1 − (1−β)k/d.
    #[test]
    fn composed_7850_meets_bound() {
        let mut rng = global_stream(4, Purpose::Operator);
        let spec = OperatorSpec::composed(
            OperatorSpec::Qsgd { s: 15 },
            OperatorSpec::TopK { k: 40 },
            false,
        );
        let report = empirical_compression_check(
            &spec,
            7850,
            120,
            2,
            &mut rng,
            InputDistribution::StandardNormal,
        )
        .unwrap();
        let gamma = report.gamma_theoretical.unwrap();
        assert_relative_eq!(gamma, 4.190e-3, epsilon = 1e-6);
        assert!(report.empirical_ratio <= 1.0 - gamma + 3.0 * report.std_error);
    }

    #[test]
    fn sparse_distribution_favors_top_k() {
        let mut rng = global_stream(3, Purpose::Operator);
        let top = empirical_compression_check(
            &OperatorSpec::TopK { k: 8 },
            64,
            200,
            1,
            &mut rng,
            InputDistribution::Sparse,
        )
        .unwrap();
        let rand = empirical_compression_check(
            &OperatorSpec::RandK { k: 8 },
            64,
            200,
            8,
            &mut rng,
            InputDistribution::Sparse,
        )
        .unwrap();
        // ~6.4 of 64 coordinates are nonzero, so Top_8 captures nearly all
        // energy while Rand_8 misses most of it.
        assert!(top.empirical_ratio < 0.2, "top-k ratio {}", top.empirical_ratio);
        assert!(rand.empirical_ratio > 0.5, "rand-k ratio {}", rand.empirical_ratio);
    }
}
