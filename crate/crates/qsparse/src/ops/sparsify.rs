//! `Top_k` and `Rand_k` sparsifiers.

use rand::Rng;

use crate::vector::{DenseVector, SparseUpdate};
use crate::{Error, Result};

/// Keep the `k` largest-magnitude coordinates of `x`, values copied exactly.
/// Ties break toward the lowest index so the output is deterministic.
pub fn top_k(x: &DenseVector, k: usize) -> Result<SparseUpdate> {
    let d = x.dim();
    if k == 0 || k > d {
        return Err(Error::parameter(format!("top_k: k={k} out of range for d={d}")));
    }
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&i, &j| {
        x[j].abs()
            .partial_cmp(&x[i].abs())
            .expect("finite by DenseVector invariant")
            .then(i.cmp(&j))
    });
    let mut kept: Vec<usize> = order[..k].to_vec();
    kept.sort_unstable();
    let entries = kept.into_iter().map(|i| (i, x[i])).collect();
    SparseUpdate::new(entries, d)
}

/// Keep `k` coordinates drawn uniformly without replacement.
pub fn rand_k<R: Rng + ?Sized>(x: &DenseVector, k: usize, rng: &mut R) -> Result<SparseUpdate> {
    let d = x.dim();
    if k == 0 || k > d {
        return Err(Error::parameter(format!("rand_k: k={k} out of range for d={d}")));
    }
    let mut kept = rand::seq::index::sample(rng, d, k).into_vec();
    kept.sort_unstable();
    let entries = kept.into_iter().map(|i| (i, x[i])).collect();
    SparseUpdate::new(entries, d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{global_stream, Purpose};
    use approx::assert_relative_eq;

    fn dv(v: &[f64]) -> DenseVector {
        DenseVector::new(v.to_vec()).unwrap()
    }

    #[test]
    fn top_k_largest_magnitudes() {
        let s = top_k(&dv(&[1.0, -3.0, 2.0, 0.0]), 2).unwrap();
        assert_eq!(s.entries(), &[(1, -3.0), (2, 2.0)]);
    }

    #[test]
    fn top_k_full_is_identity() {
        let x = dv(&[0.5, -0.25, 0.0, 4.0]);
        let s = top_k(&x, 4).unwrap();
        assert_eq!(s.densify(), x);
    }

    #[test]
    fn top_k_tie_breaks_to_lowest_index() {
        let s = top_k(&dv(&[2.0, -2.0, 1.0]), 1).unwrap();
        assert_eq!(s.entries(), &[(0, 2.0)]);
    }

    #[test]
    fn top_k_rejects_bad_k() {
        assert!(top_k(&dv(&[1.0, 2.0]), 0).is_err());
        assert!(top_k(&dv(&[1.0, 2.0]), 3).is_err());
    }

    #[test]
    fn rand_k_full_is_identity() {
        let x = dv(&[1.0, 2.0, 3.0]);
        let mut rng = global_stream(0, Purpose::Operator);
        let s = rand_k(&x, 3, &mut rng).unwrap();
        assert_eq!(s.densify(), x);
    }

    #[test]
    fn rand_k_deterministic_given_seed() {
        let x = dv(&[1.0, 2.0, 3.0, 4.0, 5.0]);
        let a = rand_k(&x, 2, &mut global_stream(9, Purpose::Operator)).unwrap();
        let b = rand_k(&x, 2, &mut global_stream(9, Purpose::Operator)).unwrap();
        assert_eq!(a, b);
    }

    // Brute-force oracle: with d=2, k=1 both subsets are equally likely, so the
    // average of ‖x − Rand_1(x)‖² over the two outcomes is (1 − 1/2)·‖x‖².
    #[test]
    fn rand_1_of_2_mean_error_matches_enumeration() {
        let x = dv(&[1.0, 2.0]);
        let enumerated = (2.0f64.powi(2) + 1.0f64.powi(2)) / 2.0;
        assert_relative_eq!(enumerated, 2.5);
        assert_relative_eq!(enumerated, 0.5 * x.norm_sq());

        // The implementation hits both subsets and nothing else.
        let mut rng = global_stream(3, Purpose::Operator);
        let mut seen = [false, false];
        for _ in 0..64 {
            let s = rand_k(&x, 1, &mut rng).unwrap();
            seen[s.entries()[0].0] = true;
        }
        assert!(seen[0] && seen[1]);
    }
}
