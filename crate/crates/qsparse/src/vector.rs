//! Dense vectors and sparse updates exchanged between workers and the master.

use crate::{Error, Result};

/// A finite `f64` vector in `R^d`.
///
/// Construction rejects NaN/Inf coordinates so every downstream operator can
/// assume finite input.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseVector {
    coords: Vec<f64>,
}

impl DenseVector {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::data("vector must have positive dimension"));
        }
        if let Some(i) = coords.iter().position(|c| !c.is_finite()) {
            return Err(Error::data(format!(
                "non-finite coordinate {} at index {i}",
                coords[i]
            )));
        }
        Ok(Self { coords })
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            coords: vec![0.0; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.coords
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.coords
    }

    pub fn norm_sq(&self) -> f64 {
        self.coords.iter().map(|c| c * c).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }
}

impl std::ops::Index<usize> for DenseVector {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.coords[i]
    }
}

/// A sparse update: at most `k` retained coordinates of a `d`-length vector,
/// stored as `(index, value)` pairs with strictly increasing indices.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseUpdate {
    entries: Vec<(usize, f64)>,
    dim: usize,
}

impl SparseUpdate {
    /// Entries must be strictly increasing by index and in range.
    pub fn new(entries: Vec<(usize, f64)>, dim: usize) -> Result<Self> {
        for w in entries.windows(2) {
            if w[0].0 >= w[1].0 {
                return Err(Error::data(format!(
                    "sparse indices not strictly increasing: {} then {}",
                    w[0].0, w[1].0
                )));
            }
        }
        if let Some((i, _)) = entries.last() {
            if *i >= dim {
                return Err(Error::data(format!("sparse index {i} out of range for d={dim}")));
            }
        }
        Ok(Self { entries, dim })
    }

    pub fn entries(&self) -> &[(usize, f64)] {
        &self.entries
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn support_size(&self) -> usize {
        self.entries.len()
    }

    /// Lossless expansion back to a dense vector.
    pub fn densify(&self) -> DenseVector {
        let mut coords = vec![0.0; self.dim];
        for &(i, v) in &self.entries {
            coords[i] = v;
        }
        DenseVector { coords }
    }

    /// The retained values in index order, viewed as a `k`-length vector.
    pub fn values(&self) -> Vec<f64> {
        self.entries.iter().map(|&(_, v)| v).collect()
    }
}

/// `‖x‖_m` for positive integer `m`, computed with the peak factored out so
/// large `m` neither overflows nor underflows.
pub fn m_norm(values: &[f64], m: u32) -> f64 {
    assert!(m >= 1, "m-norm requires m >= 1");
    let peak = values.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    if peak == 0.0 {
        return 0.0;
    }
    let sum: f64 = values
        .iter()
        .map(|v| (v.abs() / peak).powi(m as i32))
        .sum();
    peak * sum.powf(1.0 / m as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn rejects_non_finite() {
        assert!(DenseVector::new(vec![1.0, f64::NAN]).is_err());
        assert!(DenseVector::new(vec![f64::INFINITY]).is_err());
        assert!(DenseVector::new(vec![1.0, -2.0]).is_ok());
    }

    #[test]
    fn rejects_empty() {
        assert!(DenseVector::new(vec![]).is_err());
    }

    #[test]
    fn sparse_roundtrip_is_lossless() {
        let s = SparseUpdate::new(vec![(1, -3.0), (3, 2.0)], 5).unwrap();
        assert_eq!(s.densify().as_slice(), &[0.0, -3.0, 0.0, 2.0, 0.0]);
    }

    #[test]
    fn sparse_rejects_unsorted_and_out_of_range() {
        assert!(SparseUpdate::new(vec![(2, 1.0), (1, 1.0)], 5).is_err());
        assert!(SparseUpdate::new(vec![(1, 1.0), (1, 2.0)], 5).is_err());
        assert!(SparseUpdate::new(vec![(5, 1.0)], 5).is_err());
    }

    #[test]
    fn m_norm_matches_l1_l2() {
        let v = [3.0, -4.0];
        assert_relative_eq!(m_norm(&v, 1), 7.0);
        assert_relative_eq!(m_norm(&v, 2), 5.0);
    }

    #[test]
    fn m_norm_large_m_approaches_max() {
        let v = [3.0, -4.0, 1.0];
        let n = m_norm(&v, 64);
        assert!(n >= 4.0 && n < 4.1, "got {n}");
    }
}
