//! Learning-rate schedules and the iterate-averaging weights tied to them.

use crate::{Error, Result};

/// Step-size rule `η_t`.
#[derive(Debug, Clone, PartialEq)]
pub enum LrSchedule {
    /// Constant rate. For the fixed-horizon analysis pick `η = Ĉ/√T` via
    /// [`LrSchedule::fixed_sqrt`].
    Fixed { eta: f64 },
    /// `η_t = ξ/(a+t)`.
    InverseTime { xi: f64, a: f64 },
    /// `η_t = 8/(μ(a+t))`, the strongly convex rate.
    StronglyConvex { mu: f64, a: f64 },
    /// `η_t = c/(λ(a+t))`, the convex-experiment form.
    ExperimentConvex { c: f64, lambda: f64, a: f64 },
}

impl LrSchedule {
    /// `η = Ĉ/√T`; the caller is responsible for `Ĉ/√T ≤ 1/(2L)`, with
    /// `Ĉ = 1/(2L̂)` as the default choice.
    pub fn fixed_sqrt(c_hat: f64, horizon: usize) -> Self {
        LrSchedule::Fixed {
            eta: c_hat / (horizon as f64).sqrt(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match self {
            LrSchedule::Fixed { eta } => *eta > 0.0,
            LrSchedule::InverseTime { xi, a } => *xi > 0.0 && *a > 0.0,
            LrSchedule::StronglyConvex { mu, a } => *mu > 0.0 && *a > 0.0,
            LrSchedule::ExperimentConvex { c, lambda, a } => {
                *c > 0.0 && *lambda > 0.0 && *a > 0.0
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::parameter(format!(
                "learning-rate schedule has a non-positive parameter: {self:?}"
            )))
        }
    }

    pub fn eta(&self, t: usize) -> f64 {
        let t = t as f64;
        match self {
            LrSchedule::Fixed { eta } => *eta,
            LrSchedule::InverseTime { xi, a } => xi / (a + t),
            LrSchedule::StronglyConvex { mu, a } => 8.0 / (mu * (a + t)),
            LrSchedule::ExperimentConvex { c, lambda, a } => c / (lambda * (a + t)),
        }
    }

    pub fn is_decaying(&self) -> bool {
        !matches!(self, LrSchedule::Fixed { .. })
    }

    /// Offset `a` of the decaying schedules, if any.
    pub fn offset(&self) -> Option<f64> {
        match self {
            LrSchedule::Fixed { .. } => None,
            LrSchedule::InverseTime { a, .. }
            | LrSchedule::StronglyConvex { a, .. }
            | LrSchedule::ExperimentConvex { a, .. } => Some(*a),
        }
    }

    /// Averaging weight `w_t` for the running parameter average: `(a+t)²` for
    /// the decaying schedules, uniform for the fixed rate (which has no `a`).
    pub fn weight(&self, t: usize) -> f64 {
        match self.offset() {
            Some(a) => {
                let v = a + t as f64;
                v * v
            }
            None => 1.0,
        }
    }
}
