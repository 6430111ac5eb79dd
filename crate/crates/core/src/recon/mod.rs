//! Reconstruction methods and their shared stopping machinery.

mod linear;
mod nonlinear;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Result, TomoError};
use crate::scalar::Real;

pub use linear::{
    contour, fbp, landweber, landweber_observed, ramp_filter, ramp_response, tikhonov, FbpFilter,
    FbpOptions, LandweberOptions, LandweberVariant, TikhonovOptions,
};
pub use nonlinear::{
    nonlinear_landweber, nonlinear_landweber_observed, NonlinearSolveConfig, StepSize,
};

/// Default discrepancy factor.
pub const DEFAULT_TAU: f64 = 1.5;

/// Discrepancy principle `‖residual‖ ≤ τδ` with an iteration cap.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StoppingRule<T> {
    pub tau: T,
    pub delta: T,
    pub k_max: usize,
}

impl<T: Real> StoppingRule<T> {
    pub fn new(tau: T, delta: T, k_max: usize) -> Result<Self> {
        let rule = Self { tau, delta, k_max };
        rule.validate()?;
        Ok(rule)
    }

    /// Runs exactly `k_max` iterations unless the residual vanishes.
    pub fn fixed(k_max: usize) -> Result<Self> {
        Self::new(T::lit(DEFAULT_TAU), T::zero(), k_max)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tau > T::one() && self.tau.is_finite()) {
            return Err(TomoError::InvalidParameter(format!(
                "tau must exceed 1, got {}",
                self.tau
            )));
        }
        if !(self.delta >= T::zero() && self.delta.is_finite()) {
            return Err(TomoError::InvalidParameter(format!(
                "delta must be ≥ 0, got {}",
                self.delta
            )));
        }
        if self.k_max == 0 {
            return Err(TomoError::InvalidParameter("k_max must be ≥ 1".into()));
        }
        Ok(())
    }

    /// `τδ`.
    #[inline]
    pub fn bound(&self) -> T {
        self.tau * self.delta
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    Discrepancy,
    #[default]
    KMax,
    Stationary,
    Diverged,
}

impl fmt::Display for StopReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StopReason::Discrepancy => "discrepancy",
            StopReason::KMax => "k_max",
            StopReason::Stationary => "stationary",
            StopReason::Diverged => "diverged",
        })
    }
}

/// Trace of an iterative solver.
///
/// `residuals[k]` belongs to iterate `k` for `k = 0..=iterations`, and
/// `step_sizes[k]` is the step that produced iterate `k + 1`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct IterationLog<T> {
    pub residuals: Vec<T>,
    pub step_sizes: Vec<T>,
    pub stop_reason: StopReason,
    /// Index `k*` of the returned iterate.
    pub iterations: usize,
}

impl<T: Real> IterationLog<T> {
    /// Residual of the returned iterate.
    pub fn final_residual(&self) -> Option<T> {
        self.residuals.last().copied()
    }
}
