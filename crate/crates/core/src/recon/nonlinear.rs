//! Nonlinear Landweber iteration for the full-beam model
//! `f_{k+1} = f_k + γ_k F′(f_k)*(g − F(f_k))`.

use serde::{Deserialize, Serialize};

use super::{IterationLog, StopReason, StoppingRule};
use crate::beam::ForwardContext;
use crate::error::{Result, TomoError};
use crate::radon::{DensityImage, Sinogram};
use crate::scalar::Real;

/// Denominators of the steepest-descent step below this end the run.
const STATIONARY_EPS: f64 = 1e-30;
/// Residual growth factor treated as divergence.
const DIVERGENCE_FACTOR: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepSize<T> {
    Constant(T),
    /// `γ_k = ‖s_k‖² / ‖F′(f_k) s_k‖²` with `s_k = F′(f_k)*(g − F(f_k))`.
    SteepestDescent,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NonlinearSolveConfig<T> {
    pub step: StepSize<T>,
    pub stop: StoppingRule<T>,
    pub nonneg_projection: bool,
}

impl<T: Real> NonlinearSolveConfig<T> {
    /// Steepest descent without projection.
    pub fn new(stop: StoppingRule<T>) -> Self {
        Self {
            step: StepSize::SteepestDescent,
            stop,
            nonneg_projection: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.stop.validate()?;
        if let StepSize::Constant(g) = self.step {
            if !(g > T::zero() && g.is_finite()) {
                return Err(TomoError::InvalidParameter(format!(
                    "constant step must be positive, got {g}"
                )));
            }
        }
        Ok(())
    }
}

/// Runs the iteration from `f0`.
pub fn nonlinear_landweber<T: Real>(
    ctx: &ForwardContext<T>,
    g: &Sinogram<T>,
    f0: &DensityImage<T>,
    cfg: &NonlinearSolveConfig<T>,
) -> Result<(DensityImage<T>, IterationLog<T>)> {
    nonlinear_landweber_observed(ctx, g, f0, cfg, |_, _| {})
}

/// [`nonlinear_landweber`] calling `observer(k, f_k)` on every iterate.
pub fn nonlinear_landweber_observed<T: Real>(
    ctx: &ForwardContext<T>,
    g: &Sinogram<T>,
    f0: &DensityImage<T>,
    cfg: &NonlinearSolveConfig<T>,
    mut observer: impl FnMut(usize, &DensityImage<T>),
) -> Result<(DensityImage<T>, IterationLog<T>)> {
    cfg.validate()?;
    g.same_geometry(ctx.geometry(), "nonlinear landweber data")?;
    f0.same_grid(ctx.grid())?;
    if g.values().iter().any(|&v| !(v > T::zero() && v.is_finite())) {
        return Err(TomoError::InvalidParameter(
            "nonlinear data must be positive ratios, not line integrals".into(),
        ));
    }
    let bound = cfg.stop.bound();
    let mut f = f0.clone();
    let mut log = IterationLog::default();
    let mut k = 0;
    let mut initial = None;
    loop {
        let lin = ctx.linearize(&f)?;
        let mut r = g.clone();
        r.axpy(-T::one(), lin.value());
        let res = r.norm();
        log.residuals.push(res);
        observer(k, &f);
        let res0 = *initial.get_or_insert(res);
        if res <= bound {
            log.stop_reason = StopReason::Discrepancy;
            break;
        }
        if res > T::lit(DIVERGENCE_FACTOR) * res0 {
            log.stop_reason = StopReason::Diverged;
            break;
        }
        if k >= cfg.stop.k_max {
            log.stop_reason = StopReason::KMax;
            break;
        }
        let s = lin.adjoint(&r)?;
        let gamma = match cfg.step {
            StepSize::Constant(gamma) => gamma,
            StepSize::SteepestDescent => {
                let js = lin.apply(&s)?;
                let den = js.inner(&js);
                if !(den >= T::lit(STATIONARY_EPS)) {
                    log.stop_reason = StopReason::Stationary;
                    break;
                }
                s.inner(&s) / den
            }
        };
        f.axpy(gamma, &s);
        if cfg.nonneg_projection {
            f.values_mut().iter_mut().for_each(|v| *v = v.max(T::zero()));
        }
        log.step_sizes.push(gamma);
        k += 1;
    }
    log.iterations = k;
    Ok((f, log))
}
