//! Travel-time delay through a single material and the resulting pulses.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::forward::ForwardContext;
use super::smoothed_exp::smoothed_exp;
use crate::error::{Result, TomoError};
use crate::radon::{apply_radon, DensityImage, ProjectionMatrix, ScanGeometry, Sinogram};
use crate::scalar::Real;
use crate::signal::{PulseTrace, RawDataSet};

/// Optical constants of a uniform sample in air.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaterialParams<T> {
    /// Refractive index of the material.
    pub n: T,
    /// Refractive index of air.
    pub n0: T,
    /// Density value of the material.
    pub alpha_m: T,
    /// Vacuum speed of light in grid length per time unit.
    pub c0: T,
}

impl<T: Real> MaterialParams<T> {
    pub fn new(n: T, n0: T, alpha_m: T, c0: T) -> Result<Self> {
        let p = Self { n, n0, alpha_m, c0 };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.n, self.n0, self.alpha_m, self.c0]
            .iter()
            .all(|v| v.is_finite());
        if !finite {
            return Err(TomoError::NonFinite("material parameters"));
        }
        if !(self.n >= self.n0 && self.n0 >= T::one()) {
            return Err(TomoError::InvalidParameter(format!(
                "need n ≥ n0 ≥ 1, got n = {}, n0 = {}",
                self.n, self.n0
            )));
        }
        if !(self.alpha_m > T::zero() && self.c0 > T::zero()) {
            return Err(TomoError::InvalidParameter(
                "alpha_m and c0 must be positive".into(),
            ));
        }
        Ok(())
    }

    /// `(n − n0)/(α_M c0)`: delay per unit of line integral.
    #[inline]
    pub fn delay_factor(&self) -> T {
        (self.n - self.n0) / (self.alpha_m * self.c0)
    }
}

impl<T: Real> Default for MaterialParams<T> {
    /// `n = 1.5` in air with unit density and unit light speed.
    fn default() -> Self {
        Self {
            n: T::lit(1.5),
            n0: T::one(),
            alpha_m: T::one(),
            c0: T::one(),
        }
    }
}

/// Pixels farther than `1e-6·α_M` from both 0 and `α_M`.
pub fn uniform_sample_violations<T: Real>(f: &DensityImage<T>, alpha_m: T) -> usize {
    let tol = T::lit(1e-6) * alpha_m.abs();
    f.values()
        .iter()
        .filter(|&&v| v.abs() > tol && (v - alpha_m).abs() > tol)
        .count()
}

fn warn_if_not_uniform<T: Real>(f: &DensityImage<T>, alpha_m: T) {
    let bad = uniform_sample_violations(f, alpha_m);
    if bad > 0 {
        log::warn!(
            "{bad} of {} pixels are neither 0 nor alpha_m = {alpha_m}; delay model assumes a uniform sample",
            f.values().len()
        );
    }
}

/// Delay sinogram `ΔT = (n − n0)/(α_M c0) · Rf`.
pub fn compute_delay<T: Real>(
    projector: &ProjectionMatrix<T>,
    geometry: &ScanGeometry<T>,
    f: &DensityImage<T>,
    material: &MaterialParams<T>,
) -> Result<Sinogram<T>> {
    material.validate()?;
    warn_if_not_uniform(f, material.alpha_m);
    let factor = material.delay_factor();
    Ok(apply_radon(projector, geometry, f)?.map(|v| factor * v))
}

/// Time-domain traces of the full-beam model for a uniform sample.
///
/// Every output shares the time axis of `e_ref`; the reference itself is
/// returned as the dataset reference so the result feeds directly into
/// ratio formation.
pub fn simulate_pulse_ensemble<T: Real>(
    ctx: &ForwardContext<T>,
    f: &DensityImage<T>,
    e_ref: &PulseTrace<T>,
    material: &MaterialParams<T>,
) -> Result<RawDataSet<T>> {
    material.validate()?;
    if e_ref.len() < 4 {
        return Err(TomoError::InvalidParameter(
            "reference pulse needs at least 4 samples".into(),
        ));
    }
    warn_if_not_uniform(f, material.alpha_m);
    let fine = ctx.fine_radon(f)?;
    let factor = material.delay_factor();
    let half = T::lit(0.5);
    let geom = ctx.geometry();
    let n_off = geom.n_offsets();
    let n_t = e_ref.len();
    let traces = (0..geom.len())
        .into_par_iter()
        .map(|r| {
            let (i, j) = (r % n_off, r / n_off);
            let mut acc = vec![T::zero(); n_t];
            for &(shift, wdr) in ctx.taps() {
                let rf = fine[ctx.fine_index(i, j, shift)];
                let amp = wdr * smoothed_exp(half * rf);
                let delay = factor * rf;
                for (k, a) in acc.iter_mut().enumerate() {
                    *a += amp * e_ref.sample_at(e_ref.time(k) - delay);
                }
            }
            PulseTrace::new(e_ref.t0(), e_ref.dt(), acc)
        })
        .collect::<Result<Vec<_>>>()?;
    RawDataSet::new(geom.clone(), traces, e_ref.clone())
}
