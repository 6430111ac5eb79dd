//! Time-domain pulses and the sinogram preprocessing chain.
//!
//! Measured traces are reduced to one number per ray, either the time
//! integral `P = ∫E dt` or the energy `I = ∫E² dt`, divided by the same
//! quantity of a reference pulse, conditioned (clip, scale, smooth) and
//! finally turned into line integrals by a logarithm.

use serde::{Deserialize, Serialize};

use crate::error::{check_len, Result, TomoError};
use crate::radon::{ScanGeometry, Sinogram};
use crate::scalar::Real;

/// Values at or below this are floored before taking logarithms.
pub const LOG_FLOOR: f64 = 1e-12;

/// Uniformly sampled electric field `E(t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PulseTrace<T> {
    t0: T,
    dt: T,
    samples: Vec<T>,
}

impl<T: Real> PulseTrace<T> {
    pub fn new(t0: T, dt: T, samples: Vec<T>) -> Result<Self> {
        if !(dt > T::zero() && dt.is_finite() && t0.is_finite()) {
            return Err(TomoError::InvalidParameter(
                "trace needs finite t0 and dt > 0".into(),
            ));
        }
        if samples.len() < 2 {
            return Err(TomoError::InvalidParameter(
                "trace needs at least 2 samples".into(),
            ));
        }
        if samples.iter().any(|v| !v.is_finite()) {
            return Err(TomoError::NonFinite("pulse trace"));
        }
        Ok(Self { t0, dt, samples })
    }

    /// Samples `f(t)` at `t0 + k·dt` for `k < n`.
    pub fn from_fn(t0: T, dt: T, n: usize, f: impl Fn(T) -> T) -> Result<Self> {
        let samples = (0..n).map(|k| f(t0 + dt * T::from_usize_lossy(k))).collect();
        Self::new(t0, dt, samples)
    }

    #[inline]
    pub fn t0(&self) -> T {
        self.t0
    }

    #[inline]
    pub fn dt(&self) -> T {
        self.dt
    }

    #[inline]
    pub fn samples(&self) -> &[T] {
        &self.samples
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    #[inline]
    pub fn time(&self, k: usize) -> T {
        self.t0 + self.dt * T::from_usize_lossy(k)
    }

    /// Linear interpolation between samples, zero outside `[t0, t_last]`.
    pub fn sample_at(&self, t: T) -> T {
        let pos = (t - self.t0) / self.dt;
        let last = T::from_usize_lossy(self.samples.len() - 1);
        if !(pos >= T::zero() && pos <= last) {
            return T::zero();
        }
        let k = pos.floor();
        let frac = pos - k;
        let k = k.to_usize().unwrap_or(0);
        if k + 1 >= self.samples.len() {
            return self.samples[self.samples.len() - 1];
        }
        self.samples[k] + frac * (self.samples[k + 1] - self.samples[k])
    }

    /// Index of the sample with the largest magnitude (first one on ties).
    pub fn peak_index(&self) -> usize {
        let mut best = 0;
        for (k, v) in self.samples.iter().enumerate() {
            if v.abs() > self.samples[best].abs() {
                best = k;
            }
        }
        best
    }

    pub(crate) fn same_sampling(&self, other: &Self) -> bool {
        self.t0 == other.t0 && self.dt == other.dt && self.samples.len() == other.samples.len()
    }
}

/// Which pulse functional turns a trace into a number.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DataMode {
    /// Time integral `P = ∫E dt`.
    P,
    /// Energy `I = ∫E² dt`.
    I,
}

/// One trace per sinogram cell plus the air reference.
#[derive(Debug, Clone)]
pub struct RawDataSet<T> {
    geometry: ScanGeometry<T>,
    traces: Vec<PulseTrace<T>>,
    reference: PulseTrace<T>,
}

impl<T: Real> RawDataSet<T> {
    pub fn new(
        geometry: ScanGeometry<T>,
        traces: Vec<PulseTrace<T>>,
        reference: PulseTrace<T>,
    ) -> Result<Self> {
        check_len("raw data traces", geometry.len(), traces.len())?;
        Ok(Self {
            geometry,
            traces,
            reference,
        })
    }

    pub fn geometry(&self) -> &ScanGeometry<T> {
        &self.geometry
    }

    pub fn traces(&self) -> &[PulseTrace<T>] {
        &self.traces
    }

    pub fn reference(&self) -> &PulseTrace<T> {
        &self.reference
    }

    /// Applies `f` to every trace and the reference.
    pub fn map_traces(&self, f: impl Fn(&PulseTrace<T>) -> PulseTrace<T>) -> Self {
        Self {
            geometry: self.geometry.clone(),
            traces: self.traces.iter().map(&f).collect(),
            reference: f(&self.reference),
        }
    }
}

/// Trapezoidal `∫E dt`.
pub fn integrate_pulse<T: Real>(trace: &PulseTrace<T>) -> T {
    trapezoid(trace.samples.iter().copied(), trace.dt)
}

/// Trapezoidal `∫E² dt`.
pub fn pulse_energy<T: Real>(trace: &PulseTrace<T>) -> T {
    trapezoid(trace.samples.iter().map(|&v| v * v), trace.dt)
}

fn trapezoid<T: Real>(values: impl ExactSizeIterator<Item = T>, dt: T) -> T {
    let n = values.len();
    let half = T::lit(0.5);
    let mut acc = T::zero();
    for (k, v) in values.enumerate() {
        acc += if k == 0 || k + 1 == n { half * v } else { v };
    }
    acc * dt
}

/// Pointwise mean of traces sharing one time axis.
pub fn average_traces<T: Real>(traces: &[PulseTrace<T>]) -> Result<PulseTrace<T>> {
    let first = traces
        .first()
        .ok_or_else(|| TomoError::InvalidParameter("no traces to average".into()))?;
    if traces.iter().any(|t| !t.same_sampling(first)) {
        return Err(TomoError::InvalidParameter(
            "traces have different sampling".into(),
        ));
    }
    let n = T::from_usize_lossy(traces.len());
    let samples = (0..first.len())
        .map(|k| traces.iter().map(|t| t.samples[k]).sum::<T>() / n)
        .collect();
    PulseTrace::new(first.t0, first.dt, samples)
}

/// Cuts `[t_peak − w, t_peak + w]` around the sample of largest `|E|`,
/// clipped to the recorded window.
pub fn extract_main_peak<T: Real>(trace: &PulseTrace<T>, window_half_width: T) -> Result<PulseTrace<T>> {
    if !(window_half_width > T::zero()) {
        return Err(TomoError::InvalidParameter(
            "window half-width must be positive".into(),
        ));
    }
    let half = (window_half_width / trace.dt + T::lit(1e-9))
        .floor()
        .to_usize()
        .unwrap_or(usize::MAX)
        .max(1);
    let k = trace.peak_index();
    let lo = k.saturating_sub(half);
    let hi = k.saturating_add(half).min(trace.len() - 1);
    PulseTrace::new(trace.time(lo), trace.dt, trace.samples[lo..=hi].to_vec())
}

/// Ratio sinogram `|P_ij / P_ref|` or `I_ij / I_ref`.
pub fn build_ratio_sinogram<T: Real>(data: &RawDataSet<T>, mode: DataMode) -> Result<Sinogram<T>> {
    let functional = |t: &PulseTrace<T>| match mode {
        DataMode::P => integrate_pulse(t),
        DataMode::I => pulse_energy(t),
    };
    let reference = functional(&data.reference);
    if reference == T::zero() || !reference.is_finite() {
        return Err(TomoError::Degenerate(format!(
            "reference {mode:?}-integral is {reference}"
        )));
    }
    let values = data
        .traces
        .iter()
        .map(|t| (functional(t) / reference).abs())
        .collect();
    Sinogram::new(data.geometry.clone(), values)
}

/// Threshold, scale and smoothing applied to ratio data.
///
/// Filter widths are standard deviations in samples along each axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PreprocessConfig<T> {
    pub clip_max: T,
    pub scale: T,
    pub sigma_s: T,
    pub sigma_theta: T,
}

impl<T: Real> Default for PreprocessConfig<T> {
    fn default() -> Self {
        Self {
            clip_max: T::lit(1.5),
            scale: T::one(),
            sigma_s: T::one(),
            sigma_theta: T::one(),
        }
    }
}

impl<T: Real> PreprocessConfig<T> {
    /// Leaves nonnegative data unchanged.
    pub fn identity() -> Self {
        Self {
            clip_max: T::infinity(),
            scale: T::one(),
            sigma_s: T::zero(),
            sigma_theta: T::zero(),
        }
    }
}

/// Clip to `[0, clip_max]`, multiply by `scale`, then smooth with a
/// separable Gaussian (mirrored in `s`, periodic in `θ`).
pub fn preprocess<T: Real>(sino: &Sinogram<T>, cfg: &PreprocessConfig<T>) -> Result<Sinogram<T>> {
    if !(cfg.clip_max > T::zero()) || !(cfg.scale > T::zero() && cfg.scale.is_finite()) {
        return Err(TomoError::InvalidParameter(
            "clip_max and scale must be positive".into(),
        ));
    }
    if !(cfg.sigma_s >= T::zero() && cfg.sigma_theta >= T::zero()) {
        return Err(TomoError::InvalidParameter("sigmas must be ≥ 0".into()));
    }
    let geom = sino.geometry();
    let (n_s, n_t) = (geom.n_offsets(), geom.n_angles());
    let mut v: Vec<T> = sino
        .values()
        .iter()
        .map(|&x| x.max(T::zero()).min(cfg.clip_max) * cfg.scale)
        .collect();

    if let Some(kernel) = gaussian_kernel(cfg.sigma_s) {
        let r = (kernel.len() / 2) as isize;
        let mut line = vec![T::zero(); n_s];
        for j in 0..n_t {
            let row = &mut v[j * n_s..(j + 1) * n_s];
            for (i, out) in line.iter_mut().enumerate() {
                *out = kernel
                    .iter()
                    .enumerate()
                    .map(|(k, &w)| w * row[reflect(i as isize + k as isize - r, n_s)])
                    .sum();
            }
            row.copy_from_slice(&line);
        }
    }
    if let Some(kernel) = gaussian_kernel(cfg.sigma_theta) {
        let r = (kernel.len() / 2) as isize;
        let mut col = vec![T::zero(); n_t];
        for i in 0..n_s {
            for (j, out) in col.iter_mut().enumerate() {
                *out = kernel
                    .iter()
                    .enumerate()
                    .map(|(k, &w)| {
                        let jj = (j as isize + k as isize - r).rem_euclid(n_t as isize) as usize;
                        w * v[jj * n_s + i]
                    })
                    .sum();
            }
            for (j, &c) in col.iter().enumerate() {
                v[j * n_s + i] = c;
            }
        }
    }
    Sinogram::new(geom.clone(), v)
}

/// Normalized kernel truncated at `⌈4σ⌉`; `None` disables filtering.
fn gaussian_kernel<T: Real>(sigma: T) -> Option<Vec<T>> {
    if sigma <= T::zero() {
        return None;
    }
    let r = (T::lit(4.0) * sigma).ceil().to_usize().unwrap_or(0).max(1);
    let two_s2 = T::lit(2.0) * sigma * sigma;
    let mut w: Vec<T> = (0..=2 * r)
        .map(|k| {
            let d = T::from_usize_lossy(k) - T::from_usize_lossy(r);
            (-(d * d) / two_s2).exp()
        })
        .collect();
    let total: T = w.iter().copied().sum();
    w.iter_mut().for_each(|x| *x /= total);
    Some(w)
}

/// Half-sample symmetric reflection into `[0, n)`.
fn reflect(mut i: isize, n: usize) -> usize {
    let n = n as isize;
    loop {
        if i < 0 {
            i = -i - 1;
        } else if i >= n {
            i = 2 * n - i - 1;
        } else {
            return i as usize;
        }
    }
}

/// Line integrals from ratio data: `−2 ln v` (P) or `−ln v` (I).
///
/// Values at or below [`LOG_FLOOR`] are floored; the second return value
/// counts them.
pub fn log_transform<T: Real>(sino: &Sinogram<T>, mode: DataMode) -> (Sinogram<T>, usize) {
    let floor = T::lit(LOG_FLOOR);
    let factor = match mode {
        DataMode::P => T::lit(-2.0),
        DataMode::I => -T::one(),
    };
    let mut floored = 0;
    let values = sino
        .values()
        .iter()
        .map(|&v| {
            let v = if v <= floor {
                floored += 1;
                floor
            } else {
                v
            };
            factor * v.ln()
        })
        .collect();
    if floored > 0 {
        log::warn!("log transform floored {floored} nonpositive or tiny values");
    }
    (Sinogram::from_parts(sino.geometry().clone(), values), floored)
}

/// Synthetic air reference: a Gaussian main peak of width `width` at
/// `center` followed by a broader negative lobe of 30 % amplitude. The time
/// integral is `0.4·√π·width > 0`.
pub fn model_reference_pulse<T: Real>(
    t0: T,
    dt: T,
    n_samples: usize,
    center: T,
    width: T,
) -> Result<PulseTrace<T>> {
    if !(width > T::zero() && width.is_finite() && center.is_finite()) {
        return Err(TomoError::InvalidParameter(
            "pulse width must be positive and center finite".into(),
        ));
    }
    let lobe_shift = T::lit(1.5) * width;
    let lobe_width = T::lit(2.0) * width;
    let lobe_amp = T::lit(0.3);
    PulseTrace::from_fn(t0, dt, n_samples, |t| {
        let a = (t - center) / width;
        let b = (t - center - lobe_shift) / lobe_width;
        (-(a * a)).exp() - lobe_amp * (-(b * b)).exp()
    })
}
