use crate::error::{Result, TomoError};
use crate::radon::linspace;
use crate::scalar::Real;

/// Sampled beam weight function `w` on a uniform, symmetric offset grid.
///
/// The weights carry unit integral: `Σ_k w_k·Δr = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct BeamProfile<T> {
    offsets: Vec<T>,
    weights: Vec<T>,
    spacing: T,
}

impl<T: Real> BeamProfile<T> {
    /// Validates a profile with implied spacing (at least two samples).
    pub fn new(offsets: Vec<T>, weights: Vec<T>) -> Result<Self> {
        if offsets.len() < 2 {
            return Err(TomoError::InvalidProfile(
                "single-sample profiles need an explicit spacing; use BeamProfile::delta".into(),
            ));
        }
        let n = offsets.len();
        let spacing = (offsets[n - 1] - offsets[0]) / T::from_usize_lossy(n - 1);
        Self::with_spacing(offsets, weights, spacing)
    }

    /// Single-ray limit: one sample at offset 0 carrying weight `1/spacing`.
    pub fn delta(spacing: T) -> Result<Self> {
        if !(spacing > T::zero() && spacing.is_finite()) {
            return Err(TomoError::InvalidProfile("spacing must be positive".into()));
        }
        Ok(Self {
            offsets: vec![T::zero()],
            weights: vec![T::one() / spacing],
            spacing,
        })
    }

    fn with_spacing(offsets: Vec<T>, weights: Vec<T>, spacing: T) -> Result<Self> {
        let n = offsets.len();
        if n != weights.len() {
            return Err(TomoError::InvalidProfile(format!(
                "{} offsets but {} weights",
                n,
                weights.len()
            )));
        }
        if !(spacing > T::zero()) {
            return Err(TomoError::InvalidProfile("offsets must increase".into()));
        }
        let tol = T::lit(1e-9) * spacing;
        for (k, w) in offsets.windows(2).enumerate() {
            if ((w[1] - w[0]) - spacing).abs() > tol {
                return Err(TomoError::InvalidProfile(format!(
                    "offsets not uniformly spaced at index {k}"
                )));
            }
        }
        let sym_tol = T::lit(1e-12) * (T::one() + offsets[n - 1].abs());
        for k in 0..n / 2 + 1 {
            if (offsets[k] + offsets[n - 1 - k]).abs() > sym_tol {
                return Err(TomoError::InvalidProfile(
                    "offsets not symmetric about 0".into(),
                ));
            }
        }
        if weights.iter().any(|&w| !(w.is_finite() && w >= T::zero())) {
            return Err(TomoError::InvalidProfile(
                "weights must be finite and nonnegative".into(),
            ));
        }
        let total = weights.iter().copied().sum::<T>() * spacing;
        if (total - T::one()).abs() > T::lit(1e-12) {
            return Err(TomoError::InvalidProfile(format!(
                "weights integrate to {total}, not 1"
            )));
        }
        Ok(Self {
            offsets,
            weights,
            spacing,
        })
    }

    /// Rescales arbitrary nonnegative samples to unit integral.
    pub fn normalized(offsets: Vec<T>, mut weights: Vec<T>) -> Result<Self> {
        let n = offsets.len();
        if n < 2 {
            return Err(TomoError::InvalidProfile("need at least 2 samples".into()));
        }
        let spacing = (offsets[n - 1] - offsets[0]) / T::from_usize_lossy(n - 1);
        let total = weights.iter().copied().sum::<T>() * spacing;
        if !(total > T::zero()) {
            return Err(TomoError::InvalidProfile("weights sum to zero".into()));
        }
        weights.iter_mut().for_each(|w| *w /= total);
        Self::with_spacing(offsets, weights, spacing)
    }

    #[inline]
    pub fn offsets(&self) -> &[T] {
        &self.offsets
    }

    #[inline]
    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    #[inline]
    pub fn spacing(&self) -> T {
        self.spacing
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.offsets.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.offsets.is_empty()
    }

    pub fn half_width(&self) -> T {
        self.offsets[self.offsets.len() - 1]
    }

    /// `Σ_k w_k·Δr`, equal to one up to rounding.
    pub fn integral(&self) -> T {
        self.weights.iter().copied().sum::<T>() * self.spacing
    }
}

/// Gaussian `exp(-4 ln2 · r²/fwhm²)` on `n_samples` points spanning
/// `[-half_width, half_width]`, renormalized to unit integral.
pub fn sample_gaussian_profile<T: Real>(
    fwhm: T,
    half_width: T,
    n_samples: usize,
) -> Result<BeamProfile<T>> {
    if !(fwhm > T::zero() && fwhm.is_finite()) {
        return Err(TomoError::InvalidProfile("fwhm must be positive".into()));
    }
    if !(half_width >= fwhm && half_width.is_finite()) {
        return Err(TomoError::InvalidProfile(
            "half_width must be at least fwhm".into(),
        ));
    }
    if n_samples < 3 || n_samples.is_multiple_of(2) {
        return Err(TomoError::InvalidProfile(format!(
            "n_samples must be odd and ≥ 3, got {n_samples}"
        )));
    }
    let offsets = linspace(-half_width, half_width, n_samples);
    let c = T::lit(4.0 * std::f64::consts::LN_2) / (fwhm * fwhm);
    let weights = offsets.iter().map(|&r| (-c * r * r).exp()).collect();
    BeamProfile::normalized(offsets, weights)
}
