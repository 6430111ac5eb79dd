//! Full-beam forward operator
//!
//! ```text
//! F(f)(s_i, θ_j) = Σ_k w_k · 𝓔(½ (Rf)(s_i + r_k, θ_j)) · Δr
//! ```
//!
//! evaluated with a projector on a refined offset grid that contains every
//! `s_i + r_k`. The derivative and its adjoint are exact discrete transposes
//! of each other with respect to the weighted inner products.

use rayon::prelude::*;

use super::profile::{sample_gaussian_profile, BeamProfile};
use super::smoothed_exp::{smoothed_exp, smoothed_exp_d1};
use crate::error::{Result, TomoError};
use crate::radon::{build_projector, DensityImage, ImageGrid, ProjectionMatrix, ScanGeometry, Sinogram};
use crate::scalar::Real;

pub const DEFAULT_OVERSAMPLING: usize = 4;

/// Discretization of the full-beam model for one grid and detector geometry.
#[derive(Debug, Clone)]
pub struct ForwardContext<T> {
    grid: ImageGrid<T>,
    geometry: ScanGeometry<T>,
    fine_geometry: ScanGeometry<T>,
    fine_projector: ProjectionMatrix<T>,
    profile: BeamProfile<T>,
    oversampling: usize,
    /// Fine samples before the first detector offset.
    pad: usize,
    /// `(fine index shift, w_k·Δr)` per profile sample.
    taps: Vec<(isize, T)>,
}

impl<T: Real> ForwardContext<T> {
    /// Builds the context. The profile spacing must be an integer multiple of
    /// the refined spacing `Δs / oversampling`.
    pub fn new(
        grid: ImageGrid<T>,
        geometry: ScanGeometry<T>,
        profile: BeamProfile<T>,
        oversampling: usize,
    ) -> Result<Self> {
        if oversampling == 0 {
            return Err(TomoError::InvalidParameter(
                "oversampling factor must be ≥ 1".into(),
            ));
        }
        if !geometry.is_uniform(T::lit(1e-9)) {
            return Err(TomoError::InvalidGeometry(
                "full-beam model needs uniformly spaced offsets".into(),
            ));
        }
        let fine_step = geometry.offset_spacing() / T::from_usize_lossy(oversampling);
        let stride = if profile.len() == 1 {
            1
        } else {
            let ratio = profile.spacing() / fine_step;
            let q = ratio.round();
            if q < T::one() || (ratio - q).abs() > T::lit(1e-6) {
                return Err(TomoError::InvalidProfile(format!(
                    "profile spacing {} is not a multiple of the refined spacing {}",
                    profile.spacing(),
                    fine_step
                )));
            }
            q.to_usize().unwrap_or(1)
        };
        let half = (profile.len() - 1) / 2;
        let taps: Vec<(isize, T)> = profile
            .weights()
            .iter()
            .enumerate()
            .map(|(k, &w)| {
                let shift = (k as isize - half as isize) * stride as isize;
                (shift, w * profile.spacing())
            })
            .collect();
        let pad = half * stride;
        let n_fine = (geometry.n_offsets() - 1) * oversampling + 2 * pad + 1;
        let s0 = geometry.offsets()[0] - fine_step * T::from_usize_lossy(pad);
        let fine_offsets = (0..n_fine)
            .map(|m| s0 + fine_step * T::from_usize_lossy(m))
            .collect();
        let fine_geometry = ScanGeometry::new(geometry.angles().to_vec(), fine_offsets)?;
        let fine_projector = build_projector(&grid, &fine_geometry)?;
        Ok(Self {
            grid,
            geometry,
            fine_geometry,
            fine_projector,
            profile,
            oversampling,
            pad,
            taps,
        })
    }

    /// Gaussian beam of the given FWHM sampled on the refined grid out to
    /// twice the FWHM.
    pub fn gaussian(
        grid: ImageGrid<T>,
        geometry: ScanGeometry<T>,
        fwhm: T,
        oversampling: usize,
    ) -> Result<Self> {
        if oversampling == 0 {
            return Err(TomoError::InvalidParameter(
                "oversampling factor must be ≥ 1".into(),
            ));
        }
        let fine_step = geometry.offset_spacing() / T::from_usize_lossy(oversampling);
        let k = ((fwhm + fwhm) / fine_step).ceil().max(T::one());
        let k = k.to_usize().unwrap_or(1);
        let profile =
            sample_gaussian_profile(fwhm, fine_step * T::from_usize_lossy(k), 2 * k + 1)?;
        Self::new(grid, geometry, profile, oversampling)
    }

    /// Single-ray model: delta profile, no refinement.
    pub fn single_ray(grid: ImageGrid<T>, geometry: ScanGeometry<T>) -> Result<Self> {
        let profile = BeamProfile::delta(geometry.offset_spacing())?;
        Self::new(grid, geometry, profile, 1)
    }

    #[inline]
    pub fn grid(&self) -> &ImageGrid<T> {
        &self.grid
    }

    #[inline]
    pub fn geometry(&self) -> &ScanGeometry<T> {
        &self.geometry
    }

    #[inline]
    pub fn fine_geometry(&self) -> &ScanGeometry<T> {
        &self.fine_geometry
    }

    #[inline]
    pub fn fine_projector(&self) -> &ProjectionMatrix<T> {
        &self.fine_projector
    }

    #[inline]
    pub fn profile(&self) -> &BeamProfile<T> {
        &self.profile
    }

    #[inline]
    pub fn oversampling(&self) -> usize {
        self.oversampling
    }

    /// `(Rf)` on the refined offsets, offset-fastest.
    pub fn fine_radon(&self, f: &DensityImage<T>) -> Result<Vec<T>> {
        f.same_grid(&self.grid)?;
        self.fine_projector.matvec(f.values())
    }

    /// Fine-grid flat index of detector `(i, j)` shifted by `shift` fine samples.
    #[inline]
    pub(crate) fn fine_index(&self, i: usize, j: usize, shift: isize) -> usize {
        let m = (i * self.oversampling + self.pad) as isize + shift;
        j * self.fine_geometry.n_offsets() + m as usize
    }

    #[inline]
    pub(crate) fn taps(&self) -> &[(isize, T)] {
        &self.taps
    }

    /// `(Rf)(s_i, θ_j)` on the detector rays.
    pub fn detector_radon(&self, f: &DensityImage<T>) -> Result<Sinogram<T>> {
        let fine = self.fine_radon(f)?;
        Ok(self.restrict_to_detector(&fine))
    }

    fn restrict_to_detector(&self, fine: &[T]) -> Sinogram<T> {
        let n_off = self.geometry.n_offsets();
        let values = (0..self.geometry.len())
            .map(|r| fine[self.fine_index(r % n_off, r / n_off, 0)])
            .collect();
        Sinogram::from_parts(self.geometry.clone(), values)
    }

    /// `Σ_k w_k Δr · φ(fine[s_i + r_k])` for every detector cell.
    fn beam_sum(&self, fine: &[T], phi: impl Fn(usize, T) -> T + Sync) -> Sinogram<T> {
        let n_off = self.geometry.n_offsets();
        let values = (0..self.geometry.len())
            .into_par_iter()
            .map(|r| {
                let (i, j) = (r % n_off, r / n_off);
                self.taps
                    .iter()
                    .map(|&(shift, wdr)| {
                        let m = self.fine_index(i, j, shift);
                        wdr * phi(m, fine[m])
                    })
                    .sum()
            })
            .collect();
        Sinogram::from_parts(self.geometry.clone(), values)
    }

    /// `F(f)`.
    pub fn forward(&self, f: &DensityImage<T>) -> Result<Sinogram<T>> {
        let fine = self.fine_radon(f)?;
        let half = T::lit(0.5);
        Ok(self.beam_sum(&fine, |_, rf| smoothed_exp(half * rf)))
    }

    /// Caches everything `F′(f)` and `F′(f)*` need at `f`.
    pub fn linearize(&self, f: &DensityImage<T>) -> Result<Linearization<'_, T>> {
        let fine = self.fine_radon(f)?;
        let half = T::lit(0.5);
        let value = self.beam_sum(&fine, |_, rf| smoothed_exp(half * rf));
        let slope = fine.iter().map(|&rf| half * smoothed_exp_d1(half * rf)).collect();
        Ok(Linearization {
            ctx: self,
            value,
            slope,
        })
    }
}

/// `F` and its derivative at a fixed point `f`.
#[derive(Debug, Clone)]
pub struct Linearization<'a, T> {
    ctx: &'a ForwardContext<T>,
    value: Sinogram<T>,
    /// `½·𝓔′(½ Rf)` on the refined grid.
    slope: Vec<T>,
}

impl<'a, T: Real> Linearization<'a, T> {
    /// `F(f)`.
    pub fn value(&self) -> &Sinogram<T> {
        &self.value
    }

    pub fn into_value(self) -> Sinogram<T> {
        self.value
    }

    /// `F′(f) h`.
    pub fn apply(&self, h: &DensityImage<T>) -> Result<Sinogram<T>> {
        let rh = self.ctx.fine_radon(h)?;
        Ok(self.ctx.beam_sum(&rh, |m, v| self.slope[m] * v))
    }

    /// `F′(f)* g`.
    pub fn adjoint(&self, g: &Sinogram<T>) -> Result<DensityImage<T>> {
        let ctx = self.ctx;
        g.same_geometry(&ctx.geometry, "jacobian adjoint input")?;
        let n_off = ctx.geometry.n_offsets();
        let mut fine = vec![T::zero(); ctx.fine_geometry.len()];
        for (r, &gr) in g.values().iter().enumerate() {
            if gr == T::zero() {
                continue;
            }
            let (i, j) = (r % n_off, r / n_off);
            for &(shift, wdr) in &ctx.taps {
                fine[ctx.fine_index(i, j, shift)] += wdr * gr;
            }
        }
        for (v, &d) in fine.iter_mut().zip(&self.slope) {
            *v *= d;
        }
        let scale = ctx.geometry.cell_weight() / ctx.grid.pixel_area();
        let mut out = ctx.fine_projector.rmatvec(&fine)?;
        out.iter_mut().for_each(|v| *v *= scale);
        DensityImage::new(ctx.grid, out)
    }
}

/// `F(f)`.
pub fn forward_full_beam<T: Real>(ctx: &ForwardContext<T>, f: &DensityImage<T>) -> Result<Sinogram<T>> {
    ctx.forward(f)
}

/// `F′(f) h`.
pub fn jacobian_apply<T: Real>(
    ctx: &ForwardContext<T>,
    f: &DensityImage<T>,
    h: &DensityImage<T>,
) -> Result<Sinogram<T>> {
    ctx.linearize(f)?.apply(h)
}

/// `F′(f)* g`.
pub fn jacobian_adjoint<T: Real>(
    ctx: &ForwardContext<T>,
    f: &DensityImage<T>,
    g: &Sinogram<T>,
) -> Result<DensityImage<T>> {
    ctx.linearize(f)?.adjoint(g)
}
