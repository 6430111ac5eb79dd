//! Synthetic test objects, an exact disk sinogram, and seeded noise.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal, Uniform};
use serde::{Deserialize, Serialize};

use crate::error::{Result, TomoError};
use crate::radon::{DensityImage, ImageGrid, ScanGeometry, Sinogram};
use crate::scalar::Real;

/// Hollow equilateral triangle. With zero rotation the apex points down and
/// the top edge is horizontal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TriangleSpec<T> {
    pub circumradius: T,
    pub centroid: [T; 2],
    pub rotation: T,
    pub side_wall_thickness: T,
    pub top_wall_thickness: T,
    pub value: T,
}

impl<T: Real> Default for TriangleSpec<T> {
    fn default() -> Self {
        Self {
            circumradius: T::lit(0.7),
            centroid: [T::zero(), T::zero()],
            rotation: T::zero(),
            side_wall_thickness: T::lit(0.08),
            top_wall_thickness: T::lit(0.16),
            value: T::one(),
        }
    }
}

impl<T: Real> TriangleSpec<T> {
    pub fn validate(&self) -> Result<()> {
        let all = [
            self.circumradius,
            self.centroid[0],
            self.centroid[1],
            self.rotation,
            self.side_wall_thickness,
            self.top_wall_thickness,
            self.value,
        ];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(TomoError::NonFinite("triangle spec"));
        }
        if !(self.circumradius > T::zero()) {
            return Err(TomoError::InvalidParameter("circumradius must be positive".into()));
        }
        let inradius = T::lit(0.5) * self.circumradius;
        let (ts, tt) = (self.side_wall_thickness, self.top_wall_thickness);
        if !(ts > T::zero() && tt < inradius && tt >= ts) {
            return Err(TomoError::InvalidParameter(format!(
                "need 0 < side wall {ts} ≤ top wall {tt} < circumradius/2"
            )));
        }
        Ok(())
    }

    /// Outward unit normals with the matching wall thickness; the first
    /// entry is the top edge.
    fn edges(&self) -> [([T; 2], T); 3] {
        let third = T::lit(2.0 * std::f64::consts::FRAC_PI_3);
        let top = T::FRAC_PI_2() + self.rotation;
        let normal = |a: T| [a.cos(), a.sin()];
        [
            (normal(top), self.top_wall_thickness),
            (normal(top + third), self.side_wall_thickness),
            (normal(top - third), self.side_wall_thickness),
        ]
    }

    /// Vertices, apex first.
    pub fn vertices(&self) -> [[T; 2]; 3] {
        let third = T::lit(2.0 * std::f64::consts::FRAC_PI_3);
        let apex = -T::FRAC_PI_2() + self.rotation;
        let v = |a: T| {
            [
                self.centroid[0] + self.circumradius * a.cos(),
                self.centroid[1] + self.circumradius * a.sin(),
            ]
        };
        [v(apex), v(apex + third), v(apex - third)]
    }

    /// Whether `(x, y)` lies in the wall region.
    pub fn contains(&self, x: T, y: T) -> bool {
        let inradius = T::lit(0.5) * self.circumradius;
        let (px, py) = (x - self.centroid[0], y - self.centroid[1]);
        let mut in_outer = true;
        let mut in_inner = true;
        for (nrm, t) in self.edges() {
            let depth = inradius - (px * nrm[0] + py * nrm[1]);
            in_outer &= depth >= T::zero();
            in_inner &= depth > t;
        }
        in_outer && !in_inner
    }
}

/// Rasterizes the triangle by pixel-center membership.
pub fn triangle_phantom<T: Real>(grid: &ImageGrid<T>, spec: &TriangleSpec<T>) -> Result<DensityImage<T>> {
    spec.validate()?;
    let reach = spec.centroid[0].hypot(spec.centroid[1]) + spec.circumradius;
    if reach > grid.extent() * (T::one() + T::lit(1e-12)) {
        return Err(TomoError::InvalidParameter(format!(
            "triangle reaches radius {reach}, beyond the inscribed disk of radius {}",
            grid.extent()
        )));
    }
    Ok(DensityImage::from_fn(*grid, |x, y| {
        if spec.contains(x, y) {
            spec.value
        } else {
            T::zero()
        }
    }))
}

/// Rasterizes a disk by pixel-center membership.
pub fn disk_phantom<T: Real>(grid: &ImageGrid<T>, center: [T; 2], radius: T, value: T) -> Result<DensityImage<T>> {
    if !(radius >= T::zero() && radius.is_finite() && value.is_finite()) {
        return Err(TomoError::InvalidParameter(
            "disk needs finite radius ≥ 0 and finite value".into(),
        ));
    }
    let reach = center[0].abs().max(center[1].abs()) + radius;
    if !(reach <= grid.extent() * (T::one() + T::lit(1e-12))) {
        return Err(TomoError::InvalidParameter(format!(
            "disk leaves the grid (reach {reach}, extent {})",
            grid.extent()
        )));
    }
    let r2 = radius * radius;
    Ok(DensityImage::from_fn(*grid, |x, y| {
        let (dx, dy) = (x - center[0], y - center[1]);
        if dx * dx + dy * dy <= r2 && radius > T::zero() {
            value
        } else {
            T::zero()
        }
    }))
}

/// Exact Radon transform of a disk: `2·value·√(ρ² − d²)` with
/// `d = s − ⟨center, u(θ)⟩`.
pub fn analytic_disk_sinogram<T: Real>(
    geometry: &ScanGeometry<T>,
    center: [T; 2],
    radius: T,
    value: T,
) -> Sinogram<T> {
    let two = T::lit(2.0);
    Sinogram::from_fn(geometry.clone(), |s, theta| {
        let d = s - (center[0] * theta.cos() + center[1] * theta.sin());
        let h = radius * radius - d * d;
        if h > T::zero() {
            two * value * h.sqrt()
        } else {
            T::zero()
        }
    })
}

/// Per-cell noise distribution for [`add_noise`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum NoiseKind {
    #[default]
    Gaussian,
    Uniform,
}

/// Adds independent zero-mean noise rescaled so its RMS is exactly
/// `relative_level·RMS(s)`.
///
/// Returns the noisy data and `δ = ‖g − g^δ‖` in the sinogram norm.
pub fn add_noise<T: Real>(
    sino: &Sinogram<T>,
    relative_level: T,
    seed: u64,
    kind: NoiseKind,
) -> Result<(Sinogram<T>, T)> {
    if !(relative_level >= T::zero() && relative_level.is_finite()) {
        return Err(TomoError::InvalidParameter(
            "noise level must be finite and ≥ 0".into(),
        ));
    }
    let n = sino.values().len();
    let rms = |v: &[T]| (crate::scalar::sum_sq(v) / T::from_usize_lossy(n)).sqrt();
    let target = relative_level * rms(sino.values());
    if target == T::zero() {
        return Ok((sino.clone(), T::zero()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut noise: Vec<T> = match kind {
        NoiseKind::Gaussian => (0..n)
            .map(|_| {
                let z: f64 = StandardNormal.sample(&mut rng);
                T::lit(z)
            })
            .collect(),
        NoiseKind::Uniform => {
            let u = Uniform::new(-1.0, 1.0).expect("valid range");
            (0..n).map(|_| T::lit(u.sample(&mut rng))).collect()
        }
    };
    let mean = noise.iter().copied().sum::<T>() / T::from_usize_lossy(n);
    if n > 1 {
        noise.iter_mut().for_each(|e| *e -= mean);
    }
    let scale = target / rms(&noise);
    noise.iter_mut().for_each(|e| *e *= scale);
    let mut out = sino.clone();
    for (v, e) in out.values_mut().iter_mut().zip(&noise) {
        *v += *e;
    }
    let delta = sino.distance(&out);
    Ok((out, delta))
}
