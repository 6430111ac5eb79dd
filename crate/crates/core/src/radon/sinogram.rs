use crate::error::{check_len, Result, TomoError};
use crate::scalar::{dot, sum_sq, Real};

/// Parallel-beam sampling: angles `θ_j ∈ [0, 2π)` and detector offsets `s_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanGeometry<T> {
    angles: Vec<T>,
    offsets: Vec<T>,
}

impl<T: Real> ScanGeometry<T> {
    pub fn new(angles: Vec<T>, offsets: Vec<T>) -> Result<Self> {
        if angles.is_empty() {
            return Err(TomoError::InvalidGeometry("no angles".into()));
        }
        if offsets.len() < 2 {
            return Err(TomoError::InvalidGeometry(format!(
                "need at least 2 offsets, got {}",
                offsets.len()
            )));
        }
        let two_pi = T::PI() + T::PI();
        if angles
            .iter()
            .any(|&a| !a.is_finite() || a < T::zero() || a >= two_pi)
        {
            return Err(TomoError::InvalidGeometry(
                "angles must lie in [0, 2π)".into(),
            ));
        }
        if offsets.iter().any(|s| !s.is_finite()) {
            return Err(TomoError::InvalidGeometry("non-finite offset".into()));
        }
        if !strictly_increasing(&angles) {
            return Err(TomoError::InvalidGeometry(
                "angles must be strictly increasing".into(),
            ));
        }
        if !strictly_increasing(&offsets) {
            return Err(TomoError::InvalidGeometry(
                "offsets must be strictly increasing".into(),
            ));
        }
        Ok(Self { angles, offsets })
    }

    /// `n_angles` angles uniformly covering the full circle and `n_offsets`
    /// equally spaced offsets spanning `[-half_width, half_width]`.
    pub fn uniform(n_angles: usize, n_offsets: usize, half_width: T) -> Result<Self> {
        if n_offsets < 2 {
            return Err(TomoError::InvalidGeometry(format!(
                "need at least 2 offsets, got {n_offsets}"
            )));
        }
        let two_pi = T::PI() + T::PI();
        let angles = (0..n_angles)
            .map(|j| two_pi * T::from_usize_lossy(j) / T::from_usize_lossy(n_angles))
            .collect();
        Self::new(angles, linspace(-half_width, half_width, n_offsets))
    }

    #[inline]
    pub fn angles(&self) -> &[T] {
        &self.angles
    }

    #[inline]
    pub fn offsets(&self) -> &[T] {
        &self.offsets
    }

    #[inline]
    pub fn n_angles(&self) -> usize {
        self.angles.len()
    }

    #[inline]
    pub fn n_offsets(&self) -> usize {
        self.offsets.len()
    }

    /// Number of sinogram cells.
    #[inline]
    pub fn len(&self) -> usize {
        self.angles.len() * self.offsets.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    /// Flat index of `(offset i, angle j)`; offsets run fastest.
    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.offsets.len() + i
    }

    /// Mean offset spacing `Δs`.
    pub fn offset_spacing(&self) -> T {
        let n = self.offsets.len();
        (self.offsets[n - 1] - self.offsets[0]) / T::from_usize_lossy(n - 1)
    }

    /// Mean angular spacing `Δθ`; a single angle gets unit weight.
    pub fn angle_spacing(&self) -> T {
        let n = self.angles.len();
        if n < 2 {
            return T::one();
        }
        (self.angles[n - 1] - self.angles[0]) / T::from_usize_lossy(n - 1)
    }

    /// Quadrature weight `Δs·Δθ` of one sinogram cell.
    pub fn cell_weight(&self) -> T {
        self.offset_spacing() * self.angle_spacing()
    }

    /// Total angle covered, `n_angles · Δθ`.
    pub fn angular_span(&self) -> T {
        T::from_usize_lossy(self.angles.len()) * self.angle_spacing()
    }

    /// Whether both samplings are uniform to relative tolerance `tol`.
    pub fn is_uniform(&self, tol: T) -> bool {
        is_uniform(&self.offsets, tol) && (self.angles.len() < 2 || is_uniform(&self.angles, tol))
    }
}

fn strictly_increasing<T: Real>(v: &[T]) -> bool {
    v.windows(2).all(|w| w[1] > w[0])
}

fn is_uniform<T: Real>(v: &[T], tol: T) -> bool {
    let n = v.len();
    let h = (v[n - 1] - v[0]) / T::from_usize_lossy(n - 1);
    v.windows(2).all(|w| ((w[1] - w[0]) - h).abs() <= tol * h.abs())
}

/// `n` equally spaced points from `a` to `b` inclusive.
pub fn linspace<T: Real>(a: T, b: T, n: usize) -> Vec<T> {
    if n == 1 {
        return vec![a];
    }
    let step = (b - a) / T::from_usize_lossy(n - 1);
    (0..n)
        .map(|k| {
            if k == n - 1 {
                b
            } else {
                a + step * T::from_usize_lossy(k)
            }
        })
        .collect()
}

/// Values sampled on a [`ScanGeometry`], offset-fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct Sinogram<T> {
    geometry: ScanGeometry<T>,
    values: Vec<T>,
}

impl<T: Real> Sinogram<T> {
    pub fn new(geometry: ScanGeometry<T>, values: Vec<T>) -> Result<Self> {
        check_len("sinogram", geometry.len(), values.len())?;
        if values.iter().any(|v| !v.is_finite()) {
            return Err(TomoError::NonFinite("sinogram"));
        }
        Ok(Self { geometry, values })
    }

    pub fn zeros(geometry: ScanGeometry<T>) -> Self {
        Self::constant(geometry, T::zero())
    }

    pub fn constant(geometry: ScanGeometry<T>, value: T) -> Self {
        let values = vec![value; geometry.len()];
        Self { geometry, values }
    }

    /// Evaluates `f(s_i, θ_j)` on every cell.
    pub fn from_fn(geometry: ScanGeometry<T>, mut f: impl FnMut(T, T) -> T) -> Self {
        let mut values = Vec::with_capacity(geometry.len());
        for &theta in geometry.angles() {
            for &s in geometry.offsets() {
                values.push(f(s, theta));
            }
        }
        Self { geometry, values }
    }

    /// Unchecked constructor for internal producers that guarantee the length.
    pub(crate) fn from_parts(geometry: ScanGeometry<T>, values: Vec<T>) -> Self {
        debug_assert_eq!(geometry.len(), values.len());
        Self { geometry, values }
    }

    #[inline]
    pub fn geometry(&self) -> &ScanGeometry<T> {
        &self.geometry
    }

    #[inline]
    pub fn values(&self) -> &[T] {
        &self.values
    }

    #[inline]
    pub fn values_mut(&mut self) -> &mut [T] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.values[self.geometry.index(i, j)]
    }

    /// All offsets for angle `j`.
    pub fn projection(&self, j: usize) -> &[T] {
        let n = self.geometry.n_offsets();
        &self.values[j * n..(j + 1) * n]
    }

    /// Weighted inner product with cell weight `Δs·Δθ`.
    pub fn inner(&self, other: &Self) -> T {
        self.geometry.cell_weight() * dot(&self.values, &other.values)
    }

    /// Weighted `L²` norm with cell weight `Δs·Δθ`.
    pub fn norm(&self) -> T {
        (self.geometry.cell_weight() * sum_sq(&self.values)).sqrt()
    }

    /// Weighted norm of `self − other`.
    pub fn distance(&self, other: &Self) -> T {
        let ss: T = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(&a, &b)| (a - b) * (a - b))
            .sum();
        (self.geometry.cell_weight() * ss).sqrt()
    }

    /// `self += alpha * other`.
    pub fn axpy(&mut self, alpha: T, other: &Self) {
        for (a, &b) in self.values.iter_mut().zip(&other.values) {
            *a += alpha * b;
        }
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        Self {
            geometry: self.geometry.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub(crate) fn same_geometry(&self, other: &ScanGeometry<T>, context: &'static str) -> Result<()> {
        check_len(context, other.len(), self.values.len())?;
        check_len(context, other.n_offsets(), self.geometry.n_offsets())
    }
}
