use serde::{Deserialize, Serialize};

use crate::error::{check_len, Result, TomoError};
use crate::scalar::{dot, sum_sq, Real};

/// Square pixel grid of `n × n` cells tiling `[-extent, extent]²`.
///
/// Pixels are stored row-major with row 0 at the top (largest `y`), so a
/// reshaped value array reads like an image.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ImageGrid<T> {
    n_pixels: usize,
    extent: T,
}

impl<T: Real> ImageGrid<T> {
    pub fn new(n_pixels: usize, extent: T) -> Result<Self> {
        if n_pixels < 2 {
            return Err(TomoError::InvalidGrid(format!(
                "need at least 2 pixels per side, got {n_pixels}"
            )));
        }
        if !(extent.is_finite() && extent > T::zero()) {
            return Err(TomoError::InvalidGrid(format!(
                "extent must be positive and finite, got {extent}"
            )));
        }
        Ok(Self { n_pixels, extent })
    }

    /// Grid over the unit square `[-1, 1]²`.
    pub fn unit(n_pixels: usize) -> Result<Self> {
        Self::new(n_pixels, T::one())
    }

    /// Pixels per side.
    #[inline]
    pub fn n_pixels(&self) -> usize {
        self.n_pixels
    }

    #[inline]
    pub fn extent(&self) -> T {
        self.extent
    }

    /// Total number of cells, `n²`.
    #[inline]
    pub fn len(&self) -> usize {
        self.n_pixels * self.n_pixels
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn pixel_side(&self) -> T {
        (self.extent + self.extent) / T::from_usize_lossy(self.n_pixels)
    }

    #[inline]
    pub fn pixel_area(&self) -> T {
        let h = self.pixel_side();
        h * h
    }

    #[inline]
    pub fn pixel_diagonal(&self) -> T {
        self.pixel_side() * T::SQRT_2()
    }

    #[inline]
    pub fn index(&self, row: usize, col: usize) -> usize {
        row * self.n_pixels + col
    }

    /// Physical coordinates of the center of pixel `(row, col)`.
    pub fn center(&self, row: usize, col: usize) -> (T, T) {
        let h = self.pixel_side();
        let half = T::lit(0.5);
        let x = -self.extent + (T::from_usize_lossy(col) + half) * h;
        let y = self.extent - (T::from_usize_lossy(row) + half) * h;
        (x, y)
    }

    /// Iterator over `(flat index, x, y)` of every pixel center.
    pub fn centers(&self) -> impl Iterator<Item = (usize, T, T)> + '_ {
        (0..self.n_pixels).flat_map(move |row| {
            (0..self.n_pixels).map(move |col| {
                let (x, y) = self.center(row, col);
                (self.index(row, col), x, y)
            })
        })
    }
}

/// Piecewise-constant density on an [`ImageGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct DensityImage<T> {
    grid: ImageGrid<T>,
    values: Vec<T>,
}

impl<T: Real> DensityImage<T> {
    pub fn new(grid: ImageGrid<T>, values: Vec<T>) -> Result<Self> {
        check_len("density image", grid.len(), values.len())?;
        if values.iter().any(|v| !v.is_finite()) {
            return Err(TomoError::NonFinite("density image"));
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: ImageGrid<T>) -> Self {
        Self {
            grid,
            values: vec![T::zero(); grid.len()],
        }
    }

    /// Samples `f(x, y)` at every pixel center.
    pub fn from_fn(grid: ImageGrid<T>, mut f: impl FnMut(T, T) -> T) -> Self {
        let mut values = vec![T::zero(); grid.len()];
        for (k, x, y) in grid.centers() {
            values[k] = f(x, y);
        }
        Self { grid, values }
    }

    #[inline]
    pub fn grid(&self) -> &ImageGrid<T> {
        &self.grid
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

    pub fn get(&self, row: usize, col: usize) -> T {
        self.values[self.grid.index(row, col)]
    }

    /// `L²` inner product with pixel-area weight.
    pub fn inner(&self, other: &Self) -> T {
        debug_assert_eq!(self.values.len(), other.values.len());
        self.grid.pixel_area() * dot(&self.values, &other.values)
    }

    /// `L²` norm with pixel-area weight.
    pub fn norm(&self) -> T {
        (self.grid.pixel_area() * sum_sq(&self.values)).sqrt()
    }

    pub fn max(&self) -> T {
        self.values
            .iter()
            .copied()
            .fold(T::neg_infinity(), T::max)
    }

    pub fn min(&self) -> T {
        self.values.iter().copied().fold(T::infinity(), T::min)
    }

    /// `self += alpha * other`.
    pub fn axpy(&mut self, alpha: T, other: &Self) {
        for (a, &b) in self.values.iter_mut().zip(&other.values) {
            *a += alpha * b;
        }
    }

    pub fn scaled(&self, alpha: T) -> Self {
        Self {
            grid: self.grid,
            values: self.values.iter().map(|&v| alpha * v).collect(),
        }
    }

    /// `‖self − other‖ / ‖other‖`, the usual reconstruction error measure.
    pub fn relative_error(&self, truth: &Self) -> T {
        let diff: T = self
            .values
            .iter()
            .zip(&truth.values)
            .map(|(&a, &b)| (a - b) * (a - b))
            .sum();
        (diff / sum_sq(&truth.values)).sqrt()
    }

    pub(crate) fn same_grid(&self, grid: &ImageGrid<T>) -> Result<()> {
        check_len("image grid", grid.len(), self.values.len())
    }
}
