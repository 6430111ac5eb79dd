//! Sparse line-model projector.
//!
//! Row `(i, j)` of the matrix holds the exact length of the line
//! `s_i·u(θ_j) + σ·u(θ_j)^⊥` inside every pixel it crosses, with
//! `u(θ) = (cos θ, sin θ)`. The weighted adjoint folds in the ratio of the
//! sinogram cell weight `Δs·Δθ` to the pixel area, so that
//! `⟨Rf, g⟩_sino = ⟨f, R*g⟩_image` holds for the weighted inner products.

use rayon::prelude::*;

use super::grid::{DensityImage, ImageGrid};
use super::sinogram::{ScanGeometry, Sinogram};
use crate::error::{check_len, Result, TomoError};
use crate::scalar::{dot, Real};

/// Rows per partial sum in the transpose product. Fixed so results do not
/// depend on the number of worker threads.
const TRANSPOSE_CHUNK: usize = 2048;

/// Compressed-row sparse projector with its quadrature weights.
#[derive(Debug, Clone)]
pub struct ProjectionMatrix<T> {
    n_rows: usize,
    n_cols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<u32>,
    values: Vec<T>,
    pixel_area: T,
    cell_weight: T,
}

impl<T: Real> ProjectionMatrix<T> {
    /// Assembles a matrix from explicit rows of `(column, value)` pairs.
    ///
    /// Zero entries are dropped; entries must be positive and finite.
    pub fn from_rows(
        n_cols: usize,
        rows: Vec<Vec<(usize, T)>>,
        pixel_area: T,
        cell_weight: T,
    ) -> Result<Self> {
        if !(pixel_area > T::zero() && cell_weight > T::zero()) {
            return Err(TomoError::InvalidParameter(
                "quadrature weights must be positive".into(),
            ));
        }
        if n_cols > u32::MAX as usize {
            return Err(TomoError::InvalidParameter("too many columns".into()));
        }
        let mut row_ptr = Vec::with_capacity(rows.len() + 1);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        row_ptr.push(0);
        for row in &rows {
            for &(c, v) in row {
                if c >= n_cols {
                    return Err(TomoError::DimensionMismatch {
                        context: "projector column",
                        expected: n_cols,
                        found: c,
                    });
                }
                if !(v.is_finite() && v >= T::zero()) {
                    return Err(TomoError::InvalidParameter(
                        "projector entries must be nonnegative".into(),
                    ));
                }
                if v > T::zero() {
                    col_idx.push(c as u32);
                    values.push(v);
                }
            }
            row_ptr.push(col_idx.len());
        }
        Ok(Self {
            n_rows: rows.len(),
            n_cols,
            row_ptr,
            col_idx,
            values,
            pixel_area,
            cell_weight,
        })
    }

    #[inline]
    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    #[inline]
    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    /// Number of stored entries.
    #[inline]
    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    #[inline]
    pub fn pixel_area(&self) -> T {
        self.pixel_area
    }

    #[inline]
    pub fn cell_weight(&self) -> T {
        self.cell_weight
    }

    /// Factor applied to `Aᵀ` to obtain the weighted adjoint.
    #[inline]
    pub fn adjoint_scale(&self) -> T {
        self.cell_weight / self.pixel_area
    }

    /// Stored `(column, value)` pairs of row `r`.
    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, T)> + '_ {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        self.col_idx[span.clone()]
            .iter()
            .zip(&self.values[span])
            .map(|(&c, &v)| (c as usize, v))
    }

    pub fn entries(&self) -> &[T] {
        &self.values
    }

    /// Unweighted product `A x`.
    pub fn matvec(&self, x: &[T]) -> Result<Vec<T>> {
        check_len("projector input", self.n_cols, x.len())?;
        Ok((0..self.n_rows)
            .into_par_iter()
            .map(|r| self.row_dot(r, x))
            .collect())
    }

    /// Unweighted product `Aᵀ y`.
    pub fn rmatvec(&self, y: &[T]) -> Result<Vec<T>> {
        check_len("projector transpose input", self.n_rows, y.len())?;
        let partials: Vec<Vec<T>> = (0..self.n_rows)
            .collect::<Vec<_>>()
            .par_chunks(TRANSPOSE_CHUNK)
            .map(|chunk| {
                let mut acc = vec![T::zero(); self.n_cols];
                for &r in chunk {
                    let yr = y[r];
                    if yr == T::zero() {
                        continue;
                    }
                    for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                        acc[self.col_idx[k] as usize] += self.values[k] * yr;
                    }
                }
                acc
            })
            .collect();
        let mut out = vec![T::zero(); self.n_cols];
        for p in partials {
            for (o, v) in out.iter_mut().zip(p) {
                *o += v;
            }
        }
        Ok(out)
    }

    #[inline]
    fn row_dot(&self, r: usize, x: &[T]) -> T {
        let mut acc = T::zero();
        for k in self.row_ptr[r]..self.row_ptr[r + 1] {
            acc += self.values[k] * x[self.col_idx[k] as usize];
        }
        acc
    }

    /// Weighted adjoint applied to a raw row vector: `(Δs·Δθ / area)·Aᵀ y`.
    pub fn adjoint_raw(&self, y: &[T]) -> Result<Vec<T>> {
        let scale = self.adjoint_scale();
        let mut out = self.rmatvec(y)?;
        out.iter_mut().for_each(|v| *v *= scale);
        Ok(out)
    }
}

/// Builds the line-model projector for `grid` and `geometry`.
///
/// A ray running exactly along a pixel edge is attributed to the pixel on
/// the side its normal `u(θ)` points to.
pub fn build_projector<T: Real>(
    grid: &ImageGrid<T>,
    geometry: &ScanGeometry<T>,
) -> Result<ProjectionMatrix<T>> {
    let n_off = geometry.n_offsets();
    let rows: Vec<Vec<(usize, T)>> = (0..geometry.len())
        .into_par_iter()
        .map(|r| {
            let (i, j) = (r % n_off, r / n_off);
            let mut row = Vec::new();
            trace_ray(grid, geometry.offsets()[i], geometry.angles()[j], &mut row);
            row
        })
        .collect();
    ProjectionMatrix::from_rows(grid.len(), rows, grid.pixel_area(), geometry.cell_weight())
}

/// Appends the `(pixel, length)` pairs for one ray to `out`, in order of
/// increasing ray parameter.
pub(crate) fn trace_ray<T: Real>(grid: &ImageGrid<T>, s: T, theta: T, out: &mut Vec<(usize, T)>) {
    let n = grid.n_pixels();
    let e = grid.extent();
    let h = grid.pixel_side();
    let (sin_t, cos_t) = theta.sin_cos();
    let normal = [cos_t, sin_t];
    let dir = [-sin_t, cos_t];
    let base = [s * cos_t, s * sin_t];
    let parallel_eps = T::lit(64.0) * T::epsilon();

    let mut t_lo = T::neg_infinity();
    let mut t_hi = T::infinity();
    // Cell index along an axis the ray never leaves.
    let mut fixed: [Option<usize>; 2] = [None, None];
    for a in 0..2 {
        if dir[a].abs() <= parallel_eps {
            let pos = (base[a] + e) / h;
            let mut k = pos.floor();
            if pos == k && normal[a] < T::zero() {
                k -= T::one();
            }
            if k < T::zero() || k >= T::from_usize_lossy(n) {
                return;
            }
            fixed[a] = Some(k.to_usize().unwrap_or(0));
        } else {
            let t1 = (-e - base[a]) / dir[a];
            let t2 = (e - base[a]) / dir[a];
            t_lo = t_lo.max(t1.min(t2));
            t_hi = t_hi.min(t1.max(t2));
        }
    }
    let min_len = T::lit(1e-9) * h;
    if !(t_hi - t_lo > min_len) {
        return;
    }

    let mut ts = Vec::with_capacity(2 * n + 2);
    ts.push(t_lo);
    ts.push(t_hi);
    for a in 0..2 {
        if fixed[a].is_some() {
            continue;
        }
        for k in 1..n {
            let line = -e + h * T::from_usize_lossy(k);
            let t = (line - base[a]) / dir[a];
            if t > t_lo && t < t_hi {
                ts.push(t);
            }
        }
    }
    ts.sort_by(|a, b| a.partial_cmp(b).expect("finite ray parameters"));

    let half = T::lit(0.5);
    let top = n - 1;
    for w in ts.windows(2) {
        let len = w[1] - w[0];
        if len <= min_len {
            continue;
        }
        let tm = (w[0] + w[1]) * half;
        let mut cell = [0usize; 2];
        for a in 0..2 {
            cell[a] = match fixed[a] {
                Some(k) => k,
                None => {
                    let c = base[a] + tm * dir[a];
                    let k = ((c + e) / h).floor();
                    k.max(T::zero()).to_usize().unwrap_or(0).min(top)
                }
            };
        }
        let (col, row) = (cell[0], top - cell[1]);
        out.push((grid.index(row, col), len));
    }
}

/// Discrete Radon transform `Rf`.
pub fn apply_radon<T: Real>(
    projector: &ProjectionMatrix<T>,
    geometry: &ScanGeometry<T>,
    image: &DensityImage<T>,
) -> Result<Sinogram<T>> {
    check_len("radon output", projector.n_rows(), geometry.len())?;
    let values = projector.matvec(image.values())?;
    Ok(Sinogram::from_parts(geometry.clone(), values))
}

/// Weighted back-projection `R*g`.
pub fn apply_back_projection<T: Real>(
    projector: &ProjectionMatrix<T>,
    grid: &ImageGrid<T>,
    sinogram: &Sinogram<T>,
) -> Result<DensityImage<T>> {
    check_len("back-projection output", projector.n_cols(), grid.len())?;
    let values = projector.adjoint_raw(sinogram.values())?;
    Ok(DensityImage::new(*grid, values).expect("finite back-projection"))
}

/// Result of [`operator_norm_estimate`].
#[derive(Debug, Clone)]
pub struct NormEstimate<T> {
    /// Estimate of `‖R‖` in the weighted norms.
    pub norm: T,
    pub iterations: usize,
    pub converged: bool,
    /// Estimate after every iteration.
    pub history: Vec<T>,
}

/// Power iteration on `R*R` for the largest singular value of the weighted
/// operator.
///
/// Starts from the constant vector, which overlaps the Perron vector of the
/// entrywise nonnegative `AᵀA`. The Rayleigh quotient of successive power
/// iterates is non-decreasing, so the estimate approaches `‖R‖` from below.
pub fn operator_norm_estimate<T: Real>(
    projector: &ProjectionMatrix<T>,
    max_iters: usize,
    tol: T,
) -> Result<NormEstimate<T>> {
    if max_iters == 0 {
        return Err(TomoError::InvalidParameter("max_iters must be ≥ 1".into()));
    }
    if !(tol > T::zero()) {
        return Err(TomoError::InvalidParameter("tol must be positive".into()));
    }
    let scale = projector.adjoint_scale();
    let n = projector.n_cols();
    let mut x = vec![T::one() / T::from_usize_lossy(n).sqrt(); n];
    let mut history = Vec::new();
    let mut converged = false;
    let mut prev = T::zero();
    for _ in 0..max_iters {
        let ax = projector.matvec(&x)?;
        // ⟨x, R*R x⟩ / ⟨x, x⟩ with ‖x‖ = 1
        let rq = scale * dot(&ax, &ax);
        let est = rq.max(T::zero()).sqrt();
        history.push(est);
        let mut y = projector.rmatvec(&ax)?;
        let ny = dot(&y, &y).sqrt();
        if ny == T::zero() {
            converged = true;
            break;
        }
        y.iter_mut().for_each(|v| *v /= ny);
        x = y;
        if history.len() > 1 && (est - prev).abs() <= tol * est {
            converged = true;
            break;
        }
        prev = est;
    }
    Ok(NormEstimate {
        norm: *history.last().unwrap_or(&T::zero()),
        iterations: history.len(),
        converged,
        history,
    })
}
