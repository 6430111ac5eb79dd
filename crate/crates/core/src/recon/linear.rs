//! Linear reconstruction from line-integral data `g ≈ Rf`.

use rustfft::num_complex::Complex;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use super::{IterationLog, StopReason, StoppingRule};
use crate::error::{check_len, Result, TomoError};
use crate::radon::{
    apply_back_projection, build_projector, operator_norm_estimate, DensityImage, ImageGrid,
    ProjectionMatrix, Sinogram,
};
use crate::scalar::{dot, sum_sq, Real};

/// Apodization window applied on top of the ramp.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum FbpFilter {
    #[default]
    RamLak,
    Hann,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FbpOptions<T> {
    pub filter: FbpFilter,
    /// Fraction of the Nyquist frequency kept, in `(0, 1]`.
    pub cutoff: T,
}

impl<T: Real> Default for FbpOptions<T> {
    fn default() -> Self {
        Self {
            filter: FbpFilter::RamLak,
            cutoff: T::one(),
        }
    }
}

/// Frequency response of the band-limited ramp on a zero-padded line of
/// length `len`, without the `Δs` factor.
///
/// Built from the spatial Ram-Lak kernel so the zero-frequency gain is only
/// the truncation remainder instead of an exact zero with a DC offset error.
pub fn ramp_response<T: Real>(len: usize, spacing: T, opts: &FbpOptions<T>) -> Vec<T> {
    let mut kernel = vec![Complex::new(T::zero(), T::zero()); len];
    let ds2 = spacing * spacing;
    let pi2 = T::PI() * T::PI();
    kernel[0].re = T::one() / (T::lit(4.0) * ds2);
    for n in (1..len / 2).step_by(2) {
        let v = -T::one() / (T::from_usize_lossy(n * n) * pi2 * ds2);
        kernel[n].re = v;
        kernel[len - n].re = v;
    }
    FftPlanner::new().plan_fft_forward(len).process(&mut kernel);
    (0..len)
        .map(|k| {
            // fraction of Nyquist
            let nu = T::from_usize_lossy(2 * k.min(len - k)) / T::from_usize_lossy(len);
            let w = if nu > opts.cutoff {
                T::zero()
            } else {
                match opts.filter {
                    FbpFilter::RamLak => T::one(),
                    FbpFilter::Hann => T::lit(0.5) * (T::one() + (T::PI() * nu / opts.cutoff).cos()),
                }
            };
            kernel[k].re * w
        })
        .collect()
}

/// Ramp-filters every projection along `s`.
pub fn ramp_filter<T: Real>(g: &Sinogram<T>, opts: &FbpOptions<T>) -> Result<Sinogram<T>> {
    if !(opts.cutoff > T::zero() && opts.cutoff <= T::one()) {
        return Err(TomoError::InvalidParameter(format!(
            "cutoff must lie in (0, 1], got {}",
            opts.cutoff
        )));
    }
    let geom = g.geometry();
    let n_s = geom.n_offsets();
    let len = (2 * n_s).next_power_of_two();
    let ds = geom.offset_spacing();
    let response = ramp_response(len, ds, opts);
    let mut planner = FftPlanner::new();
    let fwd = planner.plan_fft_forward(len);
    let inv = planner.plan_fft_inverse(len);
    let norm = ds / T::from_usize_lossy(len);
    let mut out = vec![T::zero(); g.values().len()];
    out.par_chunks_mut(n_s)
        .zip(g.values().par_chunks(n_s))
        .for_each(|(dst, src)| {
            let mut buf = vec![Complex::new(T::zero(), T::zero()); len];
            for (b, &v) in buf.iter_mut().zip(src) {
                b.re = v;
            }
            fwd.process(&mut buf);
            for (b, &h) in buf.iter_mut().zip(&response) {
                *b *= h;
            }
            inv.process(&mut buf);
            for (d, b) in dst.iter_mut().zip(&buf) {
                *d = b.re * norm;
            }
        });
    Sinogram::new(geom.clone(), out)
}

/// Filtered back-projection on uniformly sampled data.
///
/// The back-projection is normalized by `π / angular span`, which averages
/// opposing views on a full circle.
pub fn fbp<T: Real>(g: &Sinogram<T>, grid: &ImageGrid<T>, opts: &FbpOptions<T>) -> Result<DensityImage<T>> {
    let geom = g.geometry();
    if !geom.is_uniform(T::lit(1e-6)) {
        return Err(TomoError::InvalidGeometry(
            "filtered back-projection needs uniform offsets and angles".into(),
        ));
    }
    let q = ramp_filter(g, opts)?;
    let projector = build_projector(grid, geom)?;
    let bp = apply_back_projection(&projector, grid, &q)?;
    Ok(bp.scaled(T::PI() / geom.angular_span()))
}

/// Variant of the Landweber step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum LandweberVariant {
    #[default]
    Plain,
    /// Soft-thresholding after each step.
    Ista,
    /// ISTA with Nesterov momentum.
    Fista,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LandweberOptions<T> {
    /// Step size; `None` uses `1/‖R‖²`.
    pub gamma: Option<T>,
    pub stop: StoppingRule<T>,
    pub variant: LandweberVariant,
    /// Soft-threshold weight `λ`; the threshold is `γλ`.
    pub sparsity_weight: T,
    /// Project onto `f ≥ 0` after every step.
    pub nonnegative: bool,
    /// Known `‖R‖`; `None` runs a power iteration.
    pub operator_norm: Option<T>,
}

impl<T: Real> LandweberOptions<T> {
    pub fn new(stop: StoppingRule<T>) -> Self {
        Self {
            gamma: None,
            stop,
            variant: LandweberVariant::Plain,
            sparsity_weight: T::zero(),
            nonnegative: false,
            operator_norm: None,
        }
    }
}

#[inline]
fn soft_threshold<T: Real>(v: T, t: T) -> T {
    if v > t {
        v - t
    } else if v < -t {
        v + t
    } else {
        T::zero()
    }
}

/// Landweber iteration from a zero initial guess.
pub fn landweber<T: Real>(
    projector: &ProjectionMatrix<T>,
    grid: &ImageGrid<T>,
    g: &Sinogram<T>,
    opts: &LandweberOptions<T>,
) -> Result<(DensityImage<T>, IterationLog<T>)> {
    landweber_observed(projector, grid, g, opts, |_, _| {})
}

/// [`landweber`] calling `observer(k, f_k)` on every iterate, including
/// `f_0` and the returned one.
pub fn landweber_observed<T: Real>(
    projector: &ProjectionMatrix<T>,
    grid: &ImageGrid<T>,
    g: &Sinogram<T>,
    opts: &LandweberOptions<T>,
    mut observer: impl FnMut(usize, &DensityImage<T>),
) -> Result<(DensityImage<T>, IterationLog<T>)> {
    opts.stop.validate()?;
    check_len("landweber data", projector.n_rows(), g.values().len())?;
    check_len("landweber grid", projector.n_cols(), grid.len())?;
    let lambda = opts.sparsity_weight;
    if !(lambda >= T::zero() && lambda.is_finite()) {
        return Err(TomoError::InvalidParameter("sparsity weight must be ≥ 0".into()));
    }
    if opts.variant == LandweberVariant::Plain && lambda > T::zero() {
        return Err(TomoError::InvalidParameter(
            "plain Landweber takes no sparsity weight; use ISTA or FISTA".into(),
        ));
    }
    let norm = match opts.operator_norm {
        Some(n) => n,
        None => operator_norm_estimate(projector, 200, T::lit(1e-8))?.norm,
    };
    if !(norm > T::zero()) {
        return Err(TomoError::Degenerate("operator norm is zero".into()));
    }
    let limit = T::lit(2.0) / (norm * norm);
    let gamma = opts.gamma.unwrap_or(T::one() / (norm * norm));
    if !(gamma > T::zero() && gamma < limit) {
        return Err(TomoError::InvalidParameter(format!(
            "step size {gamma} outside (0, 2/‖R‖²) = (0, {limit})"
        )));
    }

    let n = grid.len();
    let cw = g.geometry().cell_weight().sqrt();
    let scale = projector.adjoint_scale();
    let threshold = gamma * lambda;
    let bound = opts.stop.bound();
    let data = g.values();
    let shrink = |v: T| {
        let v = if opts.variant == LandweberVariant::Plain {
            v
        } else {
            soft_threshold(v, threshold)
        };
        if opts.nonnegative {
            v.max(T::zero())
        } else {
            v
        }
    };
    let residual = |rx: &[T]| {
        let r: Vec<T> = data.iter().zip(rx).map(|(&d, &a)| d - a).collect();
        let norm = cw * sum_sq(&r).sqrt();
        (r, norm)
    };

    let mut x = vec![T::zero(); n];
    let mut rx = vec![T::zero(); g.values().len()];
    let mut y = x.clone();
    let mut ry = rx.clone();
    let mut t = T::one();
    let mut log = IterationLog::default();
    let mut image = DensityImage::zeros(*grid);
    let mut k = 0;
    loop {
        let (_, res) = residual(&rx);
        log.residuals.push(res);
        observer(k, &image);
        if res <= bound {
            log.stop_reason = StopReason::Discrepancy;
            break;
        }
        if k >= opts.stop.k_max {
            log.stop_reason = StopReason::KMax;
            break;
        }
        let (r_y, _) = residual(&ry);
        let grad = projector.rmatvec(&r_y)?;
        let next: Vec<T> = y
            .iter()
            .zip(&grad)
            .map(|(&yi, &gi)| shrink(yi + gamma * scale * gi))
            .collect();
        let r_next = projector.matvec(&next)?;
        match opts.variant {
            LandweberVariant::Fista => {
                let t_next = (T::one() + (T::one() + T::lit(4.0) * t * t).sqrt()) / T::lit(2.0);
                let beta = (t - T::one()) / t_next;
                y = next.iter().zip(&x).map(|(&a, &b)| a + beta * (a - b)).collect();
                ry = r_next.iter().zip(&rx).map(|(&a, &b)| a + beta * (a - b)).collect();
                t = t_next;
            }
            _ => {
                y.clone_from(&next);
                ry.clone_from(&r_next);
            }
        }
        x = next;
        rx = r_next;
        log.step_sizes.push(gamma);
        k += 1;
        image = DensityImage::new(*grid, x.clone())?;
    }
    log.iterations = k;
    Ok((image, log))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TikhonovOptions<T> {
    pub cg_tol: T,
    pub cg_max: usize,
}

impl<T: Real> Default for TikhonovOptions<T> {
    fn default() -> Self {
        Self {
            cg_tol: T::lit(1e-8),
            cg_max: 500,
        }
    }
}

/// Minimizer of `‖Rf − g‖² + β‖f‖²` with lengths in pixel units.
///
/// Measuring line integrals and the image norm with the pixel side `h` as
/// the length unit turns the normal equations into
/// `(AᵀA + β h² I) f = Aᵀ g` for the projector matrix `A`; solved by
/// conjugate gradients.
pub fn tikhonov<T: Real>(
    projector: &ProjectionMatrix<T>,
    grid: &ImageGrid<T>,
    g: &Sinogram<T>,
    beta: T,
    opts: &TikhonovOptions<T>,
) -> Result<(DensityImage<T>, IterationLog<T>)> {
    if !(beta > T::zero() && beta.is_finite()) {
        return Err(TomoError::InvalidParameter(format!("beta must be positive, got {beta}")));
    }
    if !(opts.cg_tol > T::zero()) || opts.cg_max == 0 {
        return Err(TomoError::InvalidParameter(
            "cg_tol must be positive and cg_max ≥ 1".into(),
        ));
    }
    check_len("tikhonov data", projector.n_rows(), g.values().len())?;
    check_len("tikhonov grid", projector.n_cols(), grid.len())?;
    let mu = beta * grid.pixel_area();
    let normal = |v: &[T]| -> Result<Vec<T>> {
        let mut out = projector.rmatvec(&projector.matvec(v)?)?;
        for (o, &vi) in out.iter_mut().zip(v) {
            *o += mu * vi;
        }
        Ok(out)
    };
    let b = projector.rmatvec(g.values())?;
    let (x, log) = conjugate_gradient(normal, &b, opts.cg_tol, opts.cg_max)?;
    Ok((DensityImage::new(*grid, x)?, log))
}

/// CG for a symmetric positive definite operator; the log holds relative
/// residuals `‖b − Mx‖/‖b‖`.
fn conjugate_gradient<T: Real>(
    apply: impl Fn(&[T]) -> Result<Vec<T>>,
    b: &[T],
    tol: T,
    max_iter: usize,
) -> Result<(Vec<T>, IterationLog<T>)> {
    let mut x = vec![T::zero(); b.len()];
    let mut log = IterationLog::default();
    let b_norm = sum_sq(b).sqrt();
    if b_norm == T::zero() {
        log.residuals.push(T::zero());
        log.stop_reason = StopReason::Discrepancy;
        return Ok((x, log));
    }
    let mut r = b.to_vec();
    let mut p = r.clone();
    let mut rr = sum_sq(&r);
    log.residuals.push(T::one());
    for k in 0..max_iter {
        let mp = apply(&p)?;
        let pmp = dot(&p, &mp);
        if !(pmp > T::zero()) {
            log.stop_reason = StopReason::Stationary;
            log.iterations = k;
            return Ok((x, log));
        }
        let alpha = rr / pmp;
        for ((xi, ri), (&pi, &mpi)) in x.iter_mut().zip(r.iter_mut()).zip(p.iter().zip(&mp)) {
            *xi += alpha * pi;
            *ri -= alpha * mpi;
        }
        let rr_next = sum_sq(&r);
        let rel = rr_next.sqrt() / b_norm;
        log.residuals.push(rel);
        log.step_sizes.push(alpha);
        if rel <= tol {
            log.stop_reason = StopReason::Discrepancy;
            log.iterations = k + 1;
            return Ok((x, log));
        }
        let beta = rr_next / rr;
        for (pi, &ri) in p.iter_mut().zip(&r) {
            *pi = ri + beta * *pi;
        }
        rr = rr_next;
    }
    log.stop_reason = StopReason::KMax;
    log.iterations = max_iter;
    Ok((x, log))
}

/// Edge image: back-projection of the negated second `s`-derivative of the
/// data, normalized by `1/(2·angular span)`.
///
/// A first derivative is odd under `(s, θ) → (−s, θ + π)` and cancels when
/// back-projected over a full circle; the second derivative does not.
pub fn contour<T: Real>(
    projector: &ProjectionMatrix<T>,
    grid: &ImageGrid<T>,
    g: &Sinogram<T>,
) -> Result<DensityImage<T>> {
    let geom = g.geometry();
    let n_s = geom.n_offsets();
    if n_s < 3 {
        return Err(TomoError::InvalidGeometry(
            "contour needs at least 3 offsets".into(),
        ));
    }
    let ds = geom.offset_spacing();
    let c = -T::one() / (ds * ds);
    let mut q = vec![T::zero(); g.values().len()];
    for (dst, src) in q.chunks_mut(n_s).zip(g.values().chunks(n_s)) {
        for (i, d) in dst.iter_mut().enumerate() {
            // boundary samples reuse the neighbouring stencil
            let m = i.clamp(1, n_s - 2);
            *d = c * (src[m + 1] - src[m] - src[m] + src[m - 1]);
        }
    }
    let q = Sinogram::new(geom.clone(), q)?;
    let bp = apply_back_projection(projector, grid, &q)?;
    Ok(bp.scaled(T::one() / (T::lit(2.0) * geom.angular_span())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phantom::{analytic_disk_sinogram, disk_phantom};
    use crate::radon::{apply_radon, ScanGeometry};

    fn setup(n: usize, angles: usize, offsets: usize) -> (ImageGrid<f64>, ScanGeometry<f64>, ProjectionMatrix<f64>) {
        let grid = ImageGrid::unit(n).unwrap();
        let geom = ScanGeometry::uniform(angles, offsets, 1.0).unwrap();
        let p = build_projector(&grid, &geom).unwrap();
        (grid, geom, p)
    }

    #[test]
    fn zero_data_gives_zero_image() {
        let (grid, geom, p) = setup(16, 20, 17);
        let z = Sinogram::zeros(geom);
        assert!(fbp(&z, &grid, &FbpOptions::default()).unwrap().values().iter().all(|&v| v == 0.0));
        assert!(contour(&p, &grid, &z).unwrap().values().iter().all(|&v| v == 0.0));
        let (f, log) = tikhonov(&p, &grid, &z, 1.0, &TikhonovOptions::default()).unwrap();
        assert!(f.values().iter().all(|&v| v == 0.0));
        assert_eq!(log.iterations, 0);
        for variant in [LandweberVariant::Plain, LandweberVariant::Ista, LandweberVariant::Fista] {
            let mut o = LandweberOptions::new(StoppingRule::new(1.5, 0.0, 10).unwrap());
            o.variant = variant;
            let (f, log) = landweber(&p, &grid, &z, &o).unwrap();
            assert!(f.values().iter().all(|&v| v == 0.0));
            assert_eq!(log.iterations, 0);
            assert_eq!(log.stop_reason, StopReason::Discrepancy);
        }
    }

    #[test]
    fn ramp_kills_dc() {
        let h = ramp_response(256, 0.1_f64, &FbpOptions::default());
        let peak = h.iter().cloned().fold(0.0, f64::max);
        assert!(h[0].abs() < 1e-2 * peak);
        assert!((peak - 0.5 / 0.01).abs() < 0.05 * peak);
        let hann = ramp_response(256, 0.1_f64, &FbpOptions { filter: FbpFilter::Hann, cutoff: 1.0 });
        assert!(hann[128].abs() < 1e-12);
        let cut = ramp_response(256, 0.1, &FbpOptions { filter: FbpFilter::RamLak, cutoff: 0.5 });
        assert_eq!(cut[100], 0.0);
    }

    #[test]
    fn fbp_recovers_disk() {
        let grid = ImageGrid::<f64>::unit(81).unwrap();
        let geom = ScanGeometry::uniform(360, 71, 1.0).unwrap();
        let g = analytic_disk_sinogram(&geom, [0.0, 0.0], 0.5, 1.0);
        let f = fbp(&g, &grid, &FbpOptions::default()).unwrap();
        let (mut inner, mut ni, mut outer, mut no) = (0.0, 0, 0.0, 0);
        for (k, x, y) in grid.centers() {
            let r = (x * x + y * y).sqrt();
            if r < 0.4 {
                inner += f.values()[k];
                ni += 1;
            } else if r > 0.6 {
                outer += f.values()[k];
                no += 1;
            }
        }
        let (inner, outer) = (inner / ni as f64, outer / no as f64);
        assert!((inner - 1.0).abs() < 0.1, "interior {inner}");
        assert!(outer.abs() < 0.05, "exterior {outer}");
    }

    #[test]
    fn fbp_rejects_nonuniform() {
        let grid = ImageGrid::unit(8).unwrap();
        let geom = ScanGeometry::new(vec![0.0, 0.1, 0.5], vec![-0.5, 0.0, 0.5]).unwrap();
        assert!(fbp(&Sinogram::zeros(geom), &grid, &FbpOptions::default()).is_err());
    }

    #[test]
    fn landweber_residual_decreases() {
        let (grid, geom, p) = setup(24, 40, 31);
        let f = disk_phantom(&grid, [0.1, 0.0], 0.5, 1.0).unwrap();
        let g = apply_radon(&p, &geom, &f).unwrap();
        let opts = LandweberOptions::new(StoppingRule::new(1.5, 0.0, 60).unwrap());
        let (_, log) = landweber(&p, &grid, &g, &opts).unwrap();
        assert_eq!(log.stop_reason, StopReason::KMax);
        assert_eq!(log.residuals.len(), 61);
        for w in log.residuals.windows(2) {
            assert!(w[1] <= w[0] * (1.0 + 1e-12));
        }
    }

    #[test]
    fn landweber_parameter_checks() {
        let (grid, geom, p) = setup(8, 6, 9);
        let g = Sinogram::constant(geom, 1.0);
        let mut o = LandweberOptions::new(StoppingRule::new(1.5, 0.0, 5).unwrap());
        o.sparsity_weight = 0.1;
        assert!(landweber(&p, &grid, &g, &o).is_err());
        let norm = operator_norm_estimate(&p, 200, 1e-10).unwrap().norm;
        let mut o = LandweberOptions::new(StoppingRule::new(1.5, 0.0, 5).unwrap());
        o.gamma = Some(2.5 / (norm * norm));
        assert!(landweber(&p, &grid, &g, &o).is_err());
        o.gamma = Some(-1.0);
        assert!(landweber(&p, &grid, &g, &o).is_err());
    }

    #[test]
    fn variants_agree_on_first_step() {
        let (grid, geom, p) = setup(16, 20, 17);
        let f = disk_phantom(&grid, [0.0, 0.2], 0.4, 1.0).unwrap();
        let g = apply_radon(&p, &geom, &f).unwrap();
        let mut images = Vec::new();
        for variant in [LandweberVariant::Plain, LandweberVariant::Ista, LandweberVariant::Fista] {
            let mut o = LandweberOptions::new(StoppingRule::new(1.5, 0.0, 1).unwrap());
            o.variant = variant;
            images.push(landweber(&p, &grid, &g, &o).unwrap().0);
        }
        assert_eq!(images[0], images[1]);
        assert_eq!(images[0], images[2]);
    }

    #[test]
    fn fista_converges_faster() {
        let (grid, geom, p) = setup(20, 30, 25);
        let f = disk_phantom(&grid, [0.0, 0.0], 0.6, 1.0).unwrap();
        let g = apply_radon(&p, &geom, &f).unwrap();
        let run = |variant| {
            let mut o = LandweberOptions::new(StoppingRule::new(1.5, 0.0, 40).unwrap());
            o.variant = variant;
            *landweber(&p, &grid, &g, &o).unwrap().1.residuals.last().unwrap()
        };
        assert!(run(LandweberVariant::Fista) < run(LandweberVariant::Plain));
    }

    #[test]
    fn ista_thresholds() {
        let (grid, geom, p) = setup(16, 20, 17);
        let f = disk_phantom(&grid, [0.0, 0.0], 0.3, 1.0).unwrap();
        let g = apply_radon(&p, &geom, &f).unwrap();
        let mut o = LandweberOptions::new(StoppingRule::new(1.5, 0.0, 30).unwrap());
        o.variant = LandweberVariant::Ista;
        o.sparsity_weight = 0.05;
        let sparse = landweber(&p, &grid, &g, &o).unwrap().0;
        o.variant = LandweberVariant::Plain;
        o.sparsity_weight = 0.0;
        let dense = landweber(&p, &grid, &g, &o).unwrap().0;
        let zeros = |img: &DensityImage<f64>| img.values().iter().filter(|&&v| v == 0.0).count();
        assert!(zeros(&sparse) > zeros(&dense));
    }

    #[test]
    fn discrepancy_stop() {
        let (grid, geom, p) = setup(16, 20, 17);
        let f = disk_phantom(&grid, [0.0, 0.0], 0.5, 1.0).unwrap();
        let g = apply_radon(&p, &geom, &f).unwrap();
        let delta = 0.05 * g.norm();
        let o = LandweberOptions::new(StoppingRule::new(1.5, delta, 1000).unwrap());
        let (_, log) = landweber(&p, &grid, &g, &o).unwrap();
        assert_eq!(log.stop_reason, StopReason::Discrepancy);
        let k = log.iterations;
        assert!(log.residuals[k] <= 1.5 * delta);
        assert!(log.residuals[k - 1] > 1.5 * delta);
    }

    #[test]
    fn tikhonov_properties() {
        let (grid, geom, p) = setup(16, 24, 21);
        let f = disk_phantom(&grid, [0.1, 0.1], 0.5, 1.0).unwrap();
        let g = apply_radon(&p, &geom, &f).unwrap();
        let opts = TikhonovOptions { cg_tol: 1e-12, cg_max: 2000 };
        let mut prev = f64::INFINITY;
        for beta in [1.0, 10.0, 100.0, 1000.0] {
            let (fb, _) = tikhonov(&p, &grid, &g, beta, &opts).unwrap();
            assert!(fb.norm() <= prev);
            prev = fb.norm();
        }
        let (f1, log) = tikhonov(&p, &grid, &g, 10.0, &opts).unwrap();
        assert_eq!(log.stop_reason, StopReason::Discrepancy);
        let g2 = g.map(|v| 2.0 * v);
        let (f2, _) = tikhonov(&p, &grid, &g2, 10.0, &opts).unwrap();
        for (a, b) in f1.values().iter().zip(f2.values()) {
            assert!((2.0 * a - b).abs() < 1e-9);
        }
        // normal-equation residual
        let mu = 10.0 * grid.pixel_area();
        let lhs = p.rmatvec(&p.matvec(f1.values()).unwrap()).unwrap();
        let rhs = p.rmatvec(g.values()).unwrap();
        let err: f64 = lhs.iter().zip(f1.values()).zip(&rhs).map(|((l, x), r)| (l + mu * x - r).powi(2)).sum();
        assert!(err.sqrt() <= 1e-10 * sum_sq(&rhs).sqrt());
        assert!(tikhonov(&p, &grid, &g, 0.0, &opts).is_err());
    }

    #[test]
    fn contour_properties() {
        let (grid, geom, p) = setup(64, 120, 61);
        let c = Sinogram::constant(geom.clone(), 3.0);
        assert!(contour(&p, &grid, &c).unwrap().values().iter().all(|&v| v.abs() < 1e-9));
        let g = analytic_disk_sinogram(&geom, [0.0, 0.0], 0.5, 1.0);
        let e = contour(&p, &grid, &g).unwrap();
        let (mut ring, mut nr, mut inner, mut ni) = (0.0, 0, 0.0, 0);
        for (k, x, y) in grid.centers() {
            let r = (x * x + y * y).sqrt();
            if (r - 0.5).abs() < 0.05 {
                ring += e.values()[k].abs();
                nr += 1;
            } else if r < 0.35 {
                inner += e.values()[k].abs();
                ni += 1;
            }
        }
        assert!(ring / nr as f64 > 3.0 * inner / ni as f64);
        let short = ScanGeometry::uniform(4, 2, 1.0).unwrap();
        let p2 = build_projector(&grid, &short).unwrap();
        assert!(contour(&p2, &grid, &Sinogram::zeros(short)).is_err());
    }
}
