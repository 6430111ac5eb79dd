//! Built-in self checks run by `thz-tomo verify`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use thztomo::beam::{
    smoothed_exp, smoothed_exp_bounds, smoothed_exp_d1, smoothed_exp_d2, ForwardContext,
};
use thztomo::phantom::{analytic_disk_sinogram, disk_phantom};
use thztomo::radon::{
    apply_back_projection, apply_radon, build_projector, DensityImage, ImageGrid, ScanGeometry,
};
use thztomo::recon::{fbp, FbpOptions};

pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    /// Measured quantity and the threshold it was compared with.
    pub measured: String,
}

type CheckFn = fn() -> Result<CheckOutcome, thztomo::TomoError>;

/// Names accepted by `verify --only`.
pub const CHECKS: &[(&str, CheckFn)] = &[
    ("adjoint", check_adjoint),
    ("disk-oracle", check_disk_oracle),
    ("smoothness", check_smoothness),
    ("taylor", check_taylor),
    ("jacobian-adjoint", check_jacobian_adjoint),
    ("single-ray", check_single_ray),
];

pub fn run_checks(only: &[String]) -> Vec<CheckOutcome> {
    CHECKS
        .iter()
        .filter(|(name, _)| only.is_empty() || only.iter().any(|o| o == name))
        .map(|(name, check)| {
            check().unwrap_or_else(|e| CheckOutcome {
                name,
                passed: false,
                measured: format!("error: {e}"),
            })
        })
        .collect()
}

fn random_image(grid: ImageGrid<f64>, rng: &mut ChaCha8Rng, nonneg: bool) -> DensityImage<f64> {
    DensityImage::from_fn(grid, |_, _| {
        if nonneg {
            rng.random_range(0.0..1.0)
        } else {
            rng.random_range(-1.0..1.0)
        }
    })
}

fn check_adjoint() -> Result<CheckOutcome, thztomo::TomoError> {
    let grid = ImageGrid::<f64>::unit(81)?;
    let geom = ScanGeometry::uniform(360, 71, 1.0)?;
    let p = build_projector(&grid, &geom)?;
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let f = random_image(grid, &mut rng, false);
        let g = thztomo::radon::Sinogram::from_fn(geom.clone(), |_, _| rng.random_range(-1.0..1.0));
        let rf = apply_radon(&p, &geom, &f)?;
        let rg = apply_back_projection(&p, &grid, &g)?;
        let err = (rf.inner(&g) - f.inner(&rg)).abs() / (rf.norm() * g.norm());
        worst = worst.max(err);
    }
    Ok(CheckOutcome {
        name: "adjoint",
        passed: worst <= 1e-10,
        measured: format!("max relative error {worst:.3e} (≤ 1e-10)"),
    })
}

fn check_disk_oracle() -> Result<CheckOutcome, thztomo::TomoError> {
    let grid = ImageGrid::<f64>::unit(81)?;
    let geom = ScanGeometry::uniform(360, 71, 1.0)?;
    let p = build_projector(&grid, &geom)?;
    let disk = disk_phantom(&grid, [0.0, 0.0], 0.5, 1.0)?;
    let exact = analytic_disk_sinogram(&geom, [0.0, 0.0], 0.5, 1.0);
    let discrete = apply_radon(&p, &geom, &disk)?;
    let h = grid.pixel_side();
    let rho = 0.5_f64;
    // staircase error of a pixel-center disk, amplified near tangency by
    // the chord sensitivity ρ/√(ρ² − d²)
    let mut worst: f64 = 0.0;
    for (k, (&a, &b)) in exact.values().iter().zip(discrete.values()).enumerate() {
        let s: f64 = geom.offsets()[k % geom.n_offsets()];
        if s.abs() <= rho - 2.0 * h {
            let bound = 2.0 * h * rho / (rho * rho - s * s).sqrt();
            worst = worst.max((a - b).abs() / bound);
        }
    }
    let rec = fbp(&exact, &grid, &FbpOptions::default())?;
    let (mut inner, mut ni, mut outer, mut no) = (0.0, 0usize, 0.0, 0usize);
    for (k, x, y) in grid.centers() {
        let r = x.hypot(y);
        if r < 0.4 {
            inner += rec.values()[k];
            ni += 1;
        } else if r > 0.6 {
            outer += rec.values()[k];
            no += 1;
        }
    }
    let (inner, outer) = (inner / ni as f64, outer / no as f64);
    Ok(CheckOutcome {
        name: "disk-oracle",
        passed: worst <= 1.0 && (inner - 1.0).abs() <= 0.1 && outer.abs() <= 0.05,
        measured: format!(
            "radon error / (2h·ρ/√(ρ²−d²)) {worst:.3} (≤ 1), fbp interior {inner:.3} (1 ± 0.1), exterior {outer:.3} (0 ± 0.05)"
        ),
    })
}

fn check_smoothness() -> Result<CheckOutcome, thztomo::TomoError> {
    let eps = 1e-300_f64;
    let jump = [
        (smoothed_exp(-eps) - smoothed_exp(0.0)).abs(),
        (smoothed_exp_d1(-eps) - smoothed_exp_d1(0.0)).abs(),
        (smoothed_exp_d2(-eps) - smoothed_exp_d2(0.0)).abs(),
    ]
    .into_iter()
    .fold(0.0, f64::max);
    let (mut m0, mut m1, mut m2) = (0.0_f64, 0.0_f64, 0.0_f64);
    let n = 1_000_000;
    for k in 0..=n {
        let x = -50.0 + 100.0 * k as f64 / n as f64;
        m0 = m0.max(smoothed_exp(x).abs());
        m1 = m1.max(smoothed_exp_d1(x).abs());
        m2 = m2.max(smoothed_exp_d2(x).abs());
    }
    let (b0, b1, b2) = smoothed_exp_bounds();
    let tol = 1e-9;
    Ok(CheckOutcome {
        name: "smoothness",
        passed: jump <= 1e-12 && m0 <= b0 + tol && m1 <= b1 + tol && m2 <= b2 + tol,
        measured: format!(
            "jump at 0 {jump:.1e}; sup |E| {m0:.4} (≤ {b0:.4}), |E'| {m1:.4} (≤ {b1:.4}), |E''| {m2:.4} (≤ {b2:.4})"
        ),
    })
}

fn small_context() -> Result<ForwardContext<f64>, thztomo::TomoError> {
    let grid = ImageGrid::<f64>::unit(41)?;
    let geom = ScanGeometry::uniform(60, 35, 1.0)?;
    ForwardContext::gaussian(grid, geom, 0.08, 2)
}

/// Least-squares slope of `log r` against `log t`.
pub fn loglog_slope(ts: &[f64], rs: &[f64]) -> f64 {
    let n = ts.len() as f64;
    let xs: Vec<f64> = ts.iter().map(|t| t.ln()).collect();
    let ys: Vec<f64> = rs.iter().map(|r| r.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let num: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let den: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    num / den
}

fn check_taylor() -> Result<CheckOutcome, thztomo::TomoError> {
    let ctx = small_context()?;
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let f = random_image(*ctx.grid(), &mut rng, true);
    let h = random_image(*ctx.grid(), &mut rng, true);
    let lin = ctx.linearize(&f)?;
    let jh = lin.apply(&h)?;
    let ts = [1e-1, 1e-2, 1e-3, 1e-4];
    let mut rem = Vec::new();
    for &t in &ts {
        let mut ft = f.clone();
        ft.axpy(t, &h);
        let mut r = ctx.forward(&ft)?;
        r.axpy(-1.0, lin.value());
        r.axpy(-t, &jh);
        rem.push(r.norm());
    }
    let slope = loglog_slope(&ts, &rem);
    Ok(CheckOutcome {
        name: "taylor",
        passed: (slope - 2.0).abs() <= 0.1,
        measured: format!("remainder slope {slope:.4} (2 ± 0.1)"),
    })
}

fn check_jacobian_adjoint() -> Result<CheckOutcome, thztomo::TomoError> {
    let ctx = small_context()?;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let f = random_image(*ctx.grid(), &mut rng, true);
    let h = random_image(*ctx.grid(), &mut rng, false);
    let g = thztomo::radon::Sinogram::from_fn(ctx.geometry().clone(), |_, _| rng.random_range(-1.0..1.0));
    let lin = ctx.linearize(&f)?;
    let jh = lin.apply(&h)?;
    let jtg = lin.adjoint(&g)?;
    let err = (jh.inner(&g) - h.inner(&jtg)).abs() / (jh.norm() * g.norm());
    Ok(CheckOutcome {
        name: "jacobian-adjoint",
        passed: err <= 1e-8,
        measured: format!("relative error {err:.3e} (≤ 1e-8)"),
    })
}

fn check_single_ray() -> Result<CheckOutcome, thztomo::TomoError> {
    let grid = ImageGrid::<f64>::unit(41)?;
    let geom = ScanGeometry::uniform(90, 35, 1.0)?;
    let ctx = ForwardContext::single_ray(grid, geom.clone())?;
    let f = disk_phantom(&grid, [0.1, -0.1], 0.5, 1.0)?;
    let p = build_projector(&grid, &geom)?;
    let rf = apply_radon(&p, &geom, &f)?;
    let lin = ctx.forward(&f)?.map(|v| -2.0 * v.ln());
    let err = lin
        .values()
        .iter()
        .zip(rf.values())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    Ok(CheckOutcome {
        name: "single-ray",
        passed: err <= 1e-6,
        measured: format!("max |−2 ln F − Rf| {err:.3e} (≤ 1e-6)"),
    })
}
