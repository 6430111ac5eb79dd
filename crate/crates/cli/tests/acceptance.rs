//! Acceptance suite. Each criterion prints one PASS/FAIL line; the process
//! exits non-zero if any criterion fails.

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use thztomo::beam::{
    forward_full_beam, simulate_pulse_ensemble, smoothed_exp, smoothed_exp_d1, smoothed_exp_d2,
    ForwardContext, MaterialParams,
};
use thztomo::phantom::{
    add_noise, analytic_disk_sinogram, disk_phantom, triangle_phantom, NoiseKind, TriangleSpec,
};
use thztomo::radon::{
    apply_back_projection, apply_radon, build_projector, DensityImage, ImageGrid, ScanGeometry,
    Sinogram,
};
use thztomo::recon::{
    contour, fbp, landweber, landweber_observed, nonlinear_landweber,
    nonlinear_landweber_observed, tikhonov, FbpOptions, LandweberOptions, NonlinearSolveConfig,
    StopReason, StoppingRule, TikhonovOptions,
};
use thztomo::signal::{
    build_ratio_sinogram, integrate_pulse, log_transform, model_reference_pulse, DataMode,
};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

const FULL_N: usize = 81;
const FULL_ANGLES: usize = 360;
const FULL_OFFSETS: usize = 71;
const FWHM: f64 = 0.03;
const OVERSAMPLING: usize = 4;

fn full_setup() -> (ImageGrid<f64>, ScanGeometry<f64>) {
    (
        ImageGrid::unit(FULL_N).unwrap(),
        ScanGeometry::uniform(FULL_ANGLES, FULL_OFFSETS, 1.0).unwrap(),
    )
}

fn small_setup() -> (ImageGrid<f64>, ScanGeometry<f64>) {
    (
        ImageGrid::unit(41).unwrap(),
        ScanGeometry::uniform(90, 35, 1.0).unwrap(),
    )
}

fn verdict(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn within(limit: Duration, start: Instant) -> (bool, String) {
    let t = start.elapsed();
    (t <= limit, format!("{:.1} s of {} s", t.as_secs_f64(), limit.as_secs()))
}

fn random_image(grid: ImageGrid<f64>, rng: &mut ChaCha8Rng, lo: f64) -> DensityImage<f64> {
    DensityImage::from_fn(grid, |_, _| rng.random_range(lo..1.0))
}

fn adjoint_exactness() -> Outcome {
    let start = Instant::now();
    let (grid, geom) = full_setup();
    let p = build_projector(&grid, &geom).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let f = random_image(grid, &mut rng, -1.0);
        let g = Sinogram::from_fn(geom.clone(), |_, _| rng.random_range(-1.0..1.0));
        let rf = apply_radon(&p, &geom, &f).unwrap();
        let rg = apply_back_projection(&p, &grid, &g).unwrap();
        worst = worst.max((rf.inner(&g) - f.inner(&rg)).abs() / (rf.norm() * g.norm()));
    }
    let (fast, time) = within(Duration::from_secs(30), start);
    verdict(
        worst <= 1e-10 && fast,
        format!("max relative error {worst:.2e} (≤ 1e-10), {time}"),
    )
}

fn disk_oracle() -> Outcome {
    let (grid, geom) = full_setup();
    let (rho, h) = (0.5, grid.pixel_side());
    let p = build_projector(&grid, &geom).unwrap();
    let disk = disk_phantom(&grid, [0.0, 0.0], rho, 1.0).unwrap();
    let exact = analytic_disk_sinogram(&geom, [0.0, 0.0], rho, 1.0);
    let discrete = apply_radon(&p, &geom, &disk).unwrap();
    let mut max_err: f64 = 0.0;
    for (k, (a, b)) in exact.values().iter().zip(discrete.values()).enumerate() {
        let d: f64 = geom.offsets()[k % geom.n_offsets()];
        if d.abs() <= rho - 2.0 * h {
            max_err = max_err.max((a - b).abs());
        }
    }
    let rec = fbp(&exact, &grid, &FbpOptions::default()).unwrap();
    let mean = |keep: &dyn Fn(f64) -> bool| {
        let v: Vec<f64> = grid
            .centers()
            .filter(|&(_, x, y)| keep(f64::hypot(x, y)))
            .map(|(k, _, _)| rec.values()[k])
            .collect();
        v.iter().sum::<f64>() / v.len() as f64
    };
    let inner = mean(&|r| r < rho - 0.1);
    let outer = mean(&|r| r > rho + 0.1);
    verdict(
        max_err <= 2.0 * h && (inner - 1.0).abs() <= 0.1 && outer.abs() <= 0.05,
        format!(
            "radon max error {max_err:.4} (≤ 2h = {:.4}), fbp interior {inner:.3} (1 ± 0.1), exterior {outer:.4} (0 ± 0.05)",
            2.0 * h
        ),
    )
}

fn smoothed_exp_contract() -> Outcome {
    let eps = 1e-300_f64;
    let jump = [
        (smoothed_exp(-eps) - smoothed_exp(0.0)).abs(),
        (smoothed_exp_d1(-eps) - smoothed_exp_d1(0.0)).abs(),
        (smoothed_exp_d2(-eps) - smoothed_exp_d2(0.0)).abs(),
    ]
    .into_iter()
    .fold(0.0, f64::max);
    let (mut m0, mut m1, mut m2) = (0.0_f64, 0.0_f64, 0.0_f64);
    let n = 2_000_000;
    for k in 0..=n {
        let x = -50.0 + 100.0 * k as f64 / n as f64;
        m0 = m0.max(smoothed_exp(x).abs());
        m1 = m1.max(smoothed_exp_d1(x).abs());
        m2 = m2.max(smoothed_exp_d2(x).abs());
    }
    verdict(
        jump <= 1e-12 && m0 <= 2.0 && m1 <= 1.0 && m2 <= 1.0,
        format!("jump {jump:.1e} (≤ 1e-12), sup|E| {m0:.4} (≤ 2), sup|E'| {m1:.4} (≤ 1), sup|E''| {m2:.4} (≤ 1)"),
    )
}

fn loglog_slope(ts: &[f64], rs: &[f64]) -> f64 {
    thztomo_cli::verify::loglog_slope(ts, rs)
}

fn frechet_derivative() -> Outcome {
    let (grid, geom) = small_setup();
    let ctx = ForwardContext::gaussian(grid, geom.clone(), FWHM, OVERSAMPLING).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let ts = [1e-1, 1e-2, 1e-3, 1e-4];
    let mut slopes = Vec::new();
    let mut adj: f64 = 0.0;
    for _ in 0..5 {
        let f = random_image(grid, &mut rng, 0.0);
        let h = random_image(grid, &mut rng, 0.0);
        let lin = ctx.linearize(&f).unwrap();
        let jh = lin.apply(&h).unwrap();
        let rem: Vec<f64> = ts
            .iter()
            .map(|&t| {
                let mut ft = f.clone();
                ft.axpy(t, &h);
                let mut r = ctx.forward(&ft).unwrap();
                r.axpy(-1.0, lin.value());
                r.axpy(-t, &jh);
                r.norm()
            })
            .collect();
        slopes.push(loglog_slope(&ts, &rem));
        let g = Sinogram::from_fn(geom.clone(), |_, _| rng.random_range(-1.0..1.0));
        let jtg = lin.adjoint(&g).unwrap();
        adj = adj.max((jh.inner(&g) - h.inner(&jtg)).abs() / (jh.norm() * g.norm()));
    }
    let worst = slopes.iter().map(|s| (s - 2.0).abs()).fold(0.0, f64::max);
    verdict(
        worst <= 0.1 && adj <= 1e-8,
        format!("slopes {slopes:.3?} (2 ± 0.1), adjoint error {adj:.2e} (≤ 1e-8)"),
    )
}

fn model_consistency() -> Outcome {
    let start = Instant::now();
    let (grid, geom) = small_setup();
    let f = triangle_phantom(&grid, &TriangleSpec::default()).unwrap();
    let ctx = ForwardContext::gaussian(grid, geom, FWHM, OVERSAMPLING).unwrap();
    let reference = model_reference_pulse(0.0, 0.002, 2001, 1.0, 0.05).unwrap();
    let data = simulate_pulse_ensemble(&ctx, &f, &reference, &MaterialParams::default()).unwrap();
    let forward = forward_full_beam(&ctx, &f).unwrap();
    let p_ref = integrate_pulse(&reference);
    let worst = data
        .traces()
        .iter()
        .zip(forward.values())
        .map(|(t, &v)| (integrate_pulse(t) / p_ref - v).abs() / v.abs())
        .fold(0.0, f64::max);
    let (fast, time) = within(Duration::from_secs(120), start);
    verdict(
        worst <= 1e-3 && fast,
        format!("max relative deviation {worst:.2e} (≤ 1e-3), {time}"),
    )
}

fn single_ray_collapse() -> Outcome {
    let (grid, geom) = small_setup();
    let f = triangle_phantom(&grid, &TriangleSpec::default()).unwrap();
    let ctx = ForwardContext::single_ray(grid, geom.clone()).unwrap();
    let p = build_projector(&grid, &geom).unwrap();
    let rf = apply_radon(&p, &geom, &f).unwrap();
    let max_dev = |a: &Sinogram<f64>| {
        a.values()
            .iter()
            .zip(rf.values())
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max)
    };
    let direct = max_dev(&ctx.forward(&f).unwrap().map(|v| -2.0 * v.ln()));
    let reference = model_reference_pulse(0.0, 0.002, 2001, 1.0, 0.05).unwrap();
    let data = simulate_pulse_ensemble(&ctx, &f, &reference, &MaterialParams::default()).unwrap();
    let ratio = build_ratio_sinogram(&data, DataMode::I).unwrap();
    let (lin, floored) = log_transform(&ratio, DataMode::I);
    let pipeline = max_dev(&lin);
    verdict(
        direct <= 1e-6 && pipeline <= 1e-3 && floored == 0,
        format!("−2 ln F vs Rf {direct:.2e} (≤ 1e-6), I-mode traces vs Rf {pipeline:.2e} (≤ 1e-3)"),
    )
}

fn nonlinear_landweber_run() -> Outcome {
    let start = Instant::now();
    let (grid, geom) = full_setup();
    let spec = TriangleSpec::default();
    let truth = triangle_phantom(&grid, &spec).unwrap();
    let ctx = ForwardContext::gaussian(grid, geom, FWHM, OVERSAMPLING).unwrap();
    let g = ctx.forward(&truth).unwrap();

    let cfg = NonlinearSolveConfig::new(StoppingRule::fixed(500).unwrap());
    let (fixed_point, log0) = nonlinear_landweber(&ctx, &g, &truth, &cfg).unwrap();
    let stationary = fixed_point == truth && log0.iterations == 0;

    let zero = DensityImage::zeros(grid);
    let mut at_200 = None;
    let (f, log) = nonlinear_landweber_observed(&ctx, &g, &zero, &cfg, |k, fk| {
        if k == 200 {
            at_200 = Some(fk.clone());
        }
    })
    .unwrap();
    let err = f.relative_error(&truth);
    let f200 = at_200.expect("run reaches 200 iterations");
    let max = f200.values().iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let walls: Vec<f64> = truth
        .values()
        .iter()
        .zip(f200.values())
        .filter(|(t, _)| **t > 0.0)
        .map(|(_, v)| *v)
        .collect();
    let share = walls.iter().filter(|&&v| v > 0.5 * max).count() as f64 / walls.len() as f64;
    let (fast, time) = within(Duration::from_secs(600), start);
    verdict(
        err <= 0.25 && stationary && share >= 0.8 && fast,
        format!(
            "error {err:.3} after {} iterations (≤ 0.25), stationary {stationary}, wall share at k=200 {:.1}% (≥ 80%), {time}",
            log.iterations,
            100.0 * share
        ),
    )
}

fn discrepancy_principle() -> Outcome {
    let (grid, geom) = full_setup();
    let truth = triangle_phantom(&grid, &TriangleSpec::default()).unwrap();
    let p = build_projector(&grid, &geom).unwrap();
    let exact = apply_radon(&p, &geom, &truth).unwrap();
    let (g, delta) = add_noise(&exact, 0.05, 2024, NoiseKind::Gaussian).unwrap();
    let tau = 1.5;
    let k_max = 2000;

    let opts = LandweberOptions::new(StoppingRule::new(tau, delta, k_max).unwrap());
    let (stopped, log) = landweber(&p, &grid, &g, &opts).unwrap();
    let k = log.iterations;
    let bound = tau * delta;
    let crossed = log.stop_reason == StopReason::Discrepancy
        && k >= 1
        && k < k_max
        && log.residuals[k] <= bound
        && log.residuals[k - 1] > bound;

    let mut errors = Vec::with_capacity(k_max + 1);
    let free = LandweberOptions::new(StoppingRule::fixed(k_max).unwrap());
    landweber_observed(&p, &grid, &g, &free, |_, f| errors.push(f.relative_error(&truth))).unwrap();
    let best = errors.iter().copied().fold(f64::INFINITY, f64::min);
    let err = stopped.relative_error(&truth);
    verdict(
        crossed && err <= 1.5 * best,
        format!(
            "k* = {k} (< {k_max}), residuals {:.4} → {:.4} around τδ = {bound:.4}, error {err:.3} vs best {best:.3} (≤ 1.5×)",
            log.residuals[k.saturating_sub(1)],
            log.residuals[k]
        ),
    )
}

/// Point-in-triangle test against the solid outer triangle.
fn in_outer(spec: &TriangleSpec<f64>, x: f64, y: f64) -> bool {
    let v = spec.vertices();
    let side = |a: [f64; 2], b: [f64; 2]| (b[0] - a[0]) * (y - a[1]) - (b[1] - a[1]) * (x - a[0]);
    let s = [side(v[0], v[1]), side(v[1], v[2]), side(v[2], v[0])];
    s.iter().all(|&d| d >= 0.0) || s.iter().all(|&d| d <= 0.0)
}

/// Mean |value| near the walls over mean |value| in the rest of the solid
/// triangle. A pixel is near the walls when any point of its 3×3 stencil at
/// spacing `h` lies on a wall.
fn wall_band_ratio(img: &DensityImage<f64>, spec: &TriangleSpec<f64>) -> f64 {
    let h = img.grid().pixel_side();
    let (mut band, mut nb, mut inner, mut ni) = (0.0, 0usize, 0.0, 0usize);
    for (k, x, y) in img.grid().centers() {
        let near = (-1..=1).any(|a| {
            (-1..=1).any(|b| spec.contains(x + f64::from(a) * h, y + f64::from(b) * h))
        });
        let v = img.values()[k].abs();
        if near {
            band += v;
            nb += 1;
        } else if in_outer(spec, x, y) {
            inner += v;
            ni += 1;
        }
    }
    (band / nb as f64) / (inner / ni as f64)
}

fn linear_suite() -> Outcome {
    let (grid, geom) = full_setup();
    let spec = TriangleSpec::default();
    let truth = triangle_phantom(&grid, &spec).unwrap();
    let ctx = ForwardContext::gaussian(grid, geom.clone(), FWHM, OVERSAMPLING).unwrap();
    let (g, floored) = log_transform(&ctx.forward(&truth).unwrap(), DataMode::P);
    assert_eq!(floored, 0);
    let p = build_projector(&grid, &geom).unwrap();

    let lw_opts = LandweberOptions::new(StoppingRule::fixed(2000).unwrap());
    let (lw, _) = landweber(&p, &grid, &g, &lw_opts).unwrap();
    let (tk, _) = tikhonov(&p, &grid, &g, 500.0, &TikhonovOptions::default()).unwrap();
    let fb = fbp(&g, &grid, &FbpOptions::default()).unwrap();
    let ct = contour(&p, &grid, &g).unwrap();

    let errs = [
        lw.relative_error(&truth),
        tk.relative_error(&truth),
        fb.relative_error(&truth),
    ];
    let ratio = wall_band_ratio(&ct, &spec);
    verdict(
        errs.iter().all(|&e| e <= 0.4) && ratio >= 3.0,
        format!(
            "errors landweber {:.3}, tikhonov {:.3}, fbp {:.3} (≤ 0.4); contour band ratio {ratio:.2} (≥ 3)",
            errs[0], errs[1], errs[2]
        ),
    )
}

fn run_pipeline(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let bin = env!("CARGO_BIN_EXE_thz-tomo");
    let steps: [&[&str]; 5] = [
        &["phantom", "--shape", "triangle", "--n", "41", "--out", "tri.json", "--pgm", "tri.pgm"],
        &[
            "simulate", "--phantom", "tri.json", "--angles", "90", "--offsets", "35", "--noise",
            "0.05", "--seed", "7", "--out", "ratio.json",
        ],
        &["preprocess", "--input", "ratio.json", "--defaults", "--log", "--out", "lin.json", "--format", "csv"],
        &[
            "reconstruct", "--input", "lin.json", "--method", "landweber", "--n", "41", "--iters",
            "200", "--out", "rec.json", "--log-csv", "rec_log.csv",
        ],
        &[
            "reconstruct", "--input", "ratio.json", "--method", "nonlinear-landweber", "--n", "41",
            "--iters", "20", "--out", "nl.json",
        ],
    ];
    for args in steps {
        let status = Command::new(bin)
            .args(args)
            .current_dir(dir)
            .env("THZ_TOMO_THREADS", "1")
            .status()
            .expect("binary runs");
        assert!(status.success(), "{args:?} failed with {status}");
    }
    let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (
                e.file_name().to_string_lossy().into_owned(),
                std::fs::read(e.path()).unwrap(),
            )
        })
        .collect();
    files.sort();
    files
}

fn determinism() -> Outcome {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let fa = run_pipeline(a.path());
    let fb = run_pipeline(b.path());
    let differing: Vec<&str> = fa
        .iter()
        .zip(&fb)
        .filter(|(x, y)| x != y)
        .map(|(x, _)| x.0.as_str())
        .collect();
    verdict(
        fa.len() == fb.len() && differing.is_empty(),
        format!("{} files compared, differing: {differing:?}", fa.len()),
    )
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("adjoint exactness", adjoint_exactness),
        ("disk oracle", disk_oracle),
        ("smoothed exponential contract", smoothed_exp_contract),
        ("Fréchet derivative", frechet_derivative),
        ("model consistency", model_consistency),
        ("single-ray collapse", single_ray_collapse),
        ("nonlinear Landweber", nonlinear_landweber_run),
        ("discrepancy principle", discrepancy_principle),
        ("linear method suite", linear_suite),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let outcome = std::panic::catch_unwind(check)
            .unwrap_or_else(|_| Err("panicked".to_string()));
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {detail}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
