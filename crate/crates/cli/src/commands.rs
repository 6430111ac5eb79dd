use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use log::{info, warn};

use crate::args::{
    BeamArgs, FilterArg, Format, InfoArgs, Method, ModeArg, Model, NoiseArg, PhantomArgs,
    PreprocessArgs, ReconstructArgs, Shape, SimulateArgs, StepArg, VerifyArgs,
};
use crate::dataset::{
    digest_dataset, BeamSpec, Dataset, Kind, Mode, PayloadFormat, Provenance, Quantity,
};
use crate::error::CliError;
use crate::pgm::write_pgm;
use crate::verify::run_checks;
use thztomo::beam::{simulate_pulse_ensemble, ForwardContext, MaterialParams};
use thztomo::phantom::{add_noise, disk_phantom, triangle_phantom, NoiseKind, TriangleSpec};
use thztomo::radon::{build_projector, DensityImage, ImageGrid, ScanGeometry, Sinogram};
use thztomo::recon::{
    contour, fbp, landweber, nonlinear_landweber, tikhonov, FbpFilter, FbpOptions, IterationLog,
    LandweberOptions, LandweberVariant, NonlinearSolveConfig, StepSize, StoppingRule,
    TikhonovOptions,
};
use thztomo::signal::{
    build_ratio_sinogram, extract_main_peak, log_transform, model_reference_pulse, preprocess,
    DataMode, PreprocessConfig, RawDataSet,
};

const DEFAULT_FWHM: f64 = 0.03;
const DEFAULT_OVERSAMPLING: usize = 4;

fn payload_format(f: Format) -> PayloadFormat {
    match f {
        Format::Bin => PayloadFormat::F64Le,
        Format::Csv => PayloadFormat::Csv,
    }
}

fn data_mode(m: ModeArg) -> DataMode {
    match m {
        ModeArg::P => DataMode::P,
        ModeArg::I => DataMode::I,
    }
}

fn provenance(command: &str, args: &[String]) -> Provenance {
    Provenance {
        command: command.into(),
        args: args.to_vec(),
        ..Provenance::default()
    }
}

/// Reads a dataset and records its digest as an input.
fn read_input(path: &Path, prov: &mut Provenance) -> Result<Dataset, CliError> {
    let ds = Dataset::read(path)?;
    prov.inputs.push(digest_dataset(path, &ds)?);
    Ok(ds)
}

fn param(prov: &mut Provenance, key: &str, value: impl ToString) {
    prov.parameters.insert(key.into(), value.to_string());
}

pub fn phantom(a: &PhantomArgs, argv: &[String]) -> Result<(), CliError> {
    let grid = ImageGrid::new(a.n, a.extent)?;
    let mut prov = provenance("phantom", argv);
    let image = match a.shape {
        Shape::Triangle => {
            let spec = TriangleSpec {
                circumradius: a.circumradius,
                centroid: [a.cx, a.cy],
                rotation: a.rotation,
                side_wall_thickness: a.side_wall,
                top_wall_thickness: a.top_wall,
                value: a.value,
            };
            param(&mut prov, "shape", "triangle");
            triangle_phantom(&grid, &spec)?
        }
        Shape::Disk => {
            param(&mut prov, "shape", "disk");
            disk_phantom(&grid, [a.cx, a.cy], a.radius, a.value)?
        }
    };
    Dataset::image(&image, prov).write(&a.output.out, payload_format(a.output.format))?;
    if let Some(p) = &a.pgm {
        write_pgm(p, grid.n_pixels(), image.values())?;
    }
    Ok(())
}

fn beam_settings(beam: &BeamArgs, header: Option<&BeamSpec>) -> (f64, usize) {
    let fwhm = beam
        .fwhm
        .or_else(|| header.and_then(|b| b.fwhm))
        .unwrap_or(DEFAULT_FWHM);
    let os = beam
        .oversampling
        .or_else(|| header.filter(|b| b.model != "single-ray").map(|b| b.oversampling))
        .unwrap_or(DEFAULT_OVERSAMPLING);
    (fwhm, os)
}

pub fn simulate(a: &SimulateArgs, argv: &[String]) -> Result<(), CliError> {
    let mut prov = provenance("simulate", argv);
    let f = read_input(&a.phantom, &mut prov)?.to_image()?;
    let grid = *f.grid();
    let geom = ScanGeometry::uniform(a.angles, a.offsets, a.half_width.unwrap_or(grid.extent()))?;
    let material = MaterialParams::new(
        a.material.n_material,
        a.material.n_air,
        a.material.alpha_m,
        a.material.c0,
    )?;
    let (fwhm, os) = beam_settings(&a.beam, None);
    let format = payload_format(a.output.format);

    if a.model == Model::TimeDomain {
        if a.noise.is_some() {
            return Err(CliError::Usage(
                "--noise applies to sinogram models, not time-domain traces".into(),
            ));
        }
        if a.t_samples < 2 || a.t_max <= 0.0 || a.t_max.is_nan() {
            return Err(CliError::Usage("time window needs t-max > 0 and ≥ 2 samples".into()));
        }
        let dt = a.t_max / (a.t_samples - 1) as f64;
        let reference =
            model_reference_pulse(0.0, dt, a.t_samples, a.pulse_center, a.pulse_width)?;
        let ctx = ForwardContext::gaussian(grid, geom, fwhm, os)?;
        let data = simulate_pulse_ensemble(&ctx, &f, &reference, &material)?;
        prov.steps.push("simulate time-domain".into());
        let mut ds = Dataset::traces(&data, prov);
        ds.header.material = Some(material);
        ds.header.beam = Some(BeamSpec {
            model: "time-domain".into(),
            fwhm: Some(fwhm),
            oversampling: os,
        });
        return ds.write(&a.output.out, format);
    }

    let (ratio, beam) = match (a.model, a.mode) {
        (Model::FullBeam, ModeArg::I) => {
            return Err(CliError::Mismatch(
                "the full-beam model describes P-mode data only".into(),
            ))
        }
        (Model::FullBeam, ModeArg::P) => {
            let ctx = ForwardContext::gaussian(grid, geom, fwhm, os)?;
            let beam = BeamSpec {
                model: "full-beam".into(),
                fwhm: Some(fwhm),
                oversampling: os,
            };
            (ctx.forward(&f)?, beam)
        }
        (Model::SingleRay, mode) => {
            let ctx = ForwardContext::single_ray(grid, geom)?;
            let p = ctx.forward(&f)?;
            let beam = BeamSpec {
                model: "single-ray".into(),
                fwhm: None,
                oversampling: 1,
            };
            // P = exp(−Rf/2), I = P² = exp(−Rf)
            let ratio = if mode == ModeArg::I { p.map(|v| v * v) } else { p };
            (ratio, beam)
        }
        (Model::TimeDomain, _) => unreachable!("handled above"),
    };
    prov.steps.push(format!("simulate {}", beam.model));
    let (ratio, delta) = match a.noise {
        Some(level) => {
            let kind = match a.noise_kind {
                NoiseArg::Gaussian => NoiseKind::Gaussian,
                NoiseArg::Uniform => NoiseKind::Uniform,
            };
            let (noisy, delta) = add_noise(&ratio, level, a.seed, kind)?;
            prov.steps.push(format!("noise {level} seed {}", a.seed));
            (noisy, Some(delta))
        }
        None => (ratio, None),
    };
    let mut ds = Dataset::sinogram(&ratio, Quantity::Ratio, prov);
    ds.header.mode = Some(Mode::from(data_mode(a.mode)));
    ds.header.material = Some(material);
    ds.header.beam = Some(beam);
    ds.header.delta = delta;
    ds.write(&a.output.out, format)
}

fn mode_of(header_mode: Option<Mode>, flag: Option<ModeArg>) -> Result<DataMode, CliError> {
    match (flag, header_mode) {
        (Some(m), _) => Ok(data_mode(m)),
        (None, Some(Mode::P)) => Ok(DataMode::P),
        (None, Some(Mode::I)) => Ok(DataMode::I),
        _ => Err(CliError::Usage("pass --mode p or --mode i".into())),
    }
}

pub fn preprocess_cmd(a: &PreprocessArgs, argv: &[String]) -> Result<(), CliError> {
    let mut prov = provenance("preprocess", argv);
    let ds = read_input(&a.input, &mut prov)?;
    let header = ds.header.clone();
    prov.steps = header.provenance.steps.clone();
    let mode = mode_of(header.mode, a.mode)?;
    let mut carried_delta = header.delta;

    let ratio = match header.kind {
        Kind::Traces => {
            let data = ds.to_traces()?;
            let data = match a.peak_window {
                Some(w) => {
                    let traces = data
                        .traces()
                        .iter()
                        .map(|t| extract_main_peak(t, w))
                        .collect::<Result<Vec<_>, _>>()?;
                    let reference = extract_main_peak(data.reference(), w)?;
                    prov.steps.push(format!("peak-window {w}"));
                    RawDataSet::new(data.geometry().clone(), traces, reference)?
                }
                None => data,
            };
            prov.steps.push(format!("ratio {}", mode_name(mode)));
            build_ratio_sinogram(&data, mode)?
        }
        Kind::Sinogram if header.quantity == Quantity::Ratio => {
            if a.peak_window.is_some() {
                return Err(CliError::Usage("--peak-window needs trace input".into()));
            }
            if let (Some(m), Some(h)) = (a.mode, header.mode) {
                if Mode::from(data_mode(m)) != h {
                    return Err(CliError::Mismatch(format!(
                        "--mode {:?} contradicts the {h:?} header",
                        m
                    )));
                }
            }
            ds.to_sinogram()?
        }
        _ => {
            return Err(CliError::Mismatch(format!(
                "preprocess expects traces or ratio data, found {:?} {:?}",
                header.kind, header.quantity
            )))
        }
    };

    let base = if a.defaults {
        PreprocessConfig::default()
    } else {
        PreprocessConfig::identity()
    };
    let explicit = a.clip.is_some() || a.scale.is_some() || a.sigma_s.is_some() || a.sigma_theta.is_some();
    let cfg = PreprocessConfig {
        clip_max: a.clip.unwrap_or(base.clip_max),
        scale: a.scale.unwrap_or(base.scale),
        sigma_s: a.sigma_s.unwrap_or(base.sigma_s),
        sigma_theta: a.sigma_theta.unwrap_or(base.sigma_theta),
    };
    let mut out = ratio;
    if a.defaults || explicit {
        out = preprocess(&out, &cfg)?;
        prov.steps.push(format!(
            "preprocess clip {} scale {} sigma_s {} sigma_theta {}",
            cfg.clip_max, cfg.scale, cfg.sigma_s, cfg.sigma_theta
        ));
        carried_delta = None;
    }
    let quantity = if a.log {
        let (lin, floored) = log_transform(&out, mode);
        if floored > 0 {
            warn!("{floored} non-positive ratio samples floored before the logarithm");
        }
        prov.steps.push(format!("log {}", mode_name(mode)));
        out = lin;
        carried_delta = None;
        Quantity::LineIntegral
    } else {
        Quantity::Ratio
    };
    let mut result = Dataset::sinogram(&out, quantity, prov);
    result.header.mode = Some(Mode::from(mode));
    result.header.material = header.material;
    result.header.beam = header.beam;
    result.header.delta = carried_delta;
    result.write(&a.output.out, payload_format(a.output.format))
}

fn method_name(m: Method) -> String {
    use clap::ValueEnum;
    m.to_possible_value()
        .map(|v| v.get_name().to_owned())
        .unwrap_or_default()
}

fn mode_name(m: DataMode) -> &'static str {
    match m {
        DataMode::P => "P",
        DataMode::I => "I",
    }
}

fn write_log_csv(path: &Path, log: &IterationLog<f64>) -> Result<(), CliError> {
    let mut text = String::from("k,residual,stepsize\n");
    for (k, r) in log.residuals.iter().enumerate() {
        match log.step_sizes.get(k) {
            Some(s) => writeln!(text, "{k},{r},{s}"),
            None => writeln!(text, "{k},{r},"),
        }
        .expect("writing to a String");
    }
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

pub fn reconstruct(a: &ReconstructArgs, argv: &[String]) -> Result<(), CliError> {
    let mut prov = provenance("reconstruct", argv);
    let ds = read_input(&a.input, &mut prov)?;
    let header = ds.header.clone();
    if header.kind != Kind::Sinogram {
        return Err(CliError::Mismatch(format!(
            "reconstruct expects a sinogram, found {:?}",
            header.kind
        )));
    }
    let g: Sinogram<f64> = ds.to_sinogram()?;
    let grid = ImageGrid::new(a.n, a.extent)?;
    let nonlinear = a.method == Method::NonlinearLandweber;
    if nonlinear {
        if header.quantity != Quantity::Ratio || header.mode != Some(Mode::P) {
            return Err(CliError::Mismatch(
                "nonlinear-landweber needs P-mode ratio data".into(),
            ));
        }
    } else if header.quantity != Quantity::LineIntegral {
        return Err(CliError::Mismatch(format!(
            "{} needs line-integral data; run preprocess --log first",
            method_name(a.method)
        )));
    }
    let delta = a.delta.or(header.delta).unwrap_or(0.0);
    let stop = StoppingRule::new(a.tau, delta, a.iters)?;
    param(&mut prov, "method", method_name(a.method));

    let (image, log): (DensityImage<f64>, Option<IterationLog<f64>>) = match a.method {
        Method::Fbp => {
            let opts = FbpOptions {
                filter: match a.filter {
                    FilterArg::RamLak => FbpFilter::RamLak,
                    FilterArg::Hann => FbpFilter::Hann,
                },
                cutoff: a.cutoff,
            };
            (fbp(&g, &grid, &opts)?, None)
        }
        Method::Contour => {
            let p = build_projector(&grid, g.geometry())?;
            (contour(&p, &grid, &g)?, None)
        }
        Method::Tikhonov => {
            let p = build_projector(&grid, g.geometry())?;
            let opts = TikhonovOptions {
                cg_tol: a.cg_tol,
                cg_max: a.cg_max,
            };
            param(&mut prov, "beta", a.beta);
            let (img, log) = tikhonov(&p, &grid, &g, a.beta, &opts)?;
            (img, Some(log))
        }
        Method::Landweber | Method::Ista | Method::Fista => {
            let p = build_projector(&grid, g.geometry())?;
            let mut opts = LandweberOptions::new(stop);
            opts.gamma = a.gamma;
            opts.sparsity_weight = a.sparsity;
            opts.nonnegative = a.nonneg;
            opts.variant = match a.method {
                Method::Ista => LandweberVariant::Ista,
                Method::Fista => LandweberVariant::Fista,
                _ => LandweberVariant::Plain,
            };
            let (img, log) = landweber(&p, &grid, &g, &opts)?;
            (img, Some(log))
        }
        Method::NonlinearLandweber => {
            let geom = g.geometry().clone();
            let ctx = match header.beam.as_ref().map(|b| b.model.as_str()) {
                Some("single-ray") if a.beam.fwhm.is_none() => {
                    param(&mut prov, "beam", "single-ray");
                    ForwardContext::single_ray(grid, geom)?
                }
                _ => {
                    let (fwhm, os) = beam_settings(&a.beam, header.beam.as_ref());
                    param(&mut prov, "fwhm", fwhm);
                    param(&mut prov, "oversampling", os);
                    ForwardContext::gaussian(grid, geom, fwhm, os)?
                }
            };
            let cfg = NonlinearSolveConfig {
                step: match (a.step, a.gamma) {
                    (StepArg::Constant, Some(gamma)) => StepSize::Constant(gamma),
                    (StepArg::Constant, None) => {
                        return Err(CliError::Usage("--step constant needs --gamma".into()))
                    }
                    (StepArg::Steepest, _) => StepSize::SteepestDescent,
                },
                stop,
                nonneg_projection: a.nonneg,
            };
            let zero = DensityImage::zeros(grid);
            let (img, log) = nonlinear_landweber(&ctx, &g, &zero, &cfg)?;
            (img, Some(log))
        }
    };

    if let Some(log) = &log {
        info!(
            "{}: {} iterations, stopped by {}, final residual {:e}",
            method_name(a.method),
            log.iterations,
            log.stop_reason,
            log.final_residual().unwrap_or(f64::NAN)
        );
        param(&mut prov, "iterations", log.iterations);
        param(&mut prov, "stop_reason", log.stop_reason);
        if let Some(path) = &a.log_csv {
            write_log_csv(path, log)?;
        }
    } else if a.log_csv.is_some() {
        warn!("{} is not iterative; no iteration log written", method_name(a.method));
    }
    prov.steps = header.provenance.steps.clone();
    prov.steps.push(format!("reconstruct {}", method_name(a.method)));
    Dataset::image(&image, prov).write(&a.output.out, payload_format(a.output.format))?;
    if let Some(p) = &a.pgm {
        write_pgm(p, grid.n_pixels(), image.values())?;
    }
    Ok(())
}

pub fn verify(a: &VerifyArgs) -> Result<(), CliError> {
    if let Some(bad) = a
        .only
        .iter()
        .find(|o| !crate::verify::CHECKS.iter().any(|(n, _)| n == o))
    {
        return Err(CliError::Usage(format!("unknown check {bad:?}")));
    }
    let outcomes = run_checks(&a.only);
    let width = outcomes.iter().map(|o| o.name.len()).max().unwrap_or(0);
    let mut failed = 0;
    for o in &outcomes {
        let verdict = if o.passed { "PASS" } else { "FAIL" };
        println!("{verdict}  {:width$}  {}", o.name, o.measured);
        failed += usize::from(!o.passed);
    }
    if failed > 0 {
        Err(CliError::Verification(failed))
    } else {
        Ok(())
    }
}

pub fn info_cmd(a: &InfoArgs) -> Result<(), CliError> {
    let ds = Dataset::read(&a.input)?;
    let h = &ds.header;
    println!("kind:     {:?}", h.kind);
    println!("quantity: {:?}", h.quantity);
    if let Some(m) = h.mode {
        println!("mode:     {m:?}");
    }
    if let Some(g) = h.grid {
        println!("grid:     {0}×{0} on [-{1}, {1}]²", g.n, g.extent);
    }
    if let Some(g) = &h.geometry {
        println!("geometry: {} angles × {} offsets", g.angles.len(), g.offsets.len());
    }
    if let Some(t) = h.time_axis {
        println!("time:     {} samples, t0 {}, dt {}", t.n_samples, t.t0, t.dt);
    }
    if let Some(b) = &h.beam {
        println!("beam:     {} fwhm {:?} oversampling {}", b.model, b.fwhm, b.oversampling);
    }
    if let Some(d) = h.delta {
        println!("delta:    {d}");
    }
    let (lo, hi) = ds
        .values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    println!("values:   {} in [{lo}, {hi}]", ds.values.len());
    println!("steps:    {}", h.provenance.steps.join(" → "));
    Ok(())
}
