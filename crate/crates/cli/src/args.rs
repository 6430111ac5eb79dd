use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "thz-tomo", version, about = "Full-beam terahertz tomography toolkit")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Rasterize a synthetic density image.
    Phantom(PhantomArgs),
    /// Simulate measurement data from a density image.
    Simulate(SimulateArgs),
    /// Turn traces or ratio data into conditioned sinograms.
    Preprocess(PreprocessArgs),
    /// Reconstruct a density image from a sinogram.
    Reconstruct(ReconstructArgs),
    /// Run the built-in verification checks.
    Verify(VerifyArgs),
    /// Print a dataset header summary.
    Info(InfoArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Bin,
    Csv,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Header file to write; the payload goes next to it.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Bin)]
    pub format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Shape {
    Triangle,
    Disk,
}

#[derive(Debug, Args)]
pub struct PhantomArgs {
    #[arg(long, value_enum)]
    pub shape: Shape,
    /// Pixels per side.
    #[arg(long, default_value_t = 81)]
    pub n: usize,
    /// Half side length of the square image domain.
    #[arg(long, default_value_t = 1.0)]
    pub extent: f64,
    /// Density value inside the object.
    #[arg(long, default_value_t = 1.0)]
    pub value: f64,
    #[arg(long, default_value_t = 0.7)]
    pub circumradius: f64,
    #[arg(long, default_value_t = 0.08)]
    pub side_wall: f64,
    #[arg(long, default_value_t = 0.16)]
    pub top_wall: f64,
    /// Rotation in radians; 0 puts the apex at the bottom.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub rotation: f64,
    #[arg(long, default_value_t = 0.5)]
    pub radius: f64,
    /// Disk center or triangle centroid, x coordinate.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub cx: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub cy: f64,
    /// Optional 8-bit PGM preview.
    #[arg(long)]
    pub pgm: Option<PathBuf>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Model {
    FullBeam,
    SingleRay,
    TimeDomain,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    P,
    I,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum NoiseArg {
    Gaussian,
    Uniform,
}

#[derive(Debug, Args)]
pub struct BeamArgs {
    /// Gaussian beam full width at half maximum in image length units
    /// [default: from the input header, else 0.03].
    #[arg(long)]
    pub fwhm: Option<f64>,
    /// Refined offsets per detector spacing [default: from the input header, else 4].
    #[arg(long)]
    pub oversampling: Option<usize>,
}

#[derive(Debug, Args)]
pub struct MaterialArgs {
    /// Refractive index of the material.
    #[arg(long, default_value_t = 1.5)]
    pub n_material: f64,
    #[arg(long, default_value_t = 1.0)]
    pub n_air: f64,
    #[arg(long, default_value_t = 1.0)]
    pub alpha_m: f64,
    #[arg(long, default_value_t = 1.0)]
    pub c0: f64,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Density image dataset.
    #[arg(long)]
    pub phantom: PathBuf,
    #[arg(long, value_enum, default_value_t = Model::FullBeam)]
    pub model: Model,
    #[arg(long, value_enum, default_value_t = ModeArg::P)]
    pub mode: ModeArg,
    #[arg(long, default_value_t = 360)]
    pub angles: usize,
    #[arg(long, default_value_t = 71)]
    pub offsets: usize,
    /// Largest detector offset; defaults to the image extent.
    #[arg(long)]
    pub half_width: Option<f64>,
    #[command(flatten)]
    pub beam: BeamArgs,
    #[command(flatten)]
    pub material: MaterialArgs,
    /// Samples of the synthetic reference pulse.
    #[arg(long, default_value_t = 2000)]
    pub t_samples: usize,
    /// End of the time window starting at 0.
    #[arg(long, default_value_t = 4.0)]
    pub t_max: f64,
    #[arg(long, default_value_t = 1.0)]
    pub pulse_center: f64,
    #[arg(long, default_value_t = 0.05)]
    pub pulse_width: f64,
    /// Relative noise level added to the sinogram.
    #[arg(long)]
    pub noise: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = NoiseArg::Gaussian)]
    pub noise_kind: NoiseArg,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct PreprocessArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Pulse functional for trace input.
    #[arg(long, value_enum)]
    pub mode: Option<ModeArg>,
    /// Keep only `[t_peak − w, t_peak + w]` of every trace.
    #[arg(long)]
    pub peak_window: Option<f64>,
    /// Upper threshold; values are also clipped at 0.
    #[arg(long)]
    pub clip: Option<f64>,
    /// Multiplier applied after clipping [default: 1].
    #[arg(long)]
    pub scale: Option<f64>,
    /// Gaussian filter width along offsets, in samples [default: 0].
    #[arg(long)]
    pub sigma_s: Option<f64>,
    /// Gaussian filter width along angles, in samples [default: 0].
    #[arg(long)]
    pub sigma_theta: Option<f64>,
    /// Apply clip 1.5, scale 1 and unit filter widths unless overridden.
    #[arg(long)]
    pub defaults: bool,
    /// Convert ratios to line integrals.
    #[arg(long)]
    pub log: bool,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Fbp,
    Tikhonov,
    Landweber,
    Ista,
    Fista,
    Contour,
    NonlinearLandweber,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FilterArg {
    RamLak,
    Hann,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StepArg {
    Steepest,
    Constant,
}

#[derive(Debug, Args)]
pub struct ReconstructArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_enum)]
    pub method: Method,
    /// Pixels per side of the reconstruction grid.
    #[arg(long, default_value_t = 81)]
    pub n: usize,
    #[arg(long, default_value_t = 1.0)]
    pub extent: f64,
    #[arg(long, value_enum, default_value_t = FilterArg::RamLak)]
    pub filter: FilterArg,
    #[arg(long, default_value_t = 1.0)]
    pub cutoff: f64,
    #[arg(long, default_value_t = 500.0)]
    pub beta: f64,
    #[arg(long, default_value_t = 1e-8)]
    pub cg_tol: f64,
    #[arg(long, default_value_t = 500)]
    pub cg_max: usize,
    /// Iteration cap `k_max`.
    #[arg(long, default_value_t = 2000)]
    pub iters: usize,
    /// Step size; linear methods default to `1/‖R‖²`.
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long, default_value_t = 1.5)]
    pub tau: f64,
    /// Noise level for the discrepancy principle; defaults to the header value or 0.
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long, default_value_t = 0.0)]
    pub sparsity: f64,
    /// Clamp iterates to nonnegative values.
    #[arg(long)]
    pub nonneg: bool,
    #[arg(long, value_enum, default_value_t = StepArg::Steepest)]
    pub step: StepArg,
    #[command(flatten)]
    pub beam: BeamArgs,
    #[arg(long)]
    pub pgm: Option<PathBuf>,
    /// Iteration log as CSV (k, residual, stepsize).
    #[arg(long)]
    pub log_csv: Option<PathBuf>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Run only the named check (repeatable).
    #[arg(long)]
    pub only: Vec<String>,
}

#[derive(Debug, Args)]
pub struct InfoArgs {
    pub input: PathBuf,
}
