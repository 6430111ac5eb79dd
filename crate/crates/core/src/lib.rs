//! Full-beam terahertz tomography: discrete Radon transform, the nonlinear
//! beam model, pulse processing, and linear and nonlinear reconstruction.
//!
//! Every numeric type is generic over [`Real`] (`f32` or `f64`); the
//! aliases below fix the double-precision variants used by the CLI.

// `!(x > 0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod beam;
pub mod error;
pub mod phantom;
pub mod radon;
pub mod recon;
pub mod scalar;
pub mod signal;

pub use error::{Result, TomoError};
pub use scalar::Real;

pub type ImageGridF64 = radon::ImageGrid<f64>;
pub type DensityImageF64 = radon::DensityImage<f64>;
pub type ScanGeometryF64 = radon::ScanGeometry<f64>;
pub type SinogramF64 = radon::Sinogram<f64>;
pub type ProjectionMatrixF64 = radon::ProjectionMatrix<f64>;
pub type ForwardContextF64 = beam::ForwardContext<f64>;
pub type BeamProfileF64 = beam::BeamProfile<f64>;
pub type MaterialParamsF64 = beam::MaterialParams<f64>;
pub type PulseTraceF64 = signal::PulseTrace<f64>;
pub type TriangleSpecF64 = phantom::TriangleSpec<f64>;

pub type ImageGridF32 = radon::ImageGrid<f32>;
pub type DensityImageF32 = radon::DensityImage<f32>;
pub type ScanGeometryF32 = radon::ScanGeometry<f32>;
pub type SinogramF32 = radon::Sinogram<f32>;
