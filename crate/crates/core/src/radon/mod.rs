//! Discrete parallel-beam Radon transform.

mod grid;
mod projector;
mod sinogram;

pub use grid::{DensityImage, ImageGrid};
pub use projector::{
    apply_back_projection, apply_radon, build_projector, operator_norm_estimate, NormEstimate,
    ProjectionMatrix,
};
pub use sinogram::{linspace, ScanGeometry, Sinogram};
