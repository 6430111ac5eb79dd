//! Full-beam forward model, its derivative, and pulse simulation.

mod delay;
mod forward;
mod profile;
mod smoothed_exp;

pub use delay::{compute_delay, simulate_pulse_ensemble, uniform_sample_violations, MaterialParams};
pub use forward::{
    forward_full_beam, jacobian_adjoint, jacobian_apply, ForwardContext, Linearization,
    DEFAULT_OVERSAMPLING,
};
pub use profile::{sample_gaussian_profile, BeamProfile};
pub use smoothed_exp::{smoothed_exp, smoothed_exp_bounds, smoothed_exp_d1, smoothed_exp_d2};
