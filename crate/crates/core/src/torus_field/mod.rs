//! Periodic-domain field algebra: spectral derivatives on the spatial torus,
//! θ-harmonic loop fields, phase functions with integer winding, and the
//! shifted gradient ∇^{S/ε}.

mod fft;
mod grid;
mod loops;
mod phase;
mod scalar;

pub use grid::TorusGrid;
pub use loops::{
    grad_s, phase_shift, theta_antiderivative, theta_average, LoopField, VectorLoopField, TOL_MEAN,
};
pub use phase::PhaseField;
pub use scalar::{spectral_deriv, ScalarField, SpectralInterpolant, VectorField};

