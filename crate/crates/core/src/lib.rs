//! Spectral fields on periodic domains and a three-tier solver stack for
//! barotropic fluids carrying a high-frequency acoustic wave train:
//!
//! * [`lbep`] — the base momentum-form fluid equations with passive labels
//!   and Lagrange multiplier;
//! * [`extension`] — the extended (x, θ) system with a phase closure;
//! * [`wave_mean_flow`] — the reduced mean-flow/wave-action system;
//!
//! plus the fast–slow analysis tools in [`slow_manifold`].

pub mod error;
pub mod extension;
pub mod hamiltonian;
pub mod lbep;
pub mod rk4;
pub mod slow_manifold;
pub mod snapshot;
pub mod torus_field;
pub mod wave_mean_flow;

pub use error::{Error, Result};
