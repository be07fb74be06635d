//! Freezing-limit dynamics of Calogero–Moser–Sutherland particle systems on
//! Weyl chambers of type A, B and D.
//!
//! Three independent solution engines are provided: an exact linear flow in
//! elementary symmetric coordinates ([`symflow`]), adaptive Runge–Kutta on the
//! raw drift ([`integrator`]) and closed forms built from Hermite and Laguerre
//! zeros ([`orthopoly`]). [`sde`] simulates the finite-β diffusions that
//! freeze onto these solutions.

pub mod chamber;
pub mod error;
pub mod integrator;
pub mod orthopoly;
pub mod par;
pub mod poly;
pub mod sde;
pub mod symflow;

pub use chamber::{
    boundary_distance, drift, in_chamber, log_weight, ChamberPoint, Method, RootKind, RootSystem,
    Tolerances, Trajectory,
};
pub use error::{Error, Result};
pub use integrator::{integrate, profile_convergence, solve_hybrid, IntegratorConfig};
pub use orthopoly::{hermite_zeros, laguerre_zeros, stationary_profile, stieltjes_residual, ZeroSet};
pub use par::Execution;
pub use poly::RootMode;
pub use symflow::{
    backward_extension_time, from_symmetric, propagate, solve_trajectory, to_symmetric,
    SymmetricState, TimePolynomialSet,
};
