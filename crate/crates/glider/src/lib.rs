//! Phase-space analysis of a two-dimensional passive-descent glider model.
//!
//! The model tracks the velocity `(v_x, v_z)` of a body falling through a
//! quiescent fluid under gravity, with quasi-steady lift and drag coefficients
//! that depend only on the angle of attack. Pitch enters as a fixed (or
//! prescribed) parameter. In nondimensional form the dynamics are
//!
//! ```text
//! v̇_x = v² (C_L(γ+θ) sin γ − C_D(γ+θ) cos γ)
//! v̇_z = v² (C_L(γ+θ) cos γ + C_D(γ+θ) sin γ) − 1
//! ```
//!
//! where `v` is the speed and `γ` the glide angle measured clockwise from the
//! horizontal. Every trajectory collapses quickly onto a one-dimensional
//! attracting curve — the *terminal velocity manifold* (TVM) — and then creeps
//! along it toward an equilibrium glide.
//!
//! The crate computes the model's global structures:
//!
//! - [`profiles`]: lift/drag coefficient functions, analytic or tabulated,
//!   with symmetry-based domain extension.
//! - [`dynamics`]: equations of motion, adaptive integration with escape
//!   handling, flow maps and their gradients.
//! - [`equilibria`]: equilibrium glides via the scalar criterion
//!   `h(γ) = cot γ − (C_L/C_D)(γ+θ)`, classification through `Δ` and `τ`, and
//!   pseudo-arclength continuation over pitch.
//! - [`manifold`]: the TVM by backward-time bisection and unstable-manifold
//!   expansion, the `v_z`-nullcline, and the pitch-extended TVM surface.
//! - [`repulsion`]: backward-time trajectory-normal repulsion fields and
//!   ridge extraction.
//! - [`scenarios`]: prescribed-pitch glide and flutter simulations checked
//!   against the extended TVM.
//! - [`cli`]: the configuration and dispatch layer behind the `glider`
//!   binary; every analysis is also exposed as a subcommand that writes CSV
//!   and JSON artifacts.
//!
//! See the `examples/` directory for one runnable program per capability.

pub mod cli;
pub mod dynamics;
pub mod equilibria;
mod error;
pub mod export;
pub mod manifold;
mod ode;
pub mod profiles;
pub mod repulsion;
pub mod scenarios;

pub use error::{Error, Result};
pub use ode::OdeOptions;
