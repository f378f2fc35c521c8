//! Numerics for quantizing one-dimensional dissipative systems straight from
//! their equations of motion.
//!
//! The crate builds everything needed to go from a force field `q̈ = F(q, q̇, t)`
//! (no Lagrangian or Hamiltonian required) to a quantum transition amplitude,
//! for the worked case of a free particle with linear friction `q̈ = -κ q̇`:
//!
//! * [`phase`] — extended-phase-space `(q, p, t)` geometry: the canonical
//!   two-form, surface and contour integrals, discrete Stokes checks and a
//!   closedness defect that measures how far a force field is from being
//!   potential-generated.
//! * [`dynamics`] — classical trajectories: Runge-Kutta initial-value
//!   integration, shooting boundary-value solves and the exact damped
//!   trajectory.
//! * [`action`] — the dissipative classical action, by quadrature along a
//!   trajectory and in closed form, together with its quadratic-form
//!   coefficients in the endpoints.
//! * [`propagator`] — the exact damped propagator: Gaussian-phase kernel,
//!   probability-conservation prefactor, delta-limit and Chapman-Kolmogorov
//!   diagnostics.
//! * [`lattice`] — a time-sliced path-integral cross-check of the action,
//!   saddle path and prefactor.
//! * [`wavepacket`] — grid wavefunctions evolved by the kernel, with norm,
//!   spreading and composition-defect measurements.
//! * [`verify`] — the acceptance harness behind the CLI `verify` command.

pub mod action;
pub mod dynamics;
pub mod error;
pub mod grid;
pub mod lattice;
pub mod phase;
pub mod propagator;
pub mod verify;
pub mod wavepacket;

mod quad;

pub use error::{Error, Result};
pub use grid::Range1D;
