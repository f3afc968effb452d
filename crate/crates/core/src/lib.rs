//! Desk-scale laboratory for a rigid solid moving inside an incompressible
//! viscous flow with Navier slip conditions at both the solid interface and
//! the cavity wall.
//!
//! The crate is organized around the building blocks of a penalized,
//! divergence-free Galerkin scheme:
//!
//! - [`geometry`]: cavity/solid geometry, tubular coordinates near the solid
//!   boundary, and the quadrature rules every integral in the crate uses.
//! - [`rigid`]: rigid velocity fields, inertia, the rigid `L²` projection,
//!   the isometric propagator and indicator transport (plus 3D counterparts
//!   in [`rigid3`]).
//! - [`connect`]: boundary-layer constructions that join a fluid field to a
//!   rigid field across a band around the solid: tangential blending,
//!   divergence correction, normal-flux correctors, rigidified
//!   approximations, harmonic Neumann correctors and test-function
//!   approximation.
//! - [`galerkin`]: the penalized Galerkin scheme itself (basis, assembly,
//!   damped Picard time stepping, existence-horizon guard).
//! - [`diagnostics`]: weak-form residuals, the energy ledger and decay-rate
//!   measurements on simulator output.
//! - [`collision`]: the reduced gap ODE contrasting slip (logarithmic drag)
//!   with no-slip (inverse drag) near-contact behavior.
//! - [`rates`]: the log-log rate-study harness used by the CLI.

pub mod collision;
pub mod connect;
pub mod diagnostics;
pub mod galerkin;
pub mod geometry;
pub mod rates;
pub mod rigid;
pub mod rigid3;

pub use geometry::{Cavity, Placement, SolidShape, TubularCoord};
pub use rigid::{InertialData, Propagator, RigidField};

/// Workspace-wide tolerance for "exact" float identities (isometry defects,
/// quadrature of closed forms).
pub const EXACT_TOL: f64 = 1e-12;

/// Tolerance for residuals of discrete solves (divergence corrections,
/// harmonic correctors).
pub const SOLVE_TOL: f64 = 1e-8;
