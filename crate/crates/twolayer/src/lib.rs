//! Finite volume solver for the one-dimensional two-layer shallow water
//! equations over variable bathymetry.
//!
//! The scheme is a wave propagation method built on f-waves: at every cell
//! interface the jump in flux (with bathymetry and interlayer coupling terms
//! folded in) is decomposed onto an approximate eigenbasis of the quasilinear
//! system, and the resulting waves are propagated at the basis speeds. Four
//! interchangeable strategies for building that eigenbasis are provided, from
//! a cheap closed-form expansion to a direct quartic root solve.
//!
//! Layer 1 is the top (lighter) layer, layer 2 the bottom (denser) layer.
//! The conserved state is density weighted: `[r1*h1, r1*h1*u1, r2*h2,
//! r2*h2*u2]`. The bottom layer may run dry; interfaces between wet and dry
//! bottom cells are treated either as walls or as inundation fronts.
//!
//! Module layout:
//! - [`params`], [`state`]: physical constants, conserved/primitive states
//! - [`eigen`]: the four eigensolver strategies
//! - [`riemann`]: two-layer interface solver (dry-state classification,
//!   flux jumps, projection, fluctuations)
//! - [`swe1l`]: single-layer fallback solver
//! - [`driver`]: time stepping, limiters, friction, positivity
//! - [`scenarios`]: canned experiment setups, error norms, convergence rates
//! - [`frame`]: solution snapshots and CSV output

pub mod driver;
pub mod eigen;
pub mod error;
pub mod frame;
pub mod params;
pub mod riemann;
pub mod scenarios;
pub mod state;
pub mod swe1l;

pub use error::SolverError;
pub use params::{EigenMethod, InundationMethod, Parameters};
pub use state::{CellState, PrimitiveState};
