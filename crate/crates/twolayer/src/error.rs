//! Error types surfaced by the solver.

use crate::state::CellState;
use thiserror::Error;

/// Parameter and configuration validation failures.
#[derive(Debug, Error)]
pub enum ParamError {
    #[error("gravity must be positive, got {0}")]
    NonPositiveGravity(f64),
    #[error("densities must be positive")]
    NonPositiveDensity,
    #[error("top layer denser than bottom layer (rho1 = {rho1}, rho2 = {rho2})")]
    UnstableStratification { rho1: f64, rho2: f64 },
    #[error("unknown eigensolver '{0}'")]
    UnknownEigenMethod(String),
    #[error("unknown inundation method '{0}'")]
    UnknownInundationMethod(String),
    #[error("unknown limiter '{0}'")]
    UnknownLimiter(String),
    #[error("negative depth in layer {layer}: {depth}")]
    NegativeDepth { layer: u8, depth: f64 },
    #[error("grid needs at least 4 cells, got {n_cells}")]
    GridTooSmall { n_cells: usize },
    #[error("domain is empty or reversed: [{x_lo}, {x_hi}]")]
    EmptyDomain { x_lo: f64, x_hi: f64 },
    #[error("unknown scenario '{0}'")]
    UnknownScenario(String),
    #[error("config key '{key}': {reason}")]
    Config { key: String, reason: String },
}

/// Failures of a single interface solve.
#[derive(Debug, Error)]
pub enum SolverError {
    /// The interface state has left the hyperbolic regime: the
    /// characteristic roots are complex (or the internal-speed radicand is
    /// negative for the closed-form method).
    #[error("hyperbolicity loss ({method}): {detail} = {value:.6e}")]
    HyperbolicityLoss {
        method: &'static str,
        /// Which diagnostic went bad ("max imaginary part", "radicand").
        detail: &'static str,
        value: f64,
    },
    /// The eigenbasis is too ill-conditioned to project onto.
    #[error("near-singular eigenbasis (condition estimate {cond:.3e})")]
    NearSingularBasis { cond: f64 },
    /// The top layer is thinner than the dry tolerance; the two-layer
    /// eigenstructure is not defined there.
    #[error("top layer degenerate (h1 = {h1:.3e})")]
    DegenerateTopLayer { h1: f64 },
    /// A cell left the positivity guard's recoverable range.
    #[error("negative depth beyond dry tolerance in layer {layer}: {depth:.6e}")]
    NegativeDepth { layer: u8, depth: f64 },
}

/// A solver error tagged with where in the grid it happened.
#[derive(Debug, Error)]
#[error("step failed at interface {interface} (x = {x:.6}): {source}")]
pub struct StepError {
    /// Index of the offending interface (0 = left domain boundary) or cell.
    pub interface: usize,
    /// Interface position (m).
    pub x: f64,
    pub left: CellState,
    pub right: CellState,
    #[source]
    pub source: SolverError,
}
