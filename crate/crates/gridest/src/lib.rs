//! Online identification of AC power-network admittance matrices.
//!
//! The crate estimates the complex nodal admittance matrix `Y` of a power
//! network from phasor measurements of bus voltages and current injections.
//! Estimation runs online via complex-valued recursive least squares with a
//! forgetting factor, optionally steering generator voltage set-points with a
//! D-optimal design-of-experiment step that maximizes the determinant of the
//! information matrix at each iteration.
//!
//! Modules:
//! - [`structvec`]: vectorization operators (`vec`, `vech`, `ve`) and the
//!   duplication/transformation matrices that remove redundant parameters of
//!   symmetric and Laplacian admittance matrices.
//! - [`netmodel`]: grid description, admittance assembly, line-trip events,
//!   JSON grid files and a MATPOWER-style case importer.
//! - [`powerflow`]: Newton-Raphson AC power flow in polar coordinates and
//!   Gaussian measurement-noise injection.
//! - [`estimator`]: recursive least squares with forgetting, batch ordinary
//!   least squares, and estimation error metrics.
//! - [`doe`]: the constrained D-optimal voltage design problem and the
//!   design/measure/update loop.
//! - [`harness`]: scenario orchestration, load synthesis, and CSV output.

pub mod doe;
pub mod estimator;
pub mod harness;
pub mod netmodel;
pub mod powerflow;
pub mod structvec;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use thiserror::Error;

/// Dense complex matrix used throughout the crate.
pub type CMatrix = DMatrix<Complex64>;
/// Dense complex vector used throughout the crate.
pub type CVector = DVector<Complex64>;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got} ({context})")]
    DimensionMismatch {
        expected: usize,
        got: usize,
        context: &'static str,
    },
    #[error("matrix must be square, got {rows}x{cols}")]
    NonSquare { rows: usize, cols: usize },
    #[error("bus count must be at least {min}, got {got}")]
    TooFewBuses { min: usize, got: usize },
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("grid graph is disconnected (unreachable buses: {0:?})")]
    Disconnected(Vec<usize>),
    #[error("duplicate line between buses {0} and {1}")]
    DuplicateEdge(usize, usize),
    #[error("no line between buses {0} and {1}")]
    UnknownEdge(usize, usize),
    #[error("removing line ({0},{1}) would disconnect the grid")]
    WouldDisconnect(usize, usize),
    #[error("power flow diverged after {iterations} iterations (residual {residual:.3e})")]
    PowerFlowDiverged { iterations: usize, residual: f64 },
    #[error("stacked regressor is rank deficient: rank {rank} < {expected} parameters (gap {gap})")]
    RankDeficient {
        rank: usize,
        expected: usize,
        gap: usize,
    },
    #[error("matrix is not positive definite ({0})")]
    NotPositiveDefinite(&'static str),
    #[error("design of experiment found no feasible point from any start")]
    DoeInfeasible,
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("reference Y has zero Frobenius norm")]
    ZeroNorm,
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("toml: {0}")]
    Toml(#[from] toml::de::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
