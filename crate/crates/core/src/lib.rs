//! Photon-by-photon simulation of wavefunction collapse under weak
//! interferometric position measurement.
//!
//! A particle with wavefunction `psi(x)` sits in one arm of a Mach-Zehnder
//! interferometer. Each photon sent through the device is detected at one of
//! two output ports, and the detection multiplies the particle state by a
//! position-dependent measurement operator. Counting `N` photons yields the
//! experimenter's position estimate `x_est = (n_b - n_a) / (2kN)` while the
//! accumulated backaction narrows `psi` toward a Gaussian wavepacket of
//! variance `1/(4Nk^2)` centered on that same estimate.
//!
//! The crate is organized around that pipeline:
//!
//! - [`grid`] / [`wavefunction`]: a complex wavefunction discretized on a
//!   uniform 1-D grid, with quadrature-based position and momentum observables.
//! - [`interferometer`]: the per-photon measurement operators, their outcome
//!   probabilities, and stable closed forms for the N-photon aggregate product.
//! - [`trajectory`]: one complete N-photon measurement run with reproducible
//!   seeded sampling.
//! - [`ensemble`]: parallel Monte Carlo ensembles plus the analytic
//!   predictions they are tested against (outcome statistics, momentum
//!   conservation, Heisenberg saturation, de Broglie consistency).
//! - [`config`] / [`report`] / [`verify`]: CLI plumbing, deterministic file
//!   emission, and the built-in verification suite.

pub mod config;
pub mod ensemble;
pub mod grid;
pub mod interferometer;
pub mod report;
pub mod stats;
pub mod trajectory;
pub mod verify;
pub mod wavefunction;

mod deriv;

pub use config::{Psi0Family, RunMode, SimConfig};
pub use ensemble::EnsembleStats;
pub use grid::Grid;
pub use interferometer::{InterferometerParams, PhotonOutcome};
pub use trajectory::TrajectoryRecord;
pub use wavefunction::Wavefunction;

/// Norm-squared floor below which a state (or an outcome branch) is treated
/// as impossible rather than renormalized.
pub const NORM_FLOOR: f64 = 1e-300;

/// Threshold on `|psi(x)|^2` below which local (per-point) momentum
/// quantities are undefined; the phase of `psi` carries no information at a
/// node.
pub const NODE_THRESHOLD: f64 = 1e-12;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("grid too coarse: sigma0 = {sigma0} does not exceed 3*spacing = {limit}")]
    GridTooCoarse { sigma0: f64, limit: f64 },

    #[error("support clipped: [{lo}, {hi}] not contained in grid [{x_min}, {x_max}]")]
    SupportClipped {
        lo: f64,
        hi: f64,
        x_min: f64,
        x_max: f64,
    },

    #[error("zero norm: integral of |psi|^2 is {norm_sq:e}, below the {floor:e} floor")]
    ZeroNorm { norm_sq: f64, floor: f64 },

    #[error("node singularity: |psi({x})|^2 = {density:e} is below {threshold:e}")]
    NodeSingularity {
        x: f64,
        density: f64,
        threshold: f64,
    },

    #[error("branch violation: k*max|x| = {kx_max} on this grid; the closed-form product requires k*max|x| < pi/4")]
    BranchViolation { kx_max: f64 },

    #[error("count mismatch: n_a + n_b = {actual} but N = {expected}")]
    CountMismatch { actual: usize, expected: usize },

    #[error("N = {n} is too small for the Stirling-limit density; need N >= {min}")]
    SmallN { n: usize, min: usize },

    #[error("insufficient statistics: {m} trajectories, need at least {min}")]
    InsufficientStatistics { m: usize, min: usize },

    #[error("invalid grid: {reason}")]
    InvalidGrid { reason: String },

    #[error("invalid config value for \"{key}\": {reason}")]
    Config { key: String, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
