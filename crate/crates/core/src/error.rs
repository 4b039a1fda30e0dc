use thiserror::Error;

/// Errors raised anywhere in the toolkit.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("non-finite input: {0}")]
    NonFinite(String),
    #[error("numerical breakdown in simplex: {0}")]
    NumericalBreakdown(String),
    #[error("inconsistent linear system (residual {residual:.3e} > {tolerance:.3e})")]
    Inconsistent { residual: f64, tolerance: f64 },
    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("control cone is empty (only the origin)")]
    EmptyCone,
    #[error("dimension {0} too large for extreme-ray enumeration (max 14)")]
    DimensionTooLarge(usize),
    #[error("Hamiltonian is +infinity: cone direction {ray:?} has Gu = 0 and negative cost")]
    HamiltonianInfinite { ray: Vec<f64> },
    #[error("system is not controllable: G U does not cover R^d")]
    NotControllable,

    #[error("workload space is trivial (d = 0)")]
    DegenerateWorkload,
    #[error("reduced dimension d = {0} is not supported (need 1 or 2)")]
    DimensionUnsupported(usize),
    #[error("workload {0:?} lies outside the workload space")]
    OutsideWorkloadSpace(Vec<f64>),

    #[error("diffusion cross term |G12| = {cross:.3e} exceeds min diagonal {diag:.3e} at node {node}")]
    CrossTermDominanceViolated { node: usize, cross: f64, diag: f64 },
    #[error("domain has empty interior at the requested grid spacing")]
    EmptyInterior,
    #[error("no admissible jump direction and no stencil neighbour at node {0}")]
    NoAdmissibleDirection(usize),
    #[error("value iteration from initial value {init} did not converge (residual {residual:.3e})")]
    NotConverged { init: f64, residual: f64 },

    #[error("state escaped the domain at step {step} (w = {state:?})")]
    StateEscaped { step: usize, state: Vec<f64> },
    #[error("inadmissible policy: {0}")]
    InadmissiblePolicy(String),
    #[error("paths were simulated on different time grids")]
    MixedGrids,
}

pub type Result<T> = std::result::Result<T, Error>;
