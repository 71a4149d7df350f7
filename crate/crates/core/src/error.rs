use thiserror::Error;

use crate::geometry::Region;

/// Errors raised by the workbench operations.
///
/// The variants fall into four families which the CLI maps onto exit codes:
/// honest negatives (`Infeasible`, `NotFound`, `NoCorrelatedPair`), malformed
/// input, violated type invariants, and internal numerical inconsistencies.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),

    #[error("matrix is not square: {0}x{1}")]
    NotSquare(usize, usize),

    #[error("not self-adjoint: deviation {deviation:.3e} exceeds tol_herm = {tol:.1e}")]
    NotHermitian { deviation: f64, tol: f64 },

    #[error("not a projection: deviation {deviation:.3e} exceeds tol_proj = {tol:.1e}")]
    NotProjection { deviation: f64, tol: f64 },

    #[error("not a density state: {reason} (tol_state = {tol:.1e})")]
    NotState { reason: String, tol: f64 },

    #[error("not unitary: deviation {0:.3e}")]
    NotUnitary(f64),

    #[error("operators do not commute: commutator norm {norm:.3e} exceeds comm_tol = {tol:.1e}")]
    NotCommuting { norm: f64, tol: f64 },

    #[error("conditioning event has zero weight: {0}")]
    ZeroWeight(String),

    #[error("events are not positively correlated: correlation {0:.3e}")]
    Uncorrelated(f64),

    #[error("state is not faithful: minimum eigenvalue {0:.3e}")]
    NotFaithful(f64),

    #[error("target value {r} outside (0, {upper})")]
    Range { r: f64, upper: f64 },

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("not found: {0}")]
    NotFound(String),

    #[error("no correlated pair: the state is a product state across the algebras")]
    NoCorrelatedPair,

    #[error("algebra closure failed: residual {0:.3e} exceeds tol_alg")]
    ClosureFailure(f64),

    #[error("exact mode requires a tensor-split structure on both algebras")]
    NoTensorSplit,

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("regions are not spacelike separated")]
    NotSpacelike,

    #[error("empty region")]
    EmptyRegion,

    #[error("region is disconnected; per-component completions attached")]
    Disconnected(Vec<Region>),

    #[error("region is not a lattice double cone: {0}")]
    OffLattice(String),

    #[error("size out of range: {0}")]
    SizeOutOfRange(String),

    #[error("unknown ensemble `{0}`")]
    UnknownEnsemble(String),

    #[error("internal numerical inconsistency: {0}")]
    Inconsistent(String),
}

pub type Result<T> = std::result::Result<T, Error>;
