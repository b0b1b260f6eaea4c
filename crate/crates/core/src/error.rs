use thiserror::Error;

/// Errors produced by the geometry, solver, stall engine and oracle.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("degenerate half-space: normal has zero or non-finite norm")]
    DegenerateHalfSpace,

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("polyhedron must contain at least one half-space")]
    EmptyPolyhedron,

    #[error("invalid option: {0}")]
    InvalidOptions(String),

    #[error("numerical failure at iteration {iteration}: iterate is not finite")]
    NumericalFailure { iteration: u64 },

    #[error("inconsistent stall: {0}")]
    InconsistentStall(&'static str),

    #[error("fast-forward consistency violated on slot {slot}: k = {k}")]
    FastForwardConsistency { slot: usize, k: f64 },

    #[error("oracle enumeration guard exceeded: n = {n} > {max}")]
    EnumerationGuard { n: usize, max: usize },

    #[error("no feasible KKT candidate found; intersection appears empty")]
    Infeasible,

    #[error("brute-force stall count exceeded {max_cycles} cycles")]
    StallBudgetExceeded { max_cycles: u64 },

    #[error("could not construct a stalling instance after {attempts} attempts")]
    GeneratorExhausted { attempts: u32 },
}

pub type Result<T> = std::result::Result<T, Error>;
