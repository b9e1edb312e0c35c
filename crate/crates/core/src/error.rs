use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("Fock cutoff {0} is too small (need at least 2)")]
    CutoffTooSmall(usize),

    #[error("non-finite matrix entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("not a density matrix: {0}")]
    NotADensityMatrix(String),

    #[error("truncation tail mass {tail_mass:.3e} exceeds {limit:.1e} at cutoff {cutoff}")]
    TailMass { tail_mass: f64, limit: f64, cutoff: usize },

    #[error("truncation leakage: tomogram sums to {sum:.12} (tolerance {tol:.1e})")]
    TruncationLeakage { sum: f64, tol: f64 },

    #[error("kernel singular at (mu={mu}, nu={nu}): {which}")]
    SingularKernel { mu: f64, nu: f64, which: &'static str },

    #[error("(mu={mu}, nu={nu}) is not on the canonical frame branch: {constraint}")]
    OutsideFrameImage { mu: f64, nu: f64, constraint: &'static str },

    #[error("ODE step size underflow at t={t}")]
    StepSizeUnderflow { t: f64 },

    #[error("ODE step budget of {max_steps} exhausted at t={t}")]
    StepBudget { t: f64, max_steps: usize },

    #[error("conserved quantity drifted by {drift:.3e} (tolerance {tol:.1e})")]
    InvariantDrift { drift: f64, tol: f64 },

    #[error("quadrature budget insufficient: {0}")]
    Quadrature(String),

    #[error("{0}")]
    Parse(String),
}
