use thiserror::Error;

/// Errors raised by the spectral engine.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid billiard configuration: {0}")]
    InvalidConfig(String),

    #[error("energy cutoff {cutoff} is below the ground level {ground}")]
    CutoffTooLow { cutoff: f64, ground: f64 },

    #[error(
        "degenerate unperturbed levels ({}, {}) and ({}, {}) at E = {energy_a} / {energy_b}",
        .a.0, .a.1, .b.0, .b.1
    )]
    DegenerateLevels {
        a: (u32, u32),
        b: (u32, u32),
        energy_a: f64,
        energy_b: f64,
    },

    #[error("point ({x}, {y}) lies outside the billiard")]
    OutsideDomain { x: f64, y: f64 },

    #[error("invalid scatterer set: {0}")]
    InvalidScatterers(String),

    #[error("omega = {omega} is within the pole-exclusion zone of level {level} (E = {energy})")]
    PoleProximity { omega: f64, level: usize, energy: f64 },

    #[error("omega = {omega} exceeds the truncation-safe limit {limit}")]
    TruncationUnsafe { omega: f64, limit: f64 },

    #[error("scatterer index {0} out of range or diagonal index used for an off-diagonal element")]
    IndexContract(usize),

    #[error("invalid spectral window: {0}")]
    InvalidWindow(String),

    #[error("root bracketing failed in ({lo}, {hi}): {reason}")]
    Bracketing { lo: f64, hi: f64, reason: String },

    #[error("no bound-state floor found above {0}")]
    BoundStateFloor(f64),

    #[error("null space of the secular matrix at omega = {0} is not one-dimensional")]
    DegenerateNullSpace(f64),

    #[error("singular matrix in normality diagnostic")]
    SingularTransition,

    #[error("statistics input invalid: {0}")]
    Statistics(String),

    #[error("omega must be positive, got {0}")]
    NonPositiveEnergy(f64),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
