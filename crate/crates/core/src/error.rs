use thiserror::Error;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("non-finite value for {what}")]
    NonFinite { what: &'static str },

    #[error("radii must be positive and finite, got ({r1}, {r2})")]
    InvalidRadii { r1: f64, r2: f64 },

    #[error("{what} = {value} outside the admissible range [{lo}, {hi}]")]
    OutOfRange {
        what: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },

    #[error(
        "t = {t} is excluded: the energy integrals pick up logarithmic \
         corrections at the breakpoints t = 1, 2, 3"
    )]
    ExcludedExponent { t: f64 },

    #[error("precondition violated: {0}")]
    Precondition(&'static str),

    #[error("horizon {horizon} too small: block {block} needs harmonic mass {needed}, {shortfall} short")]
    InsufficientHorizon {
        horizon: usize,
        block: usize,
        needed: f64,
        shortfall: f64,
    },

    #[error("degenerate scale set: {0}")]
    DegenerateScales(&'static str),
}
