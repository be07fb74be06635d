use thiserror::Error;

/// Errors raised by the chamber, flow, integrator and SDE routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected} coordinates, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid root system: {0}")]
    InvalidSystem(String),

    #[error("point {0:?} is not in the closed Weyl chamber")]
    OutsideChamber(Vec<f64>),

    #[error("point {0:?} is not in the open Weyl chamber")]
    NotInterior(Vec<f64>),

    #[error("singular input: denominator {denominator:e} is below the floor {floor:e}")]
    Singular { denominator: f64, floor: f64 },

    #[error("parameter out of range: {0}")]
    OutOfRange(String),

    #[error("repeated zeros: {0:?}")]
    RepeatedZeros(Vec<f64>),

    #[error("polynomial has non-real roots (max |Im| = {max_imag:e}, tolerance {tolerance:e})")]
    NonRealRoots { max_imag: f64, tolerance: f64 },

    #[error("squared coordinate {value:e} is negative beyond tolerance {tolerance:e}")]
    NegativeSquare { value: f64, tolerance: f64 },

    #[error(
        "no solution: root system B with nu = 0 started on the wall x_N = 0 never enters the open chamber"
    )]
    DegenerateNuZero,

    #[error("solution touches the chamber boundary at t = {t}")]
    BoundaryContact { t: f64 },

    #[error("time grid must be strictly increasing and start at or after {start}")]
    InvalidTimes { start: f64 },

    #[error("bracket failure: {0}")]
    BracketFailure(String),

    #[error("step size underflow at t = {t} (h = {h:e})")]
    StepUnderflow { t: f64, h: f64 },

    #[error("step budget of {steps} exhausted at t = {t}")]
    StepBudget { t: f64, steps: usize },

    #[error("sub-stepping exhausted at t = {t}")]
    SubstepExhausted { t: f64 },

    #[error("zero vector has no direction")]
    ZeroVector,
}

impl Error {
    /// True for malformed or out-of-range input, as opposed to a mathematical
    /// rejection of a well-formed request or a numerical breakdown.
    pub fn is_input(&self) -> bool {
        matches!(
            self,
            Error::DimensionMismatch { .. }
                | Error::InvalidSystem(_)
                | Error::InvalidTimes { .. }
                | Error::OutOfRange(_)
        )
    }

    /// True for rejections that follow from the mathematics (bad start, no solution).
    pub fn is_domain(&self) -> bool {
        matches!(
            self,
            Error::OutsideChamber(_)
                | Error::NotInterior(_)
                | Error::DegenerateNuZero
                | Error::NonRealRoots { .. }
                | Error::NegativeSquare { .. }
                | Error::Singular { .. }
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
