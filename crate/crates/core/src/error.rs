use thiserror::Error;

use crate::sequences::Frame;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("non-finite input: {0}")]
    NonFinite(&'static str),
    #[error("cannot compose an empty pulse list")]
    EmptyComposition,
    #[error("phase sequence must contain at least one phase")]
    EmptySequence,
    #[error("rotation angle is exactly pi; the sign of the generator is undefined")]
    AmbiguousLog,
    #[error("expected a sequence in the {expected} frame, got {found}")]
    WrongFrame { expected: Frame, found: Frame },
    #[error("error-propagator routes disagree by {deviation:.3e} (tolerance {tolerance:.3e})")]
    RouteMismatch { deviation: f64, tolerance: f64 },
    #[error("taylor stencil is ill-conditioned: condition estimate {condition:.3e} leaves fewer than 3 digits at {digits} digits")]
    StencilConditioning { condition: f64, digits: u32 },
    #[error(
        "no usable fit window: found {points} ladder points with infidelity in [{lo:.1e}, {hi:.1e}] \
         (need {needed}); raise the working precision (currently {digits} digits)"
    )]
    EmptyWindow {
        points: usize,
        needed: usize,
        lo: f64,
        hi: f64,
        digits: u32,
    },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("phase file: {0}")]
    PhaseFile(String),
}
