//! Construction and verification of nested composite NOT (π) pulses.
//!
//! * [`su2`]: 2×2 unitaries, error-prone pulses, fidelity and principal log.
//! * [`sequences`]: phase sequences, frame transforms, the `F_n` family,
//!   the symmetric five-pulse sequence and toggling-frame nesting.
//! * [`analysis`]: error propagators, analytic `Δ1`/`Δ2`, Taylor series of
//!   the error generator, infidelity-order fits and sweeps.
//! * [`phasefile`], [`check`] and [`cli`]: file formats, the invariant suite
//!   and the command-line front end.
//!
//! All numerics are generic over [`Real`], implemented for `f64` and for the
//! arbitrary-precision [`BigReal`].

pub mod analysis;
pub mod check;
pub mod cli;
pub mod error;
pub mod phasefile;
pub mod scalar;
pub mod sequences;
pub mod su2;

pub use analysis::{
    delta1, delta2, error_propagator, error_propagator_via, fidelity_sweep, generator_taylor, infidelity_order,
    ErrorKind, ErrorRoute, GeneratorSeries, OrderEstimate, PauliTerm, SweepResult,
};
pub use error::{Error, Result};
pub use scalar::{BigReal, Precision, Real};
pub use sequences::{
    fn_phases, nest, sequence_propagator, symmetric5_phases, target_not, Family, FamilySpec, Frame, PhaseSequence,
    PulseTrain, Sign,
};
pub use su2::{compose, fidelity, make_pulse, make_rotation, principal_log, AxisAngle, Complex, ErrorModel, Unitary2};

/// Runs `$body` with `$S` bound to the scalar type suited to `$prec`.
#[macro_export]
macro_rules! with_real {
    ($prec:expr, $S:ident => $body:expr) => {
        if $prec.is_double() {
            type $S = f64;
            $body
        } else {
            type $S = $crate::scalar::BigReal;
            $body
        }
    };
}
