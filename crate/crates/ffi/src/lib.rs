//! C ABI for pulsenest.
//!
//! Sequences are opaque `PnSequence` handles created by `pn_sequence_*`
//! constructors and released with [`pn_sequence_free`]. A handle stores how
//! the sequence is built rather than its phases, so each call evaluates it at
//! the precision that call needs (double for propagators and sweeps, the
//! requested digit count for order fits).
//!
//! Every fallible function returns a [`PnStatus`]; on failure the message is
//! available from [`pn_last_error`] on the same thread. Panics never cross
//! the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::slice;

use pulsenest::analysis::{delta1, delta2, infidelity_order, ErrorKind};
use pulsenest::{
    fidelity, fidelity_sweep, nest, sequence_propagator, target_not, with_real, Error, ErrorModel, Family, FamilySpec,
    Frame, PhaseSequence, Precision, Real, Sign,
};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PnStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    /// Numerical gate failure, e.g. an empty fit window.
    Numerical = 3,
    BufferTooSmall = 4,
    Panic = 5,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PnFamily {
    Fn = 0,
    Symmetric5 = 1,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PnFrame {
    Applied = 0,
    Toggling = 1,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PnErrorKind {
    Amplitude = 0,
    OffResonance = 1,
}

/// Result of [`pn_infidelity_order`].
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct PnOrderEstimate {
    pub exponent: f64,
    pub rounded_order: i64,
    pub coefficient: f64,
    pub window_lo: f64,
    pub window_hi: f64,
    pub residual: f64,
    pub precision: u32,
    pub points: usize,
    /// Non-zero when the residual is below the reliability gate.
    pub gate_passed: u8,
}

/// First- and second-order error terms per unit δ = πε, as Pauli coefficients.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct PnErrorTerms {
    pub delta1_x: f64,
    pub delta1_y: f64,
    pub delta1_z: f64,
    /// The σz coefficient; the xy part of the second-order term is zero.
    pub delta2_z: f64,
}

#[derive(Clone, Debug)]
enum Recipe {
    Family(FamilySpec),
    Phases { phases: Vec<f64>, frame: Frame },
    Nest(Box<Recipe>, Box<Recipe>),
}

impl Recipe {
    fn len(&self) -> Option<usize> {
        match self {
            Recipe::Family(s) => s.pulse_count(),
            Recipe::Phases { phases, .. } => Some(phases.len()),
            Recipe::Nest(a, b) => a.len()?.checked_mul(b.len()?),
        }
    }

    /// Applied-frame phases at `prec`.
    fn build<S: Real>(&self, prec: Precision) -> pulsenest::Result<PhaseSequence<S>> {
        match self {
            Recipe::Family(s) => s.build(prec),
            Recipe::Phases { phases, frame } => Ok(PhaseSequence::from_f64(phases, *frame, "custom", prec)?.applied()),
            Recipe::Nest(a, b) => Ok(nest(&a.build(prec)?, &b.build(prec)?)),
        }
    }
}

/// Opaque sequence handle.
pub struct PnSequence {
    recipe: Recipe,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).expect("nul bytes removed"));
}

struct Failure(PnStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match e {
            Error::InvalidParameter(_) | Error::EmptySequence | Error::EmptyComposition | Error::NonFinite(_) => {
                PnStatus::InvalidArgument
            }
            _ => PnStatus::Numerical,
        };
        Failure(status, e.to_string())
    }
}

fn invalid(msg: impl Into<String>) -> Failure {
    Failure(PnStatus::InvalidArgument, msg.into())
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> PnStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            PnStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("internal error: {msg}"));
            PnStatus::Panic
        }
    }
}

unsafe fn handle<'a>(seq: *const PnSequence) -> Result<&'a PnSequence, Failure> {
    seq.as_ref()
        .ok_or_else(|| Failure(PnStatus::NullPointer, "sequence handle is null".into()))
}

unsafe fn out_ref<'a, T>(p: *mut T) -> Result<&'a mut T, Failure> {
    p.as_mut()
        .ok_or_else(|| Failure(PnStatus::NullPointer, "output pointer is null".into()))
}

unsafe fn input_slice<'a>(p: *const f64, len: usize) -> Result<&'a [f64], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(Failure(PnStatus::NullPointer, "input array is null".into()));
    }
    Ok(slice::from_raw_parts(p, len))
}

fn publish(recipe: Recipe, out: &mut *mut PnSequence) {
    *out = Box::into_raw(Box::new(PnSequence { recipe }));
}

fn error_model(eps: f64, f: f64) -> Result<ErrorModel<f64>, Failure> {
    if !(eps.is_finite() && f.is_finite()) {
        return Err(invalid("error parameters must be finite"));
    }
    Ok(ErrorModel::new(eps, f))
}

/// Message for the last failed call on this thread; empty after a success.
/// The pointer stays valid until the next `pn_*` call on this thread.
#[no_mangle]
pub extern "C" fn pn_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Builds a family member: `F_n` (`PN_FAMILY_FN`) or the symmetric
/// five-pulse sequence nested `n` times. `sign` ≥ 0 selects the `+` branch.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pn_sequence_family(
    family: PnFamily,
    n: u32,
    sign: i32,
    out: *mut *mut PnSequence,
) -> PnStatus {
    guard(|| {
        let out = out_ref(out)?;
        let family = match family {
            PnFamily::Fn => Family::Fn,
            PnFamily::Symmetric5 => Family::Symmetric5,
        };
        let sign = if sign >= 0 { Sign::Plus } else { Sign::Minus };
        let spec = FamilySpec::new(family, n, sign);
        if spec.pulse_count().is_none_or(|l| l > 5usize.pow(10)) {
            return Err(invalid(format!("n = {n} is too deep")));
        }
        publish(Recipe::Family(spec), out);
        Ok(())
    })
}

/// Wraps `len` phases (radians) given in `frame`.
///
/// # Safety
/// `phases` must point to `len` readable doubles; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pn_sequence_from_phases(
    phases: *const f64,
    len: usize,
    frame: PnFrame,
    out: *mut *mut PnSequence,
) -> PnStatus {
    guard(|| {
        let out = out_ref(out)?;
        let phases = input_slice(phases, len)?;
        if phases.is_empty() {
            return Err(invalid("a sequence needs at least one phase"));
        }
        if phases.iter().any(|p| !p.is_finite()) {
            return Err(invalid("phases must be finite"));
        }
        let frame = match frame {
            PnFrame::Applied => Frame::Applied,
            PnFrame::Toggling => Frame::Toggling,
        };
        publish(
            Recipe::Phases {
                phases: phases.to_vec(),
                frame,
            },
            out,
        );
        Ok(())
    })
}

/// Nests `inner` inside `outer` (every outer pulse replaced by a copy of
/// `inner`, combined in the toggling frame). Both handles stay owned by the caller.
///
/// # Safety
/// `outer` and `inner` must be live handles; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pn_sequence_nest(
    outer: *const PnSequence,
    inner: *const PnSequence,
    out: *mut *mut PnSequence,
) -> PnStatus {
    guard(|| {
        let out = out_ref(out)?;
        let (a, b) = (handle(outer)?, handle(inner)?);
        let recipe = Recipe::Nest(Box::new(a.recipe.clone()), Box::new(b.recipe.clone()));
        if recipe.len().is_none_or(|l| l > 5usize.pow(10)) {
            return Err(invalid("nested sequence is too long"));
        }
        publish(recipe, out);
        Ok(())
    })
}

/// Releases a handle. Null is ignored.
///
/// # Safety
/// `seq` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn pn_sequence_free(seq: *mut PnSequence) {
    if !seq.is_null() {
        drop(Box::from_raw(seq));
    }
}

/// Number of pulses, or 0 for a null handle.
///
/// # Safety
/// `seq` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn pn_sequence_len(seq: *const PnSequence) -> usize {
    seq.as_ref().and_then(|s| s.recipe.len()).unwrap_or(0)
}

/// Copies the phases in `frame` into `buf`. `*written` receives the length;
/// when `cap` is too small nothing is copied and `PN_STATUS_BUFFER_TOO_SMALL`
/// is returned, so callers may query the size with `cap = 0`.
///
/// # Safety
/// `buf` must have room for `cap` doubles; `written` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pn_sequence_phases(
    seq: *const PnSequence,
    frame: PnFrame,
    buf: *mut f64,
    cap: usize,
    written: *mut usize,
) -> PnStatus {
    guard(|| {
        let s = handle(seq)?;
        let written = out_ref(written)?;
        let applied = s.recipe.build::<f64>(Precision::DOUBLE)?;
        let phases = match frame {
            PnFrame::Applied => applied,
            PnFrame::Toggling => applied.toggling(),
        };
        *written = phases.len();
        if cap < phases.len() {
            return Err(Failure(
                PnStatus::BufferTooSmall,
                format!("need room for {} phases, got {cap}", phases.len()),
            ));
        }
        if buf.is_null() {
            return Err(Failure(PnStatus::NullPointer, "phase buffer is null".into()));
        }
        slice::from_raw_parts_mut(buf, phases.len()).copy_from_slice(phases.phases());
        Ok(())
    })
}

/// Propagator of the sequence with amplitude error `eps` and off-resonance
/// `f`, as `[re00, im00, re01, im01, re10, im10, re11, im11]`.
///
/// # Safety
/// `out` must point to 8 writable doubles.
#[no_mangle]
pub unsafe extern "C" fn pn_sequence_propagator(seq: *const PnSequence, eps: f64, f: f64, out: *mut f64) -> PnStatus {
    guard(|| {
        let s = handle(seq)?;
        if out.is_null() {
            return Err(Failure(PnStatus::NullPointer, "output array is null".into()));
        }
        let u = sequence_propagator(&s.recipe.build::<f64>(Precision::DOUBLE)?, &error_model(eps, f)?)?;
        slice::from_raw_parts_mut(out, 8).copy_from_slice(&u.to_f64_array());
        Ok(())
    })
}

/// Fidelity of the error-prone sequence with the ideal NOT gate `π_0`.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pn_sequence_fidelity(seq: *const PnSequence, eps: f64, f: f64, out: *mut f64) -> PnStatus {
    guard(|| {
        let s = handle(seq)?;
        let out = out_ref(out)?;
        let u = sequence_propagator(&s.recipe.build::<f64>(Precision::DOUBLE)?, &error_model(eps, f)?)?;
        *out = fidelity(&target_not(Precision::DOUBLE), &u);
        Ok(())
    })
}

/// Fidelity over `eps[i] × f[j]`, written row-major (`i * n_f + j`) into
/// `out`, which must hold `n_eps * n_f` doubles.
///
/// # Safety
/// `eps`, `f` and `out` must point to arrays of the stated sizes.
#[no_mangle]
pub unsafe extern "C" fn pn_sweep(
    seq: *const PnSequence,
    eps: *const f64,
    n_eps: usize,
    f: *const f64,
    n_f: usize,
    out: *mut f64,
) -> PnStatus {
    guard(|| {
        let s = handle(seq)?;
        let eps = input_slice(eps, n_eps)?;
        let f = input_slice(f, n_f)?;
        if eps.iter().chain(f).any(|x| !x.is_finite()) {
            return Err(invalid("grid values must be finite"));
        }
        let total = n_eps.checked_mul(n_f).ok_or_else(|| invalid("grid is too large"))?;
        let result = fidelity_sweep(&s.recipe.build::<f64>(Precision::DOUBLE)?, eps, f)?;
        if out.is_null() {
            return Err(Failure(PnStatus::NullPointer, "output array is null".into()));
        }
        let dst = slice::from_raw_parts_mut(out, total);
        for (d, row) in dst.iter_mut().zip(&result.rows) {
            *d = row.fidelity;
        }
        Ok(())
    })
}

/// Analytic first- and second-order amplitude-error terms per unit δ.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pn_sequence_error_terms(seq: *const PnSequence, out: *mut PnErrorTerms) -> PnStatus {
    guard(|| {
        let s = handle(seq)?;
        let out = out_ref(out)?;
        let seq = s.recipe.build::<f64>(Precision::DOUBLE)?;
        let d1 = delta1(&seq, &1.0);
        *out = PnErrorTerms {
            delta1_x: d1.x,
            delta1_y: d1.y,
            delta1_z: d1.z,
            delta2_z: delta2(&seq, &1.0),
        };
        Ok(())
    })
}

/// Fits the infidelity exponent at `digits` significant digits (≤ 16 runs
/// in double precision). Returns `PN_STATUS_NUMERICAL` when the precision
/// cannot resolve the order; the estimate is still filled when the fit ran
/// but missed the residual gate, with `gate_passed = 0`.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pn_infidelity_order(
    seq: *const PnSequence,
    kind: PnErrorKind,
    digits: u32,
    out: *mut PnOrderEstimate,
) -> PnStatus {
    guard(|| {
        let s = handle(seq)?;
        let out = out_ref(out)?;
        if !(1..=4096).contains(&digits) {
            return Err(invalid(format!("digits must be in 1..=4096, got {digits}")));
        }
        let kind = match kind {
            PnErrorKind::Amplitude => ErrorKind::Amplitude,
            PnErrorKind::OffResonance => ErrorKind::OffResonance,
        };
        let prec = Precision::digits(digits);
        let est = with_real!(prec, S => infidelity_order(&s.recipe.build::<S>(prec)?, kind, prec)?);
        *out = PnOrderEstimate {
            exponent: est.exponent,
            rounded_order: est.rounded_order,
            coefficient: est.coefficient,
            window_lo: est.window.0,
            window_hi: est.window.1,
            residual: est.residual,
            precision: est.precision,
            points: est.points,
            gate_passed: u8::from(est.gate_passed()),
        };
        Ok(())
    })
}

/// Library version, static storage.
#[no_mangle]
pub extern "C" fn pn_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}
