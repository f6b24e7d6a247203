//! Phase-sequence algebra for composite π pulses.
//!
//! A [`PhaseSequence`] lists the phases of π pulses in application order,
//! tagged with the frame they are expressed in. Applied-frame phases `φ_j`
//! and toggling-frame phases `φ'_j` are related by
//!
//! ```text
//! φ'_j = (−1)^(j+1) φ_j + Σ_{k<j} (−1)^(k+1) 2 φ_k      (j = 1..N)
//! ```
//!
//! Phases are kept as exact affine values; nothing is reduced mod 2π unless
//! [`PhaseSequence::normalized`] is called.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{Precision, Real};
use crate::su2::{rotation_on_axis, DetunedPulse, ErrorModel, Unitary2};

/// Tolerance, in radians, for the symmetry predicates.
pub const SYMMETRY_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Frame {
    Applied,
    Toggling,
}

impl fmt::Display for Frame {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Frame::Applied => "applied",
            Frame::Toggling => "toggling",
        })
    }
}

/// Branch of the free sign in a family's phase formulas.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sign {
    #[default]
    Plus,
    Minus,
}

impl Sign {
    fn factor(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sign::Plus => "+",
            Sign::Minus => "-",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    /// Recursively nested five-pulse NOT gates.
    Fn,
    /// The symmetric five-pulse sequence, nested `n` times.
    Symmetric5,
    /// User-supplied phases; cannot be generated.
    Custom,
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Family::Fn => "fn",
            Family::Symmetric5 => "symmetric5",
            Family::Custom => "custom",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FamilySpec {
    pub family: Family,
    pub n: u32,
    pub sign: Sign,
}

impl FamilySpec {
    pub fn new(family: Family, n: u32, sign: Sign) -> Self {
        FamilySpec { family, n, sign }
    }

    /// Number of pulses the family member contains.
    pub fn pulse_count(&self) -> Option<usize> {
        match self.family {
            Family::Fn | Family::Symmetric5 => 5usize.checked_pow(self.n),
            Family::Custom => None,
        }
    }

    pub fn build<S: Real>(&self, prec: Precision) -> Result<PhaseSequence<S>> {
        match self.family {
            Family::Fn => Ok(fn_phases(self.n, self.sign, prec)),
            Family::Symmetric5 => {
                let base = symmetric5_phases(self.sign, prec);
                let mut seq = PhaseSequence::new(vec![S::zero(prec)], Frame::Applied, "")?;
                for _ in 0..self.n {
                    seq = nest(&base, &seq);
                }
                Ok(seq.with_label(format!("symmetric5^{} ({})", self.n, self.sign)))
            }
            Family::Custom => Err(Error::InvalidParameter(
                "custom sequences are read from phase files, not generated".into(),
            )),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PhaseSequence<S> {
    phases: Vec<S>,
    frame: Frame,
    label: String,
}

impl<S: Real> PhaseSequence<S> {
    pub fn new(phases: Vec<S>, frame: Frame, label: impl Into<String>) -> Result<Self> {
        if phases.is_empty() {
            return Err(Error::EmptySequence);
        }
        if phases.iter().any(|p| !p.is_finite()) {
            return Err(Error::NonFinite("phase"));
        }
        Ok(PhaseSequence {
            phases,
            frame,
            label: label.into(),
        })
    }

    /// Applied-frame sequence from `f64` phases at the requested precision.
    pub fn from_f64(phases: &[f64], frame: Frame, label: impl Into<String>, prec: Precision) -> Result<Self> {
        Self::new(phases.iter().map(|&p| S::from_f64(p, prec)).collect(), frame, label)
    }

    pub fn phases(&self) -> &[S] {
        &self.phases
    }

    pub fn frame(&self) -> Frame {
        self.frame
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn len(&self) -> usize {
        self.phases.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn precision(&self) -> Precision {
        self.phases[0].precision()
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn to_f64_vec(&self) -> Vec<f64> {
        self.phases.iter().map(Real::to_f64).collect()
    }

    fn expect_frame(&self, expected: Frame) -> Result<()> {
        if self.frame == expected {
            Ok(())
        } else {
            Err(Error::WrongFrame {
                expected,
                found: self.frame,
            })
        }
    }

    /// Applied → toggling frame.
    pub fn to_toggling(&self) -> Result<Self> {
        self.expect_frame(Frame::Applied)?;
        let two = self.phases[0].lit(2.0);
        let mut acc = self.phases[0].lit(0.0);
        let mut out = Vec::with_capacity(self.len());
        for (j, phi) in self.phases.iter().enumerate() {
            // j is zero-based, so even j carries the (+) sign.
            let signed = if j % 2 == 0 { phi.clone() } else { -phi.clone() };
            out.push(signed.clone() + acc.clone());
            acc = acc + two.clone() * signed;
        }
        Ok(PhaseSequence {
            phases: out,
            frame: Frame::Toggling,
            label: self.label.clone(),
        })
    }

    /// Toggling → applied frame; exact inverse of [`Self::to_toggling`].
    pub fn from_toggling(&self) -> Result<Self> {
        self.expect_frame(Frame::Toggling)?;
        let two = self.phases[0].lit(2.0);
        let mut acc = self.phases[0].lit(0.0);
        let mut out = Vec::with_capacity(self.len());
        for (j, tog) in self.phases.iter().enumerate() {
            let signed = tog.clone() - acc.clone();
            let phi = if j % 2 == 0 { signed.clone() } else { -signed.clone() };
            acc = acc + two.clone() * signed;
            out.push(phi);
        }
        Ok(PhaseSequence {
            phases: out,
            frame: Frame::Applied,
            label: self.label.clone(),
        })
    }

    /// This sequence expressed in the toggling frame.
    pub fn toggling(&self) -> Self {
        match self.frame {
            Frame::Toggling => self.clone(),
            Frame::Applied => self.to_toggling().expect("frame checked"),
        }
    }

    /// This sequence expressed in the applied frame.
    pub fn applied(&self) -> Self {
        match self.frame {
            Frame::Applied => self.clone(),
            Frame::Toggling => self.from_toggling().expect("frame checked"),
        }
    }

    /// Phases reduced to `(−π, π]`, same frame.
    pub fn normalized(&self) -> Self {
        PhaseSequence {
            phases: self.phases.iter().map(wrap_angle).collect(),
            frame: self.frame,
            label: self.label.clone(),
        }
    }

    /// `φ_{N+1−j} = −φ_j` (mod 2π) for every j.
    pub fn is_antisymmetric(&self) -> bool {
        self.mirror_test(|a, b| a + b)
    }

    /// `φ_{N+1−j} = φ_j` (mod 2π) for every j.
    pub fn is_symmetric(&self) -> bool {
        self.mirror_test(|a, b| a - b)
    }

    fn mirror_test(&self, combine: impl Fn(S, S) -> S) -> bool {
        let n = self.len();
        let tol = self.phases[0].lit(SYMMETRY_TOL);
        (0..n.div_ceil(2)).all(|j| {
            let d = combine(self.phases[j].clone(), self.phases[n - 1 - j].clone());
            wrap_angle(&d).abs() <= tol
        })
    }
}

/// Reduces an angle to `(−π, π]`.
pub fn wrap_angle<S: Real>(x: &S) -> S {
    let prec = x.precision();
    let two_pi = S::pi(prec) * x.lit(2.0);
    let mut r = x.clone() - two_pi.clone() * (x.clone() / two_pi.clone()).round();
    if r <= -S::pi(prec) {
        r = r + two_pi;
    }
    r
}

/// `ψ = ±arccos(−1/4)`.
pub fn psi<S: Real>(sign: Sign, prec: Precision) -> S {
    S::from_f64(-0.25, prec).acos() * S::from_f64(sign.factor(), prec)
}

/// Applied-frame phases of `F_n` (length `5^n`).
///
/// Built by the recursion
/// `φ_{n+1} = (3ψ+φ_n, ψ−φ_n, φ_n, −ψ−φ_n, −3ψ+φ_n)` from `φ_0 = (0)`.
pub fn fn_phases<S: Real>(n: u32, sign: Sign, prec: Precision) -> PhaseSequence<S> {
    fn_phases_with_psi(n, psi(sign, prec), format!("F{n} ({sign})"))
}

/// `F_n` recursion with an explicit ψ, e.g. a deliberately perturbed one.
pub fn fn_phases_with_psi<S: Real>(n: u32, psi: S, label: impl Into<String>) -> PhaseSequence<S> {
    let three_psi = psi.lit(3.0) * psi.clone();
    let mut phases = vec![psi.lit(0.0)];
    for _ in 0..n {
        let mut next = Vec::with_capacity(phases.len() * 5);
        next.extend(phases.iter().map(|p| three_psi.clone() + p.clone()));
        next.extend(phases.iter().map(|p| psi.clone() - p.clone()));
        next.extend(phases.iter().cloned());
        next.extend(phases.iter().map(|p| -psi.clone() - p.clone()));
        next.extend(phases.iter().map(|p| p.clone() - three_psi.clone()));
        phases = next;
    }
    PhaseSequence {
        phases,
        frame: Frame::Applied,
        label: label.into(),
    }
}

/// The symmetric five-pulse sequence `(α, β, 2β−2α, β, α)` with
/// `α = ∓2 arcsin((5/32)^(1/4))` and `β = 2α ± arccos(−(1+2cosα)/2)`.
/// `Sign::Plus` selects the upper signs.
pub fn symmetric5_phases<S: Real>(sign: Sign, prec: Precision) -> PhaseSequence<S> {
    let s = S::from_f64(sign.factor(), prec);
    let ratio = S::from_f64(5.0, prec) / S::from_f64(32.0, prec);
    let alpha = -(s.clone() * s.lit(2.0) * ratio.sqrt().sqrt().asin());
    let inner = -(s.lit(1.0) + s.lit(2.0) * alpha.cos()) / s.lit(2.0);
    let beta = s.lit(2.0) * alpha.clone() + s.clone() * inner.acos();
    let middle = s.lit(2.0) * (beta.clone() - alpha.clone());
    PhaseSequence {
        phases: vec![alpha.clone(), beta.clone(), middle, beta, alpha],
        frame: Frame::Applied,
        label: format!("symmetric5 ({sign})"),
    }
}

/// Applies `outer` to `inner` in the toggling frame: toggling phases
/// `outer'_i + inner'_j`, outer index major, converted back to the applied frame.
pub fn nest<S: Real>(outer: &PhaseSequence<S>, inner: &PhaseSequence<S>) -> PhaseSequence<S> {
    let to = outer.toggling();
    let ti = inner.toggling();
    let mut phases = Vec::with_capacity(to.len() * ti.len());
    for a in &to.phases {
        for b in &ti.phases {
            phases.push(a.clone() + b.clone());
        }
    }
    PhaseSequence {
        phases,
        frame: Frame::Toggling,
        label: format!("nest({}, {})", outer.label, inner.label),
    }
    .applied()
}

/// A sequence of π pulses prepared for repeated propagation.
#[derive(Clone, Debug)]
pub struct PulseTrain<S> {
    axes: Vec<(S, S)>,
    theta: S,
}

impl<S: Real> PulseTrain<S> {
    /// Requires an applied-frame sequence.
    pub fn new(seq: &PhaseSequence<S>) -> Result<Self> {
        seq.expect_frame(Frame::Applied)?;
        Ok(Self::from_axes_of(seq))
    }

    /// Rotations by `δ` about toggling-frame axes use the same machinery.
    fn from_axes_of(seq: &PhaseSequence<S>) -> Self {
        let axes = seq
            .phases
            .iter()
            .map(|p| {
                let (s, c) = p.sin_cos();
                (c, s)
            })
            .collect();
        PulseTrain {
            axes,
            theta: S::pi(seq.precision()),
        }
    }

    /// Toggling-frame product `δ_{φ'_N} ⋯ δ_{φ'_1}` with rotation angle `delta`.
    pub(crate) fn toggling_product(seq: &PhaseSequence<S>, delta: &S) -> Result<Unitary2<S>> {
        seq.expect_frame(Frame::Toggling)?;
        let train = Self::from_axes_of(seq);
        Ok(train.fold(|c, s| rotation_on_axis(delta, c, s)))
    }

    fn fold(&self, pulse: impl Fn(&S, &S) -> Unitary2<S>) -> Unitary2<S> {
        let mut it = self.axes.iter();
        let (c0, s0) = it.next().expect("non-empty sequence");
        it.fold(pulse(c0, s0), |acc, (c, s)| pulse(c, s).matmul(&acc))
    }

    pub fn len(&self) -> usize {
        self.axes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.axes.is_empty()
    }

    /// Product of `make_pulse(π, φ_j, err)` in application order.
    pub fn propagator(&self, err: &ErrorModel<S>) -> Unitary2<S> {
        if err.f.is_zero() {
            let angle = self.theta.clone() * (self.theta.lit(1.0) + err.epsilon.clone());
            self.fold(|c, s| rotation_on_axis(&angle, c, s))
        } else {
            let detuned = DetunedPulse::new(&self.theta, err);
            self.fold(|c, s| detuned.on_axis(c, s))
        }
    }

    /// Error-free propagator.
    pub fn ideal(&self) -> Unitary2<S> {
        self.propagator(&ErrorModel::none(self.theta.precision()))
    }
}

/// `π'_{φ_N} ⋯ π'_{φ_1}` for an applied-frame sequence.
pub fn sequence_propagator<S: Real>(seq: &PhaseSequence<S>, err: &ErrorModel<S>) -> Result<Unitary2<S>> {
    Ok(PulseTrain::new(seq)?.propagator(err))
}

/// The NOT gate `π_0` every sequence here is measured against.
pub fn target_not<S: Real>(prec: Precision) -> Unitary2<S> {
    let pi = S::pi(prec);
    rotation_on_axis(&pi, &S::one(prec), &S::zero(prec))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::BigReal;
    use crate::su2::{fidelity, make_pulse};
    use std::f64::consts::PI;

    const D: Precision = Precision::DOUBLE;

    fn f1() -> PhaseSequence<f64> {
        fn_phases(1, Sign::Plus, D)
    }

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn psi_value() {
        let p: f64 = psi(Sign::Plus, D);
        assert!((p - 1.823_476_581_9).abs() < 1e-10);
        let m: f64 = psi(Sign::Minus, D);
        assert_eq!(m, -p);
    }

    #[test]
    fn fn_seed_and_first_member() {
        assert_eq!(fn_phases::<f64>(0, Sign::Plus, D).to_f64_vec(), vec![0.0]);
        let p: f64 = psi(Sign::Plus, D);
        assert!(close(&f1().to_f64_vec(), &[3.0 * p, p, 0.0, -p, -3.0 * p], 1e-15));
        assert_eq!(fn_phases::<f64>(2, Sign::Plus, D).len(), 25);
    }

    #[test]
    fn f1_toggling_phases() {
        let p: f64 = psi(Sign::Plus, D);
        let t = f1().to_toggling().unwrap();
        assert_eq!(t.frame(), Frame::Toggling);
        assert!(close(
            &t.to_f64_vec(),
            &[3.0 * p, 5.0 * p, 4.0 * p, 5.0 * p, 3.0 * p],
            1e-14
        ));
        let back = t.from_toggling().unwrap();
        assert!(close(&back.to_f64_vec(), &f1().to_f64_vec(), 1e-14));
    }

    #[test]
    fn toggling_small_cases() {
        let zeros = PhaseSequence::<f64>::from_f64(&[0.0; 5], Frame::Applied, "", D).unwrap();
        assert_eq!(zeros.to_toggling().unwrap().to_f64_vec(), vec![0.0; 5]);
        let pair = PhaseSequence::<f64>::from_f64(&[0.4, 1.1], Frame::Applied, "", D).unwrap();
        assert!(close(
            &pair.to_toggling().unwrap().to_f64_vec(),
            &[0.4, 0.8 - 1.1],
            1e-15
        ));
        let single = PhaseSequence::<f64>::from_f64(&[0.0], Frame::Toggling, "", D).unwrap();
        assert_eq!(single.from_toggling().unwrap().to_f64_vec(), vec![0.0]);
    }

    #[test]
    fn wrong_frame_rejected() {
        let t = f1().to_toggling().unwrap();
        assert!(matches!(
            t.to_toggling(),
            Err(Error::WrongFrame {
                expected: Frame::Applied,
                ..
            })
        ));
        assert!(matches!(
            f1().from_toggling(),
            Err(Error::WrongFrame {
                expected: Frame::Toggling,
                ..
            })
        ));
        assert!(sequence_propagator(&t, &ErrorModel::none(D)).is_err());
    }

    #[test]
    fn empty_and_non_finite_rejected() {
        assert!(matches!(
            PhaseSequence::<f64>::new(vec![], Frame::Applied, ""),
            Err(Error::EmptySequence)
        ));
        assert!(PhaseSequence::new(vec![f64::NAN], Frame::Applied, "").is_err());
    }

    #[test]
    fn nest_identities() {
        let zero = PhaseSequence::<f64>::from_f64(&[0.0], Frame::Applied, "id", D).unwrap();
        assert!(close(&nest(&zero, &f1()).to_f64_vec(), &f1().to_f64_vec(), 1e-12));
        assert!(close(&nest(&f1(), &zero).to_f64_vec(), &f1().to_f64_vec(), 1e-12));
        let f2 = fn_phases::<f64>(2, Sign::Plus, D);
        assert!(close(&nest(&f1(), &f1()).to_f64_vec(), &f2.to_f64_vec(), 1e-12));
    }

    #[test]
    fn symmetric5_shape() {
        let s = symmetric5_phases::<f64>(Sign::Plus, D);
        let p = s.to_f64_vec();
        let alpha = -2.0 * (5.0f64 / 32.0).powf(0.25).asin();
        assert!((p[0] - alpha).abs() < 1e-15);
        assert!((p[0] - -1.359_803_732_441_816).abs() < 1e-12);
        assert_eq!(p[0], p[4]);
        assert_eq!(p[1], p[3]);
        assert!(s.is_symmetric());
        let t = s.to_toggling().unwrap();
        let tp = t.to_f64_vec();
        for j in 0..5 {
            assert!((tp[j] + tp[4 - j]).abs() < 1e-12, "{tp:?}");
        }
        assert!(t.is_antisymmetric());
        let lower = symmetric5_phases::<f64>(Sign::Minus, D).to_f64_vec();
        assert!(close(&lower, &p.iter().map(|x| -x).collect::<Vec<_>>(), 1e-15));
    }

    #[test]
    fn symmetry_predicates() {
        assert!(f1().is_antisymmetric());
        assert!(!f1().is_symmetric());
        assert!(f1().to_toggling().unwrap().is_symmetric());
        let plain = PhaseSequence::<f64>::from_f64(&[0.0, PI / 3.0], Frame::Applied, "", D).unwrap();
        assert!(!plain.is_antisymmetric() && !plain.is_symmetric());
        let wrapped = PhaseSequence::<f64>::from_f64(&[1.0, 0.0, 2.0 * PI - 1.0], Frame::Applied, "", D).unwrap();
        assert!(wrapped.is_antisymmetric());
    }

    #[test]
    fn normalization_wraps_into_half_open_interval() {
        let s = PhaseSequence::<f64>::from_f64(&[3.0 * PI, -PI, 7.0], Frame::Applied, "", D).unwrap();
        for p in s.normalized().to_f64_vec() {
            assert!(p > -PI && p <= PI + 1e-12);
        }
    }

    #[test]
    fn propagator_matches_pulse_by_pulse_product() {
        let seq = f1();
        for err in [ErrorModel::amplitude(0.13), ErrorModel::new(0.05, 0.2)] {
            let mut want = Unitary2::identity(D);
            for p in seq.phases() {
                want = make_pulse(&PI, p, &err).unwrap().matmul(&want);
            }
            let got = sequence_propagator(&seq, &err).unwrap();
            assert!(got.max_abs_diff(&want) < 1e-14);
        }
    }

    #[test]
    fn antisymmetric_sequence_reaches_not_gate() {
        let ideal = sequence_propagator(&f1(), &ErrorModel::none(D)).unwrap();
        assert!((fidelity(&target_not(D), &ideal) - 1.0).abs() < 1e-14);
        let single = PhaseSequence::<f64>::from_f64(&[0.0], Frame::Applied, "", D).unwrap();
        let eps = 0.3;
        let u = sequence_propagator(&single, &ErrorModel::amplitude(eps)).unwrap();
        assert!((fidelity(&target_not(D), &u) - (eps * PI / 2.0).cos()).abs() < 1e-15);
    }

    #[test]
    fn f1_beats_single_pulse() {
        let err = ErrorModel::amplitude(0.2);
        let single = PhaseSequence::<f64>::from_f64(&[0.0], Frame::Applied, "", D).unwrap();
        let t = target_not(D);
        let fs = fidelity(&t, &sequence_propagator(&single, &err).unwrap());
        let ff = fidelity(&t, &sequence_propagator(&f1(), &err).unwrap());
        assert!(ff > fs);
    }

    #[test]
    fn family_spec_lengths() {
        for n in 0..=3 {
            let spec = FamilySpec::new(Family::Fn, n, Sign::Plus);
            assert_eq!(spec.build::<f64>(D).unwrap().len(), 5usize.pow(n));
            assert_eq!(spec.pulse_count(), Some(5usize.pow(n)));
        }
        let s2 = FamilySpec::new(Family::Symmetric5, 2, Sign::Plus)
            .build::<f64>(D)
            .unwrap();
        assert_eq!(s2.len(), 25);
        assert!(FamilySpec::new(Family::Custom, 1, Sign::Plus).build::<f64>(D).is_err());
    }

    #[test]
    fn high_precision_f2_matches_double() {
        let p = Precision::digits(40);
        let big = fn_phases::<BigReal>(2, Sign::Plus, p);
        let small = fn_phases::<f64>(2, Sign::Plus, D);
        assert!(close(&big.to_f64_vec(), &small.to_f64_vec(), 1e-13));
    }
}
