//! 2×2 unitary arithmetic over [`Real`] scalars.
//!
//! Rotations follow `θ_φ = exp(-iθσ_φ/2)` with `σ_φ = cosφ σx + sinφ σy`.
//! Lists of pulses are always given in application order; [`compose`]
//! returns the product with the last-applied pulse leftmost.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};
use crate::scalar::{Precision, Real};

#[derive(Clone, Debug, PartialEq)]
pub struct Complex<S> {
    pub re: S,
    pub im: S,
}

impl<S: Real> Complex<S> {
    pub fn new(re: S, im: S) -> Self {
        Complex { re, im }
    }

    pub fn zero(prec: Precision) -> Self {
        Complex::new(S::zero(prec), S::zero(prec))
    }

    pub fn conj(&self) -> Self {
        Complex::new(self.re.clone(), -self.im.clone())
    }

    pub fn norm_sqr(&self) -> S {
        self.re.clone() * self.re.clone() + self.im.clone() * self.im.clone()
    }

    pub fn abs(&self) -> S {
        self.norm_sqr().sqrt()
    }

    pub fn scale(&self, k: &S) -> Self {
        Complex::new(self.re.clone() * k.clone(), self.im.clone() * k.clone())
    }
}

impl<S: Real> Add for Complex<S> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Complex::new(self.re + rhs.re, self.im + rhs.im)
    }
}

impl<S: Real> Sub for Complex<S> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Complex::new(self.re - rhs.re, self.im - rhs.im)
    }
}

impl<S: Real> Mul for Complex<S> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        let re = self.re.clone() * rhs.re.clone() - self.im.clone() * rhs.im.clone();
        let im = self.re * rhs.im + self.im * rhs.re;
        Complex::new(re, im)
    }
}

impl<S: Real> Neg for Complex<S> {
    type Output = Self;
    fn neg(self) -> Self {
        Complex::new(-self.re, -self.im)
    }
}

/// A 2×2 complex matrix, unitary by construction.
#[derive(Clone, Debug, PartialEq)]
pub struct Unitary2<S> {
    m: [[Complex<S>; 2]; 2],
}

impl<S: Real> Unitary2<S> {
    /// Wraps raw entries. Unitarity is the caller's responsibility; see
    /// [`Unitary2::unitarity_error`].
    pub fn from_entries(m: [[Complex<S>; 2]; 2]) -> Self {
        Unitary2 { m }
    }

    pub fn identity(prec: Precision) -> Self {
        let one = Complex::new(S::one(prec), S::zero(prec));
        let zero = Complex::zero(prec);
        Unitary2 {
            m: [[one.clone(), zero.clone()], [zero, one]],
        }
    }

    /// `c·I − i·s·(n·σ)` for a unit axis `n`.
    pub(crate) fn from_axis(c: &S, s: &S, nx: &S, ny: &S, nz: &S) -> Self {
        let sx = s.clone() * nx.clone();
        let sy = s.clone() * ny.clone();
        let sz = s.clone() * nz.clone();
        Unitary2 {
            m: [
                [
                    Complex::new(c.clone(), -sz.clone()),
                    Complex::new(-sy.clone(), -sx.clone()),
                ],
                [Complex::new(sy, -sx), Complex::new(c.clone(), sz)],
            ],
        }
    }

    pub fn entry(&self, row: usize, col: usize) -> &Complex<S> {
        &self.m[row][col]
    }

    pub fn entries(&self) -> &[[Complex<S>; 2]; 2] {
        &self.m
    }

    pub fn precision(&self) -> Precision {
        self.m[0][0].re.precision()
    }

    pub fn adjoint(&self) -> Self {
        let m = &self.m;
        Unitary2 {
            m: [[m[0][0].conj(), m[1][0].conj()], [m[0][1].conj(), m[1][1].conj()]],
        }
    }

    /// Matrix product `self · rhs` (apply `rhs` first).
    pub fn matmul(&self, rhs: &Self) -> Self {
        let a = &self.m;
        let b = &rhs.m;
        let e = |i: usize, j: usize| a[i][0].clone() * b[0][j].clone() + a[i][1].clone() * b[1][j].clone();
        Unitary2 {
            m: [[e(0, 0), e(0, 1)], [e(1, 0), e(1, 1)]],
        }
    }

    pub fn trace(&self) -> Complex<S> {
        self.m[0][0].clone() + self.m[1][1].clone()
    }

    pub fn det(&self) -> Complex<S> {
        self.m[0][0].clone() * self.m[1][1].clone() - self.m[0][1].clone() * self.m[1][0].clone()
    }

    pub fn scale(&self, k: &Complex<S>) -> Self {
        let m = &self.m;
        Unitary2 {
            m: [
                [k.clone() * m[0][0].clone(), k.clone() * m[0][1].clone()],
                [k.clone() * m[1][0].clone(), k.clone() * m[1][1].clone()],
            ],
        }
    }

    /// Largest entrywise modulus of `self − other`.
    pub fn max_abs_diff(&self, other: &Self) -> S {
        let prec = self.precision();
        let mut worst = S::zero(prec);
        for i in 0..2 {
            for j in 0..2 {
                let d = (self.m[i][j].clone() - other.m[i][j].clone()).abs();
                worst = worst.max(d);
            }
        }
        worst
    }

    /// `max |(U†U − I)_ij|`.
    pub fn unitarity_error(&self) -> S {
        self.adjoint()
            .matmul(self)
            .max_abs_diff(&Unitary2::identity(self.precision()))
    }

    /// Entries as `[re00, im00, re01, im01, re10, im10, re11, im11]`.
    pub fn to_f64_array(&self) -> [f64; 8] {
        let m = &self.m;
        [
            m[0][0].re.to_f64(),
            m[0][0].im.to_f64(),
            m[0][1].re.to_f64(),
            m[0][1].im.to_f64(),
            m[1][0].re.to_f64(),
            m[1][0].im.to_f64(),
            m[1][1].re.to_f64(),
            m[1][1].im.to_f64(),
        ]
    }
}

impl<S: Real> fmt::Display for Unitary2<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = |z: &Complex<S>| format!("{:+.6}{:+.6}i", z.re.to_f64(), z.im.to_f64());
        write!(
            f,
            "[[{}, {}], [{}, {}]]",
            c(&self.m[0][0]),
            c(&self.m[0][1]),
            c(&self.m[1][0]),
            c(&self.m[1][1])
        )
    }
}

/// Amplitude error fraction `epsilon` and off-resonance fraction `f`.
#[derive(Clone, Debug, PartialEq)]
pub struct ErrorModel<S> {
    pub epsilon: S,
    pub f: S,
}

impl<S: Real> ErrorModel<S> {
    pub fn new(epsilon: S, f: S) -> Self {
        ErrorModel { epsilon, f }
    }

    pub fn none(prec: Precision) -> Self {
        ErrorModel::new(S::zero(prec), S::zero(prec))
    }

    pub fn amplitude(epsilon: S) -> Self {
        let f = epsilon.lit(0.0);
        ErrorModel { epsilon, f }
    }

    pub fn off_resonance(f: S) -> Self {
        let epsilon = f.lit(0.0);
        ErrorModel { epsilon, f }
    }

    pub fn is_error_free(&self) -> bool {
        self.epsilon.is_zero() && self.f.is_zero()
    }
}

/// Rotation vector `n`; the generator is `(n·σ)/2` and `|n|` is the angle.
#[derive(Clone, Debug, PartialEq)]
pub struct AxisAngle<S> {
    pub nx: S,
    pub ny: S,
    pub nz: S,
}

impl<S: Real> AxisAngle<S> {
    pub fn new(nx: S, ny: S, nz: S) -> Self {
        AxisAngle { nx, ny, nz }
    }

    pub fn zero(prec: Precision) -> Self {
        AxisAngle::new(S::zero(prec), S::zero(prec), S::zero(prec))
    }

    pub fn norm(&self) -> S {
        (self.nx.clone() * self.nx.clone() + self.ny.clone() * self.ny.clone() + self.nz.clone() * self.nz.clone())
            .sqrt()
    }

    /// Length of the xy-plane projection.
    pub fn xy_norm(&self) -> S {
        (self.nx.clone() * self.nx.clone() + self.ny.clone() * self.ny.clone()).sqrt()
    }

    pub fn scale(&self, k: &S) -> Self {
        AxisAngle::new(
            self.nx.clone() * k.clone(),
            self.ny.clone() * k.clone(),
            self.nz.clone() * k.clone(),
        )
    }

    pub fn add(&self, other: &Self) -> Self {
        AxisAngle::new(
            self.nx.clone() + other.nx.clone(),
            self.ny.clone() + other.ny.clone(),
            self.nz.clone() + other.nz.clone(),
        )
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(&other.nx.lit(-1.0)))
    }

    /// `exp(−i n·σ/2)`.
    pub fn exp(&self) -> Unitary2<S> {
        let prec = self.nx.precision();
        let angle = self.norm();
        if angle.is_zero() {
            return Unitary2::identity(prec);
        }
        let (s, c) = (angle.clone() / angle.lit(2.0)).sin_cos();
        Unitary2::from_axis(
            &c,
            &s,
            &(self.nx.clone() / angle.clone()),
            &(self.ny.clone() / angle.clone()),
            &(self.nz.clone() / angle),
        )
    }

    pub fn to_f64_array(&self) -> [f64; 3] {
        [self.nx.to_f64(), self.ny.to_f64(), self.nz.to_f64()]
    }
}

fn check_finite<S: Real>(x: &S, what: &'static str) -> Result<()> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(Error::NonFinite(what))
    }
}

/// `cos(θ/2)·I − i·sin(θ/2)·σ_φ`.
pub fn make_rotation<S: Real>(theta: &S, phi: &S) -> Result<Unitary2<S>> {
    check_finite(theta, "theta")?;
    check_finite(phi, "phi")?;
    let (sp, cp) = phi.sin_cos();
    Ok(rotation_on_axis(theta, &cp, &sp))
}

/// Rotation by `theta` about `(cos φ, sin φ, 0)` with the axis given directly.
pub(crate) fn rotation_on_axis<S: Real>(theta: &S, cos_phi: &S, sin_phi: &S) -> Unitary2<S> {
    let half = theta.clone() / theta.lit(2.0);
    let (s, c) = half.sin_cos();
    Unitary2::from_axis(&c, &s, cos_phi, sin_phi, &theta.lit(0.0))
}

/// Error-prone pulse `exp(−i(θ/2)[(1+ε)σ_φ + f σz])`.
///
/// With `f = 0` this is literally `make_rotation(θ(1+ε), φ)`.
pub fn make_pulse<S: Real>(theta: &S, phi: &S, err: &ErrorModel<S>) -> Result<Unitary2<S>> {
    check_finite(&err.epsilon, "epsilon")?;
    check_finite(&err.f, "f")?;
    if err.f.is_zero() {
        let scaled = theta.clone() * (theta.lit(1.0) + err.epsilon.clone());
        return make_rotation(&scaled, phi);
    }
    check_finite(theta, "theta")?;
    check_finite(phi, "phi")?;
    let (sp, cp) = phi.sin_cos();
    let detuned = DetunedPulse::new(theta, err);
    Ok(detuned.on_axis(&cp, &sp))
}

/// Shared pieces of an off-resonance pulse that do not depend on its phase.
pub(crate) struct DetunedPulse<S> {
    c: S,
    s: S,
    amp_over_r: S,
    f_over_r: S,
}

impl<S: Real> DetunedPulse<S> {
    pub(crate) fn new(theta: &S, err: &ErrorModel<S>) -> Self {
        let amp = theta.lit(1.0) + err.epsilon.clone();
        let r = (amp.clone() * amp.clone() + err.f.clone() * err.f.clone()).sqrt();
        let half = theta.clone() * r.clone() / theta.lit(2.0);
        let (s, c) = half.sin_cos();
        DetunedPulse {
            c,
            s,
            amp_over_r: amp / r.clone(),
            f_over_r: err.f.clone() / r,
        }
    }

    pub(crate) fn on_axis(&self, cos_phi: &S, sin_phi: &S) -> Unitary2<S> {
        Unitary2::from_axis(
            &self.c,
            &self.s,
            &(self.amp_over_r.clone() * cos_phi.clone()),
            &(self.amp_over_r.clone() * sin_phi.clone()),
            &self.f_over_r,
        )
    }
}

/// Product of pulses given in application order: `U_N ⋯ U_2 U_1`.
pub fn compose<S: Real>(pulses: &[Unitary2<S>]) -> Result<Unitary2<S>> {
    let (first, rest) = pulses.split_first().ok_or(Error::EmptyComposition)?;
    Ok(rest.iter().fold(first.clone(), |acc, u| u.matmul(&acc)))
}

/// `|tr(U†V)|/2`, clamped to `[0, 1]`.
pub fn fidelity<S: Real>(u: &Unitary2<S>, v: &Unitary2<S>) -> S {
    let mut tr = Complex::zero(u.precision());
    for i in 0..2 {
        for j in 0..2 {
            tr = tr + u.m[i][j].conj() * v.m[i][j].clone();
        }
    }
    let f = tr.abs() / tr.re.lit(2.0);
    let one = f.lit(1.0);
    if f > one {
        one
    } else {
        f
    }
}

/// Rotation vector `n` with `|n| < π` and `U = e^{iγ}·(±exp(−i n·σ/2))`.
///
/// Any global phase is removed first; the sign branch is the one whose
/// identity component is non-negative. Angle exactly π is rejected.
pub fn principal_log<S: Real>(u: &Unitary2<S>) -> Result<AxisAngle<S>> {
    let prec = u.precision();
    let det = u.det();
    let gamma = det.im.atan2(&det.re) / det.re.lit(2.0);
    let su = if gamma.is_zero() {
        u.clone()
    } else {
        let (s, c) = gamma.sin_cos();
        u.scale(&Complex::new(c, -s))
    };
    let m = &su.m;
    let two = S::from_f64(2.0, prec);
    let mut c = (m[0][0].re.clone() + m[1][1].re.clone()) / two.clone();
    let mut sx = -(m[0][1].im.clone() + m[1][0].im.clone()) / two.clone();
    let mut sy = (m[1][0].re.clone() - m[0][1].re.clone()) / two.clone();
    let mut sz = (m[1][1].im.clone() - m[0][0].im.clone()) / two;
    let tol = S::epsilon(prec) * S::from_f64(10.0, prec);
    if c.abs() <= tol {
        return Err(Error::AmbiguousLog);
    }
    if c.is_negative() {
        c = -c;
        sx = -sx;
        sy = -sy;
        sz = -sz;
    }
    let sn = (sx.clone() * sx.clone() + sy.clone() * sy.clone() + sz.clone() * sz.clone()).sqrt();
    if sn.is_zero() {
        return Ok(AxisAngle::zero(prec));
    }
    let angle = sn.atan2(&c) * sn.lit(2.0);
    let k = angle / sn;
    Ok(AxisAngle::new(sx * k.clone(), sy * k.clone(), sz * k))
}
