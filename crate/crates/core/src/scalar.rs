//! Real scalars at a configurable decimal precision.
//!
//! Two backends implement [`Real`]: plain `f64` for interactive work and
//! [`BigReal`], an arbitrary-precision binary float whose working precision
//! is fixed when the value is created. Every operation on two `BigReal`s
//! requires both operands to carry the same precision; mixing is a bug and
//! panics.

use std::cell::RefCell;
use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use astro_float::{BigFloat, Consts, Radix, RoundingMode};

/// Working precision in significant decimal digits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Precision(u32);

impl Precision {
    /// Machine double.
    pub const DOUBLE: Precision = Precision(16);
    /// Default for the high-precision mode.
    pub const HIGH: Precision = Precision(60);

    pub fn digits(digits: u32) -> Self {
        Precision(digits.max(1))
    }

    pub fn get(self) -> u32 {
        self.0
    }

    /// True when machine doubles carry enough digits.
    pub fn is_double(self) -> bool {
        self.0 <= Self::DOUBLE.0
    }

    /// Mantissa bits used by the high-precision backend, including guard bits.
    pub fn bits(self) -> usize {
        let raw = (f64::from(self.0) * std::f64::consts::LOG2_10).ceil() as usize + 32;
        raw.div_ceil(64) * 64
    }
}

impl Default for Precision {
    fn default() -> Self {
        Precision::DOUBLE
    }
}

impl fmt::Display for Precision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} digits", self.0)
    }
}

/// Real-number operations needed by the propagator and analysis code.
pub trait Real:
    Clone
    + fmt::Debug
    + fmt::Display
    + PartialEq
    + PartialOrd
    + Send
    + Sync
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn from_f64(x: f64, prec: Precision) -> Self;
    /// Parses a decimal literal at the given precision.
    fn parse(s: &str, prec: Precision) -> Option<Self>;
    fn precision(&self) -> Precision;
    fn to_f64(&self) -> f64;
    /// Decimal rendering with `digits` significant digits in scientific form.
    fn to_sci(&self, digits: u32) -> String;

    fn pi(prec: Precision) -> Self;
    /// Relative spacing of representable values at this precision.
    fn epsilon(prec: Precision) -> Self;

    fn sqrt(&self) -> Self;
    fn sin(&self) -> Self;
    fn cos(&self) -> Self;
    fn atan(&self) -> Self;
    fn asin(&self) -> Self;
    fn acos(&self) -> Self;
    fn exp(&self) -> Self;
    fn ln(&self) -> Self;
    fn abs(&self) -> Self;
    fn round(&self) -> Self;
    fn is_finite(&self) -> bool;
    fn is_zero(&self) -> bool;

    fn zero(prec: Precision) -> Self {
        Self::from_f64(0.0, prec)
    }

    fn one(prec: Precision) -> Self {
        Self::from_f64(1.0, prec)
    }

    /// A constant at the same precision as `self`.
    fn lit(&self, x: f64) -> Self {
        Self::from_f64(x, self.precision())
    }

    fn sin_cos(&self) -> (Self, Self) {
        (self.sin(), self.cos())
    }

    fn powi(&self, n: u32) -> Self {
        let mut acc = self.lit(1.0);
        let mut base = self.clone();
        let mut n = n;
        while n > 0 {
            if n & 1 == 1 {
                acc = acc * base.clone();
            }
            base = base.clone() * base;
            n >>= 1;
        }
        acc
    }

    fn log10(&self) -> Self {
        self.ln() / self.lit(10.0).ln()
    }

    fn max(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }

    /// Four-quadrant arctangent of `self / x`.
    fn atan2(&self, x: &Self) -> Self {
        let y = self;
        let prec = y.precision();
        if x.is_zero() && y.is_zero() {
            return Self::zero(prec);
        }
        let pi = Self::pi(prec);
        let half_pi = pi.clone() / y.lit(2.0);
        if y.abs() <= x.abs() {
            let base = (y.clone() / x.clone()).atan();
            if !x.is_negative() {
                base
            } else if !y.is_negative() {
                base + pi
            } else {
                base - pi
            }
        } else {
            let base = (x.clone() / y.clone()).atan();
            if y.is_negative() {
                -half_pi - base
            } else {
                half_pi - base
            }
        }
    }

    fn is_negative(&self) -> bool {
        *self < self.lit(0.0)
    }
}

impl Real for f64 {
    fn from_f64(x: f64, _prec: Precision) -> Self {
        x
    }

    fn parse(s: &str, _prec: Precision) -> Option<Self> {
        s.trim().parse().ok()
    }

    fn precision(&self) -> Precision {
        Precision::DOUBLE
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn to_sci(&self, digits: u32) -> String {
        let digits = digits.clamp(1, 17) as usize;
        format!("{:.*e}", digits - 1, self)
    }

    fn pi(_prec: Precision) -> Self {
        std::f64::consts::PI
    }

    fn epsilon(_prec: Precision) -> Self {
        f64::EPSILON
    }

    fn sqrt(&self) -> Self {
        f64::sqrt(*self)
    }
    fn sin(&self) -> Self {
        f64::sin(*self)
    }
    fn cos(&self) -> Self {
        f64::cos(*self)
    }
    fn atan(&self) -> Self {
        f64::atan(*self)
    }
    fn asin(&self) -> Self {
        f64::asin(*self)
    }
    fn acos(&self) -> Self {
        f64::acos(*self)
    }
    fn exp(&self) -> Self {
        f64::exp(*self)
    }
    fn ln(&self) -> Self {
        f64::ln(*self)
    }
    fn abs(&self) -> Self {
        f64::abs(*self)
    }
    fn round(&self) -> Self {
        f64::round(*self)
    }
    fn is_finite(&self) -> bool {
        f64::is_finite(*self)
    }
    fn is_zero(&self) -> bool {
        *self == 0.0
    }
    fn sin_cos(&self) -> (Self, Self) {
        f64::sin_cos(*self)
    }
    fn atan2(&self, x: &Self) -> Self {
        f64::atan2(*self, *x)
    }
    fn log10(&self) -> Self {
        f64::log10(*self)
    }
}

const RM: RoundingMode = RoundingMode::ToEven;

thread_local! {
    // Memo cache for pi, ln2 and friends; holds no observable state.
    static CONSTS: RefCell<Consts> = RefCell::new(Consts::new().expect("astro-float constants cache"));
}

fn with_consts<T>(f: impl FnOnce(&mut Consts) -> T) -> T {
    CONSTS.with(|cc| f(&mut cc.borrow_mut()))
}

/// Arbitrary-precision real number.
#[derive(Clone)]
pub struct BigReal {
    value: BigFloat,
    prec: Precision,
}

impl BigReal {
    fn wrap(&self, value: BigFloat) -> Self {
        BigReal { value, prec: self.prec }
    }

    fn bits(&self) -> usize {
        self.prec.bits()
    }

    fn same(&self, other: &Self) {
        assert_eq!(self.prec, other.prec, "mixed precisions in one computation");
    }

    pub fn as_bigfloat(&self) -> &BigFloat {
        &self.value
    }
}

impl fmt::Debug for BigReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BigReal({}, {})", self.to_sci(self.prec.get()), self.prec)
    }
}

impl fmt::Display for BigReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_sci(self.prec.get()))
    }
}

impl PartialEq for BigReal {
    fn eq(&self, other: &Self) -> bool {
        self.value == other.value
    }
}

impl PartialOrd for BigReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.value.partial_cmp(&other.value)
    }
}

macro_rules! big_binop {
    ($trait:ident, $method:ident) => {
        impl $trait for BigReal {
            type Output = BigReal;
            fn $method(self, rhs: BigReal) -> BigReal {
                self.same(&rhs);
                let v = self.value.$method(&rhs.value, self.bits(), RM);
                BigReal {
                    value: v,
                    prec: self.prec,
                }
            }
        }
    };
}

big_binop!(Add, add);
big_binop!(Sub, sub);
big_binop!(Mul, mul);
big_binop!(Div, div);

impl Neg for BigReal {
    type Output = BigReal;
    fn neg(self) -> BigReal {
        let v = self.value.neg();
        BigReal {
            value: v,
            prec: self.prec,
        }
    }
}

/// Rounds a decimal mantissa string `d.ddd…` to `digits` significant digits.
fn round_digit_string(mantissa: &str, exp: i64, digits: usize) -> (String, i64) {
    let mut ds: Vec<u8> = mantissa.bytes().filter(u8::is_ascii_digit).map(|b| b - b'0').collect();
    let mut exp = exp;
    if ds.len() > digits {
        let round_up = ds[digits] >= 5;
        ds.truncate(digits);
        if round_up {
            let mut i = digits;
            loop {
                if i == 0 {
                    ds.insert(0, 1);
                    ds.truncate(digits);
                    exp += 1;
                    break;
                }
                i -= 1;
                if ds[i] == 9 {
                    ds[i] = 0;
                } else {
                    ds[i] += 1;
                    break;
                }
            }
        }
    }
    while ds.len() < digits {
        ds.push(0);
    }
    let mut out = String::with_capacity(digits + 1);
    for (i, d) in ds.iter().enumerate() {
        if i == 1 {
            out.push('.');
        }
        out.push((b'0' + d) as char);
    }
    (out, exp)
}

impl Real for BigReal {
    fn from_f64(x: f64, prec: Precision) -> Self {
        BigReal {
            value: BigFloat::from_f64(x, prec.bits()),
            prec,
        }
    }

    fn parse(s: &str, prec: Precision) -> Option<Self> {
        let v = with_consts(|cc| BigFloat::parse(s.trim(), Radix::Dec, prec.bits(), RM, cc));
        if v.is_nan() || v.is_inf() {
            return None;
        }
        Some(BigReal { value: v, prec })
    }

    fn precision(&self) -> Precision {
        self.prec
    }

    fn to_f64(&self) -> f64 {
        if self.value.is_nan() {
            return f64::NAN;
        }
        if self.value.is_inf_pos() {
            return f64::INFINITY;
        }
        if self.value.is_inf_neg() {
            return f64::NEG_INFINITY;
        }
        let Some((words, _, sign, exp, _)) = self.value.as_raw_parts() else {
            return f64::NAN;
        };
        let Some(&top) = words.last() else {
            return 0.0;
        };
        if top == 0 {
            return 0.0;
        }
        let next = if words.len() > 1 { words[words.len() - 2] } else { 0 };
        // Mantissa in [0.5, 1) times 2^exp; scaling last keeps subnormals.
        let mantissa = (top as f64 + next as f64 / 18446744073709551616.0) / 18446744073709551616.0;
        let mag = mantissa * 2f64.powi(exp.clamp(-1100, 1100));
        if sign.is_negative() {
            -mag
        } else {
            mag
        }
    }

    fn to_sci(&self, digits: u32) -> String {
        if self.value.is_zero() {
            return format!("{:.*e}", digits.saturating_sub(1) as usize, 0.0f64);
        }
        let raw = with_consts(|cc| self.value.format(Radix::Dec, RM, cc)).unwrap_or_else(|_| "NaN".to_string());
        let (sign, body) = match raw.strip_prefix('-') {
            Some(rest) => ("-", rest),
            None => ("", raw.as_str()),
        };
        let Some((mant, exp)) = body.split_once('e') else {
            return raw;
        };
        let exp: i64 = exp.parse().unwrap_or(0);
        let (m, e) = round_digit_string(mant, exp, digits.max(1) as usize);
        format!("{sign}{m}e{e}")
    }

    fn pi(prec: Precision) -> Self {
        BigReal {
            value: with_consts(|cc| cc.pi(prec.bits(), RM)),
            prec,
        }
    }

    fn epsilon(prec: Precision) -> Self {
        let one = BigFloat::from_f64(1.0, prec.bits());
        let two = BigFloat::from_f64(2.0, prec.bits());
        BigReal {
            value: one.div(&two.powi(prec.bits(), prec.bits(), RM), prec.bits(), RM),
            prec,
        }
    }

    fn sqrt(&self) -> Self {
        self.wrap(self.value.sqrt(self.bits(), RM))
    }
    fn sin(&self) -> Self {
        self.wrap(with_consts(|cc| self.value.sin(self.bits(), RM, cc)))
    }
    fn cos(&self) -> Self {
        self.wrap(with_consts(|cc| self.value.cos(self.bits(), RM, cc)))
    }
    fn atan(&self) -> Self {
        self.wrap(with_consts(|cc| self.value.atan(self.bits(), RM, cc)))
    }
    fn asin(&self) -> Self {
        self.wrap(with_consts(|cc| self.value.asin(self.bits(), RM, cc)))
    }
    fn acos(&self) -> Self {
        self.wrap(with_consts(|cc| self.value.acos(self.bits(), RM, cc)))
    }
    fn exp(&self) -> Self {
        self.wrap(with_consts(|cc| self.value.exp(self.bits(), RM, cc)))
    }
    fn ln(&self) -> Self {
        self.wrap(with_consts(|cc| self.value.ln(self.bits(), RM, cc)))
    }
    fn abs(&self) -> Self {
        self.wrap(self.value.abs())
    }
    fn round(&self) -> Self {
        let half = BigFloat::from_f64(0.5, self.bits());
        let shifted = self.value.add(&half, self.bits(), RM);
        self.wrap(shifted.floor())
    }
    fn is_finite(&self) -> bool {
        !(self.value.is_nan() || self.value.is_inf())
    }
    fn is_zero(&self) -> bool {
        self.value.is_zero()
    }
}
