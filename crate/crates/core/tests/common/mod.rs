//! Reference implementations used as test oracles. They share nothing with
//! the library beyond the definitions: complex matrices come from
//! `num-complex`, pulses from a Taylor-series exponential of the Hamiltonian,
//! and toggling axes from explicit conjugation by the ideal pulses.

#![allow(dead_code)]

use num_complex::Complex64 as C;
use std::f64::consts::PI;

pub type M = [[C; 2]; 2];

pub const I2: M = [
    [C::new(1.0, 0.0), C::new(0.0, 0.0)],
    [C::new(0.0, 0.0), C::new(1.0, 0.0)],
];

pub fn mul(a: &M, b: &M) -> M {
    let mut r = [[C::new(0.0, 0.0); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            r[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    r
}

pub fn add(a: &M, b: &M) -> M {
    [
        [a[0][0] + b[0][0], a[0][1] + b[0][1]],
        [a[1][0] + b[1][0], a[1][1] + b[1][1]],
    ]
}

pub fn scale(a: &M, k: C) -> M {
    [[a[0][0] * k, a[0][1] * k], [a[1][0] * k, a[1][1] * k]]
}

pub fn dagger(a: &M) -> M {
    [[a[0][0].conj(), a[1][0].conj()], [a[0][1].conj(), a[1][1].conj()]]
}

/// `cosφ σx + sinφ σy + z σz` scaled by the given weights.
pub fn pauli(x: f64, y: f64, z: f64) -> M {
    [[C::new(z, 0.0), C::new(x, -y)], [C::new(x, y), C::new(-z, 0.0)]]
}

/// Matrix exponential by scaling and squaring around a truncated Taylor series.
pub fn expm(a: &M) -> M {
    let norm: f64 = a.iter().flatten().map(|z| z.norm()).sum();
    let mut squarings = 0;
    let mut k = 1.0;
    while norm * k > 0.25 {
        k *= 0.5;
        squarings += 1;
    }
    let a = scale(a, C::new(k, 0.0));
    let mut term = I2;
    let mut sum = I2;
    for n in 1..=24 {
        term = scale(&mul(&term, &a), C::new(1.0 / n as f64, 0.0));
        sum = add(&sum, &term);
    }
    for _ in 0..squarings {
        sum = mul(&sum, &sum);
    }
    sum
}

/// `exp(−i(θ/2)[(1+ε)σ_φ + fσz])`.
pub fn pulse(theta: f64, phi: f64, eps: f64, f: f64) -> M {
    let h = pauli((1.0 + eps) * phi.cos(), (1.0 + eps) * phi.sin(), f);
    expm(&scale(&h, C::new(0.0, -theta / 2.0)))
}

/// `U_N ⋯ U_1` for π pulses with the given phases.
pub fn product(phases: &[f64], eps: f64, f: f64) -> M {
    phases.iter().fold(I2, |acc, &p| mul(&pulse(PI, p, eps, f), &acc))
}

pub fn fidelity(a: &M, b: &M) -> f64 {
    let d = dagger(a);
    let t = mul(&d, b);
    ((t[0][0] + t[1][1]).norm() / 2.0).min(1.0)
}

pub fn max_diff(a: &M, b: &M) -> f64 {
    a.iter()
        .flatten()
        .zip(b.iter().flatten())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// Library layout `[re00, im00, re01, im01, re10, im10, re11, im11]`.
pub fn from_array(v: [f64; 8]) -> M {
    [
        [C::new(v[0], v[1]), C::new(v[2], v[3])],
        [C::new(v[4], v[5]), C::new(v[6], v[7])],
    ]
}

/// Toggling-frame axis angles: pulse `j`'s axis conjugated by the ideal
/// pulses applied before it, `P_{<j}† σ_{φ_j} P_{<j}`.
pub fn toggling_axes(phases: &[f64]) -> Vec<f64> {
    let mut before = I2;
    let mut out = Vec::with_capacity(phases.len());
    for &p in phases {
        let s = mul(&dagger(&before), &mul(&pauli(p.cos(), p.sin(), 0.0), &before));
        // s = x σx + y σy: read x and y back from the off-diagonal entry.
        out.push(s[1][0].im.atan2(s[1][0].re));
        before = mul(&pulse(PI, p, 0.0, 0.0), &before);
    }
    out
}

/// Angular distance modulo 2π.
pub fn angle_diff(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(2.0 * PI);
    d.min(2.0 * PI - d)
}

/// `−(1/4) Σ_j Σ_{k<j} sin(a_j − a_k)` by direct double sum.
pub fn delta2_bruteforce(toggling: &[f64]) -> f64 {
    let mut s = 0.0;
    for j in 0..toggling.len() {
        for k in 0..j {
            s += (toggling[j] - toggling[k]).sin();
        }
    }
    -s / 4.0
}
