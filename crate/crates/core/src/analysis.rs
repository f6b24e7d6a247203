//! Error-propagator analysis: analytic first/second-order terms, numeric
//! extraction of the error generator's Taylor series, infidelity-order fits
//! and fidelity sweeps.
//!
//! The error propagator of a sequence is the residual unitary `E` with
//! `V = P·E`, where `V` is the error-prone propagator and `P` the error-free
//! one. For pure amplitude errors `E` is also the toggling-frame product of
//! rotations by `δ = επ` about the axes `φ'_j`; both routes are computed and
//! cross-checked.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{Precision, Real};
use crate::sequences::{target_not, PhaseSequence, PulseTrain};
use crate::su2::{fidelity, principal_log, AxisAngle, ErrorModel, Unitary2};

/// Which error parameter an analysis varies.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ErrorKind {
    #[default]
    Amplitude,
    #[serde(rename = "offresonance")]
    OffResonance,
}

impl ErrorKind {
    pub fn model<S: Real>(self, x: S) -> ErrorModel<S> {
        match self {
            ErrorKind::Amplitude => ErrorModel::amplitude(x),
            ErrorKind::OffResonance => ErrorModel::off_resonance(x),
        }
    }
}

impl fmt::Display for ErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ErrorKind::Amplitude => "amplitude",
            ErrorKind::OffResonance => "offresonance",
        })
    }
}

/// Construction route for the error propagator.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ErrorRoute {
    /// Product of `δ`-rotations about the toggling-frame axes (amplitude errors only).
    Toggling,
    /// `P†·V` with `P` the error-free propagator.
    Direct,
}

/// Error propagator built by one specific route.
pub fn error_propagator_via<S: Real>(
    seq: &PhaseSequence<S>,
    err: &ErrorModel<S>,
    route: ErrorRoute,
) -> Result<Unitary2<S>> {
    match route {
        ErrorRoute::Direct => {
            let train = PulseTrain::new(&seq.applied())?;
            Ok(train.ideal().adjoint().matmul(&train.propagator(err)))
        }
        ErrorRoute::Toggling => {
            if !err.f.is_zero() {
                return Err(Error::InvalidParameter(
                    "the toggling-frame factorization holds for amplitude errors only".into(),
                ));
            }
            let delta = err.epsilon.clone() * S::pi(err.epsilon.precision());
            PulseTrain::toggling_product(&seq.toggling(), &delta)
        }
    }
}

/// Error propagator of `seq` under `err`.
///
/// For `f = 0` both routes are evaluated and must agree entrywise to within
/// `100·N·ε_mach`; the toggling-frame product is returned. For `f ≠ 0` the
/// direct route is used.
pub fn error_propagator<S: Real>(seq: &PhaseSequence<S>, err: &ErrorModel<S>) -> Result<Unitary2<S>> {
    let direct = error_propagator_via(seq, err, ErrorRoute::Direct)?;
    if !err.f.is_zero() {
        return Ok(direct);
    }
    let toggling = error_propagator_via(seq, err, ErrorRoute::Toggling)?;
    let deviation = toggling.max_abs_diff(&direct);
    let prec = err.epsilon.precision();
    let tolerance = S::epsilon(prec) * S::from_f64(100.0 * seq.len() as f64, prec);
    if deviation > tolerance {
        return Err(Error::RouteMismatch {
            deviation: deviation.to_f64(),
            tolerance: tolerance.to_f64(),
        });
    }
    Ok(toggling)
}

/// Pauli coefficients `(x, y, z)` of an error term `x σx + y σy + z σz`.
#[derive(Clone, Debug, PartialEq)]
pub struct PauliTerm<S> {
    pub x: S,
    pub y: S,
    pub z: S,
}

impl<S: Real> PauliTerm<S> {
    /// Same term as a rotation vector, whose generator is `(n·σ)/2`.
    pub fn as_rotation_vector(&self) -> AxisAngle<S> {
        let two = self.x.lit(2.0);
        AxisAngle::new(
            self.x.clone() * two.clone(),
            self.y.clone() * two.clone(),
            self.z.clone() * two,
        )
    }

    pub fn norm(&self) -> S {
        (self.x.clone() * self.x.clone() + self.y.clone() * self.y.clone() + self.z.clone() * self.z.clone()).sqrt()
    }
}

/// First-order error term `Δ1 = (δ/2) Σ_j σ_{φ'_j}`.
pub fn delta1<S: Real>(seq: &PhaseSequence<S>, delta: &S) -> PauliTerm<S> {
    let tog = seq.toggling();
    let zero = delta.lit(0.0);
    let (sx, sy) = tog.phases().iter().fold((zero.clone(), zero.clone()), |(ax, ay), p| {
        let (s, c) = p.sin_cos();
        (ax + c, ay + s)
    });
    let half = delta.clone() / delta.lit(2.0);
    PauliTerm {
        x: sx * half.clone(),
        y: sy * half,
        z: zero,
    }
}

/// Second-order error term: the σz coefficient
/// `−(δ²/4) Σ_j Σ_{k<j} sin(φ'_j − φ'_k)`.
pub fn delta2<S: Real>(seq: &PhaseSequence<S>, delta: &S) -> S {
    let tog = seq.toggling();
    let zero = delta.lit(0.0);
    // Σ_{k<j} sin(a_j − a_k) = sin a_j Σ_{k<j} cos a_k − cos a_j Σ_{k<j} sin a_k
    let mut cos_sum = zero.clone();
    let mut sin_sum = zero.clone();
    let mut total = zero;
    for p in tog.phases() {
        let (s, c) = p.sin_cos();
        total = total + s.clone() * cos_sum.clone() - c.clone() * sin_sum.clone();
        cos_sum = cos_sum + c;
        sin_sum = sin_sum + s;
    }
    -(delta.clone() * delta.clone() / delta.lit(4.0)) * total
}

/// Largest supported Taylor order for [`generator_taylor`].
pub const MAX_TAYLOR_ORDER: usize = 16;

/// Taylor coefficients of the error generator, `n(x) ≈ Σ_k c_k x^k`, where
/// `x` is ε (amplitude) or f (off-resonance) and `n` is the rotation vector
/// of the error propagator.
#[derive(Clone, Debug)]
pub struct GeneratorSeries<S> {
    /// `terms[k-1]` is `c_k`.
    pub terms: Vec<AxisAngle<S>>,
    /// Estimated absolute error of each `|c_k|`.
    pub uncertainty: Vec<f64>,
    pub kind: ErrorKind,
    /// Stencil step `h`.
    pub step: f64,
    /// Condition estimate of the stencil system.
    pub condition: f64,
}

impl<S: Real> GeneratorSeries<S> {
    /// Expansion point; always zero.
    pub const EPSILON_REF: f64 = 0.0;

    pub fn max_order(&self) -> usize {
        self.terms.len()
    }

    /// `c_k` for `k ≥ 1`.
    pub fn term(&self, k: usize) -> &AxisAngle<S> {
        &self.terms[k - 1]
    }

    /// `c_k / π^k`, the coefficient of `δ^k` with `δ = επ`.
    pub fn term_in_delta(&self, k: usize) -> AxisAngle<S> {
        let pi = S::pi(self.terms[0].nx.precision());
        self.term(k).scale(&(pi.lit(1.0) / pi.powi(k as u32)))
    }

    /// True when `|c_k|` stands well clear of its uncertainty.
    pub fn is_resolvable(&self, k: usize) -> bool {
        let mag = self.term(k).norm().to_f64();
        mag > 0.0 && mag > 1e3 * self.uncertainty[k - 1]
    }

    pub fn resolvable_orders(&self) -> Vec<usize> {
        (1..=self.max_order()).filter(|&k| self.is_resolvable(k)).collect()
    }

    /// Lowest resolvable order, if any.
    pub fn leading_order(&self) -> Option<usize> {
        self.resolvable_orders().first().copied()
    }

    /// `|c_k,z| / |c_k|`.
    pub fn relative_z(&self, k: usize) -> f64 {
        let t = self.term(k);
        (t.nz.abs() / t.norm()).to_f64()
    }

    /// Partial sum `Σ_k c_k x^k`.
    pub fn reconstruct(&self, x: &S) -> AxisAngle<S> {
        let mut acc = AxisAngle::zero(x.precision());
        let mut power = x.clone();
        for t in &self.terms {
            acc = acc.add(&t.scale(&power));
            power = power * x.clone();
        }
        acc
    }
}

/// Solves `A·x = b` for several right-hand sides by Gaussian elimination with
/// partial pivoting; also returns `‖A‖₁‖A⁻¹‖₁`.
fn solve_with_condition<S: Real>(a: &[Vec<S>], rhs: &[Vec<S>]) -> (Vec<Vec<S>>, f64) {
    let n = a.len();
    let m = rhs[0].len();
    let prec = a[0][0].precision();
    // Augment with the identity to obtain the inverse for the condition estimate.
    let mut work: Vec<Vec<S>> = (0..n)
        .map(|i| {
            let mut row = a[i].clone();
            row.extend(rhs[i].iter().cloned());
            row.extend((0..n).map(|j| S::from_f64(if i == j { 1.0 } else { 0.0 }, prec)));
            row
        })
        .collect();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| {
                work[i][col]
                    .abs()
                    .partial_cmp(&work[j][col].abs())
                    .unwrap_or(std::cmp::Ordering::Equal)
            })
            .expect("non-empty column");
        work.swap(col, pivot);
        let p = work[col][col].clone();
        for v in work[col][col..].iter_mut() {
            *v = v.clone() / p.clone();
        }
        let pivot_row = work[col].clone();
        for (i, row) in work.iter_mut().enumerate() {
            if i == col {
                continue;
            }
            let factor = row[col].clone();
            if factor.is_zero() {
                continue;
            }
            for (v, pv) in row[col..].iter_mut().zip(&pivot_row[col..]) {
                *v = v.clone() - factor.clone() * pv.clone();
            }
        }
    }
    let norm1 = |cols: &dyn Fn(usize, usize) -> f64| -> f64 {
        (0..n)
            .map(|j| (0..n).map(|i| cols(i, j).abs()).sum::<f64>())
            .fold(0.0, f64::max)
    };
    let a_norm = norm1(&|i, j| a[i][j].to_f64());
    let inv_norm = norm1(&|i, j| work[i][n + m + j].to_f64());
    let solution = (0..n).map(|i| work[i][n..n + m].to_vec()).collect();
    (solution, a_norm * inv_norm)
}

fn prec_request<S: Real>(requested: Precision, seq: &PhaseSequence<S>) -> u32 {
    requested.get().min(seq.precision().get())
}

/// Raw stencil fit with step `h`: coefficients `c_1..c_K` and the condition estimate.
fn stencil_fit<S: Real>(
    seq: &PhaseSequence<S>,
    kind: ErrorKind,
    order: usize,
    h: &S,
) -> Result<(Vec<AxisAngle<S>>, f64)> {
    let prec = h.precision();
    let nodes = order;
    let mut odd = Vec::with_capacity(nodes);
    let mut even = Vec::with_capacity(nodes);
    for j in 1..=nodes {
        let x = h.clone() * S::from_f64(j as f64, prec);
        let plus = principal_log(&error_propagator(seq, &kind.model(x.clone()))?)?;
        let minus = principal_log(&error_propagator(seq, &kind.model(-x))?)?;
        let half = h.lit(0.5);
        let comps = |v: &AxisAngle<S>| [v.nx.clone(), v.ny.clone(), v.nz.clone()];
        let (p, m) = (comps(&plus), comps(&minus));
        odd.push(
            (0..3)
                .map(|c| (p[c].clone() - m[c].clone()) * half.clone())
                .collect::<Vec<_>>(),
        );
        even.push(
            (0..3)
                .map(|c| (p[c].clone() + m[c].clone()) * half.clone())
                .collect::<Vec<_>>(),
        );
    }
    // Node j contributes Σ_i a_i j^(2i−1) (odd) and Σ_i b_i j^(2i) (even),
    // with a_i = c_(2i−1) h^(2i−1) and b_i = c_(2i) h^(2i).
    let vander = |shift: u32| -> Vec<Vec<S>> {
        (1..=nodes)
            .map(|j| {
                (1..=nodes)
                    .map(|i| S::from_f64(j as f64, prec).powi(2 * i as u32 - shift))
                    .collect()
            })
            .collect()
    };
    let (odd_sol, cond_odd) = solve_with_condition(&vander(1), &odd);
    let (even_sol, cond_even) = solve_with_condition(&vander(0), &even);
    let mut terms = Vec::with_capacity(order);
    for k in 1..=order {
        let i = (k - 1) / 2;
        let row = if k % 2 == 1 { &odd_sol[i] } else { &even_sol[i] };
        let scale = h.lit(1.0) / h.powi(k as u32);
        terms.push(AxisAngle::new(
            row[0].clone() * scale.clone(),
            row[1].clone() * scale.clone(),
            row[2].clone() * scale,
        ));
    }
    Ok((terms, cond_odd.max(cond_even)))
}

/// Extracts `c_1..c_K` of the error generator by central differences.
///
/// The stencil uses `x ∈ {±h, …, ±K·h}` with `h = 10^(−D/(2K))` at `D`
/// working digits and fits odd and even parts separately (orders up to
/// `2K`); the first `K` coefficients are reported. A second fit at `2h`
/// supplies the uncertainty estimate.
///
/// `prec` is capped at the precision the sequence was built with.
pub fn generator_taylor<S: Real>(
    seq: &PhaseSequence<S>,
    kind: ErrorKind,
    order: usize,
    prec: Precision,
) -> Result<GeneratorSeries<S>> {
    if order == 0 || order > MAX_TAYLOR_ORDER {
        return Err(Error::InvalidParameter(format!(
            "taylor order must be in 1..={MAX_TAYLOR_ORDER}, got {order}"
        )));
    }
    let digits = prec_request(prec, seq);
    let prec = seq.precision();
    let h_exp = -f64::from(digits) / (2.0 * order as f64);
    let h_f64 = 10f64.powf(h_exp);
    let h = S::from_f64(h_f64, prec);
    let (terms, condition) = stencil_fit(seq, kind, order, &h)?;
    if condition * 10f64.powi(-(digits as i32)) > 1e-3 {
        return Err(Error::StencilConditioning { condition, digits });
    }
    let (coarse, _) = stencil_fit(seq, kind, order, &(h.clone() * h.lit(2.0)))?;
    let uncertainty = terms
        .iter()
        .zip(&coarse)
        .map(|(a, b)| a.sub(b).norm().to_f64())
        .collect();
    Ok(GeneratorSeries {
        terms,
        uncertainty,
        kind,
        step: h_f64,
        condition,
    })
}

/// Residual gate for trusting a fitted order, in log10 units.
pub const RESIDUAL_GATE: f64 = 0.05;
/// Ladder density for order fits.
pub const LADDER_POINTS_PER_DECADE: u32 = 40;
/// Fewest window points accepted for an order fit.
pub const MIN_WINDOW_POINTS: usize = 8;

/// Least-squares power-law fit of infidelity against error size.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrderEstimate {
    pub exponent: f64,
    pub rounded_order: i64,
    /// `c` in `1 − F ≈ c·x^exponent`.
    pub coefficient: f64,
    /// Smallest and largest error size used.
    pub window: (f64, f64),
    /// Max deviation of log10 infidelity from the fit line.
    pub residual: f64,
    pub precision: u32,
    pub points: usize,
    pub kind: ErrorKind,
    /// Infidelity band `[lo, hi]` that selected the window.
    pub infidelity_band: (f64, f64),
}

impl OrderEstimate {
    pub fn gate_passed(&self) -> bool {
        self.residual < RESIDUAL_GATE
    }

    /// The rounded order, only when the residual gate passes.
    pub fn reliable_order(&self) -> Option<i64> {
        self.gate_passed().then_some(self.rounded_order)
    }
}

/// Infidelity band `[10^(6−D), min(10^−4, 10^((2−D)/2))]` for `D` digits.
///
/// The upper edge sits at the log-midpoint of `[10^(6−D), 10^−4]` so the
/// window stays in the asymptotic regime for high-order sequences.
pub fn infidelity_band(prec: Precision) -> (f64, f64) {
    let d = f64::from(prec.get());
    let lo = 10f64.powf(6.0 - d);
    let hi = 10f64.powf((2.0 - d) / 2.0).min(1e-4);
    (lo, hi)
}

/// `1 − |tr(π_0†·V)|/2` at error size `x`.
fn infidelity_at<S: Real>(
    train: &PulseTrain<S>,
    target: &Unitary2<S>,
    kind: ErrorKind,
    x: f64,
    prec: Precision,
) -> f64 {
    let u = train.propagator(&kind.model(S::from_f64(x, prec)));
    (S::one(prec) - fidelity(target, &u)).to_f64()
}

/// Fits the infidelity order of `seq` against the NOT target.
///
/// Samples a geometric ladder of error sizes (40 per decade), takes the
/// contiguous run of samples whose infidelity lies in [`infidelity_band`]
/// starting from the small-error side, and fits log10 infidelity against
/// log10 error size.
///
/// Infidelity is measured against the sequence's own error-free propagator.
/// `prec` selects the band; it is capped at the precision the sequence was
/// built with.
pub fn infidelity_order<S: Real>(seq: &PhaseSequence<S>, kind: ErrorKind, prec: Precision) -> Result<OrderEstimate> {
    let digits = prec_request(prec, seq);
    let prec = seq.precision();
    let (lo, hi) = infidelity_band(Precision::digits(digits));
    let empty = |points| Error::EmptyWindow {
        points,
        needed: MIN_WINDOW_POINTS,
        lo,
        hi,
        digits,
    };
    if lo >= hi {
        return Err(empty(0));
    }
    let train = PulseTrain::new(&seq.applied())?;
    // For NOT sequences the ideal propagator is π_0 up to phase; using it
    // keeps the order meaningful for any other sequence too.
    let target = train.ideal();

    // Coarse decades downward until two consecutive ones sit below the band.
    let mut start = None;
    let mut below_prev = false;
    for k in 0..=digits as i32 {
        let x = 10f64.powi(-k);
        let below = infidelity_at(&train, &target, kind, x, prec) < lo;
        if below && below_prev {
            start = Some(k - 1);
            break;
        }
        below_prev = below;
    }
    let start = start.ok_or_else(|| empty(0))?;

    let m = f64::from(LADDER_POINTS_PER_DECADE);
    let mut samples: Vec<(f64, f64)> = Vec::new();
    let max_steps = (start as u32 + 1) * LADDER_POINTS_PER_DECADE;
    for i in 0..=max_steps {
        let log_x = -f64::from(start) + f64::from(i) / m;
        let x = 10f64.powf(log_x);
        let v = infidelity_at(&train, &target, kind, x, prec);
        if v < lo {
            if samples.is_empty() {
                continue;
            }
            break;
        }
        if v > hi {
            break;
        }
        samples.push((log_x, v.log10()));
    }
    if samples.len() < MIN_WINDOW_POINTS {
        return Err(empty(samples.len()));
    }

    let n = samples.len() as f64;
    let mx = samples.iter().map(|s| s.0).sum::<f64>() / n;
    let my = samples.iter().map(|s| s.1).sum::<f64>() / n;
    let sxy: f64 = samples.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = samples.iter().map(|(x, _)| (x - mx) * (x - mx)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual = samples
        .iter()
        .map(|(x, y)| (y - (slope * x + intercept)).abs())
        .fold(0.0, f64::max);
    Ok(OrderEstimate {
        exponent: slope,
        rounded_order: slope.round() as i64,
        coefficient: 10f64.powf(intercept),
        window: (10f64.powf(samples[0].0), 10f64.powf(samples[samples.len() - 1].0)),
        residual,
        precision: digits,
        points: samples.len(),
        kind,
        infidelity_band: (lo, hi),
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow<S> {
    pub epsilon: S,
    pub f: S,
    pub fidelity: S,
    pub infidelity: S,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepResult<S> {
    pub sequence_label: String,
    pub rows: Vec<SweepRow<S>>,
}

/// Fidelity against `π_0` on the grid `eps_grid × f_grid` (ε major).
pub fn fidelity_sweep<S: Real>(seq: &PhaseSequence<S>, eps_grid: &[S], f_grid: &[S]) -> Result<SweepResult<S>> {
    if eps_grid.is_empty() || f_grid.is_empty() {
        return Err(Error::InvalidParameter("sweep grids must be non-empty".into()));
    }
    let prec = seq.precision();
    let train = PulseTrain::new(&seq.applied())?;
    let target = target_not::<S>(prec);
    let mut rows = Vec::with_capacity(eps_grid.len() * f_grid.len());
    for eps in eps_grid {
        for f in f_grid {
            let err = ErrorModel::new(eps.clone(), f.clone());
            let fid = fidelity(&target, &train.propagator(&err));
            rows.push(SweepRow {
                epsilon: eps.clone(),
                f: f.clone(),
                infidelity: S::one(prec) - fid.clone(),
                fidelity: fid,
            });
        }
    }
    Ok(SweepResult {
        sequence_label: seq.label().to_string(),
        rows,
    })
}

/// `steps` evenly spaced values from `lo` to `hi` inclusive.
pub fn linear_grid<S: Real>(lo: &S, hi: &S, steps: usize) -> Result<Vec<S>> {
    if steps < 2 {
        return Err(Error::InvalidParameter(format!(
            "need at least 2 grid steps, got {steps}"
        )));
    }
    let span = hi.clone() - lo.clone();
    let denom = lo.lit((steps - 1) as f64);
    Ok((0..steps)
        .map(|i| {
            if i == steps - 1 {
                hi.clone()
            } else {
                lo.clone() + span.clone() * lo.lit(i as f64) / denom.clone()
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::BigReal;
    use crate::sequences::{fn_phases, symmetric5_phases, Frame, Sign};
    use std::f64::consts::PI;

    const D: Precision = Precision::DOUBLE;

    fn single() -> PhaseSequence<f64> {
        PhaseSequence::<f64>::from_f64(&[0.0], Frame::Applied, "single", D).unwrap()
    }

    #[test]
    fn error_free_error_propagator_is_identity() {
        let e = error_propagator(&fn_phases::<f64>(1, Sign::Plus, D), &ErrorModel::none(D)).unwrap();
        assert!(e.max_abs_diff(&Unitary2::identity(D)) < 1e-15);
    }

    #[test]
    fn single_pulse_error_is_x_rotation() {
        let eps = 0.17;
        let e = error_propagator(&single(), &ErrorModel::amplitude(eps)).unwrap();
        let n = principal_log(&e).unwrap().to_f64_array();
        assert!((n[0] - eps * PI).abs() < 1e-14 && n[1].abs() < 1e-15 && n[2].abs() < 1e-15);
    }

    #[test]
    fn f1_routes_agree() {
        let seq = fn_phases(1, Sign::Plus, D);
        let err = ErrorModel::amplitude(0.3);
        let a = error_propagator_via(&seq, &err, ErrorRoute::Toggling).unwrap();
        let b = error_propagator_via(&seq, &err, ErrorRoute::Direct).unwrap();
        assert!(a.max_abs_diff(&b) < 1e-12);
    }

    #[test]
    fn toggling_route_refuses_off_resonance() {
        let seq = fn_phases(1, Sign::Plus, D);
        assert!(error_propagator_via(&seq, &ErrorModel::new(0.0, 0.1), ErrorRoute::Toggling).is_err());
        assert!(error_propagator(&seq, &ErrorModel::new(0.0, 0.1)).is_ok());
    }

    #[test]
    fn delta1_cases() {
        let f1 = fn_phases(1, Sign::Plus, D);
        assert!(delta1(&f1, &1.0).norm() < 1e-12);
        let d = 0.3;
        let t = delta1(&single(), &d);
        assert!((t.x - d / 2.0).abs() < 1e-16 && t.y.abs() < 1e-16 && t.z == 0.0);
        let opposite = PhaseSequence::<f64>::from_f64(&[0.0, PI], Frame::Toggling, "", D).unwrap();
        assert!(delta1(&opposite, &d).norm() < 1e-16);
    }

    #[test]
    fn delta2_cases() {
        let d = 0.7;
        let quarter = PhaseSequence::<f64>::from_f64(&[0.0, PI / 2.0], Frame::Toggling, "", D).unwrap();
        assert!((delta2(&quarter, &d) - -(d * d) / 4.0).abs() < 1e-15);
        let one = PhaseSequence::<f64>::from_f64(&[1.3], Frame::Toggling, "", D).unwrap();
        assert_eq!(delta2(&one, &d), 0.0);
        let pal = PhaseSequence::<f64>::from_f64(&[0.3, 1.9, -0.4, 1.9, 0.3], Frame::Toggling, "", D).unwrap();
        assert!(delta2(&pal, &d).abs() < 1e-15);
    }

    #[test]
    fn delta2_prefix_form_matches_double_sum() {
        let t = PhaseSequence::<f64>::from_f64(&[0.1, 2.0, -1.3, 0.77, 3.0, -2.2], Frame::Toggling, "", D).unwrap();
        let p = t.to_f64_vec();
        let mut brute = 0.0;
        for j in 0..p.len() {
            for k in 0..j {
                brute += (p[j] - p[k]).sin();
            }
        }
        assert!((delta2(&t, &1.0) - -brute / 4.0).abs() < 1e-14);
    }

    #[test]
    fn taylor_single_pulse() {
        let s = generator_taylor(&single(), ErrorKind::Amplitude, 4, D).unwrap();
        let c1 = s.term(1).to_f64_array();
        assert!((c1[0] - PI).abs() < 1e-10 && c1[1].abs() < 1e-10 && c1[2].abs() < 1e-10);
        for k in 2..=4 {
            assert!(s.term(k).norm() < 1e-5, "c{k} = {:?}", s.term(k));
        }
        assert_eq!(s.resolvable_orders(), vec![1]);
    }

    #[test]
    fn taylor_f1_leading_term_is_third_order_in_plane() {
        let p = Precision::digits(60);
        let seq = fn_phases::<BigReal>(1, Sign::Plus, p);
        let s = generator_taylor(&seq, ErrorKind::Amplitude, 6, p).unwrap();
        assert_eq!(s.leading_order(), Some(3));
        assert!(s.term(1).norm().to_f64() < 1e-20);
        assert!(s.term(2).norm().to_f64() < 1e-15);
        assert!(s.relative_z(3) < 1e-10);
    }

    #[test]
    fn taylor_symmetric5_starts_at_third_order() {
        let p = Precision::digits(60);
        let seq = symmetric5_phases::<BigReal>(Sign::Plus, p);
        let s = generator_taylor(&seq, ErrorKind::Amplitude, 6, p).unwrap();
        assert_eq!(s.leading_order(), Some(3));
    }

    #[test]
    fn taylor_order_bounds() {
        assert!(generator_taylor(&single(), ErrorKind::Amplitude, 0, D).is_err());
        assert!(generator_taylor(&single(), ErrorKind::Amplitude, MAX_TAYLOR_ORDER + 1, D).is_err());
    }

    #[test]
    fn ill_conditioned_stencil_reported() {
        let err = generator_taylor(&single(), ErrorKind::Amplitude, 12, D).unwrap_err();
        assert!(matches!(err, Error::StencilConditioning { digits: 16, .. }), "{err}");
    }

    #[test]
    fn single_pulse_order_two() {
        let est = infidelity_order(&single(), ErrorKind::Amplitude, D).unwrap();
        assert_eq!(est.reliable_order(), Some(2));
        // 1 − cos(επ/2) ≈ π²ε²/8
        assert!((est.coefficient / (PI * PI / 8.0) - 1.0).abs() < 1e-3);
    }

    #[test]
    fn empty_window_asks_for_precision() {
        let seq = fn_phases::<f64>(3, Sign::Plus, D);
        let err = infidelity_order(&seq, ErrorKind::Amplitude, D).unwrap_err();
        assert!(matches!(err, Error::EmptyWindow { .. }));
        assert!(err.to_string().contains("raise the working precision"));
    }

    #[test]
    fn band_edges() {
        let (lo, hi) = infidelity_band(Precision::digits(60));
        assert!((lo.log10() + 54.0).abs() < 1e-9 && (hi.log10() + 29.0).abs() < 1e-9);
        let (lo, hi) = infidelity_band(D);
        assert!((lo.log10() + 10.0).abs() < 1e-9 && (hi.log10() + 7.0).abs() < 1e-9);
    }

    #[test]
    fn sweep_single_pulse() {
        let r = fidelity_sweep(&single(), &[0.0, 0.5], &[0.0]).unwrap();
        assert_eq!(r.rows.len(), 2);
        assert!((r.rows[0].fidelity - 1.0).abs() < 1e-15);
        assert!((r.rows[1].fidelity - (PI / 4.0).cos()).abs() < 1e-15);
        assert!((r.rows[1].infidelity - (1.0 - (PI / 4.0).cos())).abs() < 1e-15);
        assert!(fidelity_sweep(&single(), &[], &[0.0]).is_err());
    }

    #[test]
    fn grid_endpoints_exact() {
        let g = linear_grid(&-1.0, &1.0, 401).unwrap();
        assert_eq!(g.len(), 401);
        assert_eq!(g[0], -1.0);
        assert_eq!(g[200], 0.0);
        assert_eq!(g[400], 1.0);
        assert!(linear_grid(&0.0, &1.0, 1).is_err());
    }
}
