//! Cross-module invariant suite behind `pulsenest check`.
//!
//! Each check is named after the invariant it guards and reports pass, fail
//! (with the offending values) or skipped (with the reason). Random inputs
//! come from a seeded ChaCha generator, so runs are reproducible.

use std::f64::consts::PI;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::analysis::{
    delta1, delta2, error_propagator_via, generator_taylor, infidelity_order, ErrorKind, ErrorRoute,
};
use crate::error::Error;
use crate::scalar::{BigReal, Precision, Real};
use crate::sequences::{
    fn_phases, fn_phases_with_psi, nest, psi, sequence_propagator, symmetric5_phases, target_not, Frame, PhaseSequence,
    Sign,
};
use crate::su2::{compose, fidelity, make_rotation, ErrorModel};
use crate::with_real;

const D: Precision = Precision::DOUBLE;

#[derive(Clone, Debug)]
pub struct CheckConfig {
    /// Working precision for the order fits.
    pub precision: Precision,
    /// Largest `n` whose `F_n` order is fitted.
    pub depth: u32,
    /// Offset added to ψ in the first-order cancellation check.
    pub psi_perturbation: f64,
    pub seed: u64,
}

impl Default for CheckConfig {
    fn default() -> Self {
        CheckConfig {
            precision: Precision::digits(40),
            depth: 2,
            psi_perturbation: 0.0,
            seed: 20140101,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum CheckStatus {
    Pass,
    Fail(String),
    Skipped(String),
}

#[derive(Clone, Debug)]
pub struct CheckOutcome {
    pub name: String,
    pub status: CheckStatus,
    pub detail: String,
}

impl fmt::Display for CheckOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.status {
            CheckStatus::Pass => write!(f, "PASS  {}: {}", self.name, self.detail),
            CheckStatus::Fail(why) => write!(f, "FAIL  {}: {}", self.name, why),
            CheckStatus::Skipped(why) => write!(f, "SKIP  {}: {}", self.name, why),
        }
    }
}

#[derive(Clone, Debug)]
pub struct CheckReport {
    pub outcomes: Vec<CheckOutcome>,
}

impl CheckReport {
    pub fn all_passed(&self) -> bool {
        !self.outcomes.iter().any(|o| matches!(o.status, CheckStatus::Fail(_)))
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckOutcome> {
        self.outcomes
            .iter()
            .filter(|o| matches!(o.status, CheckStatus::Fail(_)))
    }
}

fn outcome(name: impl Into<String>, ok: bool, detail: String) -> CheckOutcome {
    CheckOutcome {
        name: name.into(),
        status: if ok {
            CheckStatus::Pass
        } else {
            CheckStatus::Fail(detail.clone())
        },
        detail,
    }
}

/// Random applied-frame phases in `[−π, π)`.
pub fn random_sequence(rng: &mut impl Rng, len: usize) -> PhaseSequence<f64> {
    let phases = (0..len).map(|_| rng.gen_range(-PI..PI)).collect();
    PhaseSequence::new(phases, Frame::Applied, format!("random{len}")).expect("non-empty")
}

/// Random antisymmetric applied-frame sequence of odd length (centre phase 0).
pub fn random_antisymmetric(rng: &mut impl Rng, len: usize) -> PhaseSequence<f64> {
    assert!(len % 2 == 1, "antisymmetric test sequences have odd length");
    let half: Vec<f64> = (0..len / 2).map(|_| rng.gen_range(-PI..PI)).collect();
    let mut phases = half.clone();
    phases.push(0.0);
    phases.extend(half.iter().rev().map(|p| -p));
    PhaseSequence::new(phases, Frame::Applied, format!("antisym{len}")).expect("non-empty")
}

/// Random palindromic toggling-frame sequence.
pub fn random_symmetric_toggling(rng: &mut impl Rng, len: usize) -> PhaseSequence<f64> {
    let first: Vec<f64> = (0..len.div_ceil(2)).map(|_| rng.gen_range(-PI..PI)).collect();
    let mut phases = first.clone();
    phases.extend(first[..len / 2].iter().rev());
    PhaseSequence::new(phases, Frame::Toggling, format!("symtog{len}")).expect("non-empty")
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

pub fn check_rotation_commutation(rng: &mut impl Rng, trials: usize) -> CheckOutcome {
    let mut worst = 0.0f64;
    for _ in 0..trials {
        let theta = rng.gen_range(-2.0 * PI..2.0 * PI);
        let alpha = rng.gen_range(-PI..PI);
        let beta = rng.gen_range(-PI..PI);
        let pi_a = make_rotation(&PI, &alpha).expect("finite");
        let lhs = compose(&[pi_a.clone(), make_rotation(&theta, &beta).expect("finite")]).expect("non-empty");
        let rhs = compose(&[make_rotation(&theta, &(2.0 * alpha - beta)).expect("finite"), pi_a]).expect("non-empty");
        worst = worst.max(lhs.max_abs_diff(&rhs));
    }
    outcome(
        "rotation_commutation",
        worst <= 1e-12,
        format!("{trials} triples, max entry deviation {worst:.2e} (tol 1e-12)"),
    )
}

pub fn check_toggling_roundtrip(rng: &mut impl Rng, trials: usize) -> CheckOutcome {
    let mut worst = 0.0f64;
    for _ in 0..trials {
        let seq = random_sequence(rng, 9);
        let back = seq
            .to_toggling()
            .and_then(|t| t.from_toggling())
            .expect("frames are consistent");
        worst = worst.max(max_diff(&back.to_f64_vec(), &seq.to_f64_vec()));
    }
    outcome(
        "toggling_roundtrip",
        worst <= 1e-12,
        format!("{trials} length-9 sequences, max deviation {worst:.2e} (tol 1e-12)"),
    )
}

pub fn check_length_law() -> CheckOutcome {
    let lens: Vec<usize> = (0..=4).map(|n| fn_phases::<f64>(n, Sign::Plus, D).len()).collect();
    let ok = lens.iter().enumerate().all(|(n, &l)| l == 5usize.pow(n as u32));
    outcome("length_law", ok, format!("len(F_0..F_4) = {lens:?}"))
}

pub fn check_antisymmetric_target(rng: &mut impl Rng, trials: usize) -> CheckOutcome {
    let target = target_not::<f64>(D);
    let mut worst = 0.0f64;
    let mut structural = Vec::new();
    for i in 0..trials {
        let len = 3 + 2 * (i % 5);
        let seq = random_antisymmetric(rng, len);
        if !seq.is_antisymmetric() || !seq.to_toggling().expect("applied").is_symmetric() {
            structural.push(format!("{:?}", seq.to_f64_vec()));
        }
        let u = sequence_propagator(&seq, &ErrorModel::none(D)).expect("applied");
        worst = worst.max(1.0 - fidelity(&target, &u));
    }
    let ok = worst <= 1e-12 && structural.is_empty();
    let mut detail = format!("{trials} sequences (odd lengths 3-11), max 1-F {worst:.2e} (tol 1e-12)");
    if !structural.is_empty() {
        detail.push_str(&format!("; symmetry predicates failed for {}", structural.join(", ")));
    }
    outcome("antisymmetric_target", ok, detail)
}

pub fn check_delta1_cancellation(psi_perturbation: f64) -> CheckOutcome {
    let p = psi::<f64>(Sign::Plus, D) + psi_perturbation;
    let f1 = fn_phases_with_psi(1, p, "F1");
    let mag = delta1(&f1, &1.0).norm();
    outcome(
        "delta1_cancellation",
        mag < 1e-12,
        format!("|Δ1/δ| for F1 = {mag:.2e} (tol 1e-12)"),
    )
}

pub fn check_delta2_symmetric(rng: &mut impl Rng, trials: usize) -> CheckOutcome {
    let mut worst = 0.0f64;
    for i in 0..trials {
        let seq = random_symmetric_toggling(rng, 1 + i % 15);
        worst = worst.max(delta2(&seq, &1.0).abs());
    }
    outcome(
        "delta2_symmetric",
        worst <= 1e-12,
        format!("{trials} palindromic toggling sequences, max |Δ2/δ²| {worst:.2e} (tol 1e-12)"),
    )
}

pub fn check_route_equivalence(rng: &mut impl Rng, trials: usize) -> CheckOutcome {
    let mut worst = 0.0f64;
    for i in 0..trials {
        let seq = random_sequence(rng, 1 + i % 11);
        for eps in [0.1, -0.1, 0.5, -0.5] {
            let err = ErrorModel::amplitude(eps);
            let a = error_propagator_via(&seq, &err, ErrorRoute::Toggling).expect("amplitude");
            let b = error_propagator_via(&seq, &err, ErrorRoute::Direct).expect("applied");
            worst = worst.max(a.max_abs_diff(&b)).max(1.0 - fidelity(&a, &b));
        }
    }
    outcome(
        "route_equivalence",
        worst <= 1e-12,
        format!("{trials} sequences at ε ∈ {{±0.1, ±0.5}}, max deviation {worst:.2e} (tol 1e-12)"),
    )
}

pub fn check_recursion_consistency() -> CheckOutcome {
    let f1 = fn_phases::<f64>(1, Sign::Plus, D);
    let mut worst = 0.0f64;
    for n in 0..=2 {
        let nested = nest(&f1, &fn_phases(n, Sign::Plus, D));
        worst = worst.max(max_diff(
            &nested.to_f64_vec(),
            &fn_phases::<f64>(n + 1, Sign::Plus, D).to_f64_vec(),
        ));
    }
    outcome(
        "recursion_consistency",
        worst <= 1e-12,
        format!("nest(F1, F_n) vs F_(n+1), n = 0..2, max deviation {worst:.2e} (tol 1e-12)"),
    )
}

/// Δ1/Δ2 against the numeric series, plus even-order vanishing for antisymmetric inputs.
pub fn check_series_vs_delta(rng: &mut impl Rng, trials: usize) -> CheckOutcome {
    let prec = Precision::digits(40);
    let order = 4;
    let mut worst = 0.0f64;
    let mut worst_even = 0.0f64;
    for i in 0..trials {
        let len = 1 + i % 7;
        let raw = if i % 2 == 0 && len % 2 == 1 {
            random_antisymmetric(rng, len)
        } else {
            random_sequence(rng, len)
        };
        let antisym = raw.is_antisymmetric();
        let seq = PhaseSequence::<BigReal>::from_f64(&raw.to_f64_vec(), Frame::Applied, raw.label(), prec)
            .expect("non-empty");
        let series = match generator_taylor(&seq, ErrorKind::Amplitude, order, prec) {
            Ok(s) => s,
            Err(e) => return outcome("series_vs_delta", false, format!("{:?}: {e}", raw.to_f64_vec())),
        };
        let pi = BigReal::pi(prec);
        let d1 = delta1(&seq, &pi).as_rotation_vector();
        let d2 = delta2(&seq, &pi) * pi.lit(2.0);
        let c1 = series.term(1);
        let c2 = series.term(2);
        let dev1 = c1.sub(&d1).norm().to_f64();
        let dev2 = (c2.nz.clone() - d2).abs().to_f64().max(c2.xy_norm().to_f64());
        worst = worst.max(dev1).max(dev2);
        if antisym {
            worst_even = worst_even.max(c2.nz.abs().to_f64());
        }
    }
    outcome(
        "series_vs_delta",
        worst <= 1e-10 && worst_even <= 1e-10,
        format!(
            "{trials} sequences (length ≤ 7), max |c1 − 2Δ1|,|c2 − 2Δ2| {worst:.2e}; antisymmetric |c2_z| {worst_even:.2e} (tol 1e-10)"
        ),
    )
}

/// Every resolvable generator coefficient of `F_1` and `F_2` lies in the xy-plane.
pub fn check_xy_confinement() -> CheckOutcome {
    let cases = [(1u32, 8usize, 80u32), (2, 12, 160)];
    let mut details = Vec::new();
    let mut ok = true;
    for (n, order, digits) in cases {
        let prec = Precision::digits(digits);
        let seq = fn_phases::<BigReal>(n, Sign::Plus, prec);
        match generator_taylor(&seq, ErrorKind::Amplitude, order, prec) {
            Ok(series) => {
                let orders = series.resolvable_orders();
                let worst = orders.iter().map(|&k| series.relative_z(k)).fold(0.0, f64::max);
                ok &= !orders.is_empty() && worst <= 1e-10;
                details.push(format!(
                    "F{n}: resolvable orders {orders:?}, max relative z {worst:.1e}"
                ));
            }
            Err(e) => {
                ok = false;
                details.push(format!("F{n}: {e}"));
            }
        }
    }
    outcome("xy_confinement", ok, details.join("; "))
}

fn order_outcome(name: String, expected: i64, result: Result<crate::analysis::OrderEstimate, Error>) -> CheckOutcome {
    match result {
        Ok(est) => {
            let ok = est.reliable_order() == Some(expected);
            outcome(
                name,
                ok,
                format!(
                    "exponent {:.3} (expected {expected}), residual {:.3}, ε window [{:.3e}, {:.3e}], {} digits",
                    est.exponent, est.residual, est.window.0, est.window.1, est.precision
                ),
            )
        }
        Err(e @ Error::EmptyWindow { .. }) => CheckOutcome {
            name,
            status: CheckStatus::Skipped(e.to_string()),
            detail: String::new(),
        },
        Err(e) => outcome(name, false, e.to_string()),
    }
}

pub fn check_fn_order(n: u32, prec: Precision) -> CheckOutcome {
    let expected = 2 * 3i64.pow(n);
    let result = with_real!(prec, S => {
        let seq = fn_phases::<S>(n, Sign::Plus, prec);
        infidelity_order(&seq, ErrorKind::Amplitude, prec)
    });
    order_outcome(format!("order_F{n}"), expected, result)
}

/// The nested symmetric five-pulse sequence loses the cascade: order 8, not 18.
pub fn check_symmetric_nesting(prec: Precision) -> Vec<CheckOutcome> {
    with_real!(prec, S => {
        let s5 = symmetric5_phases::<S>(Sign::Plus, prec);
        let nested = nest(&s5, &s5);
        vec![
            order_outcome("order_symmetric5".into(), 6, infidelity_order(&s5, ErrorKind::Amplitude, prec)),
            order_outcome("order_symmetric5_nested".into(), 8, infidelity_order(&nested, ErrorKind::Amplitude, prec)),
        ]
    })
}

/// Runs the whole suite.
pub fn run_checks(cfg: &CheckConfig) -> CheckReport {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut outcomes = vec![
        check_rotation_commutation(&mut rng, 1000),
        check_toggling_roundtrip(&mut rng, 100),
        check_length_law(),
        check_antisymmetric_target(&mut rng, 500),
        check_delta1_cancellation(cfg.psi_perturbation),
        check_delta2_symmetric(&mut rng, 500),
        check_route_equivalence(&mut rng, 100),
        check_recursion_consistency(),
        check_series_vs_delta(&mut rng, 100),
        check_xy_confinement(),
    ];
    for n in 0..=cfg.depth {
        outcomes.push(check_fn_order(n, cfg.precision));
    }
    outcomes.extend(check_symmetric_nesting(cfg.precision));
    CheckReport { outcomes }
}
