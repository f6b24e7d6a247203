//! On-disk formats: JSON phase files, sweep CSV and order reports.
//!
//! Phase file:
//!
//! ```json
//! {"label": "F1 (+)", "frame": "applied", "phases_radians": [5.47..., ...]}
//! ```
//!
//! Numbers are written in scientific notation with at least 17 significant
//! digits (more in high-precision mode) and read back without passing
//! through `f64`, so high-precision phases survive a round trip. Writers may
//! add a `config` object recording how the file was produced.

use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Number, Value};

use crate::analysis::{OrderEstimate, SweepResult};
use crate::error::{Error, Result};
use crate::scalar::{Precision, Real};
use crate::sequences::{Frame, PhaseSequence};

#[derive(Debug, Serialize, Deserialize)]
struct PhaseFileDoc {
    label: String,
    frame: Frame,
    phases_radians: Vec<Number>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    config: Option<Value>,
}

/// A phase sequence read from disk.
#[derive(Debug, Clone)]
pub struct LoadedPhases<S> {
    pub sequence: PhaseSequence<S>,
    /// Fewest significant digits among the stored phases.
    pub min_digits: usize,
    pub config: Option<Value>,
}

/// Digits written for a value at precision `prec`.
pub fn output_digits(prec: Precision) -> u32 {
    prec.get().max(17)
}

fn number<S: Real>(x: &S, digits: u32) -> Number {
    Number::from_str(&x.to_sci(digits)).expect("scientific literal is valid JSON")
}

fn significant_digits(literal: &str) -> usize {
    let mantissa = literal.split(['e', 'E']).next().unwrap_or_default();
    let digits: String = mantissa.chars().filter(char::is_ascii_digit).collect();
    let trimmed = digits.trim_start_matches('0');
    if trimmed.is_empty() {
        // Zero is exact.
        usize::MAX
    } else {
        trimmed.len()
    }
}

/// Serializes a sequence as a phase-file document.
pub fn phase_file_string<S: Real>(seq: &PhaseSequence<S>, config: Option<Value>) -> String {
    let digits = output_digits(seq.precision());
    let doc = PhaseFileDoc {
        label: seq.label().to_string(),
        frame: seq.frame(),
        phases_radians: seq.phases().iter().map(|p| number(p, digits)).collect(),
        config,
    };
    let mut out = serde_json::to_string_pretty(&doc).expect("phase file serializes");
    out.push('\n');
    out
}

/// Parses a phase-file document at the given precision.
pub fn parse_phase_file<S: Real>(text: &str, prec: Precision) -> Result<LoadedPhases<S>> {
    let doc: PhaseFileDoc = serde_json::from_str(text).map_err(|e| Error::PhaseFile(e.to_string()))?;
    let mut phases = Vec::with_capacity(doc.phases_radians.len());
    let mut min_digits = usize::MAX;
    for (i, n) in doc.phases_radians.iter().enumerate() {
        let literal = n.to_string();
        let value = S::parse(&literal, prec)
            .ok_or_else(|| Error::PhaseFile(format!("phase {i} is not a finite number: {literal}")))?;
        min_digits = min_digits.min(significant_digits(&literal));
        phases.push(value);
    }
    let sequence = PhaseSequence::new(phases, doc.frame, doc.label).map_err(|e| Error::PhaseFile(e.to_string()))?;
    Ok(LoadedPhases {
        sequence,
        min_digits,
        config: doc.config,
    })
}

/// Sweep CSV: `#`-prefixed config line, then `epsilon,f,fidelity,infidelity`.
pub fn sweep_csv<S: Real>(result: &SweepResult<S>, config: Option<&Value>) -> String {
    let mut out = String::new();
    if let Some(cfg) = config {
        out.push_str("# config: ");
        out.push_str(&serde_json::to_string(cfg).expect("config serializes"));
        out.push('\n');
    }
    out.push_str("# sequence: ");
    out.push_str(&result.sequence_label.replace('\n', " "));
    out.push('\n');
    out.push_str("epsilon,f,fidelity,infidelity\n");
    for row in &result.rows {
        let digits = output_digits(row.fidelity.precision());
        out.push_str(&format!(
            "{},{},{},{}\n",
            row.epsilon.to_sci(digits),
            row.f.to_sci(digits),
            row.fidelity.to_sci(digits),
            row.infidelity.to_sci(digits)
        ));
    }
    out
}

/// Order report as JSON.
pub fn order_report_json(est: &OrderEstimate, config: Option<Value>) -> String {
    let mut map = Map::new();
    map.insert("exponent".into(), Value::from(est.exponent));
    map.insert("rounded_order".into(), Value::from(est.rounded_order));
    map.insert("coefficient".into(), Value::from(est.coefficient));
    map.insert("window".into(), Value::from(vec![est.window.0, est.window.1]));
    map.insert("residual".into(), Value::from(est.residual));
    map.insert("precision".into(), Value::from(est.precision));
    map.insert("points".into(), Value::from(est.points));
    map.insert("kind".into(), Value::from(est.kind.to_string()));
    map.insert(
        "infidelity_band".into(),
        Value::from(vec![est.infidelity_band.0, est.infidelity_band.1]),
    );
    map.insert("gate_passed".into(), Value::from(est.gate_passed()));
    if let Some(cfg) = config {
        map.insert("config".into(), cfg);
    }
    let mut out = serde_json::to_string_pretty(&Value::Object(map)).expect("report serializes");
    out.push('\n');
    out
}
