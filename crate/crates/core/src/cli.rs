//! `pulsenest` command-line front end.
//!
//! Every output (phase file, CSV, order report) embeds the resolved run
//! configuration, and nothing time- or host-dependent is written, so equal
//! configurations give byte-identical output.
//!
//! Exit status: 0 success, 1 usage error or malformed input, 2 numerical
//! gate failure, 3 I/O error.

use std::ffi::OsString;
use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::analysis::{fidelity_sweep, infidelity_order, linear_grid, ErrorKind, OrderEstimate};
use crate::check::{run_checks, CheckConfig};
use crate::error::Error;
use crate::phasefile::{order_report_json, output_digits, parse_phase_file, phase_file_string, sweep_csv};
use crate::scalar::{Precision, Real};
use crate::sequences::{Family, FamilySpec, Frame, PhaseSequence, Sign};
use crate::with_real;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_GATE: i32 = 2;
pub const EXIT_IO: i32 = 3;

const MAX_DIGITS: u32 = 4096;

#[derive(Debug, Parser)]
#[command(
    name = "pulsenest",
    version,
    about = "Nested composite NOT pulses: generation and error analysis"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a phase file for a sequence family.
    Sequence(SequenceArgs),
    /// Convert a phase file between the applied and toggling frames.
    Toggling(TogglingArgs),
    /// Fidelity over a grid of amplitude (and optional off-resonance) errors, as CSV.
    Sweep(SweepArgs),
    /// Fit the infidelity scaling exponent.
    Order(OrderArgs),
    /// Run the invariant suite.
    Check(CheckArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum FamilyArg {
    Fn,
    Symmetric5,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum BranchArg {
    Upper,
    Lower,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum FrameArg {
    Applied,
    Toggling,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum KindArg {
    Amplitude,
    Offresonance,
}

fn parse_sign(s: &str) -> Result<Sign, String> {
    match s {
        "+" | "plus" => Ok(Sign::Plus),
        "-" | "minus" => Ok(Sign::Minus),
        _ => Err(format!("expected '+' or '-', got '{s}'")),
    }
}

fn precision_arg() -> clap::builder::RangedI64ValueParser<u32> {
    clap::value_parser!(u32).range(1..=i64::from(MAX_DIGITS))
}

#[derive(Debug, Args)]
struct FamilyArgs {
    /// Sequence family.
    #[arg(long, value_enum)]
    family: Option<FamilyArg>,
    /// Nesting level: F_n for `fn`, n-fold self-nesting for `symmetric5`.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(0..=12))]
    n: u32,
    /// Branch of ψ (`+` or `-`).
    #[arg(long, value_parser = parse_sign, allow_hyphen_values = true, conflicts_with = "branch")]
    sign: Option<Sign>,
    /// Same as `--sign`: upper is `+`, lower is `-`.
    #[arg(long, value_enum)]
    branch: Option<BranchArg>,
}

impl FamilyArgs {
    fn spec(&self) -> Option<FamilySpec> {
        let family = match self.family? {
            FamilyArg::Fn => Family::Fn,
            FamilyArg::Symmetric5 => Family::Symmetric5,
        };
        let sign = match (self.sign, self.branch) {
            (Some(s), _) => s,
            (None, Some(BranchArg::Lower)) => Sign::Minus,
            _ => Sign::Plus,
        };
        Some(FamilySpec::new(family, self.n, sign))
    }
}

#[derive(Debug, Args)]
struct SequenceArgs {
    #[command(flatten)]
    family: FamilyArgs,
    /// Working precision in significant digits (≤ 16 uses f64).
    #[arg(long, default_value_t = 16, value_parser = precision_arg())]
    precision: u32,
    /// Phase file to write; the file goes to stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override the sequence label.
    #[arg(long)]
    label: Option<String>,
    /// Show phases in degrees on the console (files are always radians).
    #[arg(long)]
    degrees: bool,
}

#[derive(Debug, Args)]
struct TogglingArgs {
    /// Input phase file.
    #[arg(long = "in")]
    input: PathBuf,
    /// Target frame; defaults to the opposite of the input frame.
    #[arg(long, value_enum)]
    to: Option<FrameArg>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value_t = 16, value_parser = precision_arg())]
    precision: u32,
    #[arg(long)]
    degrees: bool,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long, default_value_t = -1.0, allow_hyphen_values = true)]
    eps_min: f64,
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    eps_max: f64,
    /// Grid points including both endpoints.
    #[arg(long, default_value_t = 401)]
    steps: usize,
    /// Off-resonance values, comma separated.
    #[arg(long = "f", value_delimiter = ',', default_value = "0", allow_hyphen_values = true)]
    f: Vec<f64>,
    /// CSV to write; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value_t = 16, value_parser = precision_arg())]
    precision: u32,
}

#[derive(Debug, Args)]
struct OrderArgs {
    /// Phase file; alternatively give `--family`.
    #[arg(long = "in", conflicts_with = "family")]
    input: Option<PathBuf>,
    #[command(flatten)]
    family: FamilyArgs,
    #[arg(long, value_enum, default_value_t = KindArg::Amplitude)]
    kind: KindArg,
    /// Working precision; chosen from the sequence length when omitted.
    #[arg(long, value_parser = precision_arg())]
    precision: Option<u32>,
    /// JSON report to write.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Print the JSON report instead of text.
    #[arg(long)]
    json: bool,
}

#[derive(Debug, Args)]
struct CheckArgs {
    /// Precision for the order fits.
    #[arg(long, default_value_t = 40, value_parser = precision_arg())]
    precision: u32,
    /// Fit F_n orders for n up to this depth.
    #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u32).range(0..=3))]
    depth: u32,
    /// Offset added to ψ in the first-order cancellation check.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    perturb_psi: f64,
    #[arg(long, default_value_t = CheckConfig::default().seed)]
    seed: u64,
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Gate(String),
    Io(String),
}

impl CliError {
    fn code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Gate(_) => EXIT_GATE,
            CliError::Io(_) => EXIT_IO,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Gate(m) | CliError::Io(m) => f.write_str(m),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidParameter(_)
            | Error::PhaseFile(_)
            | Error::EmptyComposition
            | Error::EmptySequence
            | Error::WrongFrame { .. } => CliError::Usage(e.to_string()),
            _ => CliError::Gate(e.to_string()),
        }
    }
}

type CliResult<T = ()> = std::result::Result<T, CliError>;

fn io_err(path: &Path, e: std::io::Error) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

fn console(out: &mut dyn Write, text: &str) -> CliResult {
    out.write_all(text.as_bytes())
        .map_err(|e| CliError::Io(format!("<stdout>: {e}")))
}

fn warn(err: &mut dyn Write, msg: &str) {
    let _ = writeln!(err, "warning: {msg}");
}

fn write_file(path: &Path, text: &str) -> CliResult {
    fs::write(path, text).map_err(|e| io_err(path, e))
}

fn read_file(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| io_err(path, e))
}

fn path_str(p: &Option<PathBuf>) -> Value {
    p.as_ref().map_or(Value::Null, |p| Value::from(p.display().to_string()))
}

/// Resolved configuration echoed into every output.
#[derive(Debug, Serialize)]
struct RunConfig {
    command: &'static str,
    input_path: Value,
    output_path: Value,
    precision: u32,
    #[serde(flatten)]
    params: Value,
}

impl RunConfig {
    fn value(&self) -> Value {
        serde_json::to_value(self).expect("run config serializes")
    }
}

fn family_json(spec: &FamilySpec) -> Value {
    json!({"family": spec.family.to_string(), "n": spec.n, "sign": spec.sign.to_string()})
}

/// Phase table for the console.
fn phase_table<S: Real>(seq: &PhaseSequence<S>, degrees: bool) -> String {
    let digits = output_digits(seq.precision());
    let unit = if degrees { "deg" } else { "rad" };
    let mut out = format!(
        "# {} [{} frame, {} pulses, {unit}]\n",
        seq.label(),
        frame_name(seq.frame()),
        seq.len()
    );
    let scale = if degrees {
        let prec = seq.precision();
        Some(S::lit(&S::pi(prec), 180.0) / S::pi(prec))
    } else {
        None
    };
    for (j, p) in seq.phases().iter().enumerate() {
        let v = match &scale {
            Some(k) => p.clone() * k.clone(),
            None => p.clone(),
        };
        out.push_str(&format!("{:>5}  {}\n", j + 1, v.to_sci(digits)));
    }
    out
}

fn frame_name(f: Frame) -> &'static str {
    match f {
        Frame::Applied => "applied",
        Frame::Toggling => "toggling",
    }
}

fn cmd_sequence(a: &SequenceArgs, out: &mut dyn Write) -> CliResult {
    let spec = a
        .family
        .spec()
        .ok_or_else(|| CliError::Usage("sequence: --family is required".into()))?;
    let prec = Precision::digits(a.precision);
    let mut params = family_json(&spec);
    params["label"] = a.label.clone().map_or(Value::Null, Value::from);
    let cfg = RunConfig {
        command: "sequence",
        input_path: Value::Null,
        output_path: path_str(&a.out),
        precision: prec.get(),
        params,
    }
    .value();
    with_real!(prec, S => {
        let mut seq = spec.build::<S>(prec)?;
        if let Some(l) = &a.label {
            seq = seq.with_label(l.clone());
        }
        emit_phases(&seq, cfg, a.out.as_deref(), a.degrees, out)
    })
}

fn emit_phases<S: Real>(
    seq: &PhaseSequence<S>,
    cfg: Value,
    path: Option<&Path>,
    degrees: bool,
    out: &mut dyn Write,
) -> CliResult {
    let doc = phase_file_string(seq, Some(cfg));
    match path {
        Some(p) => {
            write_file(p, &doc)?;
            console(out, &phase_table(seq, degrees))
        }
        None if degrees => console(out, &phase_table(seq, true)),
        None => console(out, &doc),
    }
}

fn load<S: Real>(path: &Path, prec: Precision, err: &mut dyn Write) -> CliResult<PhaseSequence<S>> {
    let text = read_file(path)?;
    let loaded = parse_phase_file::<S>(&text, prec).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    if loaded.min_digits < prec.get() as usize {
        warn(
            err,
            &format!(
                "{} stores phases with only {} significant digits; results at {} digits are limited by the file",
                path.display(),
                loaded.min_digits,
                prec
            ),
        );
    }
    Ok(loaded.sequence)
}

fn cmd_toggling(a: &TogglingArgs, out: &mut dyn Write, err: &mut dyn Write) -> CliResult {
    let prec = Precision::digits(a.precision);
    with_real!(prec, S => {
        let seq = load::<S>(&a.input, prec, err)?;
        let target = match a.to {
            Some(FrameArg::Applied) => Frame::Applied,
            Some(FrameArg::Toggling) => Frame::Toggling,
            None if seq.frame() == Frame::Applied => Frame::Toggling,
            None => Frame::Applied,
        };
        let converted = match target {
            Frame::Applied => seq.applied(),
            Frame::Toggling => seq.toggling(),
        };
        let cfg = RunConfig {
            command: "toggling",
            input_path: path_str(&Some(a.input.clone())),
            output_path: path_str(&a.out),
            precision: prec.get(),
            params: json!({"from": frame_name(seq.frame()), "to": frame_name(target)}),
        }
        .value();
        emit_phases(&converted, cfg, a.out.as_deref(), a.degrees, out)
    })
}

fn cmd_sweep(a: &SweepArgs, out: &mut dyn Write, err: &mut dyn Write) -> CliResult {
    if !(a.eps_min.is_finite() && a.eps_max.is_finite() && a.eps_min <= a.eps_max) {
        return Err(CliError::Usage(format!(
            "invalid ε range [{}, {}]",
            a.eps_min, a.eps_max
        )));
    }
    if a.f.iter().any(|f| !f.is_finite()) {
        return Err(CliError::Usage("off-resonance values must be finite".into()));
    }
    let prec = Precision::digits(a.precision);
    let cfg = RunConfig {
        command: "sweep",
        input_path: path_str(&Some(a.input.clone())),
        output_path: path_str(&a.out),
        precision: prec.get(),
        params: json!({"eps_min": a.eps_min, "eps_max": a.eps_max, "steps": a.steps, "f": a.f}),
    }
    .value();
    let csv = with_real!(prec, S => {
        let seq = load::<S>(&a.input, prec, err)?;
        let eps = linear_grid(&S::from_f64(a.eps_min, prec), &S::from_f64(a.eps_max, prec), a.steps)?;
        let f: Vec<S> = a.f.iter().map(|&x| S::from_f64(x, prec)).collect();
        sweep_csv(&fidelity_sweep(&seq, &eps, &f)?, Some(&cfg))
    });
    match &a.out {
        Some(p) => write_file(p, &csv),
        None => console(out, &csv),
    }
}

/// Digits below which a sequence of this length cannot resolve its order.
fn recommended_digits(len: usize) -> u32 {
    if len >= 125 {
        60
    } else if len >= 25 {
        30
    } else {
        16
    }
}

fn default_digits(len: usize) -> u32 {
    match len {
        l if l >= 125 => 60,
        l if l >= 25 => 40,
        _ => 16,
    }
}

fn order_text(est: &OrderEstimate, label: &str) -> String {
    let mut s = String::new();
    s.push_str(&format!("sequence: {label}\n"));
    s.push_str(&format!("kind: {}\n", est.kind));
    s.push_str(&format!("exponent: {:.6}\n", est.exponent));
    s.push_str(&format!("rounded order: {}\n", est.rounded_order));
    s.push_str(&format!("coefficient: {:.6e}\n", est.coefficient));
    s.push_str(&format!("residual: {:.6}\n", est.residual));
    s.push_str(&format!(
        "window: [{:.6e}, {:.6e}] ({} points)\n",
        est.window.0, est.window.1, est.points
    ));
    s.push_str(&format!("precision: {} digits\n", est.precision));
    s.push_str(&format!(
        "gate: {}\n",
        if est.gate_passed() { "passed" } else { "FAILED" }
    ));
    s
}

fn cmd_order(a: &OrderArgs, out: &mut dyn Write, err: &mut dyn Write) -> CliResult {
    let kind = match a.kind {
        KindArg::Amplitude => ErrorKind::Amplitude,
        KindArg::Offresonance => ErrorKind::OffResonance,
    };
    let spec = a.family.spec();
    let len = match (&a.input, &spec) {
        (Some(p), _) => {
            // Length decides the default precision, so peek at the file first.
            parse_phase_file::<f64>(&read_file(p)?, Precision::DOUBLE)
                .map_err(|e| CliError::Usage(format!("{}: {e}", p.display())))?
                .sequence
                .len()
        }
        (None, Some(s)) => s
            .pulse_count()
            .ok_or_else(|| CliError::Usage("sequence too long".into()))?,
        (None, None) => return Err(CliError::Usage("order: give --in or --family".into())),
    };
    let digits = a.precision.unwrap_or_else(|| default_digits(len));
    if digits < recommended_digits(len) {
        warn(
            err,
            &format!(
                "{len}-pulse sequence at {digits} digits: use at least {} digits to resolve its order",
                recommended_digits(len)
            ),
        );
    }
    let prec = Precision::digits(digits);
    let mut params = json!({"kind": kind.to_string()});
    if let (None, Some(s)) = (&a.input, &spec) {
        params["family"] = family_json(s);
    }
    let cfg = RunConfig {
        command: "order",
        input_path: path_str(&a.input),
        output_path: path_str(&a.out),
        precision: digits,
        params,
    }
    .value();
    let (est, label) = with_real!(prec, S => {
        let seq: PhaseSequence<S> = match &a.input {
            Some(p) => load(p, prec, err)?,
            None => spec.expect("checked above").build(prec)?,
        };
        (infidelity_order(&seq, kind, prec)?, seq.label().to_string())
    });
    let report = order_report_json(&est, Some(cfg));
    if let Some(p) = &a.out {
        write_file(p, &report)?;
    }
    console(out, &if a.json { report } else { order_text(&est, &label) })?;
    if est.gate_passed() {
        Ok(())
    } else {
        Err(CliError::Gate(format!(
            "fit residual {:.4} exceeds the gate; the exponent is unreliable",
            est.residual
        )))
    }
}

fn cmd_check(a: &CheckArgs, out: &mut dyn Write) -> CliResult {
    let cfg = CheckConfig {
        precision: Precision::digits(a.precision),
        depth: a.depth,
        psi_perturbation: a.perturb_psi,
        seed: a.seed,
    };
    let run = RunConfig {
        command: "check",
        input_path: Value::Null,
        output_path: Value::Null,
        precision: a.precision,
        params: json!({"depth": a.depth, "perturb_psi": a.perturb_psi, "seed": a.seed}),
    }
    .value();
    console(out, &format!("# config: {run}\n"))?;
    let report = run_checks(&cfg);
    for o in &report.outcomes {
        console(out, &format!("{o}\n"))?;
    }
    let failed: Vec<&str> = report.failures().map(|o| o.name.as_str()).collect();
    if failed.is_empty() {
        console(out, "all checks passed\n")
    } else {
        Err(CliError::Gate(format!("failed checks: {}", failed.join(", "))))
    }
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                err.write_all(text.as_bytes())
            } else {
                out.write_all(text.as_bytes())
            };
            return code;
        }
    };
    let result = match &cli.command {
        Command::Sequence(a) => cmd_sequence(a, out),
        Command::Toggling(a) => cmd_toggling(a, out, err),
        Command::Sweep(a) => cmd_sweep(a, out, err),
        Command::Order(a) => cmd_order(a, out, err),
        Command::Check(a) => cmd_check(a, out),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.code()
        }
    }
}
