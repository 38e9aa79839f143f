//! Command-line front end: figure presets, custom sweeps, single-point
//! reports, the verification suite and discrete-model tools.

// Negated comparisons deliberately treat NaN as failing a check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod args;
pub mod settings;
pub mod sweep;
pub mod verify;

use std::io::Write as _;
use std::path::Path;

use relaycap::dm::{self, AuxSizes, DmError, DmEvaluator, Var};
use relaycap::gauss_bounds::BoundError;
use thiserror::Error;

use args::{Command, DmCommand, ParamArgs, PointArgs, SweepArgs, VerifyArgs};
use settings::Settings;
use sweep::{parse_bounds, point_report, run_sweep, DbRange, Model, Preset, SweepSpec};
use verify::{run_verify, VerifyConfig};

/// Failures of a command, each with its process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0} verification check(s) failed")]
    Verification(usize),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error(transparent)]
    Bound(#[from] BoundError),
    #[error(transparent)]
    Dm(#[from] DmError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Io(_) => 1,
            CliError::Verification(_) => 2,
            CliError::Bound(BoundError::InvalidParam { .. } | BoundError::NonPositiveNoise(_)) => 1,
            CliError::Dm(e) if is_input_error(e) => 1,
            CliError::Numerical(_) | CliError::Bound(_) | CliError::Dm(_) => 3,
        }
    }
}

fn is_input_error(e: &DmError) -> bool {
    !matches!(e, DmError::NoFeasibleJoint)
}

/// Writes `text` to a file, or to standard output for `stdout`.
fn emit(out: &str, text: &str) -> Result<(), CliError> {
    if out == "stdout" || out == "-" {
        let mut lock = std::io::stdout().lock();
        lock.write_all(text.as_bytes())?;
        lock.flush()?;
    } else {
        std::fs::write(Path::new(out), text)?;
    }
    Ok(())
}

/// Config file first, then `--set` flags in order.
pub fn load_settings(p: &ParamArgs) -> Result<Settings, CliError> {
    let mut s = match &p.config {
        Some(path) => Settings::from_file(path)?,
        None => Settings::default(),
    };
    let mut flags = Settings::default();
    for pair in &p.set {
        flags.set(pair)?;
    }
    s.merge(&flags);
    Ok(s)
}

/// Resolves a sweep from an optional preset, settings and flags.
pub fn sweep_spec(preset: Option<Preset>, a: &SweepArgs) -> Result<SweepSpec, CliError> {
    let settings = load_settings(&a.params)?;
    let mut spec = match preset {
        Some(p) => p.spec(),
        None => SweepSpec {
            model: Model::General,
            bounds: Vec::new(),
            axis: sweep::Axis::SnrRelay,
            range: DbRange::new(-10.0, 30.0, 1.0)?,
            fixed: Default::default(),
            grid: Default::default(),
        },
    };
    let base_model = spec.model;
    spec.apply_settings(&settings)?;
    if let Some(m) = &a.model {
        spec.model = m.parse()?;
    }
    if let Some(x) = &a.x {
        spec.axis = x.parse()?;
    }
    if let Some(r) = &a.range {
        spec.range = r.parse()?;
    }
    let explicit = a.bounds.as_deref().or(settings.get("sweep.bounds"));
    match explicit {
        Some(list) => spec.bounds = parse_bounds(list)?,
        None if spec.bounds.is_empty() || spec.model != base_model => {
            spec.bounds = spec.model.bounds().to_vec()
        }
        None => {}
    }
    spec.validate()?;
    Ok(spec)
}

fn run_sweep_command(preset: Option<Preset>, a: &SweepArgs) -> Result<(), CliError> {
    let spec = sweep_spec(preset, a)?;
    let table = run_sweep(&spec)?;
    for w in &table.warnings {
        eprintln!("{w}");
    }
    emit(&a.params.out, &table.to_csv())
}

fn run_point(a: &PointArgs) -> Result<(), CliError> {
    let settings = load_settings(&a.params)?;
    let model: Model = match a.model.as_deref().or(settings.get("sweep.model")) {
        Some(m) => m.parse()?,
        None => Model::General,
    };
    let bounds = match a.bounds.as_deref().or(settings.get("sweep.bounds")) {
        Some(list) => parse_bounds(list)?,
        None => model.bounds().to_vec(),
    };
    let params = settings.model_params()?;
    for k in model.parameters() {
        if !params.contains_key(*k) {
            return Err(CliError::Usage(format!("parameter {k} is not set")));
        }
    }
    let grid = settings.grid()?;
    let mut text = String::new();
    for (i, b) in bounds.iter().enumerate() {
        if i > 0 {
            text.push('\n');
        }
        let r = b.evaluate(model, &params, &grid)?;
        text.push_str(&point_report(model, *b, &r));
    }
    emit(&a.params.out, &text)
}

fn run_verify_command(a: &VerifyArgs) -> Result<(), CliError> {
    if !(a.tol >= 0.0) {
        return Err(CliError::Usage(format!("invalid tolerance {}", a.tol)));
    }
    let cfg = VerifyConfig {
        tol: a.tol,
        seed: a.seed,
        points: a.points,
        joints: a.joints,
        search: true,
    };
    let report = run_verify(&cfg);
    emit(&a.out, &report.render())?;
    if report.passed() {
        Ok(())
    } else {
        Err(CliError::Verification(report.failures()))
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))
}

fn parse_aux(pairs: &[String]) -> Result<AuxSizes, CliError> {
    pairs
        .iter()
        .map(|pair| {
            let (v, n) = pair
                .split_once('=')
                .ok_or_else(|| CliError::Usage(format!("expected VAR=SIZE, got `{pair}`")))?;
            let var: Var = v.parse()?;
            let n: usize = n
                .trim()
                .parse()
                .map_err(|_| CliError::Usage(format!("bad size in `{pair}`")))?;
            Ok((var, n))
        })
        .collect()
}

fn report_lines(evaluator: DmEvaluator, report: &dm::DmReport<f64>) -> String {
    let mut out = format!("evaluator={}\n", evaluator.name());
    match report.value() {
        Some(v) => out.push_str(&format!("rate={v}\n")),
        None => out.push_str(&format!(
            "rate=\ninfeasible={}\n",
            report.violated().unwrap_or("unknown")
        )),
    }
    out.push_str(&format!("active_term={}\n", report.active_term.as_str()));
    for (k, v) in &report.terms {
        out.push_str(&format!("term.{k}={v}\n"));
    }
    out
}

fn run_dm(cmd: &DmCommand) -> Result<(), CliError> {
    match cmd {
        DmCommand::Eval {
            joint,
            evaluator,
            out,
        } => {
            let ev: DmEvaluator = evaluator.parse()?;
            let joint: dm::DmJoint<f64> = dm::parse_joint(&read(joint)?)?;
            let report = ev.evaluate(&joint)?;
            emit(out, &report_lines(ev, &report))
        }
        DmCommand::Search {
            channel,
            evaluator,
            restarts,
            seed,
            aux,
            joint_out,
            out,
        } => {
            let ev: DmEvaluator = evaluator.parse()?;
            let channel: dm::DmChannel<f64> = dm::parse_channel(&read(channel)?)?;
            let found = dm::search_dm(&channel, ev, &parse_aux(aux)?, *restarts, *seed)?;
            if let Some(path) = joint_out {
                std::fs::write(path, dm::joint_to_text(&found.joint))?;
            }
            let mut text = report_lines(ev, &found.report);
            text.push_str(&format!("feasible_restarts={}\n", found.feasible_restarts));
            for (k, v) in &found.bound.argmax {
                text.push_str(&format!("argmax.{k}={v}\n"));
            }
            emit(out, &text)
        }
    }
}

/// Executes a parsed command.
pub fn run(command: &Command) -> Result<(), CliError> {
    match command {
        Command::Sweep(a) => run_sweep_command(None, a),
        Command::Preset { name, sweep } => run_sweep_command(Some(name.parse()?), sweep),
        Command::Point(a) => run_point(a),
        Command::Verify(a) => run_verify_command(a),
        Command::Dm(cmd) => run_dm(cmd),
    }
}
