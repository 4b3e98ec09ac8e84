//! `qlimit`: command-line front end.
//!
//! Exit codes: 0 success, 2 configuration or usage error, 3 model-domain
//! error. Failures print one JSON object on standard error.

mod output;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};
use qlimit_core::config::{self, ConfigError, DEFAULT_CONFIG};
use qlimit_core::langevin::{self, SimConfig, SimMode};
use qlimit_core::reducer::{self, ReduceError};
use qlimit_core::resolution::{self, ThermalForm};
use qlimit_core::{
    derive, spectra, validate_regime, Axis, DerivedQuantities, Grid, ModelError, ResolutionOptions, Scale,
    SweepError, SweepSpec, SystemConfig, Table, Value,
};

use output::{Format, Report};

#[derive(Parser)]
#[command(name = "qlimit", version, about = "Quantum-jump resolution limits for quadratic optomechanics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the derived rates and regime checks.
    Derive(DeriveArgs),
    /// Feasibility report and the resolution curve.
    Analyze(AnalyzeArgs),
    /// Radiation-pressure transfer functions and back-action spectra.
    Spectra(SpectraArgs),
    /// Monte Carlo estimate of the energy resolution.
    Simulate(SimulateArgs),
    /// Reduce a multimode parametric system to the three-mode model.
    Reduce(ReduceArgs),
    /// Feasibility map over one or two parameters.
    Sweep(SweepArgs),
}

#[derive(Args)]
struct OutputArgs {
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Shorthand for `--format jsonl`.
    #[arg(long)]
    json: bool,
}

impl OutputArgs {
    fn format(&self) -> Format {
        if self.json { Format::Jsonl } else { self.format }
    }
}

#[derive(Args)]
struct ModelArgs {
    /// Physical system config; the shipped default when absent.
    #[arg(long, conflicts_with = "rates")]
    config: Option<PathBuf>,
    /// Rate-level config (omega_m, omega_s, g0, gamma_c, gamma_d, c_bar, ...).
    #[arg(long)]
    rates: Option<PathBuf>,
    /// `KEY=VALUE [unit]` applied after the file; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ThermalArg {
    Effective,
    Mechanical,
}

#[derive(Args)]
struct ResolutionArgs {
    /// Frequency used to count thermal quanta in the thermal term.
    #[arg(long, value_enum, default_value_t = ThermalArg::Effective)]
    thermal_form: ThermalArg,
    /// Multiplier on the order-of-magnitude thresholds.
    #[arg(long, default_value_t = 1.0)]
    slack: f64,
}

impl ResolutionArgs {
    fn options(&self) -> ResolutionOptions {
        ResolutionOptions {
            thermal: match self.thermal_form {
                ThermalArg::Effective => ThermalForm::EffectiveFrequency,
                ThermalArg::Mechanical => ThermalForm::MechanicalFrequency,
            },
            slack: self.slack,
            ..ResolutionOptions::default()
        }
    }
}

#[derive(Args)]
struct DeriveArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct AnalyzeArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[command(flatten)]
    resolution: ResolutionArgs,
    /// Curve range in seconds; defaults to two decades either side of the optimum.
    #[arg(long)]
    tau_min: Option<f64>,
    #[arg(long)]
    tau_max: Option<f64>,
    #[arg(long, default_value_t = 64)]
    points: usize,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct SpectraArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Frequency range in rad/s; defaults to [omega_m / 100, 4 omega_s].
    #[arg(long)]
    omega_min: Option<f64>,
    #[arg(long)]
    omega_max: Option<f64>,
    #[arg(long, default_value_t = 256)]
    points: usize,
    #[arg(long, default_value = "log")]
    scale: Scale,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 200)]
    trials: usize,
    #[arg(long, default_value = "adiabatic")]
    mode: SimMode,
    /// Time step; the mode's stability limit when absent.
    #[arg(long)]
    dt: Option<f64>,
    /// Explicit integration times, comma separated.
    #[arg(long, value_delimiter = ',')]
    tau: Vec<f64>,
    /// Log grid of integration times; defaults to [tau*/4, 2 tau*].
    #[arg(long)]
    tau_min: Option<f64>,
    #[arg(long)]
    tau_max: Option<f64>,
    #[arg(long, default_value_t = 8)]
    tau_points: usize,
    /// Initial energy in quanta.
    #[arg(long, default_value_t = 1.0)]
    n_true: f64,
    /// Write the first K trajectories.
    #[arg(long, value_name = "K")]
    dump_trajectories: Option<usize>,
    /// Sampling stride of dumped trajectories, in steps.
    #[arg(long)]
    dump_stride: Option<usize>,
    /// Separate file for the dumped trajectories.
    #[arg(long)]
    dump_out: Option<PathBuf>,
    /// Worker threads; all cores when absent.
    #[arg(long)]
    threads: Option<usize>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct ReduceArgs {
    /// System description file.
    system: PathBuf,
    /// Bound on the dispersive and adiabatic ratios.
    #[arg(long, default_value_t = 0.1)]
    threshold: f64,
    #[command(flatten)]
    resolution: ResolutionArgs,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long, conflicts_with = "rates")]
    config: Option<PathBuf>,
    #[arg(long, hide = true)]
    rates: Option<PathBuf>,
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// `NAME:SCALE:MIN:MAX:N`; one or two axes.
    #[arg(long = "axis", required = true)]
    axes: Vec<String>,
    /// Report columns to keep, comma separated.
    #[arg(long, value_delimiter = ',')]
    outputs: Vec<String>,
    #[arg(long)]
    threads: Option<usize>,
    #[command(flatten)]
    resolution: ResolutionArgs,
    #[command(flatten)]
    output: OutputArgs,
}

/// A failure with its exit code and machine-readable kind.
#[derive(Debug)]
struct Failure {
    code: u8,
    kind: String,
    message: String,
}

impl Failure {
    fn usage(kind: &str, message: impl ToString) -> Self {
        Failure { code: 2, kind: kind.to_string(), message: message.to_string() }
    }
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        let kind = match &e {
            ConfigError::Syntax { .. } => "ConfigSyntax",
            ConfigError::UnknownKey { .. } => "UnknownKey",
            ConfigError::BadUnit { .. } => "BadUnit",
            ConfigError::Duplicate { .. } => "DuplicateKey",
            ConfigError::Override { .. } => "BadOverride",
            ConfigError::Missing(_) => "MissingKey",
            ConfigError::Invalid(m) => m.kind(),
        };
        Failure::usage(kind, e)
    }
}

impl From<ModelError> for Failure {
    fn from(e: ModelError) -> Self {
        Failure { code: 3, kind: e.kind().to_string(), message: e.to_string() }
    }
}

impl From<ReduceError> for Failure {
    fn from(e: ReduceError) -> Self {
        let code = match e {
            ReduceError::Parse { .. } | ReduceError::Invalid(_) => 2,
            ReduceError::DegenerateModes(..) | ReduceError::QndViolated(_) => 3,
        };
        Failure { code, kind: e.kind().to_string(), message: e.to_string() }
    }
}

impl From<SweepError> for Failure {
    fn from(e: SweepError) -> Self {
        Failure::usage(e.kind(), e)
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::usage("Io", format!("{e:#}"))
    }
}

type Outcome = Result<(), Failure>;

/// Loaded model with the canonical text that identifies it.
struct Model {
    derived: Result<DerivedQuantities, ModelError>,
    echo: String,
}

fn read(path: &Path) -> anyhow::Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn load(args: &ModelArgs) -> Result<Model, Failure> {
    if let Some(path) = &args.rates {
        let rc = config::parse_rate_config(&read(path)?, &args.overrides)?;
        let d = rc.derived();
        let derived = d.require_stable().map(|_| d);
        return Ok(Model { derived, echo: rc.render() });
    }
    let system = load_system(args.config.as_deref(), &args.overrides)?;
    Ok(Model { derived: derive(&system), echo: config::render_system_config(&system) })
}

fn load_system(path: Option<&Path>, overrides: &[String]) -> Result<SystemConfig, Failure> {
    let text = match path {
        Some(p) => read(p)?,
        None => DEFAULT_CONFIG.to_string(),
    };
    Ok(config::parse_system_config(&text, overrides)?)
}

fn report_for(command: &str, echo: &str, seed: Option<u64>) -> Report {
    Report::new(command, echo, &config::short_hash(echo), seed)
}

fn emit(report: &Report, out: &OutputArgs) -> Outcome {
    report
        .write_to(out.format(), out.out.as_deref())
        .map_err(|e| Failure::usage("Io", format!("writing output: {e}")))
}

fn regime_table(report: &qlimit_core::RegimeReport) -> Table {
    let mut t = Table::new(["check", "ratio", "threshold", "pass"]);
    for c in &report.checks {
        t.push(vec![c.name.clone().into(), c.ratio.into(), c.threshold.into(), c.pass.into()]);
    }
    t
}

fn run_derive(a: &DeriveArgs) -> Outcome {
    let m = load(&a.model)?;
    let d = m.derived?;
    let mut r = report_for("derive", &m.echo, None);
    r.table("derived", Table::from_record(d.fields()));
    r.table("regime", regime_table(&validate_regime(&d, &Default::default())));
    emit(&r, &a.output)
}

fn run_analyze(a: &AnalyzeArgs) -> Outcome {
    let m = load(&a.model)?;
    let d = m.derived?;
    let opts = a.resolution.options();
    let rep = resolution::feasibility_report(&d, &opts);
    let centre = if rep.tau_star.is_finite() { rep.tau_star } else { 1.0 / d.gamma_c };
    let tau_min = a.tau_min.unwrap_or(centre / 100.0);
    let tau_max = a.tau_max.unwrap_or(centre * 100.0);
    let grid = Grid::new(Scale::Log, tau_min, tau_max, a.points).map_err(|e| Failure::usage("InvalidGrid", e))?;

    let mut curve = Table::new(["tau", "shot_term", "backaction_term", "thermal_term", "total", "resolution"]);
    for b in resolution::resolution_curve(&d, &grid, &opts) {
        curve.push(vec![
            b.tau.into(),
            b.shot_term.into(),
            b.backaction_term.into(),
            b.thermal_term.into(),
            b.total.into(),
            b.resolution().into(),
        ]);
    }
    let mut fields = vec![("omega_eff", Value::from(d.omega_eff)), ("lambda", d.lambda.into()), ("c_bar", d.c_bar.into())];
    fields.extend(rep.fields());
    let mut r = report_for("analyze", &m.echo, None);
    r.table("report", Table::from_record(fields));
    r.table("regime", regime_table(&rep.regime));
    r.table("curve", curve);
    emit(&r, &a.output)
}

fn run_spectra(a: &SpectraArgs) -> Outcome {
    let m = load(&a.model)?;
    let d = m.derived?;
    let lo = a.omega_min.unwrap_or(d.omega_m / 100.0);
    let hi = a.omega_max.unwrap_or(4.0 * d.omega_s);
    let grid = Grid::new(a.scale, lo, hi, a.points).map_err(|e| Failure::usage("InvalidGrid", e))?;
    let mut r = report_for("spectra", &m.echo, None);
    r.table("spectra", spectra::spectrum_table(&d, &grid)?);
    emit(&r, &a.output)
}

fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T, Failure> {
    match threads {
        None => Ok(f()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Failure::usage("Threads", e))?;
            Ok(pool.install(f))
        }
    }
}

fn tau_grid(a: &SimulateArgs, d: &DerivedQuantities) -> Result<Vec<f64>, Failure> {
    if !a.tau.is_empty() {
        return Ok(a.tau.clone());
    }
    let (lo, hi) = match (a.tau_min, a.tau_max) {
        (Some(lo), Some(hi)) => (lo, hi),
        (lo, hi) => {
            let star = resolution::optimal_tau(d, &ResolutionOptions::default())?.tau_star;
            (lo.unwrap_or(star / 4.0), hi.unwrap_or(2.0 * star))
        }
    };
    Ok(Grid::new(Scale::Log, lo, hi, a.tau_points).map_err(|e| Failure::usage("InvalidGrid", e))?.points())
}

fn run_simulate(a: &SimulateArgs) -> Outcome {
    let m = load(&a.model)?;
    let d = m.derived?;
    let mut cfg = SimConfig::new(&d, a.mode, tau_grid(a, &d)?, a.trials, a.seed);
    if let Some(dt) = a.dt {
        cfg.dt = dt;
    }
    cfg.n_true = a.n_true;
    cfg.validate(&d)?;

    let result = with_threads(a.threads, || langevin::monte_carlo_resolution(&cfg, &d))??;
    let fit = langevin::fit_calibration(&result);

    let mut r = report_for("simulate", &m.echo, Some(a.seed));
    r.meta("mode", a.mode);
    r.meta("trials", a.trials);
    r.meta("dt", qlimit_core::table::format_num(cfg.dt));
    r.meta("n_true", qlimit_core::table::format_num(cfg.n_true));
    r.table("resolution", result.table(fit.kappa));
    r.table(
        "calibration",
        Table::from_record([
            ("kappa", Value::from(fit.kappa)),
            ("kappa_lower", fit.kappa_lower.into()),
            ("kappa_upper", fit.kappa_upper.into()),
            ("spread", fit.spread.into()),
            ("chi2", fit.chi2.into()),
            ("max_abs_pull", fit.max_abs_pull().into()),
        ]),
    );

    if let Some(k) = a.dump_trajectories {
        let stride = a.dump_stride.unwrap_or_else(|| (cfg.n_steps() / 2000).max(1));
        let traj = langevin::dump_trajectories(&cfg, &d, k, stride)?;
        match &a.dump_out {
            Some(path) => {
                let mut dump = report_for("simulate", &m.echo, Some(a.seed));
                dump.meta("dump_stride", stride);
                dump.table("trajectories", traj);
                dump.write_to(a.output.format(), Some(path))
                    .map_err(|e| Failure::usage("Io", format!("writing {}: {e}", path.display())))?;
            }
            None => {
                r.meta("dump_stride", stride);
                r.table("trajectories", traj);
            }
        }
    }
    emit(&r, &a.output)
}

fn reduction_table(sys: &reducer::ParametricSystem, red: &reducer::DispersiveReduction) -> Table {
    let nm = sys.n_mech();
    let mut cols = vec!["mode".to_string(), "omega".to_string()];
    cols.extend((1..=nm).map(|nu| format!("linear_{nu}")));
    for a in 1..=nm {
        cols.extend((1..=nm).map(|b| format!("quadratic_{a}_{b}")));
    }
    cols.push("residual_linear".to_string());
    let mut t = Table::new(cols);
    for i in 0..sys.n_ext() {
        let mut row = vec![Value::from(i + 1), red.constant[i].into()];
        row.extend(red.linear[i].iter().map(|&x| Value::from(x)));
        for a in 0..nm {
            row.extend(red.quadratic[i][a].iter().map(|&x| Value::from(x)));
        }
        row.push(red.residual_linear[i].into());
        t.push(row);
    }
    t
}

fn run_reduce(a: &ReduceArgs) -> Outcome {
    let text = read(&a.system)?;
    let sys = reducer::parse_system(&text)?;
    let red = reducer::reduce(&sys)?;
    let mut r = report_for("reduce", &text, None);
    r.meta("qnd_conditions_ok", red.qnd_conditions_ok);
    r.table("reduction", reduction_table(&sys, &red));
    r.table("regime", regime_table(&reducer::validate_dispersive(&sys, a.threshold)));
    if !red.qnd_conditions_ok {
        emit(&r, &a.output)?;
        return Err(ReduceError::QndViolated(red.qnd_violations.join("; ")).into());
    }
    let tri = reducer::to_tripartite(&sys)?;
    if let Some(w) = &tri.warning {
        eprintln!("warning: {w}");
    }
    r.table("tripartite", Table::from_record(tri.fields()));
    let d = tri.derived();
    if d.drive == qlimit_core::DrivenMode::Common {
        let rep = resolution::feasibility_report(&d, &a.resolution.options());
        r.table("feasibility", Table::from_record(rep.fields()));
    }
    emit(&r, &a.output)
}

fn run_sweep(a: &SweepArgs) -> Outcome {
    if a.rates.is_some() {
        return Err(Failure::usage("Usage", "sweep needs a physical system config, not a rate config"));
    }
    let base = load_system(a.config.as_deref(), &a.overrides)?;
    let axes = a.axes.iter().map(|s| Axis::parse(s)).collect::<Result<Vec<_>, _>>()?;
    let spec = SweepSpec {
        axes,
        base: base.clone(),
        outputs: (!a.outputs.is_empty()).then(|| a.outputs.clone()),
        options: a.resolution.options(),
    };
    let table = with_threads(a.threads, || qlimit_core::sweep::run_sweep(&spec))??;
    let mut r = report_for("sweep", &config::render_system_config(&base), None);
    for axis in &spec.axes {
        r.meta("axis", format!("{}:{}:{:e}:{:e}:{}", axis.name, axis.grid.scale, axis.grid.min, axis.grid.max, axis.grid.n));
    }
    r.table("sweep", table);
    emit(&r, &a.output)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Derive(a) => run_derive(a),
        Command::Analyze(a) => run_analyze(a),
        Command::Spectra(a) => run_spectra(a),
        Command::Simulate(a) => run_simulate(a),
        Command::Reduce(a) => run_reduce(a),
        Command::Sweep(a) => run_sweep(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            let line = serde_json::json!({ "error": f.kind, "message": f.message, "exit_code": f.code });
            eprintln!("{line}");
            ExitCode::from(f.code)
        }
    }
}
