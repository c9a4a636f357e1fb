//! Command line front end.
//!
//! ```text
//! kdv-asymptotics <command> --config <path> [--out-dir <path>] [--quiet]
//! ```
//!
//! Exit codes: 0 success, 1 I/O failure, 2 invalid input, 3 numerical
//! failure. Every failure prints exactly one line to standard error:
//! `error kind=<kind> path=<field> message=<json string>`.

pub mod config;
pub mod output;

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, ValueEnum};

use crate::composer::BurstAsymptotics;
use crate::domain::{FieldPair, Grid1D, InitialKind, Profile};
use crate::effective::{check_solvability, verify_order2_cancellation, EffectiveParams};
use crate::error::Error;
use crate::full_solver::simulate_full;
use crate::regular::RegularExpansion;
use crate::verifier::{compare, convergence_sweep, error_norms, ErrorReport, SweepMode, SweepProblem};

pub use config::{parse_config, Experiment, ExperimentConfig};
pub use output::{format_number, line_chart, parse_csv, CsvTable, Series};

/// Environment variable capping the worker threads used by `sweep`.
pub const THREADS_ENV: &str = "KDV_ASYMPTOTICS_THREADS";

/// Crate version plus the commit it was built from.
pub const VERSION: &str = concat!(env!("CARGO_PKG_VERSION"), " (git ", env!("KDV_ASYMPTOTICS_GIT_HASH"), ")");

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    /// Direct solution of the stiff system.
    SimulateFull,
    /// Leading-order regular asymptotics (smooth data).
    SimulateRegular,
    /// Composed KdV asymptotics (burst data).
    SimulateKdv,
    /// Full solution against the asymptotics at `epsilon`.
    Compare,
    /// Error table over `epsilon_list`.
    Sweep,
    /// Solvability identity and order-two cancellation checks.
    VerifyDerivation,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::SimulateFull => "simulate-full",
            Command::SimulateRegular => "simulate-regular",
            Command::SimulateKdv => "simulate-kdv",
            Command::Compare => "compare",
            Command::Sweep => "sweep",
            Command::VerifyDerivation => "verify-derivation",
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "kdv-asymptotics", version = VERSION, about = "Stiff two-string system: direct solver and leading-order asymptotics")]
pub struct Args {
    pub command: Command,
    /// JSON experiment configuration.
    #[arg(long)]
    pub config: PathBuf,
    /// Directory for relative output paths.
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
    /// Suppress the summary on standard output.
    #[arg(long)]
    pub quiet: bool,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Parse(String),
    #[error("{path}: {message}")]
    Validation { path: String, message: String },
    #[error("{0}")]
    Numerical(Error),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io(_) => 1,
            CliError::Usage(_) | CliError::Parse(_) | CliError::Validation { .. } => 2,
            CliError::Numerical(_) => 3,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Parse(_) => "parse",
            CliError::Validation { .. } => "validation",
            CliError::Numerical(_) => "numerical",
            CliError::Io(_) => "io",
        }
    }

    /// The single machine-parsable line written to standard error.
    pub fn report_line(&self) -> String {
        let (path, message) = match self {
            CliError::Validation { path, message } => (path.as_str(), message.clone()),
            other => ("-", other.to_string()),
        };
        let message = serde_json::to_string(&message).unwrap_or_else(|_| "\"\"".to_string());
        format!("error kind={} path={} message={}", self.kind(), path, message)
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        if !e.is_validation() {
            return CliError::Numerical(e);
        }
        let path = match &e {
            Error::InvalidParameter { name, .. } => name.clone(),
            Error::DecayViolation { .. } | Error::BoxTooSmall { .. } => "grid.L".to_string(),
            _ => "grid".to_string(),
        };
        CliError::Validation {
            path,
            message: e.to_string(),
        }
    }
}

fn io_error(path: &Path, e: std::io::Error) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

/// What a command produced.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Outcome {
    pub files: Vec<PathBuf>,
    /// `key=value` summary lines for standard output.
    pub summary: Vec<String>,
}

/// Parses the arguments, runs the command and returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = match Args::try_parse_from(args) {
        Ok(a) => a,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return 0;
            }
            let first = e.to_string().lines().next().unwrap_or("").trim_start_matches("error: ").to_string();
            let err = CliError::Usage(first);
            eprintln!("{}", err.report_line());
            return err.exit_code();
        }
    };
    match run(&args) {
        Ok(outcome) => {
            if !args.quiet {
                for line in &outcome.summary {
                    println!("{line}");
                }
                for file in &outcome.files {
                    println!("wrote={}", file.display());
                }
            }
            0
        }
        Err(err) => {
            eprintln!("{}", err.report_line());
            err.exit_code()
        }
    }
}

/// Reads the configuration and runs the command inside a thread pool
/// capped by [`THREADS_ENV`].
pub fn run(args: &Args) -> Result<Outcome, CliError> {
    let text = fs::read_to_string(&args.config).map_err(|e| io_error(&args.config, e))?;
    let exp = parse_config(&text)?;
    let pool = thread_pool()?;
    pool.install(|| run_command(args.command, &exp, &args.out_dir))
}

fn thread_pool() -> Result<rayon::ThreadPool, CliError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(value) = std::env::var(THREADS_ENV) {
        let n: usize = value
            .trim()
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| CliError::Validation {
                path: THREADS_ENV.to_string(),
                message: format!("must be a positive integer, got {value:?}"),
            })?;
        builder = builder.num_threads(n);
    }
    builder.build().map_err(|e| CliError::Io(e.to_string()))
}

/// Runs one command on a validated experiment, writing into `out_dir`.
pub fn run_command(command: Command, exp: &Experiment, out_dir: &Path) -> Result<Outcome, CliError> {
    let writer = Writer::new(command, exp, out_dir)?;
    match command {
        Command::SimulateFull => simulate_full_cmd(exp, &writer),
        Command::SimulateRegular => simulate_regular_cmd(exp, &writer),
        Command::SimulateKdv => simulate_kdv_cmd(exp, &writer),
        Command::Compare => compare_cmd(exp, &writer),
        Command::Sweep => sweep_cmd(exp, &writer),
        Command::VerifyDerivation => verify_cmd(exp),
    }
}

struct Writer {
    command: Command,
    csv: PathBuf,
    svg: Option<PathBuf>,
    precision: usize,
    header: Vec<String>,
}

impl Writer {
    fn new(command: Command, exp: &Experiment, out_dir: &Path) -> Result<Self, CliError> {
        let resolve = |p: &str| {
            let p = PathBuf::from(p);
            if p.is_absolute() {
                p
            } else {
                out_dir.join(p)
            }
        };
        let outputs = &exp.config.outputs;
        let csv = resolve(outputs.csv_path.as_deref().unwrap_or(&format!("{}.csv", command.name())));
        let config_json = serde_json::to_string(&exp.config).map_err(|e| CliError::Io(e.to_string()))?;
        Ok(Writer {
            command,
            csv,
            svg: outputs.svg_path.as_deref().map(resolve),
            precision: outputs.precision,
            header: vec![
                format!("kdv-asymptotics {VERSION}"),
                format!("command: {}", command.name()),
                format!("config: {config_json}"),
            ],
        })
    }

    fn write(path: &Path, contents: &str) -> Result<PathBuf, CliError> {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir).map_err(|e| io_error(dir, e))?;
        }
        fs::write(path, contents).map_err(|e| io_error(path, e))?;
        Ok(path.to_path_buf())
    }

    /// `stem.csv` for one table, `stem_000.csv, stem_001.csv, ...` for several.
    fn csv_path(&self, index: usize, count: usize) -> PathBuf {
        if count <= 1 {
            return self.csv.clone();
        }
        let stem = self.csv.file_stem().and_then(|s| s.to_str()).unwrap_or(self.command.name());
        let ext = self.csv.extension().and_then(|s| s.to_str()).unwrap_or("csv");
        self.csv.with_file_name(format!("{stem}_{index:03}.{ext}"))
    }

    fn table(&self, mut table: CsvTable, extra: &[String]) -> CsvTable {
        let mut meta = self.header.clone();
        meta.extend_from_slice(extra);
        meta.append(&mut table.metadata);
        table.metadata = meta;
        table
    }

    /// Writes one `x,u,v` file per snapshot and a plot of the last one.
    fn snapshots(&self, grid: &Grid1D, eps: f64, snaps: &[FieldPair], label: &str) -> Result<Vec<PathBuf>, CliError> {
        let x = grid.nodes();
        let mut files = Vec::new();
        for (k, s) in snaps.iter().enumerate() {
            let table = CsvTable::from_columns(&["x", "u", "v"], &[&x, &s.u, &s.v]);
            let meta = [
                format!("eps: {}", format_number(eps, self.precision)),
                format!("time: {}", format_number(s.time, self.precision)),
            ];
            let table = self.table(table, &meta);
            files.push(Self::write(&self.csv_path(k, snaps.len()), &table.render(self.precision))?);
        }
        if let (Some(svg), Some(last)) = (&self.svg, snaps.last()) {
            let chart = line_chart(
                &format!("{label}, eps = {eps}, t = {}", last.time),
                "x",
                "field",
                &[
                    Series { name: "u", x: &x, y: &last.u },
                    Series { name: "v", x: &x, y: &last.v },
                ],
                false,
            );
            files.push(Self::write(svg, &chart)?);
        }
        Ok(files)
    }
}

fn simulate_full_cmd(exp: &Experiment, w: &Writer) -> Result<Outcome, CliError> {
    let snaps = simulate_full(&exp.initial, &exp.grid, &exp.params, &exp.f, exp.eps, &exp.solver)?;
    let files = w.snapshots(&exp.grid, exp.eps.get(), &snaps, "full solution")?;
    let last = snaps.last().map_or(0.0, |s| s.u.iter().fold(0.0f64, |m, v| m.max(v.abs())));
    Ok(Outcome {
        files,
        summary: vec![
            format!("snapshots={}", snaps.len()),
            format!("final_linf_u={}", format_number(last, w.precision)),
        ],
    })
}

fn require_kind(exp: &Experiment, kind: InitialKind, command: Command) -> Result<(), CliError> {
    if exp.initial.kind == kind {
        Ok(())
    } else {
        Err(CliError::Validation {
            path: "initial.kind".to_string(),
            message: format!("{} needs {:?} initial data", command.name(), kind).to_lowercase(),
        })
    }
}

fn simulate_regular_cmd(exp: &Experiment, w: &Writer) -> Result<Outcome, CliError> {
    require_kind(exp, InitialKind::Smooth, Command::SimulateRegular)?;
    let reg = RegularExpansion::new(&exp.initial, &exp.params, &exp.f)?;
    let snaps: Vec<FieldPair> = exp
        .solver
        .snapshot_times()
        .iter()
        .map(|&t| reg.fields(&exp.grid, t))
        .collect();
    let files = w.snapshots(&exp.grid, exp.eps.get(), &snaps, "regular asymptotics")?;
    Ok(Outcome {
        files,
        summary: vec![
            format!("snapshots={}", snaps.len()),
            format!("speed={}", format_number(reg.speed(), w.precision)),
        ],
    })
}

fn simulate_kdv_cmd(exp: &Experiment, w: &Writer) -> Result<Outcome, CliError> {
    require_kind(exp, InitialKind::Burst, Command::SimulateKdv)?;
    let times = exp.solver.snapshot_times();
    let asym = BurstAsymptotics::build(&exp.initial, &exp.params, &exp.f, exp.eps, &exp.kdv_grid, &times)?;
    let x = exp.grid.nodes();
    let snaps = times
        .iter()
        .map(|&t| {
            let (u, v) = asym.compose(&x, t)?;
            Ok(FieldPair {
                u,
                v,
                p: Vec::new(),
                q: Vec::new(),
                time: t,
            })
        })
        .collect::<Result<Vec<_>, Error>>()?;
    let files = w.snapshots(&exp.grid, exp.eps.get(), &snaps, "KdV asymptotics")?;
    let eff = EffectiveParams::new(&exp.params);
    Ok(Outcome {
        files,
        summary: vec![
            format!("snapshots={}", snaps.len()),
            format!("c={}", format_number(eff.c, w.precision)),
            format!("dispersion={}", format_number(eff.dispersion, w.precision)),
        ],
    })
}

fn mode_of(exp: &Experiment) -> SweepMode {
    match exp.initial.kind {
        InitialKind::Smooth => SweepMode::SmoothRegular,
        InitialKind::Burst => SweepMode::BurstKdv,
    }
}

fn problem_of(exp: &Experiment) -> SweepProblem {
    SweepProblem {
        params: exp.params,
        f: exp.f.clone(),
        initial: exp.initial,
        grid: exp.grid,
        zeta_grid: exp.kdv_grid,
        solver: exp.solver.clone(),
    }
}

fn compare_cmd(exp: &Experiment, w: &Writer) -> Result<Outcome, CliError> {
    let cmp = compare(&problem_of(exp), exp.eps, mode_of(exp))?;
    let norms = error_norms(&cmp.full, &cmp.approx, &exp.grid)?;
    let x = exp.grid.nodes();
    let table = CsvTable::from_columns(
        &["x", "u_full", "v_full", "u_asym", "v_asym"],
        &[&x, &cmp.full.u, &cmp.full.v, &cmp.approx.u, &cmp.approx.v],
    );
    let p = w.precision;
    let meta = [
        format!("eps: {}", format_number(exp.eps.get(), p)),
        format!("time: {}", format_number(cmp.full.time, p)),
    ];
    let mut files = vec![Writer::write(&w.csv, &w.table(table, &meta).render(p))?];
    if let Some(svg) = &w.svg {
        let chart = line_chart(
            &format!("full vs asymptotics, eps = {}, t = {}", exp.eps.get(), cmp.full.time),
            "x",
            "u",
            &[
                Series { name: "full", x: &x, y: &cmp.full.u },
                Series { name: "asymptotic", x: &x, y: &cmp.approx.u },
            ],
            false,
        );
        files.push(Writer::write(svg, &chart)?);
    }
    Ok(Outcome {
        files,
        summary: vec![
            format!("err_l2_u={}", format_number(norms.l2_u, p)),
            format!("err_linf_u={}", format_number(norms.linf_u, p)),
            format!("err_l2_v={}", format_number(norms.l2_v, p)),
            format!("err_linf_v={}", format_number(norms.linf_v, p)),
            format!("pde_residual_linf={}", format_number(cmp.residual.linf(), p)),
        ],
    })
}

/// Summary table of a sweep; `seconds` is NaN unless runtimes are requested.
pub fn sweep_table(report: &ErrorReport, record_runtime: bool) -> CsvTable {
    let mut table = CsvTable::new(&[
        "eps",
        "err_l2_u",
        "err_linf_u",
        "err_l2_v",
        "err_linf_v",
        "pde_residual_linf",
        "seconds",
    ]);
    table.rows = report
        .rows
        .iter()
        .map(|r| {
            let seconds = if record_runtime { r.seconds } else { f64::NAN };
            vec![r.eps, r.err_l2_u, r.err_linf_u, r.err_l2_v, r.err_linf_v, r.pde_residual_linf, seconds]
        })
        .collect();
    table
}

fn sweep_cmd(exp: &Experiment, w: &Writer) -> Result<Outcome, CliError> {
    let start = Instant::now();
    let mode = mode_of(exp);
    let report = convergence_sweep(&problem_of(exp), &exp.eps_list, mode)?;
    let p = w.precision;
    let meta = [
        format!("mode: {mode:?}"),
        format!("time: {}", format_number(exp.solver.t_end, p)),
        format!("fitted_order: {}", format_number(report.fitted_order, p)),
    ];
    let table = w.table(sweep_table(&report, exp.config.outputs.record_runtime), &meta);
    let mut files = vec![Writer::write(&w.csv, &table.render(p))?];
    if let Some(svg) = &w.svg {
        let eps: Vec<f64> = report.rows.iter().map(|r| r.eps).collect();
        let linf: Vec<f64> = report.rows.iter().map(|r| r.err_linf_u).collect();
        let l2: Vec<f64> = report.rows.iter().map(|r| r.err_l2_u).collect();
        let chart = line_chart(
            &format!("{mode:?} error, fitted order {:.3}", report.fitted_order),
            "log10 eps",
            "log10 error",
            &[
                Series { name: "Linf u", x: &eps, y: &linf },
                Series { name: "L2 u", x: &eps, y: &l2 },
            ],
            true,
        );
        files.push(Writer::write(svg, &chart)?);
    }
    let mut summary = vec![format!("fitted_order={}", format_number(report.fitted_order, p))];
    summary.extend(report.rows.iter().map(|r| {
        format!("eps={} err_linf_u={}", format_number(r.eps, p), format_number(r.err_linf_u, p))
    }));
    if exp.config.outputs.record_runtime {
        summary.push(format!("seconds={:.3}", start.elapsed().as_secs_f64()));
    }
    Ok(Outcome { files, summary })
}

fn verify_cmd(exp: &Experiment) -> Result<Outcome, CliError> {
    let solvability = check_solvability(&exp.params)?;
    let profile = match exp.initial.u0 {
        Profile::Zero => Profile::gaussian(1.0, 1.0, 0.0),
        p => p,
    };
    let order2 = verify_order2_cancellation(&exp.params, &exp.f, &profile, &exp.kdv_grid)?;
    let eff = EffectiveParams::new(&exp.params);
    let p = exp.config.outputs.precision;
    Ok(Outcome {
        files: Vec::new(),
        summary: vec![
            format!("solvability_residual={}", format_number(solvability, p)),
            format!("order2_residual={}", format_number(order2, p)),
            format!("c={}", format_number(eff.c, p)),
            format!("dispersion={}", format_number(eff.dispersion, p)),
            format!("gamma_h={}", format_number(eff.gamma_h, p)),
        ],
    })
}
