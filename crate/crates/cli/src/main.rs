mod render;
mod report;
mod sweep;

use std::fmt;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use cc_delaunay::classify::{canonical_initial_state, FamilyLabel};
use cc_delaunay::profile_ode::{energy, integrate, reflect_continue, EventKind, ProfileState, SolveConfig};
use cc_delaunay::verify::{run_all, run_suite, Fault, Suite, SuiteReport, VerifyOptions, DEFAULT_SEED};
use cc_delaunay::Error;

use render::{document, family_panel, gallery, Panel};
use report::{effective_config, summarize, RunReport};
use sweep::Axis;

#[derive(Parser)]
#[command(name = "cc-delaunay", version, about = "Rotational CMC hypersurfaces in the Heisenberg group H^n")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Classify (n, H, E) into one of the six families.
    #[command(allow_negative_numbers = true)]
    Classify {
        #[command(flatten)]
        params: ParamArgs,
        /// Print the JSON report instead of text.
        #[arg(long)]
        json: bool,
    },
    /// Integrate the profile system and write the trajectory.
    #[command(allow_negative_numbers = true)]
    Trace(TraceArgs),
    /// Render generating curves as SVG.
    #[command(allow_negative_numbers = true)]
    Render(RenderArgs),
    /// Run self-check suites.
    Verify(VerifyArgs),
    /// Classify and measure every point of an (n, H, E) grid.
    Sweep(SweepArgs),
}

#[derive(Args)]
struct ParamArgs {
    #[arg(long, default_value_t = 1)]
    n: usize,
    #[arg(long)]
    h: f64,
    #[arg(long)]
    e: f64,
}

#[derive(Args, Clone)]
struct SolverArgs {
    #[arg(long, default_value_t = 1e-10)]
    rel_tol: f64,
    #[arg(long, default_value_t = 1e-12)]
    abs_tol: f64,
    #[arg(long, default_value_t = cc_delaunay::profile_ode::DEFAULT_AXIS_EPSILON)]
    axis_epsilon: f64,
    /// Maximum arclength to integrate.
    #[arg(long, default_value_t = 50.0)]
    arclength: f64,
    #[arg(long, default_value_t = cc_delaunay::profile_ode::DEFAULT_DRIFT_TOLERANCE)]
    drift_tolerance: f64,
}

impl SolverArgs {
    fn config(&self) -> SolveConfig {
        SolveConfig {
            rel_tol: self.rel_tol,
            abs_tol: self.abs_tol,
            axis_epsilon: self.axis_epsilon,
            max_arclength: self.arclength,
            drift_tolerance: self.drift_tolerance,
            ..SolveConfig::default()
        }
    }
}

#[derive(Args)]
struct TraceArgs {
    #[arg(long, default_value_t = 1)]
    n: usize,
    #[arg(long)]
    h: f64,
    /// Energy; the canonical starting point of its family is used.
    #[arg(long, required_unless_present = "start", conflicts_with = "start")]
    e: Option<f64>,
    /// Explicit initial state `x,t,sigma` (or three separate values); the
    /// energy follows from it.
    #[arg(long, value_delimiter = ',', num_args = 1..=3)]
    start: Option<Vec<f64>>,
    #[command(flatten)]
    solver: SolverArgs,
    /// Stop at the k-th event of a kind, e.g. `critical-radius:2`.
    #[arg(long, value_parser = parse_stop)]
    stop: Vec<(EventKind, usize)>,
    /// Append k mirrored copies across critical radii.
    #[arg(long, default_value_t = 0)]
    reflect: usize,
    /// CSV output path (`-` for stdout, the default when no output is given).
    #[arg(long)]
    csv: Option<PathBuf>,
    /// JSON report output path (`-` for stdout).
    #[arg(long)]
    json: Option<PathBuf>,
}

fn parse_stop(s: &str) -> Result<(EventKind, usize), String> {
    let (kind, k) = s.split_once(':').unwrap_or((s, "1"));
    let kind = match kind {
        "critical-radius" => EventKind::CriticalRadius,
        "vertical-tangent" => EventKind::VerticalTangent,
        "inflection" => EventKind::Inflection,
        _ => return Err(format!("unknown event {kind:?}; use critical-radius, vertical-tangent or inflection")),
    };
    let k: usize = k.parse().map_err(|_| format!("bad occurrence {k:?}"))?;
    if k == 0 {
        return Err("occurrences are 1-based".into());
    }
    Ok((kind, k))
}

#[derive(Clone, Copy, ValueEnum)]
enum PanelArg {
    Hyperplane,
    Catenoid,
    Sphere,
    Cylinder,
    Unduloid,
    Nodoid,
    All,
}

#[derive(Args)]
struct RenderArgs {
    /// Family panel to draw.
    #[arg(long, conflicts_with = "trace", required_unless_present = "trace")]
    panel: Option<PanelArg>,
    /// Render a trajectory CSV written by `trace` instead.
    #[arg(long)]
    trace: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    n: usize,
    /// Output path (stdout by default).
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum SuiteArg {
    Energy,
    ClosedForms,
    Curvature,
    Classification,
    Measures,
    All,
}

#[derive(Clone, Copy, ValueEnum)]
enum FaultArg {
    RhsSign,
}

#[derive(Args)]
struct VerifyArgs {
    suite: SuiteArg,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// JSON report output path (`-` for stdout).
    #[arg(long)]
    json: Option<PathBuf>,
    #[arg(long, hide = true)]
    inject_fault: Option<FaultArg>,
}

#[derive(Clone, Copy, ValueEnum, PartialEq)]
enum Format {
    Csv,
    Json,
}

#[derive(Args)]
struct SweepArgs {
    /// Dimensions, e.g. `1,2,3` (a list of integers).
    #[arg(long, value_delimiter = ',', default_value = "1")]
    n: Vec<usize>,
    /// Mean curvatures: `a,b,c` or `start:stop:count`.
    #[arg(long, allow_hyphen_values = true)]
    h: Axis,
    /// Energies: `a,b,c` or `start:stop:count`.
    #[arg(long, allow_hyphen_values = true)]
    e: Axis,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    #[arg(short, long)]
    output: Option<PathBuf>,
    #[command(flatten)]
    solver: SolverArgs,
}

enum Failure {
    Usage(String),
    Params(String),
    Numeric(String),
    Io(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Params(_) => 2,
            Failure::Numeric(_) | Failure::Io(_) => 3,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Usage(m) => write!(f, "usage error: {m}"),
            Failure::Params(m) => write!(f, "invalid parameters: {m}"),
            Failure::Numeric(m) => write!(f, "numerical failure: {m}"),
            Failure::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidParameter(_)
            | Error::NoAdmissibleRadius { .. }
            | Error::DimensionMismatch { .. }
            | Error::Domain(_)
            | Error::AxisPoint { .. }
            | Error::AxisSingularity { .. } => Failure::Params(e.to_string()),
            _ => Failure::Numeric(e.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

fn open_output(path: Option<&Path>) -> Result<Box<dyn Write>, Failure> {
    match path {
        None => Ok(Box::new(io::stdout().lock())),
        Some(p) if p == Path::new("-") => Ok(Box::new(io::stdout().lock())),
        Some(p) => {
            let f = File::create(p).map_err(|e| Failure::Io(format!("{}: {e}", p.display())))?;
            Ok(Box::new(BufWriter::new(f)))
        }
    }
}

fn write_json<T: serde::Serialize>(value: &T, path: Option<&Path>) -> Result<(), Failure> {
    let mut out = open_output(path)?;
    serde_json::to_writer_pretty(&mut out, value).map_err(|e| Failure::Io(e.to_string()))?;
    writeln!(out)?;
    out.flush()?;
    Ok(())
}

fn command_echo() -> String {
    std::env::args().skip(1).collect::<Vec<_>>().join(" ")
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.12}")).unwrap_or_else(|| "-".into())
}

fn cmd_classify(params: &ParamArgs, json: bool) -> Result<(), Failure> {
    let report = RunReport::classify(command_echo(), params.n, params.h, params.e)?;
    if json {
        return write_json(&report, None);
    }
    let family = report.family.expect("classified");
    println!("family: {family}");
    if let Some(e_cyl) = report.cylinder_energy {
        println!("cylinder energy: {e_cyl:.12}");
    }
    if report.radii.x1.is_some() {
        println!("x1: {}", opt(report.radii.x1));
        println!("x2: {}", opt(report.radii.x2));
        println!("x0: {}", opt(report.radii.x0));
    }
    if let Some(cf) = &report.closed_form {
        println!("closed form: {cf}");
    }
    Ok(())
}

fn cmd_trace(args: &TraceArgs) -> Result<(), Failure> {
    let n = args.n;
    let (state, e) = match (&args.start, args.e) {
        (Some(s), _) => {
            let &[x, t, sigma] = s.as_slice() else {
                return Err(Failure::Usage(format!("--start needs 3 values x,t,sigma, got {}", s.len())));
            };
            let state = ProfileState::new(x, t, sigma);
            (Some(state), energy(&state, n, args.h)?)
        }
        (None, Some(e)) => (None, e),
        (None, None) => return Err(Failure::Usage("give --e or --start".into())),
    };
    let mut report = RunReport::classify(command_echo(), n, args.h, e)?;
    let state = match state {
        Some(s) => s,
        None => canonical_initial_state(n, args.h, e)?,
    };
    let mut cfg = effective_config(&args.solver.config(), n, args.h, e, &mut report.diagnostics.notes);
    for &(kind, k) in &args.stop {
        cfg = cfg.stop_at(kind, k);
    }
    let mut traj = integrate(&state, n, args.h, &cfg)?;
    if args.reflect > 0 {
        traj = reflect_continue(&traj, args.reflect)?;
    }
    if args.start.is_none() {
        let mut notes = Vec::new();
        report.summary = summarize(n, args.h, e, &args.solver.config(), &mut notes)?;
        report.diagnostics.notes.extend(notes);
    }
    report.attach_trajectory(&traj);

    if args.csv.is_some() || args.json.is_none() {
        let mut out = open_output(args.csv.as_deref())?;
        traj.write_csv(&mut out)?;
        out.flush()?;
    }
    if let Some(path) = &args.json {
        write_json(&report, Some(path))?;
    }
    Ok(())
}

fn read_trace(path: &Path) -> Result<Panel, Failure> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
    let headers = reader.headers().map_err(|e| Failure::Io(e.to_string()))?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Failure::Params(format!("{} has no {name:?} column", path.display())))
    };
    let (ix, it) = (col("x")?, col("t")?);
    let mut curve = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| Failure::Io(e.to_string()))?;
        let num = |i: usize| -> Result<f64, Failure> {
            record[i]
                .parse()
                .map_err(|_| Failure::Params(format!("bad number {:?}", &record[i])))
        };
        curve.push((num(ix)?, num(it)?));
    }
    Ok(Panel {
        title: path.file_name().map(|f| f.to_string_lossy().into_owned()).unwrap_or_default(),
        curves: vec![curve],
        guides: Vec::new(),
    })
}

fn cmd_render(args: &RenderArgs) -> Result<(), Failure> {
    let cfg = SolveConfig::default();
    let (panels, columns) = match (args.panel, &args.trace) {
        (_, Some(path)) => (vec![read_trace(path)?], 1),
        (Some(PanelArg::All), None) => (gallery(args.n, &cfg)?, 3),
        (Some(p), None) => {
            let family = match p {
                PanelArg::Hyperplane => FamilyLabel::Hyperplane,
                PanelArg::Catenoid => FamilyLabel::Catenoid,
                PanelArg::Sphere => FamilyLabel::Sphere,
                PanelArg::Cylinder => FamilyLabel::Cylinder,
                PanelArg::Unduloid => FamilyLabel::Unduloid,
                PanelArg::Nodoid => FamilyLabel::Nodoid,
                PanelArg::All => unreachable!("handled above"),
            };
            (vec![family_panel(family, args.n, &cfg)?], 1)
        }
        (None, None) => return Err(Failure::Usage("give --panel or --trace".into())),
    };
    let mut out = open_output(args.output.as_deref())?;
    out.write_all(document(&panels, columns).as_bytes())?;
    out.flush()?;
    Ok(())
}

#[derive(serde::Serialize)]
struct VerifyReport {
    command: String,
    suite: String,
    seed: u64,
    passed: bool,
    suites: Vec<SuiteReport>,
}

fn cmd_verify(args: &VerifyArgs) -> Result<(), Failure> {
    let opts = VerifyOptions {
        seed: args.seed,
        fault: args.inject_fault.map(|f| match f {
            FaultArg::RhsSign => Fault::RhsSign,
        }),
    };
    let (name, reports) = match args.suite {
        SuiteArg::All => ("all".to_string(), run_all(&opts)),
        s => {
            let suite = match s {
                SuiteArg::Energy => Suite::Energy,
                SuiteArg::ClosedForms => Suite::ClosedForms,
                SuiteArg::Curvature => Suite::Curvature,
                SuiteArg::Classification => Suite::Classification,
                SuiteArg::Measures => Suite::Measures,
                SuiteArg::All => unreachable!("handled above"),
            };
            (suite.name().to_string(), vec![run_suite(suite, &opts)])
        }
    };
    let passed = reports.iter().all(|r| r.passed);
    let to_stdout = args.json.as_deref() == Some(Path::new("-"));
    if !to_stdout {
        for r in &reports {
            for c in &r.checks {
                let status = if c.passed { "PASS" } else { "FAIL" };
                let detail = if c.detail.is_empty() { String::new() } else { format!(" ({})", c.detail) };
                println!("[{status}] {}: {} = {:.3e} (tolerance {:.1e}){detail}", r.suite, c.name, c.value, c.tolerance);
            }
            let status = if r.passed { "pass" } else { "FAIL" };
            println!("{}: {status}", r.suite);
        }
    }
    let report = VerifyReport {
        command: command_echo(),
        suite: name,
        seed: args.seed,
        passed,
        suites: reports,
    };
    if let Some(path) = &args.json {
        write_json(&report, Some(path))?;
    }
    if passed {
        Ok(())
    } else {
        Err(Failure::Numeric("verification failed".into()))
    }
}

fn cmd_sweep(args: &SweepArgs) -> Result<(), Failure> {
    let cfg = args.solver.config();
    let threads = std::env::var("CC_DELAUNAY_THREADS").ok();
    let threads = match threads.as_deref().map(str::trim) {
        None | Some("") => 0,
        Some(v) => v
            .parse::<usize>()
            .map_err(|_| Failure::Usage(format!("CC_DELAUNAY_THREADS must be a non-negative integer, got {v:?}")))?,
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Failure::Io(e.to_string()))?;
    let rows = pool.install(|| sweep::run(&args.n, &args.h.0, &args.e.0, &cfg));
    match args.format {
        Format::Csv => {
            let mut out = open_output(args.output.as_deref())?;
            sweep::write_csv(&rows, &mut out).map_err(|e| Failure::Io(e.to_string()))?;
            out.flush()?;
            Ok(())
        }
        Format::Json => write_json(&rows, args.output.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let result = match &cli.command {
        Command::Classify { params, json } => cmd_classify(params, *json),
        Command::Trace(args) => cmd_trace(args),
        Command::Render(args) => cmd_render(args),
        Command::Verify(args) => cmd_verify(args),
        Command::Sweep(args) => cmd_sweep(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("cc-delaunay: {f}");
            ExitCode::from(f.code())
        }
    }
}
