//! `henon-shadow`: command-line front end for continuation, certification,
//! parameter-plane loci and point-cloud output.
//!
//! Exit codes: 0 on success, 1 on usage or configuration errors (nothing is
//! written), 2 on numerical failure (diagnostics are written when available).

use std::fs::{self, File};
use std::io::{self, BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use henon_shadow::dynamics::repelling_cycles_up_to;
use henon_shadow::hyperbolicity::{certify_orbit, CertifyTolerances, HyperbolicityEstimate};
use henon_shadow::loci::{predicate_by_name, rasterize, Plane, Rect, PREDICATES};
use henon_shadow::sets::{build_a, build_ab, cycle_lift, hausdorff_distance, julia_cloud, motion_trace, skeleton, skeleton_points, PointCloud};
use henon_shadow::shadowing::{
    continue_orbit, lift_orbit, q_orbit_from_code, straight_path, CodeLayout, ContinuationConfig, ContinuationResult,
    SymbolCode,
};
use henon_shadow::{fmt_f64, Complex64, Error, OrbitWindow, Params};
use serde::Serialize;

#[derive(Parser)]
#[command(name = "henon-shadow", version, about = "Shadowing quadratic-map orbits by complex Hénon orbits")]
struct Cli {
    /// Worker threads for grid and cloud work (default: available parallelism).
    #[arg(long, global = true, env = "HENON_SHADOW_JOBS")]
    jobs: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Continue a lifted q-orbit to an orbit of H_b.
    Continue(ContinueArgs),
    /// Rasterize a parameter-plane region.
    Locus(LocusArgs),
    /// Continue orbits and estimate their hyperbolicity.
    Certify(CertifyArgs),
    /// Write the lifted or continued cycle skeleton as a point cloud.
    Cloud(CloudArgs),
    /// Hausdorff distance between two point-cloud CSV files.
    Hausdorff(HausdorffArgs),
    /// Follow one orbit point as b moves from 0 along a straight path.
    Trace(TraceArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
    Pgm,
}

#[derive(Args)]
struct ParamArgs {
    /// Quadratic parameter, `re[,im]`.
    #[arg(long, value_parser = parse_complex, allow_hyphen_values = true, default_value = "0")]
    c: Complex64,
    /// Hénon Jacobian determinant, `re[,im]`.
    #[arg(long, value_parser = parse_complex, allow_hyphen_values = true, default_value = "0")]
    b: Complex64,
}

#[derive(Args)]
struct OutputArgs {
    /// Output file (default: standard output).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Args)]
struct OrbitArgs {
    /// Backward-branch code such as `+-+`.
    #[arg(long, value_parser = parse_code, conflicts_with = "period")]
    code: Option<SymbolCode>,
    /// Lay the code out on a pinned window with this many negative indices.
    #[arg(long, requires = "code")]
    pinned: Option<usize>,
    /// Use repelling cycles of exactly this period instead of a code.
    #[arg(long)]
    period: Option<usize>,
    /// Which cycle of the given period (ordered by argument of the first point).
    #[arg(long, requires = "period")]
    index: Option<usize>,
}

#[derive(Args)]
struct SolverArgs {
    /// Residual tolerance of each continuation step.
    #[arg(long)]
    tol: Option<f64>,
    /// Number of equal b-steps.
    #[arg(long)]
    steps: Option<usize>,
    /// JSON file with continuation settings; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct ContinueArgs {
    #[command(flatten)]
    params: ParamArgs,
    #[command(flatten)]
    orbit: OrbitArgs,
    #[command(flatten)]
    solver: SolverArgs,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum PlaneArg {
    C,
    B,
}

#[derive(Args)]
struct LocusArgs {
    /// One of mummert, ishii, horseshoe, cardioid.
    #[arg(long, default_value = "mummert")]
    predicate: String,
    #[command(flatten)]
    params: ParamArgs,
    /// Which parameter varies over the grid; the other is held at its flag value.
    #[arg(long, value_enum, default_value = "c")]
    plane: PlaneArg,
    /// `re_min,re_max,im_min,im_max`.
    #[arg(long, allow_hyphen_values = true)]
    window: Option<String>,
    /// `N` or `WxH`.
    #[arg(long, default_value = "256")]
    resolution: String,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct CertifyArgs {
    #[command(flatten)]
    params: ParamArgs,
    #[command(flatten)]
    orbit: OrbitArgs,
    #[command(flatten)]
    solver: SolverArgs,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct CloudArgs {
    #[command(flatten)]
    params: ParamArgs,
    /// Largest cycle period in the skeleton.
    #[arg(long, default_value_t = 6)]
    max_period: usize,
    /// Use this many inverse-iteration samples of J(q) instead (b must be 0).
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    solver: SolverArgs,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct HausdorffArgs {
    first: PathBuf,
    second: PathBuf,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct TraceArgs {
    #[command(flatten)]
    params: ParamArgs,
    #[command(flatten)]
    orbit: OrbitArgs,
    /// Number of b-samples after the start.
    #[arg(long, default_value_t = 10)]
    samples: usize,
    #[command(flatten)]
    solver: SolverArgs,
    #[command(flatten)]
    output: OutputArgs,
}

enum Failure {
    Usage(String),
    Numerical(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_numerical() {
            Failure::Numerical(e.to_string())
        } else {
            Failure::Usage(e.to_string())
        }
    }
}

type Outcome<T = ()> = Result<T, Failure>;

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

fn parse_complex(s: &str) -> Result<Complex64, String> {
    let parts: Vec<&str> = s.split(',').collect();
    let num = |t: &str| t.trim().parse::<f64>().map_err(|e| format!("'{t}': {e}"));
    let z = match parts.as_slice() {
        [re] => Complex64::new(num(re)?, 0.0),
        [re, im] => Complex64::new(num(re)?, num(im)?),
        _ => return Err("expected re[,im]".into()),
    };
    if z.re.is_finite() && z.im.is_finite() {
        Ok(z)
    } else {
        Err("value must be finite".into())
    }
}

fn parse_code(s: &str) -> Result<SymbolCode, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn format_or(output: &OutputArgs, default: Format, allowed: &[Format]) -> Outcome<Format> {
    let f = output.format.unwrap_or(default);
    if allowed.contains(&f) {
        Ok(f)
    } else {
        Err(usage(format!("format {:?} is not available for this command", f.to_possible_value().unwrap().get_name())))
    }
}

/// Refuses output paths whose directory does not exist, before any work.
fn check_output(output: &OutputArgs) -> Outcome {
    if let Some(path) = &output.out {
        let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
        if !dir.is_dir() {
            return Err(usage(format!("output directory {} does not exist", dir.display())));
        }
    }
    Ok(())
}

fn emit(output: &OutputArgs, bytes: &[u8]) -> Outcome {
    let written = match &output.out {
        Some(path) => fs::write(path, bytes),
        None => io::stdout().lock().write_all(bytes),
    };
    written.map_err(|e| usage(format!("cannot write output: {e}")))
}

fn to_json<T: Serialize>(value: &T) -> Outcome<Vec<u8>> {
    let mut bytes = serde_json::to_vec_pretty(value).map_err(|e| Failure::Numerical(e.to_string()))?;
    bytes.push(b'\n');
    Ok(bytes)
}

fn solver_config(args: &SolverArgs) -> Outcome<ContinuationConfig> {
    let mut config = match &args.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
            serde_json::from_str(&text).map_err(|e| usage(format!("invalid config {}: {e}", path.display())))?
        }
        None => ContinuationConfig::default(),
    };
    if let Some(tol) = args.tol {
        config.tol = tol;
    }
    if args.steps.is_some() {
        config.steps = args.steps;
    }
    config.validate()?;
    Ok(config)
}

fn params_of(args: &ParamArgs) -> Outcome<Params> {
    let params = Params::new(args.c, args.b);
    params.validate()?;
    Ok(params)
}

/// The lifted orbits selected by `--code` or `--period`, with a label each.
/// Without either flag the fixed-point code `+` is used.
fn select_orbits(args: &OrbitArgs, c: Complex64, all_of_period: bool) -> Outcome<Vec<(String, OrbitWindow)>> {
    if let Some(p) = args.period {
        if p == 0 {
            return Err(usage("period must be at least 1"));
        }
        let cycles: Vec<_> = repelling_cycles_up_to(c, p)?.into_iter().filter(|cyc| cyc.period == p).collect();
        let chosen: Vec<usize> = match args.index {
            Some(k) if k < cycles.len() => vec![k],
            Some(k) => return Err(usage(format!("index {k} out of range: {} repelling cycles of period {p}", cycles.len()))),
            None if all_of_period => (0..cycles.len()).collect(),
            None => vec![0],
        };
        if cycles.is_empty() {
            return Err(Failure::Numerical(format!("no repelling cycles of period {p} at c = {c}")));
        }
        return Ok(chosen.into_iter().map(|k| (format!("period {p} cycle {k}"), cycle_lift(&cycles[k], c))).collect());
    }
    let code = args.code.clone().unwrap_or_else(|| "+".parse().unwrap());
    let layout = match args.pinned {
        Some(m) => CodeLayout::Pinned { m },
        None => CodeLayout::Periodic,
    };
    let x = q_orbit_from_code(&code, c, layout)?;
    Ok(vec![(format!("code {code}"), lift_orbit(&x, c))])
}

#[derive(Serialize)]
struct ContinueReport<'a> {
    params: Params,
    source: String,
    status: &'static str,
    error: Option<String>,
    result: Option<&'a ContinuationResult>,
}

fn partial_of(e: &Error) -> Option<&ContinuationResult> {
    match e {
        Error::ContractionFailure { partial, .. } | Error::BallEscape { partial, .. } => Some(partial),
        _ => None,
    }
}

fn cmd_continue(args: &ContinueArgs) -> Outcome {
    format_or(&args.output, Format::Json, &[Format::Json])?;
    check_output(&args.output)?;
    let params = params_of(&args.params)?;
    let config = solver_config(&args.solver)?;
    let (source, w_dag) = select_orbits(&args.orbit, params.c, false)?.remove(0);
    match continue_orbit(&w_dag, &params, &config) {
        Ok(r) => {
            let report = ContinueReport { params, source, status: "converged", error: None, result: Some(&r) };
            emit(&args.output, &to_json(&report)?)
        }
        Err(e) if e.is_numerical() => {
            let report = ContinueReport { params, source, status: "failed", error: Some(e.to_string()), result: partial_of(&e) };
            emit(&args.output, &to_json(&report)?)?;
            Err(Failure::Numerical(e.to_string()))
        }
        Err(e) => Err(e.into()),
    }
}

fn parse_resolution(s: &str) -> Outcome<(usize, usize)> {
    let num = |t: &str| t.trim().parse::<usize>().map_err(|e| usage(format!("resolution '{s}': {e}")));
    match s.split_once(['x', 'X']) {
        Some((w, h)) => Ok((num(w)?, num(h)?)),
        None => {
            let n = num(s)?;
            Ok((n, n))
        }
    }
}

fn cmd_locus(args: &LocusArgs) -> Outcome {
    predicate_by_name(&args.predicate)?;
    let format = format_or(&args.output, Format::Csv, &[Format::Csv, Format::Pgm])?;
    check_output(&args.output)?;
    let (width, height) = parse_resolution(&args.resolution)?;
    let (plane, default_window) = match args.plane {
        PlaneArg::C => (Plane::C { b: args.params.b }, "-2,0.5,-1.25,1.25"),
        PlaneArg::B => (Plane::B { c: args.params.c }, "-0.5,0.5,-0.5,0.5"),
    };
    let window = Rect::parse(args.window.as_deref().unwrap_or(default_window))?;
    let grid = rasterize(&args.predicate, window, width, height, plane)?;
    let mut bytes = Vec::new();
    match format {
        Format::Pgm => grid.write_pgm(&mut bytes)?,
        _ => grid.write_csv(&mut bytes)?,
    }
    emit(&args.output, &bytes)
}

#[derive(Serialize)]
struct CertifyEntry {
    source: String,
    error: Option<String>,
    estimate: Option<HyperbolicityEstimate>,
}

#[derive(Serialize)]
struct CertifyReport {
    params: Params,
    tolerances: CertifyTolerances,
    orbits: Vec<CertifyEntry>,
}

fn cmd_certify(args: &CertifyArgs) -> Outcome {
    format_or(&args.output, Format::Json, &[Format::Json])?;
    check_output(&args.output)?;
    let params = params_of(&args.params)?;
    let config = solver_config(&args.solver)?;
    let tolerances = CertifyTolerances::default();
    let mut orbits = Vec::new();
    let mut first_error = None;
    for (source, w_dag) in select_orbits(&args.orbit, params.c, true)? {
        match continue_orbit(&w_dag, &params, &config) {
            Ok(r) => {
                let estimate = certify_orbit(&r.orbit, &params, &tolerances);
                orbits.push(CertifyEntry { source, error: None, estimate: Some(estimate) });
            }
            Err(e) if e.is_numerical() => {
                first_error.get_or_insert_with(|| format!("{source}: {e}"));
                orbits.push(CertifyEntry { source, error: Some(e.to_string()), estimate: None });
            }
            Err(e) => return Err(e.into()),
        }
    }
    emit(&args.output, &to_json(&CertifyReport { params, tolerances, orbits })?)?;
    match first_error {
        Some(msg) => Err(Failure::Numerical(msg)),
        None => Ok(()),
    }
}

fn write_cloud(cloud: &PointCloud, format: Format) -> Outcome<Vec<u8>> {
    match format {
        Format::Json => to_json(cloud),
        _ => {
            let mut bytes = Vec::new();
            cloud.write_csv(&mut bytes)?;
            Ok(bytes)
        }
    }
}

fn cmd_cloud(args: &CloudArgs) -> Outcome {
    let format = format_or(&args.output, Format::Csv, &[Format::Csv, Format::Json])?;
    check_output(&args.output)?;
    let params = params_of(&args.params)?;
    let config = solver_config(&args.solver)?;
    let b_is_zero = params.b == Complex64::new(0.0, 0.0);
    if let Some(n) = args.samples {
        if !b_is_zero {
            return Err(usage("--samples lifts Julia-set samples and requires b = 0"));
        }
        if n == 0 {
            return Err(usage("--samples must be at least 1"));
        }
        return emit(&args.output, &write_cloud(&julia_cloud(params.c, n, args.seed), format)?);
    }
    if args.max_period == 0 {
        return Err(usage("--max-period must be at least 1"));
    }
    let cycles = skeleton(params.c, args.max_period)?;
    if b_is_zero {
        let cloud = build_a(params.c, &skeleton_points(&cycles), "A");
        return emit(&args.output, &write_cloud(&cloud, format)?);
    }
    let family = build_ab(params.c, params.b, &cycles, &config);
    emit(&args.output, &write_cloud(&family.cloud, format)?)?;
    if family.failures.is_empty() {
        Ok(())
    } else {
        for (index, e) in &family.failures {
            eprintln!("cycle {index}: {e}");
        }
        Err(Failure::Numerical(format!("{} of {} cycles failed to continue", family.failures.len(), cycles.len())))
    }
}

fn read_cloud(path: &Path) -> Outcome<PointCloud> {
    let file = File::open(path).map_err(|e| usage(format!("cannot open {}: {e}", path.display())))?;
    PointCloud::read_csv(BufReader::new(file)).map_err(|e| usage(format!("{}: {e}", path.display())))
}

#[derive(Serialize)]
struct HausdorffReport {
    first: String,
    second: String,
    distance: f64,
}

fn cmd_hausdorff(args: &HausdorffArgs) -> Outcome {
    let format = format_or(&args.output, Format::Csv, &[Format::Csv, Format::Json])?;
    check_output(&args.output)?;
    let a = read_cloud(&args.first)?;
    let b = read_cloud(&args.second)?;
    let distance = hausdorff_distance(&a.points, &b.points)?;
    let bytes = match format {
        Format::Json => to_json(&HausdorffReport {
            first: args.first.display().to_string(),
            second: args.second.display().to_string(),
            distance,
        })?,
        _ => format!("{}\n", fmt_f64(distance)).into_bytes(),
    };
    emit(&args.output, &bytes)
}

fn cmd_trace(args: &TraceArgs) -> Outcome {
    let format = format_or(&args.output, Format::Csv, &[Format::Csv, Format::Json])?;
    check_output(&args.output)?;
    let params = params_of(&args.params)?;
    let config = solver_config(&args.solver)?;
    if args.samples == 0 {
        return Err(usage("--samples must be at least 1"));
    }
    let (_, w_dag) = select_orbits(&args.orbit, params.c, false)?.remove(0);
    let mut b_path = vec![Complex64::new(0.0, 0.0)];
    b_path.extend(straight_path(params.b, args.samples));
    let trace = motion_trace(&w_dag, params.c, &b_path, &config)?;
    let bytes = match format {
        Format::Json => to_json(&trace)?,
        _ => {
            let mut bytes = Vec::new();
            trace.write_csv(&mut bytes)?;
            bytes
        }
    };
    emit(&args.output, &bytes)
}

fn run(cli: &Cli) -> Outcome {
    let jobs = match cli.jobs {
        Some(0) => return Err(usage("--jobs must be at least 1")),
        Some(n) => n,
        None => std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1),
    };
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build_global()
        .map_err(|e| usage(format!("cannot start worker pool: {e}")))?;
    match &cli.command {
        Command::Continue(a) => cmd_continue(a),
        Command::Locus(a) => cmd_locus(a),
        Command::Certify(a) => cmd_certify(a),
        Command::Cloud(a) => cmd_cloud(a),
        Command::Hausdorff(a) => cmd_hausdorff(a),
        Command::Trace(a) => cmd_trace(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            if msg.contains("unknown predicate") {
                eprintln!("registered predicates: {}", PREDICATES.join(", "));
            }
            ExitCode::from(1)
        }
        Err(Failure::Numerical(msg)) => {
            eprintln!("numerical failure: {msg}");
            ExitCode::from(2)
        }
    }
}
