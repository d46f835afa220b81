//! Command-line front end for the biharmonic solver: single solves,
//! convergence tables, plane exports for plotting, and basis diagnostics.
//!
//! Exit codes: 0 success, 1 numerical/invariant failure, 2 usage error.
//! Failures also emit a machine-readable JSON object on stderr. Primary
//! output files are byte-identical across reruns of the same configuration;
//! timings go to stderr only.

use ballspectral::diagnostics;
use ballspectral::report::{fmt_sci, ErrorReport};
use ballspectral::solver::{self, manufactured_case, CaseId};
use ballspectral::transform::{self, GridSpec};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "ballspectral",
    version,
    about = "Spectral-Galerkin solver for the biharmonic equation on the unit ball"
)]
struct Cli {
    /// JSON file supplying default option values (flags take precedence).
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Cap on worker threads (default: machine parallelism).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve at one degree and write both coefficient fields as JSON.
    Solve(SolveArgs),
    /// Solve over a degree sequence and emit the error/rate table.
    Convergence(ConvergenceArgs),
    /// Sample exact and numerical fields on an axis-aligned plane lattice.
    ExportField(ExportFieldArgs),
    /// Cross-check the stiffness/mass operators and boundary values.
    BasisCheck(BasisCheckArgs),
}

#[derive(Args, Clone)]
struct QuadArgs {
    /// Radial quadrature points (default: degree + 8).
    #[arg(long, value_name = "M")]
    quad_radial: Option<usize>,
    /// Polar quadrature points (default: degree + 8).
    #[arg(long, value_name = "L")]
    quad_theta: Option<usize>,
    /// Azimuthal quadrature points (default: 2 degree + 16).
    #[arg(long, value_name = "L")]
    quad_phi: Option<usize>,
}

#[derive(Args)]
struct SolveArgs {
    /// Manufactured case: 1 or 2.
    #[arg(long)]
    case: String,
    /// Polynomial degree N (>= 2).
    #[arg(long)]
    degree: usize,
    /// Output path for the coefficient JSON (default: solve-<case>-n<N>.json
    /// in the output directory).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Format of the one-row error report printed to stdout.
    #[arg(long, value_enum, default_value_t = OutputFormat::Md)]
    format: OutputFormat,
    #[command(flatten)]
    quad: QuadArgs,
}

#[derive(Args)]
struct ConvergenceArgs {
    /// Manufactured case: 1 or 2.
    #[arg(long)]
    case: String,
    /// Comma-separated ascending degrees, e.g. 4,8,12,16.
    #[arg(long)]
    degrees: String,
    /// Table format.
    #[arg(long, value_enum, default_value_t = OutputFormat::Md)]
    format: OutputFormat,
    /// Optional output file (stdout always gets the table).
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    quad: QuadArgs,
}

#[derive(Args)]
struct ExportFieldArgs {
    /// Manufactured case: 1 or 2.
    #[arg(long)]
    case: String,
    /// Polynomial degree N (>= 2).
    #[arg(long)]
    degree: usize,
    /// Axis-aligned plane, e.g. z=0 or x=0.25.
    #[arg(long)]
    plane: String,
    /// Lattice resolution per axis (>= 2).
    #[arg(long)]
    grid: usize,
    /// Which field to export.
    #[arg(long, value_enum, default_value_t = FieldVar::U)]
    var: FieldVar,
    /// Output format (csv or json).
    #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
    format: OutputFormat,
    /// Optional output file (default: stdout only).
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    quad: QuadArgs,
}

#[derive(Args)]
struct BasisCheckArgs {
    /// Diagnostic degree (2..=12).
    #[arg(long)]
    degree: usize,
    /// Harness self-test: perturb the stiffness diagonal by this relative
    /// amount so the check must fail.
    #[arg(long, hide = true)]
    self_test_perturb: Option<f64>,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum OutputFormat {
    Csv,
    Json,
    Md,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum FieldVar {
    U,
    Sigma,
}

/// Optional defaults loaded from `--config`; command-line flags win.
#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    quad_radial: Option<usize>,
    quad_theta: Option<usize>,
    quad_phi: Option<usize>,
    threads: Option<usize>,
    out_dir: Option<PathBuf>,
}

enum FailureKind {
    Usage,
    Numerical,
}

struct Failure {
    kind: FailureKind,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Self {
            kind: FailureKind::Usage,
            message: message.into(),
        }
    }

    fn numerical(message: impl Into<String>) -> Self {
        Self {
            kind: FailureKind::Numerical,
            message: message.into(),
        }
    }
}

impl From<ballspectral::Error> for Failure {
    fn from(e: ballspectral::Error) -> Self {
        use ballspectral::Error as E;
        match e {
            E::UnknownCase(_) | E::DegreeTooSmall(_) | E::DegreesNotIncreasing => {
                Failure::usage(e.to_string())
            }
            other => Failure::numerical(other.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::numerical(format!("io: {e}"))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            let kind = match f.kind {
                FailureKind::Usage => "usage",
                FailureKind::Numerical => "numerical",
            };
            eprintln!(
                "{}",
                serde_json::json!({"error": {"kind": kind, "message": f.message}})
            );
            match f.kind {
                FailureKind::Usage => ExitCode::from(2),
                FailureKind::Numerical => ExitCode::from(1),
            }
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    let file_cfg = load_file_config(cli.config.as_deref())?;
    let threads = cli.threads.or(file_cfg.threads);
    init_threads(threads);
    let out_dir = out_dir(&file_cfg);

    match cli.command {
        Command::Solve(args) => cmd_solve(args, &file_cfg, &out_dir, threads),
        Command::Convergence(args) => cmd_convergence(args, &file_cfg, &out_dir, threads),
        Command::ExportField(args) => cmd_export_field(args, &file_cfg, &out_dir, threads),
        Command::BasisCheck(args) => cmd_basis_check(args),
    }
}

fn load_file_config(path: Option<&Path>) -> Result<FileConfig, Failure> {
    match path {
        None => Ok(FileConfig::default()),
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .map_err(|e| Failure::usage(format!("cannot read config {}: {e}", p.display())))?;
            serde_json::from_str(&text)
                .map_err(|e| Failure::usage(format!("invalid config {}: {e}", p.display())))
        }
    }
}

#[cfg(feature = "parallel")]
fn init_threads(threads: Option<usize>) {
    if let Some(t) = threads {
        // ignore failure if a pool already exists (e.g. repeated init in tests)
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(t.max(1))
            .build_global();
    }
}

#[cfg(not(feature = "parallel"))]
fn init_threads(_threads: Option<usize>) {}

/// Output directory: $BALLSPECTRAL_OUT_DIR, then the config file, then cwd.
/// Relative --out paths are resolved against it.
fn out_dir(file_cfg: &FileConfig) -> PathBuf {
    std::env::var_os("BALLSPECTRAL_OUT_DIR")
        .map(PathBuf::from)
        .or_else(|| file_cfg.out_dir.clone())
        .unwrap_or_else(|| PathBuf::from("."))
}

fn resolve_out(out_dir: &Path, out: &Path) -> PathBuf {
    if out.is_absolute() {
        out.to_path_buf()
    } else {
        out_dir.join(out)
    }
}

fn grid_spec(degree: usize, quad: &QuadArgs, file_cfg: &FileConfig) -> GridSpec {
    let defaults = GridSpec::for_degree(degree);
    GridSpec {
        radial: quad
            .quad_radial
            .or(file_cfg.quad_radial)
            .unwrap_or(defaults.radial),
        theta: quad
            .quad_theta
            .or(file_cfg.quad_theta)
            .unwrap_or(defaults.theta),
        phi: quad.quad_phi.or(file_cfg.quad_phi).unwrap_or(defaults.phi),
    }
}

fn parse_case(s: &str) -> Result<CaseId, Failure> {
    Ok(CaseId::parse(s)?)
}

fn check_degree(degree: usize) -> Result<(), Failure> {
    if degree < 2 {
        return Err(Failure::usage(format!(
            "degree must be at least 2 (got {degree})"
        )));
    }
    Ok(())
}

/// Effective configuration echoed into every output artifact.
#[derive(Serialize)]
struct EchoConfig {
    command: &'static str,
    case: String,
    degrees: Vec<usize>,
    quadrature: GridSpec,
    format: OutputFormat,
    threads: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    plane: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    grid: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    var: Option<FieldVar>,
}

fn report_text(report: &ErrorReport, format: OutputFormat, config: &EchoConfig) -> String {
    let cfg = serde_json::to_string(config).expect("config echo");
    match format {
        OutputFormat::Csv => format!("# config: {cfg}\n{}", report.to_csv()),
        OutputFormat::Md => format!("{}<!-- config: {cfg} -->\n", report.to_markdown()),
        OutputFormat::Json => {
            let v = serde_json::json!({
                "config": serde_json::to_value(config).unwrap(),
                "report": report.to_json(),
            });
            format!("{}\n", serde_json::to_string_pretty(&v).unwrap())
        }
    }
}

fn cmd_solve(
    args: SolveArgs,
    file_cfg: &FileConfig,
    out_dir: &Path,
    threads: Option<usize>,
) -> Result<(), Failure> {
    let case_id = parse_case(&args.case)?;
    check_degree(args.degree)?;
    let spec = grid_spec(args.degree, &args.quad, file_cfg);
    let case = manufactured_case(case_id);

    let result = solver::solve_biharmonic(case.f_field(), args.degree, &spec)?;
    let fine = spec.refined().build()?;
    let row = solver::compute_errors(&case, &result, &fine)?;

    let config = EchoConfig {
        command: "solve",
        case: case_id.name().to_string(),
        degrees: vec![args.degree],
        quadrature: spec,
        format: args.format,
        threads,
        plane: None,
        grid: None,
        var: None,
    };

    let artifact = serde_json::json!({
        "config": serde_json::to_value(&config).unwrap(),
        "case": case_id.name(),
        "degree": args.degree,
        "quadrature": spec,
        "sigma": result.sigma_hat.to_json(),
        "u": result.u_hat.to_json(),
        "errors": row,
    });
    let out_path = resolve_out(
        out_dir,
        &args.out.unwrap_or_else(|| {
            PathBuf::from(format!("solve-{}-n{}.json", case_id.name(), args.degree))
        }),
    );
    std::fs::write(
        &out_path,
        format!("{}\n", serde_json::to_string_pretty(&artifact).unwrap()),
    )?;

    let report = ErrorReport {
        case: case_id.name().to_string(),
        rate_basis: "l2".to_string(),
        rows: vec![row],
    };
    print!("{}", report_text(&report, args.format, &config));
    eprintln!(
        "wrote {} (analysis {:.1} ms, algebra {:.3} ms, error eval on {}x{}x{} grid)",
        out_path.display(),
        result.timings.analysis.as_secs_f64() * 1e3,
        result.timings.algebra.as_secs_f64() * 1e3,
        fine.spec().radial,
        fine.spec().theta,
        fine.spec().phi,
    );
    Ok(())
}

fn parse_degrees(s: &str) -> Result<Vec<usize>, Failure> {
    let degrees: Result<Vec<usize>, _> = s.split(',').map(|d| d.trim().parse::<usize>()).collect();
    let degrees = degrees.map_err(|_| Failure::usage(format!("invalid degree list `{s}`")))?;
    if degrees.is_empty() {
        return Err(Failure::usage("empty degree list"));
    }
    for &d in &degrees {
        check_degree(d)?;
    }
    if degrees.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Failure::usage("degrees must be strictly ascending"));
    }
    Ok(degrees)
}

fn cmd_convergence(
    args: ConvergenceArgs,
    file_cfg: &FileConfig,
    out_dir: &Path,
    threads: Option<usize>,
) -> Result<(), Failure> {
    let case_id = parse_case(&args.case)?;
    let degrees = parse_degrees(&args.degrees)?;
    let override_spec = if args.quad.quad_radial.is_some()
        || args.quad.quad_theta.is_some()
        || args.quad.quad_phi.is_some()
        || file_cfg.quad_radial.is_some()
        || file_cfg.quad_theta.is_some()
        || file_cfg.quad_phi.is_some()
    {
        Some(grid_spec(*degrees.last().unwrap(), &args.quad, file_cfg))
    } else {
        None
    };

    let (report, timings) = solver::run_convergence_study(case_id, &degrees, override_spec)?;

    let config = EchoConfig {
        command: "convergence",
        case: case_id.name().to_string(),
        degrees,
        quadrature: override_spec.unwrap_or_else(|| {
            GridSpec::for_degree(*report.rows.last().map(|r| &r.degree).unwrap())
        }),
        format: args.format,
        threads,
        plane: None,
        grid: None,
        var: None,
    };
    let text = report_text(&report, args.format, &config);
    print!("{text}");
    if let Some(out) = args.out {
        let path = resolve_out(out_dir, &out);
        std::fs::write(&path, &text)?;
        eprintln!("wrote {}", path.display());
    }
    for t in timings {
        eprintln!(
            "degree {:>3}: analysis {:>8.1} ms, algebra {:>7.3} ms, error eval {:>8.1} ms",
            t.degree,
            t.analysis.as_secs_f64() * 1e3,
            t.algebra.as_secs_f64() * 1e3,
            t.error_eval.as_secs_f64() * 1e3,
        );
    }
    Ok(())
}

struct Plane {
    /// fixed axis index and value
    axis: usize,
    value: f64,
    free: [usize; 2],
}

fn parse_plane(s: &str) -> Result<Plane, Failure> {
    let (axis_name, value) = s
        .split_once('=')
        .ok_or_else(|| Failure::usage(format!("plane must look like z=0, got `{s}`")))?;
    let axis = match axis_name.trim() {
        "x" => 0,
        "y" => 1,
        "z" => 2,
        other => return Err(Failure::usage(format!("unknown plane axis `{other}`"))),
    };
    let value: f64 = value
        .trim()
        .parse()
        .map_err(|_| Failure::usage(format!("invalid plane offset in `{s}`")))?;
    if !(value.is_finite() && value.abs() <= 1.0) {
        return Err(Failure::usage(format!(
            "plane offset {value} lies outside the ball"
        )));
    }
    let free = match axis {
        0 => [1, 2],
        1 => [0, 2],
        _ => [0, 1],
    };
    Ok(Plane { axis, value, free })
}

fn cmd_export_field(
    args: ExportFieldArgs,
    file_cfg: &FileConfig,
    out_dir: &Path,
    threads: Option<usize>,
) -> Result<(), Failure> {
    let case_id = parse_case(&args.case)?;
    check_degree(args.degree)?;
    if args.grid < 2 {
        return Err(Failure::usage(format!(
            "grid resolution must be at least 2 (got {})",
            args.grid
        )));
    }
    if args.format == OutputFormat::Md {
        return Err(Failure::usage("export-field supports csv or json"));
    }
    let plane = parse_plane(&args.plane)?;
    let spec = grid_spec(args.degree, &args.quad, file_cfg);
    let case = manufactured_case(case_id);
    let result = solver::solve_biharmonic(case.f_field(), args.degree, &spec)?;
    let hat = match args.var {
        FieldVar::U => &result.u_hat,
        FieldVar::Sigma => &result.sigma_hat,
    };
    let exact = |r: f64| match args.var {
        FieldVar::U => case.u(r),
        FieldVar::Sigma => case.sigma(r),
    };

    // lattice over [-1, 1]^2 in the free coordinates; points outside the
    // closed ball are emitted as missing values, never evaluated
    let g = args.grid;
    let coord = |i: usize| -1.0 + 2.0 * i as f64 / (g - 1) as f64;
    let mut inside = Vec::new();
    let mut mask = vec![false; g * g];
    for i in 0..g {
        for j in 0..g {
            let mut p = [0.0; 3];
            p[plane.free[0]] = coord(i);
            p[plane.free[1]] = coord(j);
            p[plane.axis] = plane.value;
            let r2 = p[0] * p[0] + p[1] * p[1] + p[2] * p[2];
            if r2 <= 1.0 {
                mask[i * g + j] = true;
                inside.push(p);
            }
        }
    }
    let numeric = transform::synthesize(hat, &inside)?;

    let axis_names = ["x", "y", "z"];
    let config = EchoConfig {
        command: "export-field",
        case: case_id.name().to_string(),
        degrees: vec![args.degree],
        quadrature: spec,
        format: args.format,
        threads,
        plane: Some(args.plane.clone()),
        grid: Some(args.grid),
        var: Some(args.var),
    };

    let text = match args.format {
        OutputFormat::Csv => {
            let mut out = format!(
                "# config: {}\n{},{},exact,numeric,abs_error\n",
                serde_json::to_string(&config).unwrap(),
                axis_names[plane.free[0]],
                axis_names[plane.free[1]],
            );
            let mut k = 0;
            for i in 0..g {
                for j in 0..g {
                    let (a, b) = (coord(i), coord(j));
                    if mask[i * g + j] {
                        let p = inside[k];
                        let r = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
                        let ex = exact(r);
                        let nv = numeric[k];
                        out.push_str(&format!(
                            "{a},{b},{},{},{}\n",
                            fmt_sci(ex),
                            fmt_sci(nv),
                            fmt_sci((ex - nv).abs())
                        ));
                        k += 1;
                    } else {
                        out.push_str(&format!("{a},{b},,,\n"));
                    }
                }
            }
            out
        }
        OutputFormat::Json => {
            let mut rows = Vec::with_capacity(g * g);
            let mut k = 0;
            for i in 0..g {
                for j in 0..g {
                    let (a, b) = (coord(i), coord(j));
                    if mask[i * g + j] {
                        let p = inside[k];
                        let r = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
                        let ex = exact(r);
                        let nv = numeric[k];
                        rows.push(serde_json::json!([a, b, ex, nv, (ex - nv).abs()]));
                        k += 1;
                    } else {
                        rows.push(serde_json::json!([
                            a,
                            b,
                            serde_json::Value::Null,
                            serde_json::Value::Null,
                            serde_json::Value::Null
                        ]));
                    }
                }
            }
            let v = serde_json::json!({
                "config": serde_json::to_value(&config).unwrap(),
                "columns": [axis_names[plane.free[0]], axis_names[plane.free[1]], "exact", "numeric", "abs_error"],
                "rows": rows,
            });
            format!("{}\n", serde_json::to_string_pretty(&v).unwrap())
        }
        OutputFormat::Md => unreachable!(),
    };

    print!("{text}");
    if let Some(out) = args.out {
        let path = resolve_out(out_dir, &out);
        std::fs::write(&path, &text)?;
        eprintln!("wrote {}", path.display());
    }
    Ok(())
}

fn cmd_basis_check(args: BasisCheckArgs) -> Result<(), Failure> {
    check_degree(args.degree)?;
    if args.degree > 12 {
        return Err(Failure::usage(format!(
            "basis-check is a diagnostic; degree is capped at 12 (got {})",
            args.degree
        )));
    }
    let report = match args.self_test_perturb {
        None => diagnostics::basis_check(args.degree)?,
        Some(eps) => diagnostics::basis_check_with(args.degree, move |k, n| {
            ballspectral::ballbasis::stiffness_lambda(k, n) * (1.0 + eps)
        })?,
    };
    println!("basis check at degree {}", report.degree);
    println!(
        "  stiffness off-diagonal (of max diagonal): {} (tol {})",
        fmt_sci(report.stiffness_offdiag),
        fmt_sci(diagnostics::STIFFNESS_OFFDIAG_TOL)
    );
    println!(
        "  stiffness diagonal vs 2n+4k+1 (relative): {} (tol {})",
        fmt_sci(report.stiffness_diag_dev),
        fmt_sci(diagnostics::STIFFNESS_DIAG_TOL)
    );
    println!(
        "  mass quadrature vs closed form (absolute): {} (tol {})",
        fmt_sci(report.mass_dev),
        fmt_sci(diagnostics::MASS_TOL)
    );
    println!(
        "  boundary max |value|: {} (tol {})",
        fmt_sci(report.boundary_max),
        fmt_sci(diagnostics::BOUNDARY_TOL)
    );
    match report.failing() {
        None => {
            println!("result: PASS");
            Ok(())
        }
        Some(name) => {
            println!("result: FAIL — {name}");
            Err(Failure::numerical(name))
        }
    }
}
