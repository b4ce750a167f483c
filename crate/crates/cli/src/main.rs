//! `yamabe`: batch front end for curvature reports, region sweeps, criterion checks,
//! quotient estimates and deformation-path checks.
//!
//! Exit codes: 0 on success, 1 on a numerical or internal failure, 2 on invalid input.

mod parse;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use yamabe_core::conformal_energy::{einstein_hilbert, EnergyReport};
use yamabe_core::criterion::{
    berger_path, corollary_path_check, sweep, theorem1_check, CriterionReport,
};
use yamabe_core::lie_curvature::{
    berger_ricci_closed, berger_scalar_closed, curvature_report, levi_civita,
    metric_compatibility_residual, torsion_residual, CurvatureReport,
};
use yamabe_core::metric_spec::ResolvedMetric;
use yamabe_core::su2_chart::{chart_metric, dump_csv, dump_json, ScalarField};
use yamabe_core::yamabe_estimator::{estimate, EstimateSummary, EstimatorOptions};
use yamabe_core::{Error, Result};

/// Engine and closed forms must agree this closely (relative) for a curvature run to pass.
const CLOSED_FORM_TOL: f64 = 1e-10;
/// Torsion and metric-compatibility residuals allowed in the connection.
const CONNECTION_TOL: f64 = 1e-9;

#[derive(Parser, Debug)]
#[command(name = "yamabe", version, about = "Relative Yamabe toolkit for Berger hemispheres")]
struct Cli {
    /// Write the result here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Output format; each command has its own default.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Seed for random restarts.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Suppress the summary line on stderr.
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Curvature of a left-invariant metric, with closed-form cross-checks for Berger metrics.
    Curvature(CurvatureArgs),
    /// Classify a grid of Berger metrics against the round metric (CSV by default).
    Sweep(SweepArgs),
    /// Compare `R_h h` with `R_g g` for two left-invariant metrics.
    Criterion(CriterionArgs),
    /// Minimize the Sobolev quotient on the hemisphere grid.
    Yamabe(YamabeArgs),
    /// Check the criterion along the Berger path `t ↦ g_{s,t}` against its start.
    Pathcheck(PathArgs),
    /// Write cell centers, metric components and quadrature weights of a grid.
    DumpGrid(GridArgs),
}

#[derive(Args, Debug)]
struct CurvatureArgs {
    #[arg(long, requires = "t", conflicts_with = "spec")]
    s: Option<f64>,
    #[arg(long, requires = "s", conflicts_with = "spec")]
    t: Option<f64>,
    /// JSON metric spec: explicit structure constants and Gram matrix, or `{"berger": ...}`.
    #[arg(long, required_unless_present = "s")]
    spec: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SweepArgs {
    /// `a:b:n`
    #[arg(long)]
    s: String,
    /// `a:b:n`
    #[arg(long)]
    t: String,
}

#[derive(Args, Debug)]
struct CriterionArgs {
    /// Reference metric: `round`, `berger:s,t` or a spec path.
    #[arg(long)]
    g: String,
    /// Compared metric, same forms.
    #[arg(long)]
    h: String,
}

#[derive(Args, Debug)]
struct YamabeArgs {
    /// `round-hemisphere` or `berger:s,t`.
    #[arg(long)]
    geometry: String,
    /// `N` or `Nη,Nξ1,Nξ2`.
    #[arg(long, default_value = "32")]
    resolution: String,
    #[arg(long, default_value_t = EstimatorOptions::default().max_iters)]
    max_iters: usize,
    #[arg(long, default_value_t = EstimatorOptions::default().step)]
    step: f64,
    #[arg(long, default_value_t = EstimatorOptions::default().tol)]
    tol: f64,
    #[arg(long, default_value_t = EstimatorOptions::default().restarts)]
    restarts: usize,
    /// Also write the minimizer on the grid; JSON if the name ends in `.json`, else CSV.
    #[arg(long)]
    dump: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct PathArgs {
    #[arg(long, default_value_t = 1.0)]
    s: f64,
    #[arg(long)]
    t_start: f64,
    #[arg(long)]
    t_end: f64,
    #[arg(long, default_value_t = 100)]
    steps: usize,
}

#[derive(Args, Debug)]
struct GridArgs {
    #[arg(long, default_value = "round-hemisphere")]
    geometry: String,
    #[arg(long, default_value = "8")]
    resolution: String,
}

#[derive(Serialize)]
struct ClosedFormCheck {
    s: f64,
    t: f64,
    scalar: f64,
    ricci: [f64; 3],
    scalar_delta: f64,
    ricci_delta: f64,
}

#[derive(Serialize)]
struct CurvatureOutput {
    metric: [[f64; 3]; 3],
    #[serde(skip_serializing_if = "Option::is_none")]
    labels: Option<[String; 3]>,
    torsion_residual: f64,
    compatibility_residual: f64,
    #[serde(flatten)]
    report: CurvatureReport,
    closed_form: Option<ClosedFormCheck>,
}

#[derive(Serialize)]
struct CriterionOutput {
    g: [[f64; 3]; 3],
    h: [[f64; 3]; 3],
    r_g: f64,
    r_h: f64,
    #[serde(flatten)]
    report: CriterionReport,
}

#[derive(Serialize)]
struct YamabeOutput {
    geometry: [f64; 2],
    resolution: [usize; 3],
    options: EstimatorOptions,
    scalar: f64,
    /// Normalized total scalar curvature of the metric itself.
    energy: EnergyReport,
    restart: usize,
    #[serde(flatten)]
    summary: EstimateSummary,
}

#[derive(Serialize)]
struct TraceRow {
    iteration: usize,
    value: f64,
}

/// What a command produced: the bytes to write and a one-line summary.
struct Outcome {
    bytes: Vec<u8>,
    summary: String,
}

fn relative_delta(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1.0)
}

fn json<T: Serialize>(value: &T) -> Result<Vec<u8>> {
    let mut bytes = serde_json::to_vec_pretty(value)
        .map_err(|e| Error::Internal(format!("serialization failed: {e}")))?;
    bytes.push(b'\n');
    Ok(bytes)
}

fn csv_rows<T: Serialize>(rows: impl IntoIterator<Item = T>) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.serialize(row)
            .map_err(|e| Error::Internal(format!("csv serialization failed: {e}")))?;
    }
    w.into_inner()
        .map_err(|e| Error::Internal(format!("csv flush failed: {e}")))
}

fn json_only(format: Option<Format>, command: &str) -> Result<()> {
    match format {
        Some(Format::Csv) => Err(Error::InvalidInput(format!(
            "{command} writes a single JSON report; --format csv is not available"
        ))),
        _ => Ok(()),
    }
}

fn cmd_curvature(args: &CurvatureArgs, format: Option<Format>) -> Result<Outcome> {
    json_only(format, "curvature")?;
    let resolved = match (&args.spec, args.s, args.t) {
        (Some(path), _, _) => parse::spec_file(path)?,
        (None, Some(s), Some(t)) => parse::metric(&format!("berger:{s},{t}"))?,
        _ => return Err(Error::InvalidInput("give --spec or both --s and --t".into())),
    };
    let ResolvedMetric {
        frame,
        metric,
        berger,
    } = resolved;
    let gamma = levi_civita(&frame, &metric);
    let torsion = torsion_residual(&frame, &gamma);
    let compat = metric_compatibility_residual(&metric, &gamma);
    if torsion > CONNECTION_TOL || compat > CONNECTION_TOL {
        return Err(Error::Internal(format!(
            "connection residuals torsion {torsion:e}, compatibility {compat:e}"
        )));
    }
    let report = curvature_report(&frame, &metric);
    let closed_form = match berger {
        Some(p) => {
            let scalar = berger_scalar_closed(p);
            let ricci = berger_ricci_closed(p);
            let got = report.ricci_unit_diagonal(&metric);
            let check = ClosedFormCheck {
                s: p.s(),
                t: p.t(),
                scalar,
                ricci,
                scalar_delta: relative_delta(report.scalar, scalar),
                ricci_delta: (0..3)
                    .map(|i| relative_delta(got[i], ricci[i]))
                    .fold(0.0, f64::max),
            };
            if check.scalar_delta > CLOSED_FORM_TOL || check.ricci_delta > CLOSED_FORM_TOL {
                return Err(Error::Internal(format!(
                    "engine disagrees with closed forms (scalar {:e}, Ricci {:e})",
                    check.scalar_delta, check.ricci_delta
                )));
            }
            Some(check)
        }
        None => None,
    };
    let summary = format!(
        "R = {}, einstein deviation = {}",
        report.scalar, report.einstein_deviation
    );
    let out = CurvatureOutput {
        metric: metric.rows(),
        labels: frame.labels().cloned(),
        torsion_residual: torsion,
        compatibility_residual: compat,
        report,
        closed_form,
    };
    Ok(Outcome {
        bytes: json(&out)?,
        summary,
    })
}

fn cmd_sweep(args: &SweepArgs, format: Option<Format>) -> Result<Outcome> {
    let s = parse::range(&args.s)?;
    let t = parse::range(&args.t)?;
    let rows = sweep(&s, &t)?;
    let summary = format!("{} rows", rows.len());
    let bytes = match format.unwrap_or(Format::Csv) {
        Format::Csv => csv_rows(&rows)?,
        Format::Json => json(&rows)?,
    };
    Ok(Outcome { bytes, summary })
}

fn cmd_criterion(args: &CriterionArgs, format: Option<Format>) -> Result<Outcome> {
    json_only(format, "criterion")?;
    let g = parse::metric(&args.g)?;
    let h = parse::metric(&args.h)?;
    if g.frame.constants() != h.frame.constants() {
        return Err(Error::InvalidInput(
            "the two metrics must live on the same Lie algebra frame".into(),
        ));
    }
    let r_g = curvature_report(&g.frame, &g.metric).scalar;
    let r_h = curvature_report(&h.frame, &h.metric).scalar;
    let report = theorem1_check(&g.metric, r_g, &h.metric, r_h)?;
    let summary = format!(
        "{:?}, min_eig = {}, gamma = {}",
        report.verdict, report.min_eig, report.gamma
    );
    let out = CriterionOutput {
        g: g.metric.rows(),
        h: h.metric.rows(),
        r_g,
        r_h,
        report,
    };
    Ok(Outcome {
        bytes: json(&out)?,
        summary,
    })
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    std::fs::write(path, bytes)
        .map_err(|e| Error::InvalidInput(format!("cannot write {}: {e}", path.display())))
}

fn cmd_yamabe(args: &YamabeArgs, format: Option<Format>, seed: u64) -> Result<Outcome> {
    let p = parse::berger(&args.geometry)?;
    let grid = parse::resolution(&args.resolution)?;
    let opts = EstimatorOptions {
        max_iters: args.max_iters,
        step: args.step,
        tol: args.tol,
        restarts: args.restarts,
        seed,
    };
    opts.validate()?;
    let metric = chart_metric(&grid, p)?;
    let scalar_value = berger_scalar_closed(p);
    let scalar = ScalarField::constant(&grid, scalar_value);
    let est = estimate(&metric, &scalar, &opts)?;

    if let Some(path) = &args.dump {
        let bytes = if path.extension().is_some_and(|e| e == "json") {
            json(&dump_json(&metric, Some(&est.minimizer))?)?
        } else {
            let mut buf = Vec::new();
            dump_csv(&metric, Some(&est.minimizer), &mut buf)?;
            buf
        };
        write_file(path, &bytes)?;
    }

    let summary = format!(
        "value = {}, converged = {}, iterations = {}",
        est.value, est.converged, est.iterations_used
    );
    let bytes = match format.unwrap_or(Format::Json) {
        Format::Json => json(&YamabeOutput {
            geometry: [p.s(), p.t()],
            resolution: grid.dims(),
            options: opts,
            scalar: scalar_value,
            energy: einstein_hilbert(&metric, &scalar)?,
            restart: est.restart,
            summary: est.summary(),
        })?,
        Format::Csv => csv_rows(
            est.trace
                .iter()
                .enumerate()
                .map(|(iteration, &value)| TraceRow { iteration, value }),
        )?,
    };
    Ok(Outcome { bytes, summary })
}

fn cmd_pathcheck(args: &PathArgs, format: Option<Format>) -> Result<Outcome> {
    if args.steps < 1 {
        return Err(Error::InvalidInput("steps must be at least 1".into()));
    }
    let report = corollary_path_check(berger_path(args.s), args.t_start, args.t_end, args.steps)?;
    let summary = format!(
        "delta = {}, R(endpoint) = {}",
        report.delta, report.endpoint_scalar
    );
    let bytes = match format.unwrap_or(Format::Json) {
        Format::Json => json(&report)?,
        Format::Csv => csv_rows(&report.samples)?,
    };
    Ok(Outcome { bytes, summary })
}

fn cmd_dump_grid(args: &GridArgs, format: Option<Format>) -> Result<Outcome> {
    let p = parse::berger(&args.geometry)?;
    let grid = parse::resolution(&args.resolution)?;
    let metric = chart_metric(&grid, p)?;
    let summary = format!("{} cells", grid.len());
    let bytes = match format.unwrap_or(Format::Csv) {
        Format::Csv => {
            let mut buf = Vec::new();
            dump_csv(&metric, None, &mut buf)?;
            buf
        }
        Format::Json => json(&dump_json(&metric, None)?)?,
    };
    Ok(Outcome { bytes, summary })
}

fn run(cli: &Cli) -> Result<Outcome> {
    match &cli.command {
        Command::Curvature(a) => cmd_curvature(a, cli.format),
        Command::Sweep(a) => cmd_sweep(a, cli.format),
        Command::Criterion(a) => cmd_criterion(a, cli.format),
        Command::Yamabe(a) => cmd_yamabe(a, cli.format, cli.seed),
        Command::Pathcheck(a) => cmd_pathcheck(a, cli.format),
        Command::DumpGrid(a) => cmd_dump_grid(a, cli.format),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = run(&cli).and_then(|outcome| {
        match &cli.out {
            Some(path) => write_file(path, &outcome.bytes)?,
            None => std::io::stdout()
                .write_all(&outcome.bytes)
                .map_err(|e| Error::InvalidInput(format!("cannot write to stdout: {e}")))?,
        }
        Ok(outcome.summary)
    });
    match result {
        Ok(summary) => {
            if !cli.quiet {
                eprintln!("{summary}");
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_input_error() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
