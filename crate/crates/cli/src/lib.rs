//! Command-line front end: named verification suites, trajectory export and report merging.
//!
//! Exit codes: 0 when every case passes, 1 when any case fails or a run errors,
//! 2 for usage and configuration errors.

pub mod config;
pub mod report;
pub mod suites;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use kcircles::families::{exterior_ball_curve, poincare_family, suspend};
use kcircles::{geodesic, metric_from_id, GeomError, Point4, Trajectory};

use config::{
    ConfigError, Format, Overrides, SuiteConfig, SuiteId, EXTERIOR_BALL, SUSPENSION_POINCARE,
};
use report::{MergedReport, VerificationReport};
pub use suites::run_suite;

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "kcircles",
    version,
    about = "Verification suites for complex families of circles"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a verification suite and emit a report.
    Verify(VerifyArgs),
    /// Export sampled curves.
    #[command(subcommand)]
    Export(ExportCommand),
    /// Combine reports.
    #[command(subcommand)]
    Report(ReportCommand),
}

#[derive(Debug, Args)]
struct VerifyArgs {
    suite: SuiteId,
    /// Flat `key = value` file with the same keys as the flags.
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    common: CommonArgs,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Replaces every tolerance of the suite.
    #[arg(long)]
    tol: Option<f64>,
    /// Finite-difference step.
    #[arg(long)]
    step: Option<f64>,
}

#[derive(Debug, Args)]
struct CommonArgs {
    #[arg(long)]
    metric: Option<String>,
    #[arg(long)]
    family: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Debug, Subcommand)]
enum ExportCommand {
    /// Integrate one curve and write it as CSV (`t,x0..x3,v0..v3`) or JSON.
    Trajectory(TrajectoryArgs),
}

#[derive(Debug, Args)]
struct TrajectoryArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Comma-separated coordinates `x0,x1,x2,x3`.
    #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
    point: Point4,
    #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
    velocity: Point4,
    /// Integration time, or the half arc length for suspension curves.
    #[arg(long, default_value_t = 1.0)]
    time: f64,
    #[arg(long, default_value_t = 2048)]
    steps: usize,
}

#[derive(Debug, Subcommand)]
enum ReportCommand {
    /// Bundle JSON reports with a combined summary.
    Merge {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn parse_point(s: &str) -> Result<Point4, String> {
    let coords: Vec<f64> = s
        .split(',')
        .map(|c| c.trim().parse::<f64>().map_err(|e| format!("`{c}`: {e}")))
        .collect::<Result<_, _>>()?;
    let coords: [f64; 4] = coords
        .try_into()
        .map_err(|v: Vec<f64>| format!("expected 4 coordinates, got {}", v.len()))?;
    if coords.iter().any(|c| !c.is_finite()) {
        return Err("coordinates must be finite".into());
    }
    Ok(Point4(coords))
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                EXIT_USAGE
            } else {
                EXIT_PASS
            };
        }
    };
    let outcome = match cli.command {
        Command::Verify(args) => verify(args),
        Command::Export(ExportCommand::Trajectory(args)) => export_trajectory(args),
        Command::Report(ReportCommand::Merge { inputs, out }) => merge(&inputs, out.as_deref()),
    };
    match outcome {
        Ok(code) => code,
        Err(CliError::Usage(e)) => {
            eprintln!("error: {e}");
            EXIT_USAGE
        }
        Err(CliError::Run(e)) => {
            eprintln!("error: {e}");
            EXIT_FAIL
        }
    }
}

enum CliError {
    Usage(String),
    Run(String),
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Usage(e.to_string())
    }
}

fn verify(args: VerifyArgs) -> Result<i32, CliError> {
    let file = match &args.config {
        Some(path) => Overrides::from_file(path)?,
        None => Overrides::default(),
    };
    let flags = Overrides {
        metric: args.common.metric,
        family: args.common.family,
        samples: args.samples,
        seed: args.seed,
        tol: args.tol,
        step: args.step,
        out: args.common.out,
        format: args.common.format,
    };
    let config = SuiteConfig::resolve(args.suite, file.layered(flags))?;
    let report = run_suite(&config);
    let text = match config.format {
        Format::Json => report.to_json(),
        Format::Csv => report.to_csv(),
    };
    write_output(config.out.as_deref(), &text)?;
    Ok(exit_code(&report))
}

pub fn exit_code(report: &VerificationReport) -> i32 {
    if report.all_pass() {
        EXIT_PASS
    } else {
        EXIT_FAIL
    }
}

fn write_output(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    let result = match out {
        Some(path) => std::fs::write(path, text),
        None => std::io::stdout().lock().write_all(text.as_bytes()),
    };
    result.map_err(|e| CliError::Usage(format!("cannot write output: {e}")))
}

fn export_trajectory(args: TrajectoryArgs) -> Result<i32, CliError> {
    if !(args.time > 0.0 && args.time.is_finite()) {
        return Err(CliError::Usage(format!(
            "--time must be positive, got {}",
            args.time
        )));
    }
    let traj = match args.common.family.as_deref() {
        None => {
            let metric = args.common.metric.as_deref().unwrap_or("fubini:1");
            let g = metric_from_id(metric).map_err(|e| CliError::Usage(e.to_string()))?;
            geodesic(
                g.as_ref(),
                &args.point,
                &args.velocity,
                args.time,
                args.steps,
            )
        }
        Some(_) if args.common.metric.is_some() => {
            return Err(CliError::Usage(
                "--metric and --family are exclusive".into(),
            ))
        }
        Some(EXTERIOR_BALL) => {
            exterior_ball_curve(&args.point, &args.velocity, args.time, args.steps)
        }
        Some(SUSPENSION_POINCARE) => suspend(poincare_family()).sample_trajectory(
            &args.point,
            &args.velocity,
            args.steps + 1,
            args.time,
        ),
        Some(other) => return Err(CliError::Usage(format!("unknown family `{other}`"))),
    };
    let (traj, code) = match traj {
        Ok(traj) => (traj, EXIT_PASS),
        Err(GeomError::DomainExit {
            time,
            reason,
            partial,
        }) => {
            eprintln!(
                "warning: left the domain at t = {time}: {reason}; writing the partial curve"
            );
            (*partial, EXIT_FAIL)
        }
        Err(GeomError::Precondition(e)) => return Err(CliError::Usage(e)),
        Err(e) => return Err(CliError::Run(e.to_string())),
    };
    write_output(
        args.common.out.as_deref(),
        &render_trajectory(&traj, args.common.format.unwrap_or(Format::Csv)),
    )?;
    Ok(code)
}

fn render_trajectory(traj: &Trajectory, format: Format) -> String {
    match format {
        Format::Csv => traj.to_csv(),
        Format::Json => {
            let mut s = serde_json::to_string_pretty(traj).expect("trajectory serializes");
            s.push('\n');
            s
        }
    }
}

fn merge(inputs: &[PathBuf], out: Option<&Path>) -> Result<i32, CliError> {
    let reports = inputs
        .iter()
        .map(|path| {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
            serde_json::from_str::<VerificationReport>(&text)
                .map_err(|e| CliError::Usage(format!("{} is not a report: {e}", path.display())))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let merged = MergedReport::new(reports);
    let mut text = serde_json::to_string_pretty(&merged).expect("merged report serializes");
    text.push('\n');
    write_output(out, &text)?;
    Ok(if merged.summary.failed == 0 {
        EXIT_PASS
    } else {
        EXIT_FAIL
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn point_parsing() {
        assert_eq!(
            parse_point("1, -2,3.5,0").unwrap(),
            Point4::new(1.0, -2.0, 3.5, 0.0)
        );
        assert!(parse_point("1,2,3").is_err());
        assert!(parse_point("1,2,3,x").is_err());
        assert!(parse_point("1,2,3,inf").is_err());
    }

    #[test]
    fn usage_errors_exit_2() {
        assert_eq!(run(["kcircles", "verify", "nonsense"]), EXIT_USAGE);
        assert_eq!(
            run(["kcircles", "verify", "kahler", "--metric", "sphere"]),
            EXIT_USAGE
        );
        assert_eq!(
            run(["kcircles", "verify", "kahler", "--tol=-1"]),
            EXIT_USAGE
        );
        assert_eq!(
            run(["kcircles", "verify", "kahler", "--tol", "0"]),
            EXIT_USAGE
        );
        assert_eq!(
            run(["kcircles", "verify", "kahler", "--family", "nope"]),
            EXIT_USAGE
        );
        assert_eq!(
            run([
                "kcircles",
                "verify",
                "kahler",
                "--config",
                "/nonexistent/cfg"
            ]),
            EXIT_USAGE
        );
        assert_eq!(
            run([
                "kcircles",
                "export",
                "trajectory",
                "--point",
                "0,0,0",
                "--velocity",
                "1,0,0,0"
            ]),
            EXIT_USAGE
        );
    }
}
