use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use pwlab::{execute, parse_span, write_outcome, CliError, Config, Overrides, Pipeline};

#[derive(Parser)]
#[command(name = "pwlab", version, about = "Plane wave limits, pp-wave classification and conjugate points")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Scenario file (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Main tolerance of the subcommand (see README).
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Parameter interval, as A:B.
    #[arg(long, global = true, allow_hyphen_values = true)]
    span: Option<String>,
    /// Built-in scenario name; overrides the config's metric.
    #[arg(long, global = true)]
    scenario: Option<String>,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Wave profile along a geodesic and the assembled limit metric.
    Limit,
    /// Curvature flags of a pp-wave or of a limit.
    Classify,
    /// Conjugate points with multiplicities and the Morse bound.
    Conjugate,
    /// Sampled evidence for the limit correspondence and focusing results.
    Verify,
    /// Brinkmann profile from Rosen data.
    #[command(name = "rosen2brinkmann")]
    Rosen2Brinkmann,
    /// Riccati identity along a unit geodesic vector field.
    #[command(name = "flowprofile")]
    FlowProfile,
}

fn run(cli: &Cli) -> Result<serde_json::Value, CliError> {
    let cfg = match &cli.config {
        Some(p) => Config::load(p)?,
        None => Config::default(),
    };
    if let Some(t) = cli.tol {
        if !(t > 0.0) {
            return Err(CliError::Config(format!("--tol must be positive, got {t}")));
        }
    }
    let ov = Overrides {
        scenario: cli.scenario.clone(),
        tol: cli.tol,
        span: cli.span.as_deref().map(parse_span).transpose()?,
    };
    let pipeline = match cli.command {
        Command::Limit => Pipeline::Limit,
        Command::Classify => Pipeline::Classify,
        Command::Conjugate => Pipeline::Conjugate,
        Command::Verify => Pipeline::Verify,
        Command::Rosen2Brinkmann => Pipeline::Rosen,
        Command::FlowProfile => Pipeline::Flow,
    };
    let outcome = execute(pipeline, &cfg, &ov)?;
    write_outcome(&outcome, &cli.out)?;
    Ok(outcome.summary)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(summary) => {
            // A closed stdout (e.g. piped into `head`) is not a failure.
            let _ = writeln!(std::io::stdout(), "{}", serde_json::to_string_pretty(&summary).unwrap_or_default());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("pwlab: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
