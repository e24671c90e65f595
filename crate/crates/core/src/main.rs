use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use rotdicke::config::{parse_config, parse_file_text, parse_flag_args, ResolvedConfig};
use rotdicke::experiments::{phase_diagram, run_protocol, spectrum_curves, sweep_lambda, sweep_velocity};
use rotdicke::output::{emit, Document, RunResult};
use rotdicke::{Error, Result};

/// Driven Dicke model dynamics: mean-field and exact finite-size runs,
/// parameter sweeps and phase diagrams.
#[derive(Parser)]
#[command(name = "rotdicke", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct RunArgs {
    /// Flat `key = value` file; flags given on the command line win.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Settings as `--key value` or `--key=value` (e.g. `--lambda 1.3`).
    #[arg(trailing_var_arg = true, allow_hyphen_values = true, value_name = "--KEY VALUE")]
    settings: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Time series of the observables for one protocol.
    Trajectory(RunArgs),
    /// Final and time-averaged observables over `lambda_values`.
    SweepLambda(RunArgs),
    /// Final and time-averaged observables over `delta_phi_values`.
    SweepVelocity(RunArgs),
    /// Time-averaged observables on the `lambda_values` x `delta_phi_values` grid.
    PhaseDiagram(RunArgs),
    /// Lower excitation energy and critical lines over `lambda_values`.
    Spectrum(RunArgs),
}

fn resolve(args: &RunArgs) -> Result<ResolvedConfig> {
    let mut settings = args.settings.clone();
    let mut config_path = args.config.clone();
    if let Some(i) = settings.iter().position(|a| a == "--config" || a.starts_with("--config=")) {
        let arg = settings.remove(i);
        config_path = Some(PathBuf::from(match arg.split_once('=') {
            Some((_, v)) => v.to_string(),
            None if i < settings.len() => settings.remove(i),
            None => return Err(Error::Config {
                key: "config".into(),
                message: "missing file name".into(),
            }),
        }));
    }
    let file = match &config_path {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| {
                Error::Io(std::io::Error::new(e.kind(), format!("cannot read {}: {e}", path.display())))
            })?;
            parse_file_text(&text)?
        }
        None => Vec::new(),
    };
    parse_config(&file, &parse_flag_args(&settings)?)
}

fn required_list(values: &Option<Vec<f64>>, key: &str) -> Result<Vec<f64>> {
    values.clone().ok_or_else(|| Error::Config {
        key: key.into(),
        message: "is required by this subcommand".into(),
    })
}

fn run(cli: Cli) -> Result<()> {
    let (args, command) = match &cli.command {
        Command::Trajectory(a) => (a, "trajectory"),
        Command::SweepLambda(a) => (a, "sweep-lambda"),
        Command::SweepVelocity(a) => (a, "sweep-velocity"),
        Command::PhaseDiagram(a) => (a, "phase-diagram"),
        Command::Spectrum(a) => (a, "spectrum"),
    };
    let resolved = resolve(args)?;
    let c = &resolved.config;
    eprint!("# {command}\n{}", resolved.echo_text());

    let result = match cli.command {
        Command::Trajectory(_) => RunResult::Trajectory(run_protocol(&c.protocol(None)?)?),
        Command::SweepLambda(_) => {
            let lambdas = required_list(&c.lambda_values, "lambda_values")?;
            RunResult::Sweep(sweep_lambda(&c.protocol(Some(lambdas[0]))?, &lambdas)?)
        }
        Command::SweepVelocity(_) => {
            let velocities = required_list(&c.delta_phi_values, "delta_phi_values")?;
            RunResult::Sweep(sweep_velocity(&c.protocol(None)?, &velocities)?)
        }
        Command::PhaseDiagram(_) => {
            let lambdas = required_list(&c.lambda_values, "lambda_values")?;
            let velocities = required_list(&c.delta_phi_values, "delta_phi_values")?;
            RunResult::Sweep(phase_diagram(&c.protocol(Some(lambdas[0]))?, &lambdas, &velocities)?)
        }
        Command::Spectrum(_) => {
            let lambdas = required_list(&c.lambda_values, "lambda_values")?;
            RunResult::Spectrum(spectrum_curves(c.omega, c.omega0, c.delta_phi, &lambdas)?)
        }
    };
    let doc = Document {
        config: resolved.echo(),
        result,
    };
    emit(&doc, c.format, c.precision, c.out.as_deref())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Usage errors are validation failures; help and version are not.
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
