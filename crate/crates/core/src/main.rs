use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use femtoho::config::{parse_config, Command, Format};
use femtoho::report::{run, RunConfig, EXIT_CONFIG};
use femtoho::signaling::FlowKind;

/// Guard-channel analysis, admission-control simulation and handover call
/// flows for femtocell/macrocell networks.
#[derive(Debug, Parser)]
#[command(name = "femtoho", version)]
struct Cli {
    #[arg(value_enum)]
    command: Command,

    /// Call flow for `flow`, e.g. SMALL_MACRO_TO_FEMTO.
    flow: Option<String>,

    /// Scenario file (key = value lines in [sections]).
    #[arg(long)]
    config: Option<PathBuf>,

    /// Master seed for randomized commands; overrides the config file.
    #[arg(long)]
    seed: Option<u64>,

    /// Write the primary output here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,

    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,

    /// Total femtocell entries for `cac-sim` and `sweep-t`.
    #[arg(long)]
    trials: Option<u64>,

    /// For `flow`: drop this step to exercise divergence handling.
    #[arg(long)]
    drop_step: Option<u32>,
}

fn config_error(msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("config error: {msg}");
    ExitCode::from(EXIT_CONFIG as u8)
}

fn main() -> ExitCode {
    let cli = Cli::parse();

    let text = match &cli.config {
        Some(path) => match fs::read_to_string(path) {
            Ok(text) => text,
            Err(e) => return config_error(format!("{}: {e}", path.display())),
        },
        None => String::new(),
    };
    let mut config = match parse_config(&text, cli.command) {
        Ok(c) => c,
        Err(e) => return config_error(e),
    };
    if let Some(seed) = cli.seed {
        config.scenario.seed = seed;
    }
    if let Some(trials) = cli.trials {
        if trials == 0 {
            return config_error("--trials must be at least 1");
        }
        config.scenario.trials = trials;
    }
    let flow = match (cli.command, &cli.flow) {
        (Command::Flow, Some(name)) => match name.parse::<FlowKind>() {
            Ok(kind) => Some(kind),
            Err(e) => return config_error(e),
        },
        (Command::Flow, None) => None,
        (_, Some(extra)) => return config_error(format!("unexpected argument `{extra}`")),
        (_, None) => None,
    };

    let rc = RunConfig {
        command: cli.command,
        config,
        format: cli.format,
        flow,
        drop_step: cli.drop_step,
    };
    let result = match run(&rc) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(e.exit_code as u8);
        }
    };

    match &cli.out {
        Some(path) => {
            if let Err(e) = fs::write(path, &result.output) {
                eprintln!("error: {}: {e}", path.display());
                return ExitCode::from(EXIT_CONFIG as u8);
            }
        }
        None => print!("{}", result.output),
    }
    eprint!("{}", result.diagnostics);
    ExitCode::from(result.exit_code as u8)
}
