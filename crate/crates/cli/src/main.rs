use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use decohere_cli::presets;
use decohere_cli::{run_scenario, Overrides, RunError, RunOutput, Scenario};

#[derive(Parser)]
#[command(name = "decohere", version, about = "Polarization decoherence and control simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario file or a built-in preset.
    Run {
        /// Scenario TOML file(s); several files are run concurrently.
        scenario: Vec<PathBuf>,
        /// Directory for `<name>.csv` and matrix dumps; stdout if absent.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Built-in preset to run (use `all` for every preset).
        #[arg(long)]
        preset: Option<String>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        quadrature_nodes: Option<usize>,
    },
    /// List built-in presets.
    Presets,
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Presets => {
            for name in presets::names() {
                println!("{name}");
            }
            ExitCode::SUCCESS
        }
        Command::Run { scenario, out, preset, seed, quadrature_nodes } => {
            let overrides = Overrides { seed, quadrature_nodes };
            match run(&scenario, preset.as_deref(), out.as_deref(), overrides) {
                Ok(()) => ExitCode::SUCCESS,
                Err(e) => {
                    eprintln!("decohere: {e}");
                    ExitCode::from(e.exit_code() as u8)
                }
            }
        }
    }
}

fn load_all(files: &[PathBuf], preset: Option<&str>) -> Result<Vec<Scenario>, RunError> {
    let mut scenarios = Vec::new();
    match preset {
        Some("all") => {
            for (_, text) in presets::PRESETS {
                scenarios.push(Scenario::parse(text, ".")?);
            }
        }
        Some(name) => {
            let text = presets::preset(name).ok_or_else(|| RunError::Validation {
                field: "--preset".into(),
                message: format!("unknown preset `{name}`; available: {}", presets::names().collect::<Vec<_>>().join(", ")),
            })?;
            scenarios.push(Scenario::parse(text, ".")?);
        }
        None => {}
    }
    for f in files {
        scenarios.push(Scenario::load(f)?);
    }
    if scenarios.is_empty() {
        return Err(RunError::Validation { field: "scenario".into(), message: "give a scenario file or --preset".into() });
    }
    Ok(scenarios)
}

fn run(files: &[PathBuf], preset: Option<&str>, out: Option<&Path>, overrides: Overrides) -> Result<(), RunError> {
    let scenarios = load_all(files, preset)?;
    let results: Vec<Result<RunOutput, RunError>> = if scenarios.len() == 1 {
        vec![run_scenario(&scenarios[0], overrides)]
    } else {
        std::thread::scope(|scope| {
            let handles: Vec<_> = scenarios.iter().map(|s| scope.spawn(move || run_scenario(s, overrides))).collect();
            handles.into_iter().map(|h| h.join().expect("scenario thread panicked")).collect()
        })
    };
    let mut first_error = None;
    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    for (s, result) in scenarios.iter().zip(results) {
        match result {
            Ok(output) => match out {
                Some(dir) => output.write_to(dir)?,
                None => {
                    let mut text = output.curve.to_csv();
                    if !output.matrices.is_empty() {
                        text.push('\n');
                        text.push_str(&output.matrices_text());
                    }
                    lock.write_all(text.as_bytes()).map_err(|e| RunError::Io(e.to_string()))?;
                }
            },
            Err(e) => {
                if scenarios.len() > 1 {
                    eprintln!("decohere: {}: {e}", s.name);
                }
                first_error.get_or_insert(e);
            }
        }
    }
    first_error.map_or(Ok(()), Err)
}
