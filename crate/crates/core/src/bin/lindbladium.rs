use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use lindbladium::config::{Experiment, RunConfig};
use lindbladium::runner::{output_paths, run, write_outputs, RunReport};
use lindbladium::Error;

#[derive(Parser)]
#[command(name = "lindbladium", version, about = "Boundary-driven spin chain steady states")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment described by a JSON config.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the experiment named in the config.
        #[arg(long)]
        experiment: Option<String>,
        /// Writes report.json and profiles.csv into this directory.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Suppresses the summary on stderr.
        #[arg(long)]
        quiet: bool,
    },
}

const EXIT_FAILURE: u8 = 1;
const EXIT_INPUT: u8 = 2;
const EXIT_CONVERGENCE: u8 = 3;

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Convergence { .. } => EXIT_CONVERGENCE,
        e if e.is_input_error() => EXIT_INPUT,
        _ => EXIT_FAILURE,
    }
}

fn summary(report: &RunReport) -> String {
    let mut lines = vec![format!("experiment {}", report.experiment)];
    for s in &report.solves {
        lines.push(format!(
            "{} residual {:.3e} null_dim {}",
            s.orientation.as_str(),
            s.residual,
            s.null_dim.map_or("-".to_string(), |d| d.to_string())
        ));
    }
    if let Some(ow) = &report.one_way_street {
        let spin = ow.spin_sum.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        lines.push(format!("energy delta {:.3e} spin sum {:.3e}", ow.energy_delta, spin));
    }
    if let Some(m) = &report.mapping {
        lines.push(format!("hamiltonian residual {:.3e}", m.hamiltonian_residual));
    }
    if let Some(u) = &report.uniqueness {
        lines.push(format!(
            "closure {}/{} null_dim {}",
            u.closure.generated_dim, u.closure.target_dim, u.null_dim
        ));
    }
    for w in &report.warnings {
        lines.push(format!("warning: {w}"));
    }
    lines.join("\n")
}

fn emit(report: &RunReport, config: &RunConfig, out: Option<&PathBuf>) -> Result<(), Error> {
    let (report_path, csv_path) = output_paths(config, out.map(PathBuf::as_path));
    write_outputs(report, report_path.as_deref(), csv_path.as_deref())?;
    if report_path.is_none() {
        println!("{}", report.to_json_string());
    }
    Ok(())
}

fn main() -> ExitCode {
    let Command::Run {
        config,
        experiment,
        out,
        quiet,
    } = Cli::parse().command;

    let mut cfg = match RunConfig::from_path(&config) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_INPUT);
        }
    };
    if let Some(name) = experiment {
        match Experiment::parse(&name) {
            Ok(e) => cfg.experiment = Some(e),
            Err(e) => {
                eprintln!("error: {e}");
                return ExitCode::from(EXIT_INPUT);
            }
        }
    }

    match run(&cfg) {
        Ok(report) => {
            if let Err(e) = emit(&report, &cfg, out.as_ref()) {
                eprintln!("error: {e}");
                return ExitCode::from(EXIT_FAILURE);
            }
            if !quiet {
                eprintln!("{}", summary(&report));
            }
            ExitCode::SUCCESS
        }
        Err(err) => {
            eprintln!("error: {}", err.error);
            if let Some(partial) = &err.partial {
                if let Err(e) = emit(partial, &cfg, out.as_ref()) {
                    eprintln!("error: {e}");
                }
            }
            ExitCode::from(exit_code(&err.error))
        }
    }
}
