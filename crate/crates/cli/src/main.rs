use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use geoswarm::sim::{GainSelect, RateFrame};
use geoswarm_cli::commands::{cmd_gains, cmd_simulate, cmd_validate, STEP_TABLE, SUMMARY};
use geoswarm_cli::scenario::{Overrides, ScenarioFile};
use geoswarm_cli::CliError;

#[derive(Parser)]
#[command(
    name = "geoswarm",
    version,
    about = "Attitude alignment and source seeking for 3D unicycle swarms"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the planned gains k1, k2, epsilon_max and k_w for a scenario.
    Gains { scenario: PathBuf },
    /// Run a scenario and write the step table and summary.
    Simulate {
        scenario: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        dt: Option<f64>,
        #[arg(long)]
        t_end: Option<f64>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_enum)]
        rate_frame: Option<Frame>,
        /// Use the planned gain instead of the scenario's gain section.
        #[arg(long, value_enum)]
        gain: Option<Gain>,
        /// Write every N-th step to the table; the summary still sees all steps.
        #[arg(long, default_value_t = 1)]
        every: usize,
    },
    /// Run the randomized property suite.
    Validate {
        /// Fewer samples per property.
        #[arg(long)]
        quick: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Frame {
    Literal,
    Body,
}

#[derive(Clone, Copy, ValueEnum)]
enum Gain {
    Max,
    K1,
    K2,
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Gains { scenario } => {
            let s = ScenarioFile::load(&scenario)?;
            println!("{}", cmd_gains(&s)?);
        }
        Command::Simulate {
            scenario,
            out,
            dt,
            t_end,
            seed,
            rate_frame,
            gain,
            every,
        } => {
            let mut s = ScenarioFile::load(&scenario)?;
            s.apply(&Overrides {
                dt,
                t_end,
                seed,
                rate_frame: rate_frame.map(|f| match f {
                    Frame::Literal => RateFrame::Literal,
                    Frame::Body => RateFrame::Body,
                }),
                gain: gain.map(|g| match g {
                    Gain::Max => GainSelect::Max,
                    Gain::K1 => GainSelect::K1,
                    Gain::K2 => GainSelect::K2,
                }),
            });
            s.config().validate()?;
            let report = cmd_simulate(&s, &out, every)?;
            println!(
                "{} records, k_w = {}, wrote {} and {}",
                report.records,
                report.meta.k_w,
                out.join(STEP_TABLE).display(),
                out.join(SUMMARY).display()
            );
        }
        Command::Validate { quick } => {
            cmd_validate(quick)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if let CliError::Model(geoswarm::Error::DegenerateDeployment { .. }) = e {
                eprintln!("the non-degeneracy gain needs an initial deployment spanning 3D: lambda_min(P(0)) > 0");
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
