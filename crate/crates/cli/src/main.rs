use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use reram_fsa::scenario::{
    run_krinsky_scenario, run_montecarlo, run_report, run_simulate, Failure, Outcome,
    ScenarioConfig,
};
use reram_fsa::{Error, Execution};

#[derive(Parser)]
#[command(
    name = "reram-fsa",
    version,
    about = "Finite state automata on a 1T1R ReRAM crossbar"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Scenario file (JSON). Without it the built-in defaults are used.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    #[arg(long, value_name = "N")]
    seed: Option<u64>,
    /// Output directory. Falls back to the scenario's output_dir, then ./out.
    #[arg(long, value_name = "DIR", env = "RERAM_FSA_OUT")]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Run the scenario's transition list and/or automaton workload.
    Simulate {
        #[command(flatten)]
        common: Common,
    },
    /// Detection-error Monte Carlo under the configured variation.
    Montecarlo {
        #[command(flatten)]
        common: Common,
        /// Trials per state.
        #[arg(long, value_name = "N")]
        trials: Option<usize>,
        /// Run trials on one thread.
        #[arg(long)]
        sequential: bool,
    },
    /// Krinsky learning automaton against a two-action environment.
    Krinsky {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_name = "N")]
        steps: Option<usize>,
    },
    /// Margins, ADC thresholds, energy table and model parameters.
    Report {
        #[command(flatten)]
        common: Common,
    },
}

fn load(common: &Common) -> Result<(ScenarioConfig, PathBuf), Failure> {
    let mut cfg = match &common.config {
        Some(p) => ScenarioConfig::load(p).map_err(Failure::config)?,
        None => ScenarioConfig::default(),
    };
    if let Some(s) = common.seed {
        cfg.seed = s;
    }
    let out = common
        .out
        .clone()
        .or_else(|| cfg.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("out"));
    Ok((cfg, out))
}

fn run(cmd: Command) -> Result<Outcome, Failure> {
    match cmd {
        Command::Simulate { common } => {
            let (cfg, out) = load(&common)?;
            run_simulate(&cfg, &out)
        }
        Command::Montecarlo {
            common,
            trials,
            sequential,
        } => {
            let (mut cfg, out) = load(&common)?;
            if let Some(t) = trials {
                cfg.montecarlo.trials = t;
            }
            let exec = if sequential {
                Execution::Sequential
            } else {
                Execution::Parallel
            };
            run_montecarlo(&cfg, &out, exec)
        }
        Command::Krinsky { common, steps } => {
            let (mut cfg, out) = load(&common)?;
            if let Some(n) = steps {
                cfg.krinsky
                    .as_mut()
                    .ok_or_else(|| {
                        Failure::config(Error::Config("no krinsky section in scenario".into()))
                    })?
                    .steps = n;
            }
            run_krinsky_scenario(&cfg, &out)
        }
        Command::Report { common } => {
            let (cfg, out) = load(&common)?;
            run_report(&cfg, &out)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli.command) {
        Ok(outcome) => {
            print!("{}", outcome.summary);
            for f in &outcome.files {
                eprintln!("wrote {}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(f) => {
            eprintln!("error: {f}");
            ExitCode::from(f.exit_code() as u8)
        }
    }
}
