use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, ValueEnum};
use photon_store_cli::config::{Mode, Preset, OUTPUT_ENV};
use photon_store_cli::{load_config, run_scenario, Overrides};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModeArg {
    Design,
    Simulate,
    Markovian,
    Oracle,
    Dark,
    Sweep,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Design => Mode::Design,
            ModeArg::Simulate => Mode::Simulate,
            ModeArg::Markovian => Mode::Markovian,
            ModeArg::Oracle => Mode::Oracle,
            ModeArg::Dark => Mode::Dark,
            ModeArg::Sweep => Mode::Sweep,
        }
    }
}

/// Design and verify drives that store a single photon from a structured bath.
///
/// Exit status: 0 success, 2 config error, 3 infeasible design, 4 solver
/// blow-up, 5 oracle band too narrow, 1 anything else.
#[derive(Debug, Parser)]
#[command(name = "photon-store", version)]
struct Cli {
    mode: ModeArg,

    /// Scenario file (`key = value` lines).
    #[arg(long)]
    config: PathBuf,

    /// Output directory; defaults to the config's `output`, then $PHOTON_STORE_OUT.
    #[arg(long)]
    out: Option<PathBuf>,

    /// Figure preset, overriding the parameters it pins.
    #[arg(long, value_parser = |s: &str| s.parse::<Preset>())]
    preset: Option<Preset>,

    /// Concurrent sweep points.
    #[arg(long)]
    workers: Option<usize>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let overrides = Overrides {
        mode: Some(cli.mode.into()),
        preset: cli.preset,
        output: cli.out,
        workers: cli.workers,
        base_dir: None,
        default_output: std::env::var_os(OUTPUT_ENV).map(PathBuf::from),
    };
    let start = Instant::now();
    let result = load_config(&cli.config, &overrides).and_then(|cfg| run_scenario(&cfg));
    match result {
        Ok((_, files)) => {
            for f in files {
                println!("{}", f.display());
            }
            // kept out of the summary so reruns stay byte-identical
            eprintln!("wall_time_s={:.3}", start.elapsed().as_secs_f64());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error[{}]: {e}", e.tag());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
