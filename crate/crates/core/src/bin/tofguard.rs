use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use tofguard::io::{self, exit, IoError};

#[derive(Parser)]
#[command(name = "tofguard", version, about = "Range-sensor spoofing detection and attack simulation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write trace.csv, metrics.csv and scenario.echo.cfg.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Print baseline statistics and both threshold rules.
    Calibrate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        runs: u64,
    },
    /// Run the detector over a frames CSV and print decisions as CSV.
    Detect {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        frames: PathBuf,
    },
    /// Run one scenario per parameter value and write sweep.csv.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        param: String,
        #[arg(long)]
        values: String,
        #[arg(long)]
        out: PathBuf,
    },
}

fn run(cli: Cli) -> Result<(), IoError> {
    match cli.command {
        Command::Simulate { config, out, seed } => {
            let (_, outcome) = io::simulate(&config, &out, seed)?;
            let m = &outcome.metrics;
            let rate = |r: Option<f64>| r.map_or("-".to_string(), |r| format!("{r:.4}"));
            println!("runs                {}", m.runs);
            println!("spatial_threshold   {:.6}", m.threshold_used);
            println!("temporal_threshold  {:.6}", m.temporal_threshold_used);
            println!("false_positive_rate {}", rate(m.false_positive_rate));
            println!("detection_rate      {}", rate(m.detection_rate));
            println!("wrote               {}", out.display());
        }
        Command::Calibrate { config, runs } => {
            println!("{}", io::calibrate(&config, runs)?);
        }
        Command::Detect { config, frames } => {
            let stdout = std::io::stdout();
            io::detect(&config, &frames, stdout.lock())?;
        }
        Command::Sweep {
            config,
            param,
            values,
            out,
        } => {
            let values = io::commands::parse_values(&values)?;
            io::sweep(&config, &param, &values, &out)?;
            println!("wrote {}", out.join(io::commands::SWEEP_FILE).display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::from(exit::SUCCESS as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
