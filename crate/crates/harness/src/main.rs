//! `oranmec` command line. Set `ORANMEC_LOG` (e.g. `debug`, `warn`) to
//! change the log level; the default is `info`.

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Parser, Subcommand, ValueEnum};
use oranmec_core::agents::Mode;
use oranmec_core::workload::{synth_demands, SynthParams};
use oranmec_harness::{compare_files, run_experiment, run_oracle, trace, Experiment, RunOptions};

#[derive(Parser)]
#[command(name = "oranmec", version, about = "O-RAN/MEC orchestration simulator and DRL agents")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Bayes,
    Egreedy,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Bayes => Mode::Bayes,
            ModeArg::Egreedy => Mode::Egreedy,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Train agents and write metric logs and checkpoints.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_enum)]
        mode: Option<ModeArg>,
        /// Run this single seed instead of the configured list.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        episodes: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Initialize every agent from this checkpoint.
        #[arg(long)]
        pretrained: Option<PathBuf>,
        /// Parallel seeds (default: available cores).
        #[arg(long, default_value_t = 0)]
        workers: usize,
    },
    /// Exhaustive best stationary action for the first episode.
    Oracle {
        #[arg(long)]
        config: PathBuf,
    },
    /// Final mean reward, convergence episode and gap of episode or step
    /// logs; the first file is the reference.
    Compare {
        #[arg(required = true)]
        files: Vec<PathBuf>,
    },
    /// Write a synthetic diurnal demand trace.
    Synth {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Slots; a multiple of 144.
        #[arg(long, default_value_t = 144)]
        horizon: usize,
        #[arg(long = "peak-gbps", default_value_t = 5.0)]
        peak_gbps: f64,
        #[arg(long = "num-bs", default_value_t = 4)]
        num_bs: usize,
        #[arg(long = "mec-classes", default_value_t = 2)]
        mec_classes: usize,
        #[arg(long, default_value_t = 0.05)]
        noise: f64,
        #[arg(long)]
        out: PathBuf,
    },
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run { config, mode, seed, episodes, out, pretrained, workers } => {
            let exp = Experiment::load(&config)?;
            let opts = RunOptions { mode: mode.map(Into::into), seeds: seed.map(|s| vec![s]), episodes, out, pretrained, workers };
            for o in run_experiment(&exp, &opts)? {
                println!(
                    "seed {}: final mean reward {:.4}, converged at episode {}, logs {}",
                    o.seed,
                    o.final_mean_reward.unwrap_or(f64::NAN),
                    o.convergence_episode.unwrap_or(0),
                    o.episodes_csv.display()
                );
            }
        }
        Command::Oracle { config } => {
            let exp = Experiment::load(&config)?;
            println!("{}", serde_json::to_string_pretty(&run_oracle(&exp)?)?);
        }
        Command::Compare { files } => {
            println!("{:<40} {:>9} {:>14} {:>12} {:>10}", "file", "episodes", "final_mean", "convergence", "diff_%");
            for (f, s) in files.iter().zip(compare_files(&files)?) {
                println!(
                    "{:<40} {:>9} {:>14.4} {:>12} {:>10.2}",
                    f.display(),
                    s.episodes,
                    s.final_mean,
                    s.convergence_episode,
                    s.diff_percent
                );
            }
        }
        Command::Synth { seed, horizon, peak_gbps, num_bs, mec_classes, noise, out } => {
            let slots = synth_demands(&SynthParams { seed, horizon, num_bs, mec_classes, peak_gbps, noise })?;
            trace::save(&out, &slots)?;
            log::info!("wrote {} slots to {}", slots.len(), out.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("ORANMEC_LOG", "info")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
