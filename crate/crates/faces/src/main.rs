use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use faces::error::{Error, Result, EXIT_BOUND_VIOLATION};
use faces::formats::Layout;
use faces::{pipeline, report, ExperimentConfig};

#[derive(Parser)]
#[command(name = "faces", version, about = "Simulated fermionic averaged circuit eigenvalue sampling")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw the noise model and circuit ensemble and write the design matrix.
    Generate(Common),
    /// Simulate every circuit and write shot counts or exact probabilities.
    Run(Common),
    /// Estimate gate eigenvalues and check them against the stored model.
    Estimate(Common),
    /// Bin relative errors into histograms and print a summary.
    Report {
        #[command(flatten)]
        common: Common,
        /// Further experiment directories whose reports are binned alongside.
        #[arg(long, value_name = "DIR")]
        merge: Vec<PathBuf>,
    },
}

#[derive(Args)]
struct Common {
    /// Experiment config; defaults to `config.json` in the output directory.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Overrides the master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory; overrides the config.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Use exact outcome probabilities instead of finite shots.
    #[arg(long)]
    exact_probabilities: bool,
    /// Worker threads; defaults to the available parallelism.
    #[arg(long)]
    workers: Option<usize>,
}

impl Common {
    fn resolve(&self) -> Result<(ExperimentConfig, PathBuf, usize)> {
        let path = match (&self.config, &self.out) {
            (Some(c), _) => c.clone(),
            (None, Some(out)) => Layout::new(out).config(),
            (None, None) => return Err(Error::Config("pass --config or --out".into())),
        };
        let mut config = ExperimentConfig::load(&path)?;
        if let Some(seed) = self.seed {
            config.seed = seed;
        }
        if let Some(out) = &self.out {
            config.output = out.clone();
        }
        let workers = self
            .workers
            .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
        let out = config.output.clone();
        Ok((config, out, workers))
    }
}

fn execute(command: Command) -> Result<u8> {
    match command {
        Command::Generate(common) => {
            let (config, out, _) = common.resolve()?;
            let model = pipeline::generate(&config, &out)?;
            println!(
                "generated {} circuits over {} gates in {}",
                model.design().rows(),
                model.registry().len(),
                out.display()
            );
        }
        Command::Run(common) => {
            let (config, out, workers) = common.resolve()?;
            let manifest = pipeline::run(&config, &out, common.exact_probabilities, workers)?;
            match manifest.shots {
                Some(s) => println!("sampled {s} shots for each of {} circuits", manifest.circuits),
                None => println!("wrote exact probabilities for {} circuits", manifest.circuits),
            }
        }
        Command::Estimate(common) => {
            let (config, out, workers) = common.resolve()?;
            let outcome = pipeline::estimate(&config, &out, common.exact_probabilities, workers)?;
            let s = &outcome.summary;
            println!(
                "median relative error {:.6}, {:.2}% of estimates below 5%",
                s.median_rel_error,
                100.0 * s.fraction_below_5_percent
            );
            if !s.bound_violations.is_empty() {
                eprintln!("error bound violated in degrees {:?}", s.bound_violations);
                return Ok(EXIT_BOUND_VIOLATION);
            }
        }
        Command::Report { common, merge } => {
            let (config, out, _) = common.resolve()?;
            let meta = report::report(&config.histogram, &out, &merge)?;
            print!("{}", report::summary_text(&meta));
        }
    }
    Ok(0)
}

fn main() -> ExitCode {
    match execute(Cli::parse().command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
