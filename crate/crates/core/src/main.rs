use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use lowlight_isp::dataset::{
    calibrate_dirs, compare_exposure_curves, curves::write_curves_csv, generate, replay,
    CalibrationBounds, GenerationConfig,
};
use lowlight_isp::AssetBank;

#[derive(Parser)]
#[command(
    version,
    about = "Synthesize paired low-light / normal-light training images"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate pairs for every input image and write a manifest.
    Generate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        /// Worker threads; overrides the config file.
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Regenerate one pair from its manifest record and compare it with the
    /// original files.
    Replay {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        pair_id: String,
        /// Defaults to `replay/` next to the manifest.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exposure-adjustment curves for same-named low / normal image pairs.
    Curves {
        #[arg(long)]
        low: PathBuf,
        #[arg(long)]
        gt: PathBuf,
        #[arg(long, default_value = "curves.csv")]
        out: PathBuf,
    },
    /// Suggest an exposure range matching real low-light references.
    Calibrate {
        #[arg(long)]
        refs: PathBuf,
        /// Normal-light images to darken; defaults to the references.
        #[arg(long)]
        sources: Option<PathBuf>,
        #[arg(long, default_value_t = CalibrationBounds::default().e_min, allow_negative_numbers = true)]
        e_min: f64,
        #[arg(long, default_value_t = CalibrationBounds::default().e_max)]
        e_max: f64,
        /// Write the JSON report here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write the built-in profiles and tone curves as an asset bank.
    Bank {
        #[arg(long)]
        out: PathBuf,
    },
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Generate {
            config,
            seed,
            out,
            workers,
        } => {
            let cfg = GenerationConfig::load(&config)?;
            let report = generate(&cfg, seed, &out, workers)?;
            println!(
                "{} pairs from {} sources ({} skipped); manifest {}",
                report.pairs,
                report.sources,
                report.failed_sources,
                report.manifest.display()
            );
        }
        Command::Replay {
            manifest,
            pair_id,
            out,
        } => {
            let report = replay(&manifest, &pair_id, out.as_deref())?;
            println!("{}", report.low_path.display());
            println!("{}", report.normal_path.display());
            match report.matches_original {
                Some(true) => println!("identical to original"),
                Some(false) => bail!("replayed pair {pair_id} differs from the original"),
                None => println!("original files not found; nothing compared"),
            }
        }
        Command::Curves { low, gt, out } => {
            let curves = compare_exposure_curves(&low, &gt)?;
            write_curves_csv(&curves, &out)?;
            println!("{} curves written to {}", curves.len(), out.display());
        }
        Command::Calibrate {
            refs,
            sources,
            e_min,
            e_max,
            out,
        } => {
            let sources = sources.unwrap_or_else(|| refs.clone());
            let cal = calibrate_dirs(&refs, &sources, CalibrationBounds { e_min, e_max })?;
            let json = serde_json::to_string_pretty(&cal)?;
            match out {
                Some(path) => std::fs::write(&path, json + "\n")
                    .with_context(|| format!("writing {}", path.display()))?,
                None => println!("{json}"),
            }
        }
        Command::Bank { out } => {
            let hash = AssetBank::write_builtin(&out)?;
            println!("{hash}");
        }
    }
    Ok(())
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    if let Err(e) = run(Cli::parse()) {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}
