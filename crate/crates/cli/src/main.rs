use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use llsp_cli::{
    build_config, run_all, run_classify, run_extract, run_report, run_synth_gen, ConfigOverrides,
    StageError,
};

/// Seizure-detection preprocessing pipeline: fit amplitude-modulated
/// sinusoids over a frequency/phase grid, extract compact features, and
/// classify segments.
#[derive(Parser)]
#[command(name = "llsp", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// TOML config file; its values override the flags below.
    #[arg(long)]
    config: Option<PathBuf>,

    /// Bonn data root directory, or "synthetic".
    #[arg(long)]
    data_root: Option<String>,

    /// Experiment id 1..4 (Bonn mode only).
    #[arg(long)]
    experiment: Option<u8>,

    /// Comma-separated subset of raw,llsp1,llsp2,llsp3,llsp4.
    #[arg(long, value_delimiter = ',')]
    variants: Option<Vec<String>>,

    /// Comma-separated subset of knn1,knn5,logistic,oner,tree.
    #[arg(long, value_delimiter = ',')]
    classifiers: Option<Vec<String>>,

    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,

    /// Worker count for extraction (0 = all cores). The LLSP_WORKERS
    /// environment variable overrides this.
    #[arg(long)]
    workers: Option<usize>,

    /// Persist trained models under <out>/models/.
    #[arg(long)]
    save_models: bool,

    /// Train/test split seed.
    #[arg(long)]
    split_seed: Option<u64>,

    /// Split mode: random or deterministic-tail.
    #[arg(long)]
    split: Option<String>,

    /// Training fraction in (0, 1).
    #[arg(long)]
    train_fraction: Option<f64>,
}

impl CommonArgs {
    fn overrides(&self) -> ConfigOverrides {
        ConfigOverrides {
            data_root: self.data_root.clone(),
            experiment: self.experiment,
            variants: self.variants.clone(),
            classifiers: self.classifiers.clone(),
            output_dir: self.out.clone(),
            workers: self.workers,
            save_models: if self.save_models { Some(true) } else { None },
            split_seed: self.split_seed,
            split_mode: self.split.clone(),
            train_fraction: self.train_fraction,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Extract feature CSVs (one per variant) plus the timing log.
    Extract(CommonArgs),
    /// Train and evaluate classifiers on previously extracted CSVs.
    Classify {
        #[command(flatten)]
        common: CommonArgs,
        /// Directory holding the feature CSVs (defaults to the output dir).
        #[arg(long)]
        features_dir: Option<PathBuf>,
    },
    /// Extract, classify, and write the reproducibility manifest.
    RunAll(CommonArgs),
    /// Write the synthetic segments as a raw-format CSV.
    SynthGen {
        #[command(flatten)]
        common: CommonArgs,
        /// Output CSV path.
        #[arg(long)]
        file: PathBuf,
    },
    /// Rebuild report tables from persisted metrics CSVs.
    Report {
        /// Directory containing metrics_*.csv files.
        #[arg(long)]
        dir: PathBuf,
    },
}

fn run(cli: Cli) -> Result<(), StageError> {
    match cli.command {
        Command::Extract(common) => {
            let config = build_config(common.config.as_deref(), &common.overrides())?;
            let outputs = run_extract(&config)?;
            for warning in &outputs.warnings {
                eprintln!("warning: {warning}");
            }
            for (variant, path) in &outputs.feature_files {
                println!("{}: {}", variant.name(), path.display());
            }
        }
        Command::Classify {
            common,
            features_dir,
        } => {
            let config = build_config(common.config.as_deref(), &common.overrides())?;
            let dir = features_dir.unwrap_or_else(|| config.output_dir.clone());
            let tag = config.dataset_tag();
            let mut files = Vec::new();
            for choice in config.parsed_variants()? {
                let path = dir.join(format!("{tag}_{}.csv", choice.name()));
                if !path.is_file() {
                    return Err(StageError::data(format!(
                        "feature file {} not found; run `llsp extract` first",
                        path.display()
                    )));
                }
                files.push((choice, path));
            }
            let outputs = run_classify(&config, &files)?;
            println!("{}", outputs.table.render_text()?);
            println!("metrics: {}", outputs.metrics_csv.display());
        }
        Command::RunAll(common) => {
            let config = build_config(common.config.as_deref(), &common.overrides())?;
            let manifest = run_all(&config)?;
            println!(
                "complete: {} (config {})",
                config.output_dir.display(),
                manifest.config_hash
            );
        }
        Command::SynthGen { common, file } => {
            let config = build_config(common.config.as_deref(), &common.overrides())?;
            let path = run_synth_gen(&config, &file)?;
            println!("wrote {}", path.display());
        }
        Command::Report { dir } => {
            let text = run_report(&dir)?;
            println!("{text}");
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.kind.exit_code() as u8)
        }
    }
}
