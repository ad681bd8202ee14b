use std::fs;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use dslob_core::bench::{evaluate, fit_ridge_on_split, shock_day_errors, write_plot_csv, Forecaster, Persistence};
use dslob_core::config::ScenarioConfig;
use dslob_core::dataset::{build_dataset, load_dataset, BuildOptions};
use dslob_core::scenario::{generate_dataset, DayStatus, GenerateOptions};

#[derive(Parser)]
#[command(name = "dslob", version, about = "Shocked limit order book simulator, dataset builder and baselines")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelKind {
    Persistence,
    Ridge,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate trading days and write day files plus a manifest.
    Generate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Override the number of days.
        #[arg(long)]
        days: Option<usize>,
        /// Override the root seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Days simulated concurrently.
        #[arg(long, default_value_t = 1)]
        parallel: usize,
        /// Also write a per-event trace for every day.
        #[arg(long)]
        trace: bool,
    },
    /// Build windows, normalization, splits and the tensor export.
    Dataset {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Forecast horizon in records.
        #[arg(long, default_value_t = 10)]
        horizon: usize,
        /// Z-score features and targets with training statistics.
        #[arg(long)]
        normalize: bool,
        /// Relative change threshold for trend labels.
        #[arg(long, default_value_t = 2e-5)]
        trend_alpha: f64,
        /// Export every n-th window; 0 skips the export.
        #[arg(long, default_value_t = 10)]
        export_stride: usize,
    },
    /// Fit a baseline on the training split and report per-split RMSE.
    Bench {
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long, value_enum)]
        model: ModelKind,
        #[arg(long, default_value_t = 1.0)]
        lambda: f64,
        #[arg(long)]
        report: PathBuf,
        /// Per shock day RMSE before and after the shock, as CSV.
        #[arg(long)]
        plot_data: Option<PathBuf>,
    },
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Generate {
            config,
            out,
            days,
            seed,
            parallel,
            trace,
        } => {
            let mut cfg = ScenarioConfig::load(&config).with_context(|| format!("loading {}", config.display()))?;
            if let Some(n) = days {
                cfg.n_days = n;
            }
            if let Some(s) = seed {
                cfg.root_seed = s;
            }
            let manifest = generate_dataset(&cfg, &out, GenerateOptions { parallel, trace })?;
            let failed = manifest.days.iter().filter(|d| d.status == DayStatus::Failed).count();
            println!(
                "generated {} days ({} ordinary, {} small, {} large), {} failed, into {}",
                manifest.days.len(),
                manifest.counts.ordinary,
                manifest.counts.small,
                manifest.counts.large,
                failed,
                out.display()
            );
        }
        Command::Dataset {
            input,
            out,
            horizon,
            normalize,
            trend_alpha,
            export_stride,
        } => {
            let opts = BuildOptions {
                horizon,
                normalize,
                trend_alpha,
                export_stride: (export_stride > 0).then_some(export_stride),
            };
            let desc = build_dataset(&input, &out, opts)?;
            let [train, iid, small, large] = desc.split_counts;
            println!("windows: train {train}, test_iid {iid}, test_small {small}, test_large {large}");
            if let Some(e) = &desc.export {
                println!("exported {} windows (stride {})", e.count, e.stride);
            }
        }
        Command::Bench {
            dataset,
            model,
            lambda,
            report,
            plot_data,
        } => {
            let ds = load_dataset(&dataset).with_context(|| format!("loading {}", dataset.display()))?;
            let days = ds.model_days();
            let ridge;
            let forecaster: &dyn Forecaster = match model {
                ModelKind::Persistence => &Persistence,
                ModelKind::Ridge => {
                    if !(lambda >= 0.0) {
                        bail!("--lambda must be non-negative");
                    }
                    ridge = fit_ridge_on_split(&days, ds.plan(), lambda)?;
                    &ridge
                }
            };
            let mut rep = evaluate(forecaster, &ds, &days)?;
            if let ModelKind::Ridge = model {
                rep.lambda = Some(lambda);
            }
            fs::write(&report, rep.to_json()?)?;
            if let Some(path) = plot_data {
                let rows = shock_day_errors(forecaster, &ds, &days)?;
                write_plot_csv(std::io::BufWriter::new(fs::File::create(path)?), &rows)?;
            }
            println!(
                "{}: rmse iid {:.4}, small {:.4}, large {:.4}",
                rep.model, rep.rmse_iid, rep.rmse_small, rep.rmse_large
            );
        }
    }
    Ok(())
}
