use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use topohdc::dataset::load_split;
use topohdc::pipeline::{
    evaluate_suite, load_data, load_model, run_baseline, run_experiment, save_model, train_model, write_feature_dump,
    FeatureExtractor, RunConfig, Timing,
};

#[derive(Parser)]
#[command(name = "topohdc", version, about = "Topology-guided hyperdimensional glyph classifier")]
struct Cli {
    /// Worker threads (defaults to all cores). Results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Default)]
struct ConfigArgs {
    /// Config file of `key = value` lines.
    #[arg(short, long)]
    config: Option<PathBuf>,

    /// Override one setting, e.g. `-s epochs=5`. Repeatable; applied after the file.
    #[arg(short = 's', long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,

    /// Output directory (same as `-s output_dir=...`).
    #[arg(short, long)]
    out: Option<PathBuf>,
}

impl ConfigArgs {
    fn apply(&self, cfg: &mut RunConfig) -> Result<()> {
        if let Some(path) = &self.config {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            cfg.apply_text(&text).with_context(|| format!("in {}", path.display()))?;
        }
        for kv in &self.set {
            let (k, v) = kv.split_once('=').with_context(|| format!("expected KEY=VALUE, got {kv:?}"))?;
            cfg.set(k, v)?;
        }
        if let Some(out) = &self.out {
            cfg.output_dir = out.clone();
        }
        Ok(())
    }

    fn build(&self) -> Result<RunConfig> {
        let mut cfg = RunConfig::default();
        self.apply(&mut cfg)?;
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Split {
    Train,
    Test,
}

#[derive(Subcommand)]
enum Command {
    /// Train both models and evaluate every corruption setting.
    Run(ConfigArgs),
    /// Train both models and save them as a THDC1 container.
    Train {
        #[command(flatten)]
        args: ConfigArgs,
        /// Where to write the model.
        #[arg(short, long)]
        model: PathBuf,
    },
    /// Evaluate a saved model on the test split.
    Eval {
        #[command(flatten)]
        args: ConfigArgs,
        #[arg(short, long)]
        model: PathBuf,
    },
    /// Dump primitives and feature vectors for inspection.
    Features {
        #[command(flatten)]
        args: ConfigArgs,
        #[arg(long, value_enum, default_value = "test")]
        split: Split,
        /// Number of images to dump.
        #[arg(long, default_value_t = 100)]
        limit: usize,
    },
    /// Train and evaluate only the pixel baseline.
    Baseline(ConfigArgs),
}

/// Settings that may differ between training and evaluation.
fn eval_overrides(model_cfg: &RunConfig, args: &ConfigArgs) -> Result<RunConfig> {
    let mut cfg = model_cfg.clone();
    args.apply(&mut cfg)?;
    let mut check = cfg.clone();
    check.corruptions = model_cfg.corruptions.clone();
    check.test_limit = model_cfg.test_limit;
    check.subset_seed = model_cfg.subset_seed;
    check.mnist_dir = model_cfg.mnist_dir.clone();
    check.emnist_dir = model_cfg.emnist_dir.clone();
    check.output_dir = model_cfg.output_dir.clone();
    if check != *model_cfg {
        bail!(
            "only corruptions, test_limit, subset_seed, mnist_dir, emnist_dir and output_dir can change at eval time"
        );
    }
    Ok(cfg)
}

fn print_summary(settings: &[topohdc::pipeline::SettingReport], out: &Path) {
    println!("{}", topohdc::pipeline::accuracy_csv(settings).trim_end());
    println!("artifacts written to {}", out.display());
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("configuring the thread pool")?;
    }

    match cli.command {
        Command::Run(args) => {
            let cfg = args.build()?;
            let report = run_experiment(&cfg)?;
            println!(
                "fusion before: alpha={} beta={}; after: alpha={} beta={}",
                report.fusion_before.alpha, report.fusion_before.beta, report.fusion_after.alpha, report.fusion_after.beta
            );
            print_summary(&report.settings, &cfg.output_dir);
        }
        Command::Train { args, model } => {
            let cfg = args.build()?;
            let (train, _) = load_data(&cfg)?;
            let mut timing = Timing::default();
            let trained = train_model(&cfg, &train, &mut timing)?;
            save_model(&model, &trained)?;
            println!(
                "trained on {} samples ({} held out); validation accuracy {:.4} before, {:.4} after online training",
                trained.training.train_size,
                trained.training.val_size,
                trained.fusion_before.val_accuracy,
                trained.fusion_after.val_accuracy
            );
            println!("model written to {}", model.display());
        }
        Command::Eval { args, model } => {
            let start = Instant::now();
            let trained = load_model(&model)?;
            let cfg = eval_overrides(&trained.config, &args)?;
            let (_, test) = load_data(&cfg)?;
            let trained = topohdc::TrainedModel { config: cfg.clone(), ..trained };
            let mut timing = Timing::default();
            let report = evaluate_suite(&trained, &test, &mut timing, start)?;
            report.write(&cfg.output_dir)?;
            print_summary(&report.settings, &cfg.output_dir);
        }
        Command::Features { args, split, limit } => {
            let cfg = args.build()?;
            let data = load_split(cfg.data_dir(), cfg.dataset, matches!(split, Split::Train))?;
            let data = data.select(&(0..limit.min(data.len())).collect::<Vec<_>>());
            let fx = FeatureExtractor::new(&cfg)?;
            write_feature_dump(&fx, &data, &cfg.output_dir)?;
            println!("dumped {} glyphs to {}", data.len(), cfg.output_dir.display());
        }
        Command::Baseline(args) => {
            let cfg = args.build()?;
            let report = run_baseline(&cfg)?;
            print_summary(&report.settings, &cfg.output_dir);
        }
    }
    Ok(())
}
