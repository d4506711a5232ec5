use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use uvds_core::SolverConfig;

use uvds::ablation::{run_ablation, AblationOptions, Classifier, Scenario};
use uvds::cv::{cross_validate, GridSpec, DEFAULT_GRID};
use uvds::io::{load_dataset_dir, read_matrix, write_dataset, write_matrix};
use uvds::model_file::Model;
use uvds::report::{diag_variance, evaluate_model, predictions_csv, prepare, train};
use uvds::synthetic::{gen_synthetic, SyntheticConfig};
use uvds::{Error, Result};

#[derive(Parser)]
#[command(name = "uvds", version, about = "Zero-shot feature synthesis from semantic attributes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a synthetic dataset directory.
    GenSynthetic(GenArgs),
    /// Fit a model on the seen classes of a dataset.
    Train(TrainArgs),
    /// Synthesise features from an attribute CSV.
    Synth(SynthArgs),
    /// Recognise the unseen classes of a dataset.
    Eval(EvalArgs),
    /// Grid search over lambda and beta.
    Cv(CvArgs),
    /// Compare regression, graph-only, diffusion-only and full models.
    Ablate(AblateArgs),
    /// Variance profiles of real and synthesised unseen features.
    DiagVariance(DiagArgs),
}

#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 20)]
    seen: usize,
    #[arg(long, default_value_t = 5)]
    unseen: usize,
    #[arg(long, default_value_t = 20)]
    per_class: usize,
    #[arg(long, default_value_t = 64)]
    dim: usize,
    #[arg(long, default_value_t = 16)]
    attr_dim: usize,
    #[arg(long, default_value_t = 0.01)]
    noise: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args, Clone)]
struct SolverArgs {
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    k: Option<usize>,
    /// Outer iterations T.
    #[arg(long)]
    iters: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Z-score attribute dimensions with seen-class statistics.
    #[arg(long)]
    normalize_attributes: bool,
}

impl SolverArgs {
    fn config(&self) -> Result<SolverConfig> {
        let d = SolverConfig::default();
        let cfg = SolverConfig {
            lambda: self.lambda.unwrap_or(d.lambda),
            beta: self.beta.unwrap_or(d.beta),
            gamma: self.gamma.unwrap_or(d.gamma),
            alpha: self.alpha.unwrap_or(d.alpha),
            k: self.k.unwrap_or(d.k),
            outer_iters: self.iters.unwrap_or(d.outer_iters),
            seed: self.seed,
            ..d
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long)]
    data: PathBuf,
    #[command(flatten)]
    solver: SolverArgs,
    #[arg(long)]
    model_out: PathBuf,
    /// Write the mean graph as dense CSV.
    #[arg(long)]
    dump_graph: Option<PathBuf>,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    attributes: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum ClassifierArg {
    Nn,
    Svm,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Ca,
    Mf,
    Sample,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    data: PathBuf,
    #[arg(long, value_enum, default_value = "nn")]
    classifier: ClassifierArg,
    #[arg(long, value_enum, default_value = "ca")]
    mode: ModeArg,
    #[arg(long)]
    report_out: PathBuf,
    /// Per-row predictions as CSV.
    #[arg(long)]
    predictions_out: Option<PathBuf>,
}

#[derive(Args)]
struct CvArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long, value_delimiter = ',')]
    grid_lambda: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    grid_beta: Option<Vec<f64>>,
    #[arg(long, default_value_t = 10)]
    repeats: usize,
    #[arg(long, default_value_t = 0.5)]
    fraction: f64,
    #[command(flatten)]
    solver: SolverArgs,
    #[arg(long)]
    report_out: Option<PathBuf>,
}

#[derive(Args)]
struct AblateArgs {
    #[arg(long)]
    data: PathBuf,
    #[command(flatten)]
    solver: SolverArgs,
    #[arg(long, default_value_t = uvds_core::baseline::DEFAULT_RIDGE)]
    ridge: f64,
    #[arg(long)]
    report_out: Option<PathBuf>,
}

#[derive(Args)]
struct DiagArgs {
    #[arg(long)]
    data: PathBuf,
    #[command(flatten)]
    solver: SolverArgs,
    /// CSV with columns dim,real,with_dr,without_dr.
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    report_out: Option<PathBuf>,
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

fn write_json<T: Serialize>(path: Option<&Path>, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    match path {
        Some(p) => write_file(p, &text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::GenSynthetic(a) => {
            let cfg = SyntheticConfig {
                n_seen_classes: a.seen,
                n_unseen_classes: a.unseen,
                per_class: a.per_class,
                d: a.dim,
                m: a.attr_dim,
                noise_sigma: a.noise,
                seed: a.seed,
                ..SyntheticConfig::default()
            };
            write_dataset(&a.out, &gen_synthetic(&cfg)?.data)
        }
        Command::Train(a) => {
            let cfg = a.solver.config()?;
            let (_, ds, unseen) = load_dataset_dir(&a.data, 0.5)?;
            let (ds, _, scaler) = prepare(&ds, &unseen, a.solver.normalize_attributes)?;
            let trained = train(&ds, &cfg, scaler)?;
            if let Some(path) = &a.dump_graph {
                write_matrix(path, &trained.graphs.w_mean)?;
            }
            if trained.fit.line_search_failures > 0 {
                eprintln!(
                    "warning: {} Q-step line searches found no admissible step",
                    trained.fit.line_search_failures
                );
            }
            trained.model.save(&a.model_out)
        }
        Command::Synth(a) => {
            let model = Model::load(&a.model)?;
            let attrs = model.prepare_attributes(&read_matrix(&a.attributes)?)?;
            let out = uvds_core::zsl::synthesize(&attrs, &model.params())?;
            write_matrix(&a.out, &out)
        }
        Command::Eval(a) => {
            let model = Model::load(&a.model)?;
            let (raw, _, unseen) = load_dataset_dir(&a.data, 0.5)?;
            let classifier = match a.classifier {
                ClassifierArg::Nn => Classifier::Nn,
                ClassifierArg::Svm => Classifier::Svm,
            };
            let scenario = match a.mode {
                ModeArg::Ca => Scenario::CA,
                ModeArg::Mf => Scenario::MF,
                ModeArg::Sample => Scenario::Sample,
            };
            let level = raw.meta.attribute_level.into();
            let (report, preds) = evaluate_model(&model, &unseen, level, classifier, scenario)?;
            if let Some(path) = &a.predictions_out {
                write_file(path, &predictions_csv(&preds))?;
            }
            write_json(Some(&a.report_out), &report)
        }
        Command::Cv(a) => {
            let cfg = a.solver.config()?;
            let (_, ds, unseen) = load_dataset_dir(&a.data, a.fraction)?;
            let (ds, _, _) = prepare(&ds, &unseen, a.solver.normalize_attributes)?;
            let grid = GridSpec {
                lambda_values: a.grid_lambda.unwrap_or_else(|| DEFAULT_GRID.to_vec()),
                beta_values: a.grid_beta.unwrap_or_else(|| DEFAULT_GRID.to_vec()),
                validation_fraction: a.fraction,
                repeats: a.repeats,
                seed: a.solver.seed,
            };
            let result = cross_validate(&ds, &grid, &cfg)?;
            write_json(a.report_out.as_deref(), &result)
        }
        Command::Ablate(a) => {
            let cfg = a.solver.config()?;
            let (_, ds, unseen) = load_dataset_dir(&a.data, 0.5)?;
            let (ds, unseen, _) = prepare(&ds, &unseen, a.solver.normalize_attributes)?;
            let opts = AblationOptions {
                ridge: a.ridge,
                seed: a.solver.seed,
                ..AblationOptions::default()
            };
            let report = run_ablation(&ds, &unseen, &cfg, &opts)?;
            write_json(a.report_out.as_deref(), &report)
        }
        Command::DiagVariance(a) => {
            let cfg = a.solver.config()?;
            let (_, ds, unseen) = load_dataset_dir(&a.data, 0.5)?;
            let (ds, unseen, _) = prepare(&ds, &unseen, a.solver.normalize_attributes)?;
            let diag = diag_variance(&ds, &unseen, &cfg)?;
            write_file(&a.out, &diag.to_csv())?;
            match &a.report_out {
                Some(p) => write_json(Some(p), &diag),
                None => Ok(()),
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
