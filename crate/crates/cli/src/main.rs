use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use fuzzy_ucs::config::ExperimentConfig;
use fuzzy_ucs::data::{generate_named, load_dataset};
use fuzzy_ucs::experiment::{run_experiment, write_results, DatasetSource};
use fuzzy_ucs::grid::{export_grid, write_grid, DEFAULT_RESOLUTION};
use fuzzy_ucs::inference::Scheme;
use fuzzy_ucs::learner::{train, TrainedModel};
use fuzzy_ucs::metrics::evaluate;
use fuzzy_ucs::rng::{stream_rng, Stream};

#[derive(Parser)]
#[command(name = "fuzzy-ucs", version, about = "Fuzzy-UCS learning classifier system")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train a model on a CSV dataset and save it as JSON.
    Train(TrainArgs),
    /// Evaluate a saved model on a CSV dataset.
    Eval(EvalArgs),
    /// Run a seeded multi-run experiment and write the result table.
    Experiment(ExperimentArgs),
    /// Export the decision grid of a two-feature model.
    Grid(GridArgs),
    /// Write a synthetic benchmark dataset (rmux, rmaj, rcar).
    Gen(GenArgs),
}

#[derive(Args)]
struct ConfigArgs {
    /// key = value config file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override a config key, e.g. `--set N=500`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

impl ConfigArgs {
    fn load(&self) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::from_file(path)?,
            None => ExperimentConfig::default(),
        };
        for item in &self.overrides {
            let (k, v) = item
                .split_once('=')
                .ok_or_else(|| fuzzy_ucs::Error::Config(format!("--set expects KEY=VALUE, got {item:?}")))?;
            cfg.set(k.trim(), v.trim())?;
        }
        Ok(cfg)
    }
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    config: ConfigArgs,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    data: PathBuf,
    #[arg(long, default_value = "ds")]
    scheme: String,
    #[arg(long, default_value_t = 10.0)]
    theta_exploit: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct ExperimentArgs {
    /// CSV dataset.
    #[arg(long, conflicts_with = "generator", required_unless_present = "generator")]
    data: Option<PathBuf>,
    /// Synthetic dataset instead of a CSV file.
    #[arg(long)]
    generator: Option<String>,
    #[arg(long, default_value_t = 6000)]
    count: usize,
    #[arg(long, default_value_t = 0)]
    gen_seed: u64,
    #[command(flatten)]
    config: ConfigArgs,
    #[arg(long)]
    runs: Option<usize>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    base_seed: Option<u64>,
    /// Comma-separated subset of vote, swin, ds.
    #[arg(long)]
    schemes: Option<String>,
    /// Write 0 in the runtime column so reruns are byte-identical.
    #[arg(long)]
    no_timing: bool,
    #[arg(long, default_value_t = 1)]
    workers: usize,
    /// Output CSV; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GridArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = DEFAULT_RESOLUTION)]
    resolution: usize,
    #[arg(long, default_value = "ds")]
    scheme: String,
    #[arg(long, default_value_t = 10.0)]
    theta_exploit: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct GenArgs {
    name: String,
    #[arg(long, default_value_t = 6000)]
    count: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    let file = File::create(path).map_err(fuzzy_ucs::Error::from).with_context(|| format!("cannot create {}", path.display()))?;
    Ok(BufWriter::new(file))
}

fn load_model(path: &Path) -> Result<TrainedModel> {
    let file = File::open(path).map_err(fuzzy_ucs::Error::from).with_context(|| format!("cannot open {}", path.display()))?;
    Ok(TrainedModel::load(BufReader::new(file))?)
}

fn run_train(args: TrainArgs) -> Result<()> {
    let mut cfg = args.config.load()?;
    if let Some(e) = args.epochs {
        cfg.epochs = e;
    }
    if let Some(s) = args.seed {
        cfg.base_seed = s;
    }
    cfg.validate()?;
    let data = load_dataset(&args.data)?;
    let model = train(&data, &cfg.params, cfg.epochs, cfg.base_seed)?;
    let mut out = create(&args.out)?;
    model.save(&mut out)?;
    out.flush()?;
    eprintln!(
        "trained {} rules ({} micro) on {} instances",
        model.population.macro_size(),
        model.population.micro_size(),
        data.len()
    );
    Ok(())
}

fn run_eval(args: EvalArgs) -> Result<()> {
    let scheme: Scheme = args.scheme.parse()?;
    let model = load_model(&args.model)?;
    let data = load_dataset(&args.data)?.relabel(&model.header.class_names)?;
    let mut rng = stream_rng(args.seed, Stream::TieBreak(scheme));
    let report = evaluate(&model, &data, scheme, args.theta_exploit, &mut rng)?;
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(())
}

fn run_experiment_cmd(args: ExperimentArgs) -> Result<()> {
    let mut cfg = args.config.load()?;
    if let Some(r) = args.runs {
        cfg.runs = r;
    }
    if let Some(e) = args.epochs {
        cfg.epochs = e;
    }
    if let Some(s) = args.base_seed {
        cfg.base_seed = s;
    }
    if let Some(s) = &args.schemes {
        cfg.set("schemes", s)?;
    }
    if args.no_timing {
        cfg.record_timing = false;
    }
    cfg.validate()?;
    let source = match (args.data, args.generator) {
        (Some(path), _) => DatasetSource::Csv(path),
        (None, Some(name)) => DatasetSource::Generator {
            name,
            count: args.count,
            seed: args.gen_seed,
        },
        (None, None) => unreachable!("clap requires one source"),
    };
    let (name, data) = source.load()?;
    let rows = run_experiment(&cfg, &name, &data, args.workers)?;
    match args.out {
        Some(path) => {
            let mut out = create(&path)?;
            write_results(&rows, &mut out)?;
            out.flush()?;
        }
        None => write_results(&rows, io::stdout().lock())?,
    }
    Ok(())
}

fn run_grid(args: GridArgs) -> Result<()> {
    let scheme: Scheme = args.scheme.parse()?;
    let model = load_model(&args.model)?;
    let mut rng = stream_rng(args.seed, Stream::Grid);
    let cells = export_grid(&model, args.resolution, args.theta_exploit, scheme, &mut rng)?;
    let mut out = create(&args.out)?;
    write_grid(&cells, &model.header.class_names, &mut out)?;
    out.flush()?;
    Ok(())
}

fn run_gen(args: GenArgs) -> Result<()> {
    let data = generate_named(&args.name, args.count, args.seed)?;
    let mut out = create(&args.out)?;
    data.to_csv(&mut out)?;
    out.flush()?;
    Ok(())
}

/// 2 for data problems, 3 for configuration problems.
fn exit_code(err: &anyhow::Error) -> u8 {
    match err.chain().find_map(|e| e.downcast_ref::<fuzzy_ucs::Error>()) {
        Some(fuzzy_ucs::Error::Config(_)) => 3,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = match cli.command {
        Command::Train(a) => run_train(a),
        Command::Eval(a) => run_eval(a),
        Command::Experiment(a) => run_experiment_cmd(a),
        Command::Grid(a) => run_grid(a),
        Command::Gen(a) => run_gen(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
