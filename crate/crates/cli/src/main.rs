use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use aoselm::data::{csvio, digits::SyntheticDigits, gen_regression, sea, stagger, RegressionFn};
use aoselm::metrics::ConfusionMatrix;
use aoselm::model::ConceptScope;
use aoselm::{Mat, RngStream};
use aoselm_cli::bench::{bench_runs, BenchName, BenchOptions};
use aoselm_cli::config::LearnerKind;
use aoselm_cli::model_io::load_model;
use aoselm_cli::report::{aggregate_csv, summary_text, write_artifacts};
use aoselm_cli::runner::run_experiment;

/// Sequential random-feature learner with drift adaptation: dataset
/// generation, training, evaluation and paper-style benchmarks.
#[derive(Parser)]
#[command(name = "aoselm", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Emit a dataset as CSV.
    Gen(GenArgs),
    /// Run one configured experiment and save its artifacts and models.
    Train(TrainArgs),
    /// Score a saved model on a CSV dataset.
    Eval(EvalArgs),
    /// Run a named benchmark suite.
    Bench(BenchArgs),
    /// Aggregate trial report CSVs into mean/std rows.
    Report(ReportArgs),
}

#[derive(Args)]
struct GenArgs {
    /// sea | stagger | sinc | sinus | gaussian | digits
    #[arg(long)]
    dataset: String,
    /// Concept index (sea 1-4, stagger 1-3, digits ignored).
    #[arg(long, default_value_t = 1)]
    concept: usize,
    #[arg(long, default_value_t = 1000)]
    n: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Label-flip fraction (sea only).
    #[arg(long, default_value_t = 0.0)]
    noise: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct TrainArgs {
    /// Benchmark preset providing the stream (see `bench` for names).
    #[arg(long)]
    bench: String,
    #[command(flatten)]
    common: CommonArgs,
    /// Output directory for report, traces, models and resolved config.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    model: PathBuf,
    /// CSV dataset (classification: f0..fn,label; regression: x,target).
    #[arg(long)]
    data: PathBuf,
    /// Concept block to marginalize to (default: global argmax).
    #[arg(long)]
    concept: Option<usize>,
    /// Treat the dataset as regression and report RMSE.
    #[arg(long, default_value_t = false)]
    regression: bool,
}

#[derive(Args)]
struct BenchArgs {
    /// sea | stagger | mnist-vd | mnist-rd | mnist-hd | regression-rd
    name: String,
    #[command(flatten)]
    common: CommonArgs,
    /// Output directory; per-run artifacts land in subdirectories.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CommonArgs {
    /// Config file of `key = value` lines; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Restore publication-scale parameters.
    #[arg(long, default_value_t = false)]
    full: bool,
    /// Directory with IDX image data (train-images-idx3-ubyte etc.).
    #[arg(long)]
    data: Option<PathBuf>,
    /// Restrict to these learners (comma separated).
    #[arg(long)]
    learners: Option<String>,
    /// Trial seeds (comma separated).
    #[arg(long)]
    seeds: Option<String>,
    /// Additional config overrides as key=value.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    sets: Vec<String>,
}

#[derive(Args)]
struct ReportArgs {
    /// Input report.csv files.
    #[arg(long, num_args = 1.., required = true)]
    inputs: Vec<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            // single machine-readable error line
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Gen(args) => gen(args),
        Command::Train(args) => train(args),
        Command::Eval(args) => eval(args),
        Command::Bench(args) => bench(args),
        Command::Report(args) => report(args),
    }
}

fn gen(args: GenArgs) -> Result<()> {
    let mut rng = RngStream::new(args.seed);
    match args.dataset.as_str() {
        "sea" => {
            let (inputs, labels) = sea::generate_raw::<f64>(args.n, args.concept, args.noise, &mut rng)?;
            csvio::write_classification(&args.out, &inputs, &labels)?;
        }
        "stagger" => {
            let (inputs, labels) = stagger::generate_raw::<f64>(args.n, args.concept, &mut rng)?;
            csvio::write_classification(&args.out, &inputs, &labels)?;
        }
        "sinc" | "sinus" | "gaussian" => {
            let function = match args.dataset.as_str() {
                "sinc" => RegressionFn::Sinc,
                "sinus" => RegressionFn::Sinus,
                _ => RegressionFn::Gaussian,
            };
            let (xs, ys) = gen_regression::<f64>(function, args.n, &mut rng);
            csvio::write_regression(&args.out, &xs, &ys)?;
        }
        "digits" => {
            let digits = SyntheticDigits::new(aoselm_cli::bench::SYNTH_TEMPLATE_SEED, 10);
            let per_class = args.n.div_ceil(10);
            let set = digits.image_set::<f64>(per_class, &mut rng);
            let n = args.n.min(set.len());
            let inputs = Mat::from_fn(784, n, |i, j| set.images[j][i]);
            csvio::write_classification(&args.out, &inputs, &set.labels[..n])?;
        }
        other => bail!("unknown dataset {other:?} (sea|stagger|sinc|sinus|gaussian|digits)"),
    }
    println!("wrote {}", args.out.display());
    Ok(())
}

fn parse_common(common: &CommonArgs) -> Result<BenchOptions> {
    let learners = match &common.learners {
        None => None,
        Some(raw) => Some(
            raw.split(',')
                .map(|s| {
                    LearnerKind::parse(s.trim())
                        .ok_or_else(|| anyhow!("unknown learner {s:?}"))
                })
                .collect::<Result<Vec<_>>>()?,
        ),
    };
    let seeds = match &common.seeds {
        None => None,
        Some(raw) => Some(
            raw.split(',')
                .map(|s| s.trim().parse::<u64>().context("bad seed"))
                .collect::<Result<Vec<_>>>()?,
        ),
    };
    let mut overrides = Vec::new();
    if let Some(path) = &common.config {
        // collect file pairs so bench runs can re-apply them over presets
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading {}", path.display()))?;
        for raw in text.lines() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| anyhow!("config line without `=`: {raw:?}"))?;
            overrides.push((k.trim().to_string(), v.trim().to_string()));
        }
    }
    for set in &common.sets {
        let (k, v) =
            set.split_once('=').ok_or_else(|| anyhow!("--set expects key=value, got {set:?}"))?;
        overrides.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(BenchOptions {
        full: common.full,
        data_dir: common.data.clone(),
        learners,
        seeds,
        overrides,
    })
}

fn bench(args: BenchArgs) -> Result<()> {
    let name = BenchName::parse(&args.name)
        .ok_or_else(|| anyhow!("unknown benchmark {:?}; one of {:?}", args.name, BenchName::ALL))?;
    let opts = parse_common(&args.common)?;
    let runs = bench_runs(name, &opts)?;
    for run in runs {
        let started = std::time::Instant::now();
        let report = run_experiment(&run.config, &run.scenario)
            .with_context(|| format!("run {}", run.tag))?;
        println!("== {} ({:.1}s)", run.tag, started.elapsed().as_secs_f64());
        print!("{}", summary_text(&report));
        if let Some(out) = &args.out {
            let dir = out.join(&run.tag);
            write_artifacts(&report, &dir, &run.config.seeds)?;
            println!("   artifacts: {}", dir.display());
        }
    }
    Ok(())
}

fn train(args: TrainArgs) -> Result<()> {
    let name = BenchName::parse(&args.bench)
        .ok_or_else(|| anyhow!("unknown benchmark {:?}; one of {:?}", args.bench, BenchName::ALL))?;
    let opts = parse_common(&args.common)?;
    let runs = bench_runs(name, &opts)?;
    let run = runs
        .into_iter()
        .next()
        .ok_or_else(|| anyhow!("benchmark expanded to no runs"))?;
    let report = run_experiment(&run.config, &run.scenario)?;
    print!("{}", summary_text(&report));
    write_artifacts(&report, &args.out, &run.config.seeds)?;
    println!("artifacts: {}", args.out.display());
    Ok(())
}

fn eval(args: EvalArgs) -> Result<()> {
    let (model, _seeds) = load_model(&args.model)?;
    if args.regression {
        let (xs, ys) = csvio::read_regression::<f64>(&args.data)?;
        let inputs = pad_inputs(Mat::from_fn(1, xs.len(), |_, j| xs[j]), model.input_dim())?;
        let block = args.concept.unwrap_or(0);
        let preds = model.predict_regression(&inputs, block)?;
        let se: f64 = preds.iter().zip(&ys).map(|(p, t)| (p - t) * (p - t)).sum();
        println!("rmse {:.6} over {} samples", (se / ys.len() as f64).sqrt(), ys.len());
        return Ok(());
    }
    let (inputs, labels) = csvio::read_classification::<f64>(&args.data)?;
    let inputs = pad_inputs(inputs, model.input_dim())?;
    let scope = match args.concept {
        Some(id) => ConceptScope::Concept(id),
        None => ConceptScope::All,
    };
    let preds = model.classify(&inputs, scope)?;
    let classes = match scope {
        ConceptScope::Concept(id) => model.concept(id)?.width(),
        ConceptScope::All => model.output_dim(),
    };
    let mut confusion = ConfusionMatrix::new(classes);
    for (&truth, &pred) in labels.iter().zip(&preds) {
        confusion.record(truth, pred)?;
    }
    let accuracy = confusion.accuracy()?;
    match confusion.cohen_kappa() {
        Ok(kappa) => println!(
            "accuracy {:.4}  kappa {:.4} ({:.4})  over {} samples",
            accuracy,
            kappa.value,
            kappa.std_error,
            labels.len()
        ),
        Err(_) => println!(
            "accuracy {:.4}  kappa undefined (degenerate marginals)  over {} samples",
            accuracy,
            labels.len()
        ),
    }
    Ok(())
}

fn pad_inputs(inputs: Mat, dim: usize) -> Result<Mat> {
    if inputs.rows() == dim {
        return Ok(inputs);
    }
    if inputs.rows() > dim {
        bail!("dataset has {} attributes, model expects {}", inputs.rows(), dim);
    }
    let mut padded = Mat::zeros(dim, inputs.cols());
    padded.copy_block(0, 0, &inputs);
    Ok(padded)
}

fn report(args: ReportArgs) -> Result<()> {
    let csv = aggregate_csv(&args.inputs)?;
    std::fs::write(&args.out, csv)?;
    println!("wrote {}", args.out.display());
    Ok(())
}
