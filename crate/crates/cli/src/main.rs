use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use qsvm::baseline::{train_classical, BaselineParams};
use qsvm::bench::{
    run_accuracy_experiment, run_feature_scaling, run_point_scaling, run_sweep_sensitivity,
    AccuracyReport, ExperimentSpec, ScalingOptions, ScalingReport,
};
use qsvm::dataset::{
    generate_blobs, generate_hyperplane, load_csv, write_csv, write_csv_to, Dataset, LabelColumn,
    Normalization, Normalizer,
};
use qsvm::qubo::{build_qubo, decode_multipliers, PrecisionVector, QuboProblem};
use qsvm::solver::{solve_exhaustive, solve_sa, BetaSchedule, BinarySolution, SaParams};
use qsvm::svm::{accuracy, recover_model, SvmModel};

#[derive(Parser)]
#[command(
    name = "qsvm",
    version,
    about = "Linear SVM training through a QUBO encoding of the dual"
)]
struct Cli {
    /// Worker threads; defaults to the number of available cores.
    #[arg(long, env = "QSVM_THREADS", global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a synthetic dataset to CSV.
    Generate(GenerateArgs),
    /// Train a model on a CSV dataset and write it as JSON.
    Train(TrainArgs),
    /// Score a saved model on a CSV dataset.
    Evaluate(EvaluateArgs),
    /// Repeated train/test accuracy experiment.
    AccuracyBench(AccuracyBenchArgs),
    /// Accuracy at several annealing sweep budgets.
    SweepBench(SweepBenchArgs),
    /// Phase timings against feature count.
    FeatureBench(ScalingBenchArgs),
    /// Phase timings against point count.
    PointBench(ScalingBenchArgs),
    /// Build the QUBO for a dataset and write it as JSON.
    QuboExport(QuboExportArgs),
    /// Minimize a QUBO read from JSON.
    Solve(SolveArgs),
}

#[derive(Args)]
struct GenerateArgs {
    #[command(subcommand)]
    kind: GenerateKind,
    /// Output CSV path.
    #[arg(long, short, global = true)]
    out: Option<PathBuf>,
    #[arg(long, default_value_t = 0, global = true)]
    seed: u64,
}

#[derive(Subcommand)]
enum GenerateKind {
    /// Two Gaussian clusters.
    Blobs {
        #[arg(long, short)]
        n: usize,
        #[arg(long, short, default_value_t = 2)]
        d: usize,
        #[arg(long, default_value_t = 10.0)]
        center_distance: f64,
    },
    /// Uniform points in [-1, 1]^d labelled by a hyperplane.
    Hyperplane {
        #[arg(long, short)]
        n: usize,
        /// Normal vector, comma separated.
        #[arg(
            long,
            value_delimiter = ',',
            allow_negative_numbers = true,
            required = true
        )]
        normal: Vec<f64>,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        offset: f64,
    },
}

#[derive(Args)]
struct DataArgs {
    /// CSV file with features and a label column.
    #[arg(long)]
    data: PathBuf,
    /// Label column, by header name or zero-based index.
    #[arg(long, default_value = "label")]
    label_column: String,
    #[arg(long, default_value = "1")]
    positive: String,
    #[arg(long, default_value = "-1", allow_hyphen_values = true)]
    negative: String,
}

impl DataArgs {
    fn load(&self) -> Result<Dataset> {
        let column: LabelColumn = self.label_column.parse()?;
        Ok(load_csv(
            &self.data,
            &column,
            &self.positive,
            &self.negative,
        )?)
    }
}

#[derive(Args)]
struct QuboArgs {
    /// Precision vector, comma separated powers of two.
    #[arg(long, value_delimiter = ',', default_value = "0.25,0.5,1,2")]
    precision: Vec<f64>,
    /// Weight of the squared equality-constraint residual.
    #[arg(long, default_value_t = 0.0)]
    equality_penalty: f64,
    #[arg(long, value_enum, default_value_t = NormalizationArg::MinMax)]
    normalization: NormalizationArg,
}

#[derive(Args)]
struct AnnealArgs {
    #[arg(long, default_value_t = 10)]
    reads: usize,
    #[arg(long, default_value_t = 1000)]
    sweeps: usize,
    #[arg(long)]
    beta_initial: Option<f64>,
    #[arg(long)]
    beta_final: Option<f64>,
    #[arg(long, value_enum, default_value_t = ScheduleArg::Geometric)]
    schedule: ScheduleArg,
}

impl AnnealArgs {
    fn params(&self, seed: u64) -> SaParams {
        SaParams {
            num_reads: self.reads,
            sweeps_per_read: self.sweeps,
            beta_initial: self.beta_initial,
            beta_final: self.beta_final,
            schedule: match self.schedule {
                ScheduleArg::Geometric => BetaSchedule::Geometric,
                ScheduleArg::Linear => BetaSchedule::Linear,
            },
            seed,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum NormalizationArg {
    MinMax,
    ZScore,
    None,
}

#[derive(Clone, Copy, ValueEnum)]
enum ScheduleArg {
    Geometric,
    Linear,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum TrainMethod {
    Annealing,
    Exhaustive,
    Baseline,
}

#[derive(Args)]
struct TrainArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    qubo: QuboArgs,
    #[command(flatten)]
    anneal: AnnealArgs,
    #[arg(long, value_enum, default_value_t = TrainMethod::Annealing)]
    method: TrainMethod,
    /// Box bound for the baseline solver.
    #[arg(long, default_value_t = 1e6)]
    c: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Model JSON path; printed to stdout when omitted.
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EvaluateArgs {
    #[arg(long)]
    model: PathBuf,
    #[command(flatten)]
    data: DataArgs,
}

#[derive(Args)]
struct ReportArgs {
    /// Experiment config, TOML or JSON (chosen by extension).
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out_json: Option<PathBuf>,
    #[arg(long)]
    out_csv: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    repetitions: Option<usize>,
    #[arg(long)]
    reads: Option<usize>,
    #[arg(long)]
    sweeps: Option<usize>,
    /// Omit wall-clock timings so reports are byte-reproducible.
    #[arg(long)]
    no_timings: bool,
}

impl ReportArgs {
    fn spec(&self) -> Result<ExperimentSpec> {
        let mut spec = read_spec(&self.config)?;
        if let Some(seed) = self.seed {
            spec.seed = seed;
        }
        if let Some(r) = self.repetitions {
            spec.repetitions = r;
        }
        if let Some(r) = self.reads {
            spec.sa.num_reads = r;
        }
        if let Some(s) = self.sweeps {
            spec.sa.sweeps_per_read = s;
        }
        if self.no_timings {
            spec.record_timings = false;
        }
        Ok(spec)
    }
}

#[derive(Args)]
struct AccuracyBenchArgs {
    #[command(flatten)]
    report: ReportArgs,
}

#[derive(Args)]
struct SweepBenchArgs {
    #[command(flatten)]
    report: ReportArgs,
    #[arg(long, value_delimiter = ',', default_value = "20,100,1000")]
    budgets: Vec<usize>,
}

#[derive(Args)]
struct ScalingBenchArgs {
    #[command(flatten)]
    report: ReportArgs,
    /// Grid of feature or point counts, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    grid: Vec<usize>,
    /// Allow grid values beyond the desk-scale caps. Memory use is roughly
    /// 16·N·d bytes plus the dense QUBO.
    #[arg(long)]
    large: bool,
    #[arg(long, default_value_t = 4096)]
    memory_budget_mib: u64,
    #[arg(long, default_value_t = 3)]
    samples: usize,
}

#[derive(Args)]
struct QuboExportArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    qubo: QuboArgs,
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SolveArgs {
    /// QUBO JSON as written by `qubo-export`.
    #[arg(long)]
    qubo: PathBuf,
    #[arg(long, value_enum, default_value_t = SolveMethod::Annealing)]
    method: SolveMethod,
    #[command(flatten)]
    anneal: AnnealArgs,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum SolveMethod {
    Annealing,
    Exhaustive,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            let body =
                json!({ "error": { "kind": error_kind(&err), "message": format!("{err:#}") } });
            eprintln!("{body}");
            ExitCode::FAILURE
        }
    }
}

fn error_kind(err: &anyhow::Error) -> &'static str {
    if let Some(e) = err.downcast_ref::<qsvm::Error>() {
        e.kind()
    } else if err.downcast_ref::<toml::de::Error>().is_some()
        || err.downcast_ref::<serde_json::Error>().is_some()
    {
        "invalid-config"
    } else if err.downcast_ref::<std::io::Error>().is_some() {
        "io"
    } else {
        "invalid-argument"
    }
}

fn run(cli: Cli) -> Result<()> {
    if let Some(n) = cli.threads {
        if n == 0 {
            bail!("thread count must be >= 1");
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("configuring the worker pool")?;
    }
    match cli.command {
        Command::Generate(args) => generate(args),
        Command::Train(args) => train(args),
        Command::Evaluate(args) => evaluate(args),
        Command::AccuracyBench(args) => {
            let report = run_accuracy_experiment(&args.report.spec()?)?;
            emit_accuracy(&report, &args.report)
        }
        Command::SweepBench(args) => {
            let report = run_sweep_sensitivity(&args.report.spec()?, &args.budgets)?;
            emit_accuracy(&report, &args.report)
        }
        Command::FeatureBench(args) => {
            let report =
                run_feature_scaling(&args.report.spec()?, &args.grid, &scaling_options(&args))?;
            emit_scaling(&report, &args.report)
        }
        Command::PointBench(args) => {
            let report =
                run_point_scaling(&args.report.spec()?, &args.grid, &scaling_options(&args))?;
            emit_scaling(&report, &args.report)
        }
        Command::QuboExport(args) => {
            let data = normalized(args.data.load()?, args.qubo.normalization).0;
            let precision = PrecisionVector::new(args.qubo.precision.clone())?;
            let problem = build_qubo(&data, &precision, args.qubo.equality_penalty)?;
            write_or_print(args.out.as_deref(), &problem.to_json()?)
        }
        Command::Solve(args) => {
            let text = read(&args.qubo)?;
            let problem = QuboProblem::from_json(&text)?;
            let solution = match args.method {
                SolveMethod::Annealing => solve_sa(&problem, &args.anneal.params(args.seed))?,
                SolveMethod::Exhaustive => solve_exhaustive(&problem)?,
            };
            write_or_print(args.out.as_deref(), &solution.to_json()?)
        }
    }
}

fn generate(args: GenerateArgs) -> Result<()> {
    let data = match args.kind {
        GenerateKind::Blobs {
            n,
            d,
            center_distance,
        } => generate_blobs(n, d, args.seed, center_distance)?,
        GenerateKind::Hyperplane { n, normal, offset } => {
            generate_hyperplane(n, normal.len(), &normal, offset, args.seed)?
        }
    };
    match &args.out {
        Some(path) => write_csv(&data, path)?,
        None => write_csv_to(&data, std::io::stdout().lock())?,
    }
    Ok(())
}

fn normalized(data: Dataset, method: NormalizationArg) -> (Dataset, Option<Normalizer>) {
    let method = match method {
        NormalizationArg::MinMax => Normalization::MinMax,
        NormalizationArg::ZScore => Normalization::ZScore,
        NormalizationArg::None => return (data, None),
    };
    let normalizer = Normalizer::fit(&data, method);
    (normalizer.transform(&data), Some(normalizer))
}

fn train(args: TrainArgs) -> Result<()> {
    let raw = args.data.load()?;
    let (data, normalizer) = normalized(raw.clone(), args.qubo.normalization);
    let (model, energy) = match args.method {
        TrainMethod::Baseline => {
            let params = BaselineParams {
                c: args.c,
                seed: args.seed,
                ..BaselineParams::default()
            };
            let fit = train_classical(&data, &params)?;
            if !fit.converged {
                eprintln!(
                    "warning: baseline stopped at the iteration cap (KKT gap {:e})",
                    fit.kkt_gap
                );
            }
            (fit.model, None)
        }
        TrainMethod::Annealing | TrainMethod::Exhaustive => {
            let precision = PrecisionVector::new(args.qubo.precision.clone())?;
            let problem = build_qubo(&data, &precision, args.qubo.equality_penalty)?;
            let solution: BinarySolution = if args.method == TrainMethod::Annealing {
                solve_sa(&problem, &args.anneal.params(args.seed))?
            } else {
                solve_exhaustive(&problem)?
            };
            let lambdas = decode_multipliers(&solution.bits, &precision, data.len())?;
            (recover_model(&data, &lambdas)?, Some(solution.energy))
        }
    };
    // Saved models score raw features.
    let model = match &normalizer {
        Some(n) => n.unnormalize_model(&model),
        None => model,
    };
    let train_accuracy = accuracy(&model, &raw)?;
    match &args.out {
        Some(path) => {
            write_or_print(Some(path), &model.to_json()?)?;
            let summary = json!({
                "model": path,
                "train_accuracy": train_accuracy,
                "support_vectors": model.support_indices.len(),
                "energy": energy,
            });
            println!("{summary}");
            Ok(())
        }
        None => write_or_print(None, &model.to_json()?),
    }
}

fn evaluate(args: EvaluateArgs) -> Result<()> {
    let model = SvmModel::from_json(&read(&args.model)?)?;
    let data = args.data.load()?;
    let acc = accuracy(&model, &data)?;
    println!("{}", json!({ "accuracy": acc, "points": data.len() }));
    Ok(())
}

fn scaling_options(args: &ScalingBenchArgs) -> ScalingOptions {
    ScalingOptions {
        allow_large: args.large,
        memory_budget_bytes: args.memory_budget_mib << 20,
        samples: args.samples,
        ..ScalingOptions::default()
    }
}

fn read_spec(path: &Path) -> Result<ExperimentSpec> {
    let text = read(path)?;
    let mut spec: ExperimentSpec = if path.extension().is_some_and(|e| e == "json") {
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?
    } else {
        toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))?
    };
    // Dataset paths are relative to the config file.
    if let qsvm::bench::DatasetSource::Csv { path: data, .. } = &mut spec.dataset {
        if data.is_relative() {
            if let Some(dir) = path.parent() {
                *data = dir.join(&*data);
            }
        }
    }
    Ok(spec)
}

fn emit_accuracy(report: &AccuracyReport, args: &ReportArgs) -> Result<()> {
    if let Some(path) = &args.out_csv {
        fs::write(path, report.to_csv_string()?)
            .with_context(|| format!("writing {}", path.display()))?;
    }
    if args.out_json.is_some() || args.out_csv.is_none() {
        write_or_print(args.out_json.as_deref(), &report.to_json()?)?;
    }
    Ok(())
}

fn emit_scaling(report: &ScalingReport, args: &ReportArgs) -> Result<()> {
    if let Some(path) = &args.out_csv {
        let file = fs::File::create(path).with_context(|| format!("writing {}", path.display()))?;
        report.write_csv(file)?;
    }
    if args.out_json.is_some() || args.out_csv.is_none() {
        write_or_print(args.out_json.as_deref(), &report.to_json()?)?;
    }
    Ok(())
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn write_or_print(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => {
            fs::write(p, format!("{text}\n")).with_context(|| format!("writing {}", p.display()))
        }
        None => {
            println!("{text}");
            Ok(())
        }
    }
}
