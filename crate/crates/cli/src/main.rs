use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use sparse_rkbs::admissibility::{self, AuditReport, UniformGenerator, DEFAULT_GRID_SIZE};
use sparse_rkbs::experiment::{self, ExperimentConfig, NoiseModel, TrialSummary};
use sparse_rkbs::interpolation::ExpansionFunction;
use sparse_rkbs::solvers::{self, FitResult, LassoConfig};
use sparse_rkbs::{Error, GramSystem, KernelSpec, PointSet};

#[derive(Parser)]
#[command(name = "rkbs", version, about = "Sparse kernel learning in l1-norm reproducing kernel Banach spaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check admissibility conditions of a kernel on random point sets.
    Audit(AuditArgs),
    /// Fit a kernel expansion to data.
    Fit(FitArgs),
    /// Run the RKHS ridge vs RKBS l1 comparison.
    Experiment(ExperimentArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ConditionArg {
    A1,
    A2,
    A4,
    All,
}

#[derive(clap::Args)]
struct AuditArgs {
    /// Kernel as a family name or a JSON object.
    #[arg(long)]
    kernel: String,
    #[arg(long, value_enum, default_value = "all")]
    condition: ConditionArg,
    /// Random point sets per condition.
    #[arg(long, default_value_t = 200)]
    trials: usize,
    /// Uniform grid size for Lebesgue profiles.
    #[arg(long, default_value_t = DEFAULT_GRID_SIZE)]
    grid: usize,
    #[arg(long, default_value_t = 2012)]
    seed: u64,
    /// Write the reports as JSON.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Method {
    /// l1-regularized least squares.
    Rkbs,
    /// Ridge regression.
    Rkhs,
}

#[derive(clap::Args)]
struct FitArgs {
    #[arg(long)]
    kernel: String,
    /// CSV file of sample points, or an inline comma-separated list.
    #[arg(long, allow_hyphen_values = true)]
    points: String,
    /// CSV file of sample values, or an inline comma-separated list.
    #[arg(long, allow_hyphen_values = true)]
    values: String,
    #[arg(long, allow_hyphen_values = true)]
    mu: f64,
    #[arg(long, value_enum, default_value = "rkbs")]
    method: Method,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write the Gram matrix as a JSON array of rows.
    #[arg(long)]
    dump_gram: Option<PathBuf>,
}

#[derive(clap::Args)]
struct ExperimentArgs {
    /// Noise model; all three when omitted.
    #[arg(long)]
    noise: Option<String>,
    #[arg(long, default_value_t = 50)]
    trials: usize,
    #[arg(long, default_value_t = 200)]
    n: usize,
    #[arg(long, default_value_t = 2012)]
    seed: u64,
    /// `lo..hi` decades such as `1e-7..1e1`, or a comma-separated list.
    #[arg(long, default_value = "1e-7..1e1")]
    mu_grid: String,
    /// Share of samples hit by pepper noise.
    #[arg(long, default_value_t = 1.0)]
    pepper_fraction: f64,
    /// CSV summary; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Full JSON summary with per-trial records.
    #[arg(long)]
    json: Option<PathBuf>,
}

enum Failure {
    Usage(String),
    Numerical(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_numerical() {
            Failure::Numerical(e.to_string())
        } else {
            Failure::Usage(e.to_string())
        }
    }
}

type CliResult<T> = Result<T, Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let outcome = match cli.command {
        Command::Audit(args) => audit(args),
        Command::Fit(args) => fit(args),
        Command::Experiment(args) => run_experiment(args),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Numerical(msg)) => {
            eprintln!("numerical failure: {msg}");
            ExitCode::from(2)
        }
    }
}

fn write_file(path: &Path, contents: &str) -> CliResult<()> {
    fs::write(path, contents).map_err(|e| Failure::Usage(format!("cannot write {}: {e}", path.display())))
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

fn audit(args: AuditArgs) -> CliResult<()> {
    let kernel: KernelSpec = args.kernel.parse()?;
    if args.trials == 0 || args.grid < 2 {
        return Err(Failure::Usage("--trials must be positive and --grid at least 2".into()));
    }
    let generator = UniformGenerator::for_kernel(&kernel);
    let wants = |c| args.condition == ConditionArg::All || args.condition == c;
    let mut reports: Vec<AuditReport> = Vec::new();
    if wants(ConditionArg::A1) {
        reports.push(admissibility::audit_a1(&kernel, &generator, args.trials, args.seed));
    }
    if wants(ConditionArg::A2) {
        let pairs = admissibility::square_pairs(admissibility::sampling_window(&kernel), 201);
        reports.push(admissibility::audit_a2(&kernel, &pairs));
    }
    if wants(ConditionArg::A4) {
        reports.push(admissibility::audit_a4(&kernel, &generator, args.grid, args.trials, args.seed));
    }

    println!("kernel: {}", kernel.name());
    for r in &reports {
        println!(
            "{:?}: {:?} (trials {}, skipped {}, worst {:.6e})",
            r.condition, r.verdict, r.stats.n_trials, r.stats.skipped, r.stats.worst_value
        );
        if let Some(note) = &r.note {
            println!("  {note}");
        }
        if let Some(w) = &r.witness {
            match w.t {
                Some(t) => println!("  witness: points {:?}, t = {t}, value {:.6e}", w.points, w.value),
                None => println!("  witness: points {:?}, value {:.6e}", w.points, w.value),
            }
        }
    }
    println!("{}", admissibility::a3_statement(&kernel));
    if let Some(path) = &args.out {
        write_file(path, &to_json(&reports))?;
    }
    Ok(())
}

fn read_numbers(arg: &str, what: &str) -> CliResult<Vec<f64>> {
    let path = Path::new(arg);
    let text = if path.exists() {
        fs::read_to_string(path).map_err(|e| Failure::Usage(format!("cannot read {what} file {arg}: {e}")))?
    } else {
        arg.to_string()
    };
    text.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<f64>()
                .map_err(|_| Failure::Usage(format!("cannot parse `{s}` in {what} (expected a CSV file or numbers)")))
        })
        .collect()
}

#[derive(Serialize)]
struct FitOutput {
    method: &'static str,
    mu: f64,
    objective: f64,
    kkt_residual: f64,
    sparsity: usize,
    converged: bool,
    iterations: usize,
    coefficients: Vec<f64>,
    function: ExpansionFunction,
}

fn fit(args: FitArgs) -> CliResult<()> {
    let kernel: KernelSpec = args.kernel.parse()?;
    let points = read_numbers(&args.points, "points")?;
    let values = read_numbers(&args.values, "values")?;
    if points.len() != values.len() {
        return Err(Failure::Usage(format!(
            "{} points but {} values",
            points.len(),
            values.len()
        )));
    }
    kernel.ensure_fittable()?;
    let points = PointSet::new(points)?;
    let system = GramSystem::build(kernel, points.clone())?;
    if let Some(path) = &args.dump_gram {
        write_file(path, &to_json(&system.gram_rows()))?;
    }
    let (method, result): (&'static str, FitResult) = match args.method {
        Method::Rkbs => ("rkbs", solvers::lasso_gram(&system, &values, &LassoConfig::new(args.mu))?),
        Method::Rkhs => ("rkhs", solvers::ridge_gram(&system, &values, args.mu)?),
    };
    let function = ExpansionFunction::left(kernel, points, result.values().to_vec())?;
    let output = FitOutput {
        method,
        mu: args.mu,
        objective: result.objective,
        kkt_residual: result.kkt_residual,
        sparsity: result.sparsity,
        converged: result.converged,
        iterations: result.iterations,
        coefficients: result.values().to_vec(),
        function,
    };
    if !result.converged {
        eprintln!(
            "warning: solver stopped after {} iterations with KKT residual {:e}",
            result.iterations, result.kkt_residual
        );
    }
    let json = to_json(&output);
    match &args.out {
        Some(path) => write_file(path, &json),
        None => {
            print!("{json}");
            Ok(())
        }
    }
}

fn run_experiment(args: ExperimentArgs) -> CliResult<()> {
    let mu_grid = experiment::parse_mu_grid(&args.mu_grid)?;
    let noises = match &args.noise {
        Some(name) => vec![NoiseModel::from_name(name)?],
        None => vec![NoiseModel::GAUSSIAN, NoiseModel::UNIFORM, NoiseModel::PEPPER],
    };
    let mut summaries: Vec<TrialSummary> = Vec::new();
    for noise in noises {
        let noise = match noise {
            NoiseModel::PepperSauce { magnitude, .. } => NoiseModel::PepperSauce {
                magnitude,
                fraction: args.pepper_fraction,
            },
            other => other,
        };
        let config = ExperimentConfig {
            n_points: args.n,
            noise,
            trials: args.trials,
            mu_grid: mu_grid.clone(),
            master_seed: args.seed,
            ..Default::default()
        };
        let summary = experiment::run_experiment(&config)?;
        for w in &summary.metadata.warnings {
            eprintln!("warning ({}): {w}", noise.name());
        }
        summaries.push(summary);
    }
    let csv = experiment::csv_report(&summaries);
    match &args.out {
        Some(path) => write_file(path, &csv)?,
        None => print!("{csv}"),
    }
    if let Some(path) = &args.json {
        write_file(path, &to_json(&summaries))?;
    }
    Ok(())
}
