use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use subsat::cnf::dimacs::serialize_dimacs_with_comments;
use subsat::cnf::generate_random_ksat;
use subsat::decompose::GraphParams;
use subsat::experiments::{
    load_instances, parse_selector, parse_spec, parse_subqubo_selector, read_dimacs_file, read_runs_file,
    read_summary_file, run_planned, run_subsat, summarize, verify_summary, write_runs_file, write_summary_file,
    write_trace_file, InnerName,
};
use subsat::inner::{calibrate, InnerOptimizerKind, QuboTabuConfig, SizingModel, TabuSchedule};
use subsat::solve::{RunTrace, SolverConfig, DEFAULT_CONV, DEFAULT_MAX_ITERS};
use subsat::subqubo::{subqubo_solve, SubQuboConfig};
use subsat::Error;

const EXIT_IO: u8 = 1;
const EXIT_PARSE: u8 = 2;
const EXIT_CONFIG: u8 = 3;
const EXIT_MISMATCH: u8 = 4;

#[derive(Parser)]
#[command(name = "subsat", version, about = "Max-SAT by sub-problem decomposition")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write random k-SAT instances as DIMACS files.
    Generate {
        #[arg(short)]
        n: usize,
        #[arg(short)]
        l: usize,
        #[arg(short, default_value_t = 3)]
        k: usize,
        #[arg(long, default_value_t = 1)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Solve one DIMACS instance.
    Solve(SolveArgs),
    /// Run a grid described by an experiment file.
    Experiment {
        spec: PathBuf,
        /// Overrides `[output] threads`.
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Fit a sizing model on one instance and report it.
    Calibrate {
        instance: PathBuf,
        #[arg(long)]
        q_max: usize,
        #[arg(long, default_value = "random")]
        selector: String,
        #[arg(long, default_value_t = 30)]
        probes: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Recompute a summary CSV from a per-run CSV and compare.
    Verify { runs: PathBuf, summary: PathBuf },
}

#[derive(Args)]
struct SolveArgs {
    instance: PathBuf,
    #[arg(long, default_value = "energy")]
    selector: String,
    /// walksat, exact or qubo-tabu.
    #[arg(long, default_value = "walksat")]
    inner: String,
    #[arg(short, long, default_value_t = 50)]
    m: usize,
    #[arg(long, default_value_t = 150)]
    q_max: usize,
    #[arg(long, default_value_t = DEFAULT_MAX_ITERS)]
    max_iters: usize,
    #[arg(long, default_value_t = DEFAULT_CONV)]
    conv: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Graph selector edge exponent.
    #[arg(long, default_value_t = 1.0)]
    f_exponent: f64,
    #[arg(long)]
    swap_budget: Option<usize>,
    /// WalkSAT noise probability.
    #[arg(short, long, default_value_t = 0.5)]
    p: f64,
    #[arg(long, default_value_t = 20)]
    iters_per_var: usize,
    #[arg(long, default_value_t = 1_000_000)]
    node_budget: u64,
    #[arg(long)]
    tabu_tenure: Option<usize>,
    #[arg(long, default_value_t = 100)]
    tabu_steps_per_var: usize,
    #[arg(long, default_value_t = 1)]
    tabu_restarts: usize,
    /// Calibrate a sizing model before a qubo-tabu run.
    #[arg(long)]
    sizing: bool,
    #[arg(long, default_value_t = 30)]
    calibration_probes: usize,
    /// Run the sub-QUBO baseline with this window size instead of sub-SAT.
    #[arg(long)]
    subqubo_q: Option<usize>,
    #[arg(long, default_value = "energy")]
    subqubo_selector: String,
    /// Per-iteration trace CSV.
    #[arg(long)]
    out: Option<PathBuf>,
}

struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Io(_) | Error::File { .. } => EXIT_IO,
            Error::Dimacs(_) | Error::Spec { .. } | Error::Csv(_) | Error::CsvFormat(_) => EXIT_PARSE,
            _ => EXIT_CONFIG,
        };
        Failure { code, message: e.to_string() }
    }
}

fn config_error(message: String) -> Failure {
    Failure { code: EXIT_CONFIG, message }
}

fn generate(n: usize, l: usize, k: usize, count: usize, seed: u64, out_dir: &Path) -> Result<(), Failure> {
    let formulas = (seed..seed + count as u64)
        .map(|s| generate_random_ksat(n, l, k, s).map(|f| (s, f)))
        .collect::<Result<Vec<_>, _>>()?;
    fs::create_dir_all(out_dir).map_err(|e| Error::file(out_dir, e))?;
    for (s, f) in formulas {
        let path = out_dir.join(format!("rand_n{n}_l{l}_k{k}_s{s}.cnf"));
        let text = serialize_dimacs_with_comments(&f, &[format!("random {k}-SAT n={n} l={l} seed={s}")]);
        fs::write(&path, text).map_err(|e| Error::file(&path, e))?;
        println!("{}", path.display());
    }
    Ok(())
}

fn print_trace(trace: &RunTrace) {
    println!(
        "final_energy={} initial_energy={} iterations={} best_iteration={} stop_reason={} seconds={:.3}",
        trace.best_energy,
        trace.initial_energy,
        trace.iterations_run,
        trace.best_iteration,
        trace.stop_reason.name(),
        trace.total_seconds
    );
}

fn solve_cmd(a: &SolveArgs) -> Result<(), Failure> {
    let formula = read_dimacs_file(&a.instance)?;
    let tabu = TabuSchedule { tenure: a.tabu_tenure, steps_per_var: a.tabu_steps_per_var, restarts: a.tabu_restarts };
    let trace = if let Some(q) = a.subqubo_q {
        let selector = parse_subqubo_selector(&a.subqubo_selector).map_err(config_error)?;
        let config = SubQuboConfig { tabu, max_iters: a.max_iters, conv: a.conv, ..SubQuboConfig::new(q, selector, a.seed) };
        subqubo_solve(&formula, &config)?
    } else {
        let graph = GraphParams { exponent: a.f_exponent, swap_budget: a.swap_budget };
        let selector = parse_selector(&a.selector, graph).map_err(config_error)?;
        let inner = match a.inner.parse::<InnerName>().map_err(config_error)? {
            InnerName::WalkSat => InnerOptimizerKind::WalkSat { p: a.p, iters_per_var: a.iters_per_var },
            InnerName::Exact => InnerOptimizerKind::ExactBnb { node_budget: a.node_budget },
            InnerName::QuboTabu => {
                InnerOptimizerKind::QuboTabu(QuboTabuConfig { q_max: a.q_max, tabu, sizing: SizingModel::untrained() })
            }
        };
        let config = SolverConfig { max_iters: a.max_iters, conv: a.conv, ..SolverConfig::new(selector, inner, a.m, a.seed) };
        config.validate(&formula)?;
        run_subsat(&formula, &config, a.sizing, a.calibration_probes)?
    };
    if let Some(out) = &a.out {
        write_trace_file(out, &trace)?;
    }
    print_trace(&trace);
    Ok(())
}

fn experiment(spec_path: &Path, threads: Option<usize>) -> Result<(), Failure> {
    let text = fs::read_to_string(spec_path).map_err(|e| Error::file(spec_path, e))?;
    let base = spec_path.parent().unwrap_or(Path::new("."));
    let mut spec = parse_spec(&text, base)?;
    if let Some(t) = threads {
        spec.threads = t;
    }
    let instances = load_instances(&spec.instances)?;
    let rows = run_planned(&spec, &instances)?;
    let summary = summarize(&rows);
    if let Some(p) = &spec.runs_path {
        write_runs_file(p, &rows)?;
    }
    if let Some(p) = &spec.summary_path {
        write_summary_file(p, &summary)?;
    }
    println!("runs={} groups={}", rows.len(), summary.len());
    for s in &summary {
        println!(
            "{} {} {} {} size={} runs={} mean_energy={} std_energy={}",
            s.dataset, s.method, s.selector, s.inner, s.size, s.runs, s.mean_energy, s.std_energy
        );
    }
    Ok(())
}

fn calibrate_cmd(instance: &Path, q_max: usize, selector: &str, probes: usize, seed: u64) -> Result<(), Failure> {
    let formula = read_dimacs_file(instance)?;
    let selector = parse_selector(selector, GraphParams::default()).map_err(config_error)?;
    if probes < 2 {
        return Err(config_error("calibration needs at least 2 probes".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let model = calibrate(&formula, &selector, q_max, probes, &mut rng)?;
    let names = ["w_q", "w_max_width", "w_literals", "w_vars", "w_clauses"];
    println!("trained={}", model.trained);
    println!("samples={}", model.training_samples.len());
    println!("intercept={}", model.intercept);
    for (name, w) in names.iter().zip(model.weights) {
        println!("{name}={w}");
    }
    println!("mae={}", model.training_mae());
    println!("predicted_m={}", model.predict_m(&formula, q_max));
    Ok(())
}

fn verify(runs: &Path, summary: &Path) -> Result<(), Failure> {
    let rows = read_runs_file(runs)?;
    let sums = read_summary_file(summary)?;
    let problems = verify_summary(&rows, &sums);
    if problems.is_empty() {
        println!("ok rows={} groups={}", rows.len(), sums.len());
        Ok(())
    } else {
        for p in &problems {
            eprintln!("{p}");
        }
        Err(Failure { code: EXIT_MISMATCH, message: format!("{} discrepancies", problems.len()) })
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Generate { n, l, k, count, seed, out_dir } => generate(*n, *l, *k, *count, *seed, out_dir),
        Command::Solve(a) => solve_cmd(a),
        Command::Experiment { spec, threads } => experiment(spec, *threads),
        Command::Calibrate { instance, q_max, selector, probes, seed } => {
            calibrate_cmd(instance, *q_max, selector, *probes, *seed)
        }
        Command::Verify { runs, summary } => verify(runs, summary),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
