//! Grid experiments: load instances, expand a spec into runs, execute them on
//! a thread pool, and summarize.

mod spec;
mod tables;

use std::fs::File;
use std::io::BufWriter;
use std::path::Path;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::cnf::{generate_random_ksat, parse_dimacs, Assignment, CnfFormula};
use crate::error::{Error, Result};
use crate::inner::{calibrate, exact_maxsat, walksat, InnerOptimizerKind, QuboTabuConfig, SizingModel};
use crate::solve::{solve, RunTrace, SolverConfig};
use crate::subqubo::{full_qubo_size, subqubo_solve, SubQuboConfig, SubQuboSelector};

pub use spec::{parse_selector, parse_spec, parse_subqubo_selector, Baseline, ExperimentSpec, InnerName, InstanceSource};
pub use tables::{
    read_runs, read_summary, summarize, verify_summary, write_runs, write_summary, write_trace, RunRow, SummaryRow,
    RUN_HEADER, SUMMARY_HEADER, TRACE_HEADER, WALL_CLOCK_COLUMNS,
};

/// Mixed into the run seed for the calibration RNG so calibration draws do not
/// replay the solver's stream.
const CALIBRATION_SALT: u64 = 0x00ca_11b8_a7e5_eed5;

#[derive(Clone, Debug)]
pub struct Instance {
    /// Group label: `{n}v{l}c` for generated instances, the file stem for
    /// DIMACS files.
    pub dataset: String,
    pub name: String,
    pub formula: CnfFormula,
}

/// Reads a DIMACS file, attributing I/O failures to the path.
pub fn read_dimacs_file(path: &Path) -> Result<CnfFormula> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::file(path, e))?;
    Ok(parse_dimacs(&text)?)
}

pub fn load_instances(sources: &[InstanceSource]) -> Result<Vec<Instance>> {
    let mut out = Vec::new();
    for source in sources {
        match source {
            InstanceSource::Generated { n, l, k, count, seed } => {
                let dataset = format!("{n}v{l}c");
                for s in *seed..seed + *count as u64 {
                    out.push(Instance {
                        dataset: dataset.clone(),
                        name: format!("{dataset}-{s}"),
                        formula: generate_random_ksat(*n, *l, *k, s)?,
                    });
                }
            }
            InstanceSource::Dimacs(path) => {
                let stem = path.file_stem().map_or_else(|| path.display().to_string(), |s| s.to_string_lossy().into());
                out.push(Instance { dataset: stem.clone(), name: stem, formula: read_dimacs_file(path)? });
            }
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq)]
pub enum Job {
    SubSat { config: SolverConfig, calibrate: bool },
    SubQubo(SubQuboConfig),
    Baseline { baseline: Baseline, seed: u64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct PlannedRun {
    /// Index into the instance list.
    pub instance: usize,
    pub job: Job,
}

fn subsat_inners(spec: &ExperimentSpec) -> Result<Vec<(InnerOptimizerKind, usize)>> {
    let mut out = Vec::new();
    for inner in &spec.inners {
        match inner {
            InnerName::WalkSat | InnerName::Exact => {
                if spec.m_values.is_empty() {
                    return Err(Error::param(format!("inner `{}` needs at least one `m` value", inner.name())));
                }
                for &m in &spec.m_values {
                    let kind = if *inner == InnerName::WalkSat {
                        InnerOptimizerKind::WalkSat { p: spec.walksat_p, iters_per_var: spec.iters_per_var }
                    } else {
                        InnerOptimizerKind::ExactBnb { node_budget: spec.node_budget }
                    };
                    out.push((kind, m));
                }
            }
            InnerName::QuboTabu => {
                if spec.q_max_values.is_empty() {
                    return Err(Error::param("inner `qubo-tabu` needs at least one `q_max` value"));
                }
                for &q_max in &spec.q_max_values {
                    let kind = InnerOptimizerKind::QuboTabu(QuboTabuConfig {
                        q_max,
                        tabu: spec.tabu,
                        sizing: SizingModel::untrained(),
                    });
                    out.push((kind, 0));
                }
            }
        }
    }
    Ok(out)
}

/// Expands the grid in a fixed order (instance, method, seed) and validates
/// every run against its instance, so that a bad grid point fails before
/// anything is executed.
pub fn plan(spec: &ExperimentSpec, instances: &[Instance]) -> Result<Vec<PlannedRun>> {
    if !spec.inners.is_empty() && spec.selectors.is_empty() {
        return Err(Error::param("inner optimizers given without any selector"));
    }
    if !spec.subqubo_selectors.is_empty() && spec.subqubo_q.is_empty() {
        return Err(Error::param("sub-QUBO selectors given without any `subqubo_q`"));
    }
    if spec.sizing && spec.calibration_probes < 2 {
        return Err(Error::param("calibration needs at least 2 probes"));
    }
    let inners = subsat_inners(spec)?;
    let mut runs = Vec::new();
    for (idx, inst) in instances.iter().enumerate() {
        let f = &inst.formula;
        let err = |e: Error| Error::param(format!("instance {}: {e}", inst.name));
        for selector in &spec.selectors {
            for (inner, m) in &inners {
                for &seed in &spec.seeds {
                    let mut config = SolverConfig::new(*selector, inner.clone(), *m, seed);
                    config.max_iters = spec.max_iters;
                    config.conv = spec.conv;
                    config.validate(f).map_err(err)?;
                    let calibrate = spec.sizing && matches!(inner, InnerOptimizerKind::QuboTabu(_));
                    runs.push(PlannedRun { instance: idx, job: Job::SubSat { config, calibrate } });
                }
            }
        }
        for selector in &spec.subqubo_selectors {
            for &q in &spec.subqubo_q {
                let full = full_qubo_size(f);
                if q == 0 || q > full {
                    return Err(err(Error::param(format!("subqubo_q={q} outside 1..={full}"))));
                }
                for &seed in &spec.seeds {
                    let config = SubQuboConfig {
                        tabu: spec.tabu,
                        max_iters: spec.max_iters,
                        conv: spec.conv,
                        ..SubQuboConfig::new(q, *selector, seed)
                    };
                    runs.push(PlannedRun { instance: idx, job: Job::SubQubo(config) });
                }
            }
        }
        for &baseline in &spec.baselines {
            if f.num_vars() == 0 {
                return Err(err(Error::param("formula has no variables")));
            }
            if baseline == Baseline::Exact && f.num_vars() > spec.exact_max_vars {
                continue;
            }
            for &seed in &spec.seeds {
                runs.push(PlannedRun { instance: idx, job: Job::Baseline { baseline, seed } });
            }
        }
    }
    if spec.max_iters == 0 || spec.conv == 0 {
        return Err(Error::param("max_iters and conv must be at least 1"));
    }
    spec.tabu.validate()?;
    if !(0.0..=1.0).contains(&spec.walksat_p) || spec.baseline_flips == 0 || spec.exact_node_budget == 0 {
        return Err(Error::param("baseline settings out of range"));
    }
    Ok(runs)
}

fn row(inst: &Instance, method: &str, selector: &str, inner: &str, size: usize, seed: u64) -> RunRow {
    RunRow {
        dataset: inst.dataset.clone(),
        instance: inst.name.clone(),
        method: method.into(),
        selector: selector.into(),
        inner: inner.into(),
        size,
        seed,
        initial_energy: 0,
        final_energy: 0,
        iterations: 0,
        stop_reason: String::new(),
        best_iteration: 0,
        wall_seconds: 0.0,
    }
}

fn fill(mut r: RunRow, trace: &RunTrace) -> RunRow {
    r.initial_energy = trace.initial_energy;
    r.final_energy = trace.best_energy;
    r.iterations = trace.iterations_run;
    r.stop_reason = trace.stop_reason.name().into();
    r.best_iteration = trace.best_iteration;
    r.wall_seconds = trace.total_seconds;
    r
}

/// Runs a sub-SAT configuration, first fitting a sizing model when
/// `calibrate_first` is set and the inner optimizer is the QUBO path.
pub fn run_subsat(
    formula: &CnfFormula,
    config: &SolverConfig,
    calibrate_first: bool,
    probes: usize,
) -> Result<RunTrace> {
    let start = Instant::now();
    let mut config = config.clone();
    if let (true, InnerOptimizerKind::QuboTabu(cfg)) = (calibrate_first, &mut config.inner) {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed ^ CALIBRATION_SALT);
        cfg.sizing = calibrate(formula, &config.selector, cfg.q_max, probes, &mut rng)?;
    }
    let mut trace = solve(formula, &config)?;
    trace.total_seconds = start.elapsed().as_secs_f64();
    Ok(trace)
}

fn run_one(spec: &ExperimentSpec, inst: &Instance, job: &Job) -> Result<RunRow> {
    let f = &inst.formula;
    match job {
        Job::SubSat { config, calibrate } => {
            let trace = run_subsat(f, config, *calibrate, spec.calibration_probes)?;
            let r = row(inst, "subsat", config.selector.name(), config.inner.name(), config.size_param(), config.seed);
            Ok(fill(r, &trace))
        }
        Job::SubQubo(config) => {
            let trace = subqubo_solve(f, config)?;
            Ok(fill(row(inst, "subqubo", config.selector.name(), "tabu", config.q, config.seed), &trace))
        }
        Job::Baseline { baseline, seed } => {
            let start = Instant::now();
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let init = Assignment::random(f.num_vars(), &mut rng);
            let initial_energy = crate::cnf::energy_of(f, &init)?;
            let mut r = match baseline {
                Baseline::WalkSat(score) => {
                    let out = walksat(f, init, spec.walksat_p, spec.baseline_flips, *score, &mut rng)?;
                    let mut r = row(inst, &baseline.name(), "-", "-", f.num_vars(), *seed);
                    r.final_energy = out.energy;
                    r.iterations = out.flips;
                    r.stop_reason = if out.energy == 0 { "zero_energy" } else { "max_flips" }.into();
                    r
                }
                Baseline::Exact => {
                    let out = exact_maxsat(f, &init, spec.exact_node_budget)?;
                    let mut r = row(inst, &baseline.name(), "-", "-", f.num_vars(), *seed);
                    r.final_energy = out.energy;
                    r.iterations = out.nodes as usize;
                    r.stop_reason = if out.optimal { "optimal" } else { "node_budget" }.into();
                    r
                }
                Baseline::FullQubo => {
                    let q = full_qubo_size(f);
                    let config = SubQuboConfig {
                        tabu: spec.tabu,
                        max_iters: spec.max_iters,
                        conv: spec.conv,
                        ..SubQuboConfig::new(q, SubQuboSelector::Random, *seed)
                    };
                    let trace = subqubo_solve(f, &config)?;
                    return Ok(fill(row(inst, &baseline.name(), "-", "tabu", q, *seed), &trace));
                }
            };
            r.initial_energy = initial_energy;
            r.wall_seconds = start.elapsed().as_secs_f64();
            Ok(r)
        }
    }
}

/// Plans, then executes every run on a pool of `spec.threads` workers (0 means
/// one per core). Rows come back in plan order regardless of scheduling.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<Vec<RunRow>> {
    let instances = load_instances(&spec.instances)?;
    run_planned(spec, &instances)
}

pub fn run_planned(spec: &ExperimentSpec, instances: &[Instance]) -> Result<Vec<RunRow>> {
    let runs = plan(spec, instances)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(spec.threads)
        .build()
        .map_err(|e| Error::param(format!("thread pool: {e}")))?;
    pool.install(|| runs.par_iter().map(|p| run_one(spec, &instances[p.instance], &p.job)).collect())
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::file(dir, e))?;
    }
    Ok(BufWriter::new(File::create(path).map_err(|e| Error::file(path, e))?))
}

pub fn write_runs_file(path: &Path, rows: &[RunRow]) -> Result<()> {
    write_runs(create(path)?, rows)
}

pub fn write_summary_file(path: &Path, rows: &[SummaryRow]) -> Result<()> {
    write_summary(create(path)?, rows)
}

pub fn write_trace_file(path: &Path, trace: &RunTrace) -> Result<()> {
    write_trace(create(path)?, trace)
}

pub fn read_runs_file(path: &Path) -> Result<Vec<RunRow>> {
    read_runs(File::open(path).map_err(|e| Error::file(path, e))?)
}

pub fn read_summary_file(path: &Path) -> Result<Vec<SummaryRow>> {
    read_summary(File::open(path).map_err(|e| Error::file(path, e))?)
}
