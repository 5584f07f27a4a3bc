//! The sectioned `key = value` experiment file.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::decompose::{GraphParams, SelectorKind};
use crate::error::{Error, Result};
use crate::inner::{TabuSchedule, WalkScore};
use crate::subqubo::SubQuboSelector;

#[derive(Clone, Debug, PartialEq)]
pub enum InstanceSource {
    /// `count` random k-SAT instances with generator seeds `seed..seed+count`.
    Generated { n: usize, l: usize, k: usize, count: usize, seed: u64 },
    Dimacs(PathBuf),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum InnerName {
    WalkSat,
    Exact,
    QuboTabu,
}

impl InnerName {
    pub fn name(self) -> &'static str {
        match self {
            InnerName::WalkSat => "walksat",
            InnerName::Exact => "exact",
            InnerName::QuboTabu => "qubo-tabu",
        }
    }
}

impl FromStr for InnerName {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "walksat" => Ok(InnerName::WalkSat),
            "exact" => Ok(InnerName::Exact),
            "qubo-tabu" | "qubo" => Ok(InnerName::QuboTabu),
            _ => Err(format!("unknown inner optimizer `{s}` (walksat, exact, qubo-tabu)")),
        }
    }
}

/// Unconstrained reference solvers run once per instance and seed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Baseline {
    WalkSat(WalkScore),
    FullQubo,
    Exact,
}

impl Baseline {
    pub fn name(self) -> String {
        match self {
            Baseline::WalkSat(s) => format!("walksat-{}", s.name()),
            Baseline::FullQubo => "full-qubo".into(),
            Baseline::Exact => "exact".into(),
        }
    }
}

impl FromStr for Baseline {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "walksat-break" => Ok(Baseline::WalkSat(WalkScore::Break)),
            "walksat-make" => Ok(Baseline::WalkSat(WalkScore::Make)),
            "walksat-energy" => Ok(Baseline::WalkSat(WalkScore::Energy)),
            "full-qubo" => Ok(Baseline::FullQubo),
            "exact" => Ok(Baseline::Exact),
            _ => Err(format!(
                "unknown baseline `{s}` (walksat-break, walksat-make, walksat-energy, full-qubo, exact)"
            )),
        }
    }
}

pub fn parse_selector(s: &str, graph: GraphParams) -> std::result::Result<SelectorKind, String> {
    match s {
        "random" => Ok(SelectorKind::Random),
        "energy" => Ok(SelectorKind::Energy),
        "softmax" => Ok(SelectorKind::Softmax),
        "graph" => Ok(SelectorKind::Graph(graph)),
        _ => Err(format!("unknown selector `{s}` (random, energy, softmax, graph)")),
    }
}

pub fn parse_subqubo_selector(s: &str) -> std::result::Result<SubQuboSelector, String> {
    match s {
        "energy" => Ok(SubQuboSelector::Energy),
        "random" => Ok(SubQuboSelector::Random),
        _ => Err(format!("unknown sub-QUBO selector `{s}` (energy, random)")),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentSpec {
    pub instances: Vec<InstanceSource>,
    pub selectors: Vec<SelectorKind>,
    pub inners: Vec<InnerName>,
    pub m_values: Vec<usize>,
    pub q_max_values: Vec<usize>,
    pub seeds: Vec<u64>,
    pub max_iters: usize,
    pub conv: usize,
    pub walksat_p: f64,
    pub iters_per_var: usize,
    pub node_budget: u64,
    pub tabu: TabuSchedule,
    /// Fit a sizing model per run before solving with the QUBO inner path.
    pub sizing: bool,
    pub calibration_probes: usize,
    pub subqubo_selectors: Vec<SubQuboSelector>,
    pub subqubo_q: Vec<usize>,
    pub baselines: Vec<Baseline>,
    pub baseline_flips: usize,
    pub exact_max_vars: usize,
    pub exact_node_budget: u64,
    pub runs_path: Option<PathBuf>,
    pub summary_path: Option<PathBuf>,
    pub threads: usize,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        ExperimentSpec {
            instances: Vec::new(),
            selectors: Vec::new(),
            inners: Vec::new(),
            m_values: Vec::new(),
            q_max_values: Vec::new(),
            seeds: vec![0],
            max_iters: crate::solve::DEFAULT_MAX_ITERS,
            conv: crate::solve::DEFAULT_CONV,
            walksat_p: 0.5,
            iters_per_var: 20,
            node_budget: 1_000_000,
            tabu: TabuSchedule::default(),
            sizing: false,
            calibration_probes: 30,
            subqubo_selectors: Vec::new(),
            subqubo_q: Vec::new(),
            baselines: Vec::new(),
            baseline_flips: 100_000,
            exact_max_vars: 30,
            exact_node_budget: 100_000_000,
            runs_path: None,
            summary_path: None,
            threads: 0,
        }
    }
}

#[derive(Clone, Copy, PartialEq)]
enum Section {
    None,
    Instances,
    Grid,
    Output,
}

fn list<T: FromStr>(value: &str, line: usize) -> Result<Vec<T>>
where
    T::Err: std::fmt::Display,
{
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<T>().map_err(|e| Error::Spec { line, message: format!("`{s}`: {e}") }))
        .collect()
}

fn one<T: FromStr>(value: &str, line: usize) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    value.trim().parse::<T>().map_err(|e| Error::Spec { line, message: format!("`{}`: {e}", value.trim()) })
}

fn seeds(value: &str, line: usize) -> Result<Vec<u64>> {
    let mut out = Vec::new();
    for item in value.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        match item.split_once('-') {
            Some((a, b)) => {
                let (a, b): (u64, u64) = (one(a, line)?, one(b, line)?);
                if a > b {
                    return Err(Error::Spec { line, message: format!("empty seed range `{item}`") });
                }
                out.extend(a..=b);
            }
            None => out.push(one(item, line)?),
        }
    }
    Ok(out)
}

fn switch(value: &str, line: usize) -> Result<bool> {
    match value.trim() {
        "on" | "true" | "yes" | "1" => Ok(true),
        "off" | "false" | "no" | "0" => Ok(false),
        v => Err(Error::Spec { line, message: format!("expected on/off, got `{v}`") }),
    }
}

/// Parses an experiment file. Relative paths are resolved against
/// `base_dir`.
pub fn parse_spec(text: &str, base_dir: &Path) -> Result<ExperimentSpec> {
    let mut spec = ExperimentSpec::default();
    let mut section = Section::None;
    let mut selector_names: Vec<(String, usize)> = Vec::new();
    let mut graph = GraphParams::default();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if let Some(name) = content.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
            section = match name.trim() {
                "instances" => Section::Instances,
                "grid" => Section::Grid,
                "output" => Section::Output,
                other => return Err(Error::Spec { line, message: format!("unknown section [{other}]") }),
            };
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            return Err(Error::Spec { line, message: "expected `key = value`".into() });
        };
        let (key, value) = (key.trim(), value.trim());
        let bad_key = || Error::Spec { line, message: format!("unknown key `{key}` in this section") };
        match section {
            Section::None => return Err(Error::Spec { line, message: "key outside of a section".into() }),
            Section::Instances => match key {
                "generate" => {
                    let nums: Vec<&str> = value.split_whitespace().collect();
                    if nums.len() != 5 {
                        return Err(Error::Spec { line, message: "generate = <n> <l> <k> <count> <seed>".into() });
                    }
                    spec.instances.push(InstanceSource::Generated {
                        n: one(nums[0], line)?,
                        l: one(nums[1], line)?,
                        k: one(nums[2], line)?,
                        count: one(nums[3], line)?,
                        seed: one(nums[4], line)?,
                    });
                }
                "dimacs" => spec.instances.push(InstanceSource::Dimacs(base_dir.join(value))),
                _ => return Err(bad_key()),
            },
            Section::Grid => match key {
                "selectors" => {
                    selector_names = value.split(',').map(|s| (s.trim().to_string(), line)).filter(|s| !s.0.is_empty()).collect()
                }
                "inners" => spec.inners = list(value, line)?,
                "m" => spec.m_values = list(value, line)?,
                "q_max" => spec.q_max_values = list(value, line)?,
                "seeds" => spec.seeds = seeds(value, line)?,
                "max_iters" => spec.max_iters = one(value, line)?,
                "conv" => spec.conv = one(value, line)?,
                "walksat_p" => spec.walksat_p = one(value, line)?,
                "iters_per_var" => spec.iters_per_var = one(value, line)?,
                "node_budget" => spec.node_budget = one(value, line)?,
                "graph_exponent" => graph.exponent = one(value, line)?,
                "graph_swap_budget" => graph.swap_budget = Some(one(value, line)?),
                "tabu_tenure" => spec.tabu.tenure = Some(one(value, line)?),
                "tabu_steps_per_var" => spec.tabu.steps_per_var = one(value, line)?,
                "tabu_restarts" => spec.tabu.restarts = one(value, line)?,
                "sizing" => spec.sizing = switch(value, line)?,
                "calibration_probes" => spec.calibration_probes = one(value, line)?,
                "subqubo_selectors" => {
                    spec.subqubo_selectors = value
                        .split(',')
                        .map(str::trim)
                        .filter(|s| !s.is_empty())
                        .map(|s| parse_subqubo_selector(s).map_err(|message| Error::Spec { line, message }))
                        .collect::<Result<_>>()?
                }
                "subqubo_q" => spec.subqubo_q = list(value, line)?,
                "baselines" => spec.baselines = list(value, line)?,
                "baseline_flips" => spec.baseline_flips = one(value, line)?,
                "exact_max_vars" => spec.exact_max_vars = one(value, line)?,
                "exact_node_budget" => spec.exact_node_budget = one(value, line)?,
                _ => return Err(bad_key()),
            },
            Section::Output => match key {
                "runs" => spec.runs_path = Some(base_dir.join(value)),
                "summary" => spec.summary_path = Some(base_dir.join(value)),
                "threads" => spec.threads = one(value, line)?,
                _ => return Err(bad_key()),
            },
        }
    }
    spec.selectors = selector_names
        .iter()
        .map(|(s, line)| parse_selector(s, graph).map_err(|message| Error::Spec { line: *line, message }))
        .collect::<Result<_>>()?;
    if spec.instances.is_empty() {
        return Err(Error::Spec { line: 0, message: "no instances".into() });
    }
    if spec.seeds.is_empty() {
        return Err(Error::Spec { line: 0, message: "no seeds".into() });
    }
    Ok(spec)
}
