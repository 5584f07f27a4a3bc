//! CSV schemas: per-iteration traces, per-run rows, and summary rows.
//!
//! Floats are written with Rust's shortest round-trip formatting, so reading a
//! file back yields bit-identical values.

use std::collections::HashMap;
use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::solve::RunTrace;

pub const TRACE_HEADER: [&str; 13] = [
    "iteration",
    "m_used",
    "q_used",
    "probes",
    "sub_energy_before",
    "sub_energy_after",
    "accepted",
    "energy",
    "best_energy",
    "qubo_objective",
    "select_seconds",
    "inner_seconds",
    "compose_seconds",
];

pub const RUN_HEADER: [&str; 13] = [
    "dataset",
    "instance",
    "method",
    "selector",
    "inner",
    "size",
    "seed",
    "initial_energy",
    "final_energy",
    "iterations",
    "stop_reason",
    "best_iteration",
    "wall_seconds",
];

pub const SUMMARY_HEADER: [&str; 11] = [
    "dataset",
    "method",
    "selector",
    "inner",
    "size",
    "runs",
    "mean_energy",
    "std_energy",
    "mean_iterations",
    "max_iterations",
    "mean_seconds",
];

/// Columns holding wall-clock measurements; every other column is a pure
/// function of the inputs and seeds.
pub const WALL_CLOCK_COLUMNS: [&str; 5] =
    ["select_seconds", "inner_seconds", "compose_seconds", "wall_seconds", "mean_seconds"];

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn write_trace<W: Write>(out: W, trace: &RunTrace) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(TRACE_HEADER)?;
    for r in &trace.records {
        w.write_record([
            r.iteration.to_string(),
            r.m_used.to_string(),
            opt(r.q_used),
            opt(r.probes),
            r.sub_energy_before.to_string(),
            r.sub_energy_after.to_string(),
            r.accepted.to_string(),
            r.energy.to_string(),
            r.best_energy.to_string(),
            opt(r.qubo_objective),
            r.times.select.to_string(),
            r.times.inner.to_string(),
            r.times.compose.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunRow {
    pub dataset: String,
    pub instance: String,
    pub method: String,
    pub selector: String,
    pub inner: String,
    pub size: usize,
    pub seed: u64,
    pub initial_energy: usize,
    pub final_energy: usize,
    pub iterations: usize,
    pub stop_reason: String,
    pub best_iteration: usize,
    pub wall_seconds: f64,
}

impl RunRow {
    fn group_key(&self) -> (String, String, String, String, usize) {
        (self.dataset.clone(), self.method.clone(), self.selector.clone(), self.inner.clone(), self.size)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SummaryRow {
    pub dataset: String,
    pub method: String,
    pub selector: String,
    pub inner: String,
    pub size: usize,
    pub runs: usize,
    pub mean_energy: f64,
    /// Sample standard deviation (0 for a single run).
    pub std_energy: f64,
    pub mean_iterations: f64,
    pub max_iterations: usize,
    pub mean_seconds: f64,
}

pub fn write_runs<W: Write>(out: W, rows: &[RunRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(RUN_HEADER)?;
    for r in rows {
        w.write_record([
            r.dataset.clone(),
            r.instance.clone(),
            r.method.clone(),
            r.selector.clone(),
            r.inner.clone(),
            r.size.to_string(),
            r.seed.to_string(),
            r.initial_energy.to_string(),
            r.final_energy.to_string(),
            r.iterations.to_string(),
            r.stop_reason.clone(),
            r.best_iteration.to_string(),
            r.wall_seconds.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_summary<W: Write>(out: W, rows: &[SummaryRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SUMMARY_HEADER)?;
    for r in rows {
        w.write_record([
            r.dataset.clone(),
            r.method.clone(),
            r.selector.clone(),
            r.inner.clone(),
            r.size.to_string(),
            r.runs.to_string(),
            r.mean_energy.to_string(),
            r.std_energy.to_string(),
            r.mean_iterations.to_string(),
            r.max_iterations.to_string(),
            r.mean_seconds.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn records<R: Read>(input: R, header: &[&str]) -> Result<Vec<csv::StringRecord>> {
    let mut r = csv::Reader::from_reader(input);
    let found: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    if found != header {
        return Err(Error::CsvFormat(format!("header {found:?} does not match {header:?}")));
    }
    r.records().map(|rec| rec.map_err(Error::from)).collect()
}

fn field<T: std::str::FromStr>(rec: &csv::StringRecord, i: usize, header: &[&str]) -> Result<T> {
    let raw = rec.get(i).unwrap_or("");
    raw.parse().map_err(|_| {
        let line = rec.position().map_or(0, |p| p.line());
        Error::CsvFormat(format!("line {line}: bad value `{raw}` in column {}", header[i]))
    })
}

pub fn read_runs<R: Read>(input: R) -> Result<Vec<RunRow>> {
    let h = &RUN_HEADER;
    records(input, h)?
        .iter()
        .map(|r| {
            Ok(RunRow {
                dataset: field(r, 0, h)?,
                instance: field(r, 1, h)?,
                method: field(r, 2, h)?,
                selector: field(r, 3, h)?,
                inner: field(r, 4, h)?,
                size: field(r, 5, h)?,
                seed: field(r, 6, h)?,
                initial_energy: field(r, 7, h)?,
                final_energy: field(r, 8, h)?,
                iterations: field(r, 9, h)?,
                stop_reason: field(r, 10, h)?,
                best_iteration: field(r, 11, h)?,
                wall_seconds: field(r, 12, h)?,
            })
        })
        .collect()
}

pub fn read_summary<R: Read>(input: R) -> Result<Vec<SummaryRow>> {
    let h = &SUMMARY_HEADER;
    records(input, h)?
        .iter()
        .map(|r| {
            Ok(SummaryRow {
                dataset: field(r, 0, h)?,
                method: field(r, 1, h)?,
                selector: field(r, 2, h)?,
                inner: field(r, 3, h)?,
                size: field(r, 4, h)?,
                runs: field(r, 5, h)?,
                mean_energy: field(r, 6, h)?,
                std_energy: field(r, 7, h)?,
                mean_iterations: field(r, 8, h)?,
                max_iterations: field(r, 9, h)?,
                mean_seconds: field(r, 10, h)?,
            })
        })
        .collect()
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Groups runs by (dataset, method, selector, inner, size) in order of first
/// appearance.
pub fn summarize(rows: &[RunRow]) -> Vec<SummaryRow> {
    let mut order = Vec::new();
    let mut groups: HashMap<_, Vec<&RunRow>> = HashMap::new();
    for r in rows {
        let key = r.group_key();
        if !groups.contains_key(&key) {
            order.push(key.clone());
        }
        groups.entry(key).or_default().push(r);
    }
    order
        .into_iter()
        .map(|key| {
            let g = &groups[&key];
            let energies: Vec<f64> = g.iter().map(|r| r.final_energy as f64).collect();
            let m = mean(&energies);
            let std = if g.len() > 1 {
                (energies.iter().map(|e| (e - m).powi(2)).sum::<f64>() / (g.len() - 1) as f64).sqrt()
            } else {
                0.0
            };
            let (dataset, method, selector, inner, size) = key;
            SummaryRow {
                dataset,
                method,
                selector,
                inner,
                size,
                runs: g.len(),
                mean_energy: m,
                std_energy: std,
                mean_iterations: mean(&g.iter().map(|r| r.iterations as f64).collect::<Vec<_>>()),
                max_iterations: g.iter().map(|r| r.iterations).max().unwrap_or(0),
                mean_seconds: mean(&g.iter().map(|r| r.wall_seconds).collect::<Vec<_>>()),
            }
        })
        .collect()
}

/// Recomputes the summary from `runs` and lists every difference from
/// `summary`; an empty list means they agree exactly.
pub fn verify_summary(runs: &[RunRow], summary: &[SummaryRow]) -> Vec<String> {
    let want = summarize(runs);
    let mut problems = Vec::new();
    if want.len() != summary.len() {
        problems.push(format!("expected {} summary rows, found {}", want.len(), summary.len()));
    }
    for (i, (w, s)) in want.iter().zip(summary).enumerate() {
        if w != s {
            problems.push(format!("row {}: expected {w:?}, found {s:?}", i + 1));
        }
    }
    problems
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(dataset: &str, method: &str, seed: u64, energy: usize, iterations: usize) -> RunRow {
        RunRow {
            dataset: dataset.into(),
            instance: format!("{dataset}-{seed}"),
            method: method.into(),
            selector: "energy".into(),
            inner: "walksat".into(),
            size: 75,
            seed,
            initial_energy: 50,
            final_energy: energy,
            iterations,
            stop_reason: "converged".into(),
            best_iteration: 3,
            wall_seconds: 0.1 * seed as f64 + 1e-9,
        }
    }

    #[test]
    fn headers_are_frozen() {
        let mut buf = Vec::new();
        write_runs(&mut buf, &[]).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "dataset,instance,method,selector,inner,size,seed,initial_energy,final_energy,iterations,\
             stop_reason,best_iteration,wall_seconds\n"
        );
        let mut buf = Vec::new();
        write_summary(&mut buf, &[]).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "dataset,method,selector,inner,size,runs,mean_energy,std_energy,mean_iterations,max_iterations,\
             mean_seconds\n"
        );
    }

    #[test]
    fn summary_statistics() {
        let rows = vec![row("a", "subsat", 1, 1, 10), row("b", "subsat", 1, 5, 4), row("a", "subsat", 2, 3, 30)];
        let s = summarize(&rows);
        assert_eq!(s.len(), 2);
        assert_eq!(s[0].dataset, "a");
        assert_eq!(s[0].runs, 2);
        assert_eq!(s[0].mean_energy, 2.0);
        assert_eq!(s[0].std_energy, 2f64.sqrt());
        assert_eq!(s[0].mean_iterations, 20.0);
        assert_eq!(s[0].max_iterations, 30);
        assert_eq!(s[1].std_energy, 0.0);
    }

    #[test]
    fn round_trip_and_verify() {
        let rows: Vec<RunRow> = (0..7).map(|s| row("x,y", "subsat", s, (s * 7 % 5) as usize, 3 + s as usize)).collect();
        let mut runs_csv = Vec::new();
        write_runs(&mut runs_csv, &rows).unwrap();
        let back = read_runs(runs_csv.as_slice()).unwrap();
        assert_eq!(back, rows);
        let summary = summarize(&rows);
        let mut sum_csv = Vec::new();
        write_summary(&mut sum_csv, &summary).unwrap();
        let sum_back = read_summary(sum_csv.as_slice()).unwrap();
        assert!(verify_summary(&back, &sum_back).is_empty());

        let mut tampered = sum_back.clone();
        tampered[0].mean_energy += 1e-12;
        assert_eq!(verify_summary(&back, &tampered).len(), 1);
        assert!(!verify_summary(&back[1..], &sum_back).is_empty());
    }

    #[test]
    fn rejects_wrong_header_and_values() {
        assert!(matches!(read_runs("a,b\n1,2\n".as_bytes()), Err(Error::CsvFormat(_))));
        let mut buf = Vec::new();
        write_runs(&mut buf, &[row("d", "m", 1, 1, 1)]).unwrap();
        let text = String::from_utf8(buf).unwrap().replace(",75,", ",seventy,");
        assert!(matches!(read_runs(text.as_bytes()), Err(Error::CsvFormat(_))));
    }
}
