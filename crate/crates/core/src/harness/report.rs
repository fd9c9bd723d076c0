use std::io::{Read, Write};
use std::path::Path;
use std::sync::Arc;
use std::time::Duration;

use crate::error::{Error, Result};

use super::config::{ExperimentConfig, Method};
use super::run::{MethodStatus, RunRecord};

pub const REPORT_COLUMNS: [&str; 10] = [
    "method",
    "case",
    "n",
    "M",
    "B",
    "alpha",
    "coverage",
    "mean_volume",
    "mean_mass",
    "failures",
];

#[derive(Debug, Clone, PartialEq)]
pub struct MethodSummary {
    pub method: Method,
    /// Fraction of completed runs whose region contained the target contour.
    pub coverage: f64,
    pub mean_volume: f64,
    pub mean_mass: f64,
    /// Runs with a nonzero failure diagnostic: flow traces that missed the level,
    /// skipped bootstrap replications, or an aborted method.
    pub failures: usize,
    pub completed: usize,
    pub skipped: usize,
    pub aborted: usize,
    /// Runs whose region reached the grid edge, so the volume is a lower bound.
    pub boundary_runs: usize,
    pub note: Option<String>,
}

#[derive(Debug, Clone)]
pub struct CoverageReport {
    pub case: String,
    pub n: usize,
    pub runs: usize,
    pub replications: usize,
    pub alpha: f64,
    pub methods: Vec<MethodSummary>,
    pub aborted_runs: usize,
    pub wall_time: Duration,
    /// Per-run details; `alpha_index` selects this report's entry in each outcome.
    pub records: Arc<Vec<RunRecord>>,
    pub alpha_index: usize,
}

pub(crate) fn summarize(
    config: &ExperimentConfig,
    alpha: f64,
    k: usize,
    records: Arc<Vec<RunRecord>>,
    wall_time: Duration,
) -> CoverageReport {
    let methods = config
        .methods
        .iter()
        .map(|&method| {
            let mut s = MethodSummary {
                method,
                coverage: 0.0,
                mean_volume: 0.0,
                mean_mass: 0.0,
                failures: 0,
                completed: 0,
                skipped: 0,
                aborted: 0,
                boundary_runs: 0,
                note: None,
            };
            let (mut hits, mut vol, mut mass) = (0usize, 0.0, 0.0);
            for r in records.iter() {
                match r.status(method) {
                    Some(MethodStatus::Done(o)) => {
                        s.completed += 1;
                        hits += o.covered[k] as usize;
                        vol += o.volume[k];
                        mass += o.mass[k];
                        s.boundary_runs += o.touches_boundary[k] as usize;
                        s.failures += (o.flow_failures > 0 || o.skipped_replications > 0) as usize;
                    }
                    Some(MethodStatus::Skipped(why)) => {
                        s.skipped += 1;
                        s.note.get_or_insert_with(|| why.clone());
                    }
                    Some(MethodStatus::Aborted(_)) | None => {
                        s.aborted += 1;
                        s.failures += 1;
                    }
                }
            }
            let done = s.completed as f64;
            (s.coverage, s.mean_volume, s.mean_mass) = if s.completed > 0 {
                (hits as f64 / done, vol / done, mass / done)
            } else {
                (f64::NAN, f64::NAN, f64::NAN)
            };
            s
        })
        .collect();
    CoverageReport {
        case: config.case.name().to_string(),
        n: config.n,
        runs: config.runs,
        replications: config.replications,
        alpha,
        methods,
        aborted_runs: records.iter().filter(|r| r.methods.is_err()).count(),
        wall_time,
        records,
        alpha_index: k,
    }
}

impl CoverageReport {
    pub fn method(&self, m: Method) -> Option<&MethodSummary> {
        self.methods.iter().find(|s| s.method == m)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(out);
        w.write_record(REPORT_COLUMNS)?;
        for s in &self.methods {
            w.write_record([
                s.method.name().to_string(),
                self.case.clone(),
                self.n.to_string(),
                self.runs.to_string(),
                self.replications.to_string(),
                fmt17(self.alpha),
                fmt17(s.coverage),
                fmt17(s.mean_volume),
                fmt17(s.mean_mass),
                s.failures.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn emit(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path)?;
        self.write_csv(std::io::BufWriter::new(file))
    }
}

/// Seventeen significant digits.
pub fn fmt17(v: f64) -> String {
    format!("{v:.16e}")
}

/// One parsed report row.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub method: Method,
    pub case: String,
    pub n: usize,
    pub runs: usize,
    pub replications: usize,
    pub alpha: f64,
    pub coverage: f64,
    pub mean_volume: f64,
    pub mean_mass: f64,
    pub failures: usize,
}

pub fn read_report_csv<R: Read>(input: R) -> Result<Vec<ReportRow>> {
    let mut rd = csv::Reader::from_reader(input);
    let header: Vec<String> = rd.headers()?.iter().map(str::to_string).collect();
    if header != REPORT_COLUMNS {
        return Err(Error::Malformed(format!("unexpected report header {header:?}")));
    }
    let num = |s: &str| {
        s.parse::<f64>()
            .map_err(|e| Error::Malformed(format!("bad number '{s}': {e}")))
    };
    let int = |s: &str| {
        s.parse::<usize>()
            .map_err(|e| Error::Malformed(format!("bad count '{s}': {e}")))
    };
    rd.records()
        .map(|rec| {
            let r = rec?;
            Ok(ReportRow {
                method: Method::parse(&r[0])?,
                case: r[1].to_string(),
                n: int(&r[2])?,
                runs: int(&r[3])?,
                replications: int(&r[4])?,
                alpha: num(&r[5])?,
                coverage: num(&r[6])?,
                mean_volume: num(&r[7])?,
                mean_mass: num(&r[8])?,
                failures: int(&r[9])?,
            })
        })
        .collect()
}
