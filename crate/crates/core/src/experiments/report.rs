//! Experiment reports and their CSV/JSON forms.
//!
//! CSV files carry one row per measurement with a fixed header per
//! experiment:
//!
//! ```text
//! timing.csv:   experiment,K,N,rep,method,seconds,index_agreement
//! capacity.csv: experiment,family,K,N,J,M,trial,retrieval_rate,success
//! mutable.csv:  experiment,strategy,M,N,trial,step,retrieval_rate
//! ```
//!
//! Floats are written in shortest round-trip form, so everything except the
//! `seconds` column is a pure function of the config.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, ExperimentKind, Family};
use crate::error::{Error, Result};
use crate::memory::CleanupStrategy;

pub const TIMING_HEADER: &str = "experiment,K,N,rep,method,seconds,index_agreement";
pub const CAPACITY_HEADER: &str = "experiment,family,K,N,J,M,trial,retrieval_rate,success";
pub const MUTABLE_HEADER: &str = "experiment,strategy,M,N,trial,step,retrieval_rate";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Direct,
    Krop,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Direct => "direct",
            Method::Krop => "krop",
        }
    }
}

/// Whether both clean-up methods picked the same row in one repetition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Agreement {
    True,
    False,
    /// Indices differ but the top two dense scores are within the near-tie
    /// margin, so either answer is acceptable.
    NearTie,
    /// The dense method did not run at this size.
    Skipped,
}

impl Agreement {
    pub fn as_str(self) -> &'static str {
        match self {
            Agreement::True => "true",
            Agreement::False => "false",
            Agreement::NearTie => "near-tie",
            Agreement::Skipped => "skipped",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimingRecord {
    #[serde(rename = "K")]
    pub k: usize,
    #[serde(rename = "N")]
    pub n: usize,
    pub rep: usize,
    pub method: Method,
    /// Wall-clock seconds of the clean-up call; `None` when skipped.
    pub seconds: Option<f64>,
    pub index_agreement: Agreement,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CapacityRecord {
    pub family: Family,
    #[serde(rename = "K")]
    pub k: usize,
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "J")]
    pub j: usize,
    #[serde(rename = "M")]
    pub m: usize,
    pub trial: usize,
    pub retrieval_rate: f64,
    pub success: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MutableRecord {
    pub strategy: CleanupStrategy,
    #[serde(rename = "M")]
    pub m: usize,
    #[serde(rename = "N")]
    pub n: usize,
    pub trial: usize,
    pub step: usize,
    pub retrieval_rate: f64,
}

/// One measurement; the `experiment` tag doubles as the CSV's first column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "experiment", rename_all = "lowercase")]
pub enum Record {
    Timing(TimingRecord),
    Capacity(CapacityRecord),
    Mutable(MutableRecord),
}

impl Record {
    fn kind(&self) -> ExperimentKind {
        match self {
            Record::Timing(_) => ExperimentKind::Timing,
            Record::Capacity(_) => ExperimentKind::Capacity,
            Record::Mutable(_) => ExperimentKind::Mutable,
        }
    }

    fn csv_line(&self, out: &mut String) {
        match self {
            Record::Timing(r) => {
                let seconds = r.seconds.map(|s| s.to_string()).unwrap_or_default();
                writeln!(
                    out,
                    "timing,{},{},{},{},{},{}",
                    r.k,
                    r.n,
                    r.rep,
                    r.method.as_str(),
                    seconds,
                    r.index_agreement.as_str()
                )
            }
            Record::Capacity(r) => writeln!(
                out,
                "capacity,{},{},{},{},{},{},{},{}",
                r.family, r.k, r.n, r.j, r.m, r.trial, r.retrieval_rate, r.success
            ),
            Record::Mutable(r) => writeln!(
                out,
                "mutable,{},{},{},{},{},{}",
                r.strategy, r.m, r.n, r.trial, r.step, r.retrieval_rate
            ),
        }
        .expect("writing to a String cannot fail");
    }
}

/// Where and when a report was produced. Not part of the reproducible
/// content.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Environment {
    pub host: String,
    /// Seconds since the Unix epoch.
    pub unix_time: u64,
    pub build: String,
    pub threads: usize,
}

impl Environment {
    pub fn capture(threads: usize) -> Self {
        let host = std::env::var("HOSTNAME")
            .ok()
            .or_else(|| std::fs::read_to_string("/etc/hostname").ok())
            .map(|h| h.trim().to_string())
            .filter(|h| !h.is_empty())
            .unwrap_or_else(|| "unknown".into());
        let unix_time = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map_or(0, |d| d.as_secs());
        let build = format!(
            "krop {}{}",
            env!("CARGO_PKG_VERSION"),
            if cfg!(debug_assertions) {
                " (debug)"
            } else {
                ""
            }
        );
        Environment {
            host,
            unix_time,
            build,
            threads,
        }
    }
}

/// Success rate of one capacity cell over its trials.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuccessCell {
    pub family: Family,
    #[serde(rename = "K")]
    pub k: usize,
    #[serde(rename = "J")]
    pub j: usize,
    #[serde(rename = "M")]
    pub m: usize,
    pub trials: usize,
    pub success_rate: f64,
    pub mean_retrieval_rate: f64,
}

/// Largest `M` with success rate 1 for one family and size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CapacityCell {
    pub family: Family,
    #[serde(rename = "K")]
    pub k: usize,
    #[serde(rename = "N")]
    pub n: usize,
    /// `None` when no tested `M` reached success rate 1.
    pub capacity: Option<usize>,
}

/// Mean retrieval rate of one mutable cell at one step, over trials.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepMean {
    pub strategy: CleanupStrategy,
    #[serde(rename = "M")]
    pub m: usize,
    #[serde(rename = "N")]
    pub n: usize,
    pub step: usize,
    pub mean_retrieval_rate: f64,
}

/// Mean retrieval rate of one mutable cell over all steps and trials.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellMean {
    pub strategy: CleanupStrategy,
    #[serde(rename = "M")]
    pub m: usize,
    #[serde(rename = "N")]
    pub n: usize,
    pub mean_retrieval_rate: f64,
}

/// Per-K cost of building the dense matrix for the timing baseline, kept
/// out of the timed clean-up region.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaterializeTime {
    #[serde(rename = "K")]
    pub k: usize,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Summary {
    Timing {
        materialize: Vec<MaterializeTime>,
    },
    Capacity {
        success: Vec<SuccessCell>,
        capacity: Vec<CapacityCell>,
    },
    Mutable {
        per_step: Vec<StepMean>,
        averaged: Vec<CellMean>,
    },
}

/// Complete, replayable record of one experiment run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub environment: Environment,
    /// Free-form notes: grading rules, skipped cells, near-ties.
    pub notes: Vec<String>,
    pub records: Vec<Record>,
    pub summary: Summary,
}

impl ExperimentReport {
    pub fn timing_records(&self) -> impl Iterator<Item = &TimingRecord> {
        self.records.iter().filter_map(|r| match r {
            Record::Timing(t) => Some(t),
            _ => None,
        })
    }

    pub fn capacity_records(&self) -> impl Iterator<Item = &CapacityRecord> {
        self.records.iter().filter_map(|r| match r {
            Record::Capacity(c) => Some(c),
            _ => None,
        })
    }

    pub fn mutable_records(&self) -> impl Iterator<Item = &MutableRecord> {
        self.records.iter().filter_map(|r| match r {
            Record::Mutable(m) => Some(m),
            _ => None,
        })
    }

    /// Capacity for `(family, k)`, if that cell was run.
    pub fn capacity(&self, family: Family, k: usize) -> Option<Option<usize>> {
        match &self.summary {
            Summary::Capacity { capacity, .. } => capacity
                .iter()
                .find(|c| c.family == family && c.k == k)
                .map(|c| c.capacity),
            _ => None,
        }
    }

    /// The whole report as CSV text: header plus one line per record.
    pub fn to_csv(&self) -> String {
        let header = match self.config.experiment {
            ExperimentKind::Timing => TIMING_HEADER,
            ExperimentKind::Capacity => CAPACITY_HEADER,
            ExperimentKind::Mutable => MUTABLE_HEADER,
        };
        let mut out = String::with_capacity(64 * (self.records.len() + 1));
        out.push_str(header);
        out.push('\n');
        for r in &self.records {
            debug_assert_eq!(r.kind(), self.config.experiment);
            r.csv_line(&mut out);
        }
        out
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    /// Writes `<dir>/<experiment>.csv` and/or `<dir>/<experiment>.json`,
    /// creating `dir` if needed. Returns the paths written.
    pub fn write(
        &self,
        dir: impl AsRef<Path>,
        format: super::OutputFormat,
    ) -> Result<Vec<PathBuf>> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let stem = self.config.experiment.as_str();
        let mut written = Vec::new();
        if format.csv() {
            let path = dir.join(format!("{stem}.csv"));
            std::fs::write(&path, self.to_csv()).map_err(|e| Error::io(&path, e))?;
            written.push(path);
        }
        if format.json() {
            let path = dir.join(format!("{stem}.json"));
            std::fs::write(&path, self.to_json()).map_err(|e| Error::io(&path, e))?;
            written.push(path);
        }
        Ok(written)
    }
}

/// Aggregates capacity records into per-cell success rates and per-size
/// capacities.
pub fn summarize_capacity(records: &[CapacityRecord]) -> (Vec<SuccessCell>, Vec<CapacityCell>) {
    let mut cells: BTreeMap<(Family, usize, usize), (usize, usize, f64)> = BTreeMap::new();
    for r in records {
        let e = cells.entry((r.family, r.k, r.j)).or_default();
        e.0 += 1;
        e.1 += usize::from(r.success);
        e.2 += r.retrieval_rate;
    }
    let success: Vec<SuccessCell> = cells
        .iter()
        .map(|(&(family, k, j), &(trials, hits, total))| SuccessCell {
            family,
            k,
            j,
            m: 1 << j,
            trials,
            success_rate: hits as f64 / trials as f64,
            mean_retrieval_rate: total / trials as f64,
        })
        .collect();

    let mut sizes: BTreeMap<(Family, usize), Option<usize>> = BTreeMap::new();
    for cell in &success {
        let best = sizes.entry((cell.family, cell.k)).or_default();
        if cell.success_rate == 1.0 {
            *best = Some(best.map_or(cell.m, |b: usize| b.max(cell.m)));
        }
    }
    let capacity = sizes
        .into_iter()
        .map(|((family, k), capacity)| CapacityCell {
            family,
            k,
            n: 1 << k,
            capacity,
        })
        .collect();
    (success, capacity)
}

/// Per-step and step-averaged means of mutable records, in run order of
/// first appearance.
pub fn summarize_mutable(records: &[MutableRecord]) -> (Vec<StepMean>, Vec<CellMean>) {
    type CellKey = (CleanupStrategy, usize, usize);
    let mut order: Vec<CellKey> = Vec::new();
    let mut steps: BTreeMap<(usize, usize), (f64, usize)> = BTreeMap::new();
    let mut cells: Vec<(f64, usize)> = Vec::new();
    for r in records {
        let key = (r.strategy, r.m, r.n);
        let idx = match order.iter().position(|k| *k == key) {
            Some(i) => i,
            None => {
                order.push(key);
                cells.push((0.0, 0));
                order.len() - 1
            }
        };
        let s = steps.entry((idx, r.step)).or_default();
        s.0 += r.retrieval_rate;
        s.1 += 1;
        cells[idx].0 += r.retrieval_rate;
        cells[idx].1 += 1;
    }
    let per_step = steps
        .into_iter()
        .map(|((idx, step), (total, count))| {
            let (strategy, m, n) = order[idx];
            StepMean {
                strategy,
                m,
                n,
                step,
                mean_retrieval_rate: total / count as f64,
            }
        })
        .collect();
    let averaged = order
        .iter()
        .zip(&cells)
        .map(|(&(strategy, m, n), &(total, count))| CellMean {
            strategy,
            m,
            n,
            mean_retrieval_rate: total / count as f64,
        })
        .collect();
    (per_step, averaged)
}

/// Median of a nonempty sample.
pub fn median(values: &mut [f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    values.sort_by(f64::total_cmp);
    let mid = values.len() / 2;
    Some(if values.len() % 2 == 1 {
        values[mid]
    } else {
        0.5 * (values[mid - 1] + values[mid])
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cap(family: Family, k: usize, j: usize, trial: usize, rate: f64) -> CapacityRecord {
        CapacityRecord {
            family,
            k,
            n: 1 << k,
            j,
            m: 1 << j,
            trial,
            retrieval_rate: rate,
            success: rate == 1.0,
        }
    }

    #[test]
    fn capacity_is_largest_perfect_cell() {
        let records = vec![
            cap(Family::Krop, 8, 2, 0, 1.0),
            cap(Family::Krop, 8, 2, 1, 1.0),
            cap(Family::Krop, 8, 3, 0, 1.0),
            cap(Family::Krop, 8, 3, 1, 0.875),
            cap(Family::Krop, 8, 4, 0, 1.0),
            cap(Family::Krop, 8, 4, 1, 1.0),
            cap(Family::Krop, 8, 5, 0, 0.5),
            cap(Family::Normal, 8, 2, 0, 0.75),
        ];
        let (success, capacity) = summarize_capacity(&records);
        let krop3 = success
            .iter()
            .find(|c| c.family == Family::Krop && c.j == 3)
            .unwrap();
        assert_eq!(krop3.success_rate, 0.5);
        assert_eq!(krop3.mean_retrieval_rate, 0.9375);
        let krop = capacity.iter().find(|c| c.family == Family::Krop).unwrap();
        assert_eq!(krop.capacity, Some(16));
        let normal = capacity
            .iter()
            .find(|c| c.family == Family::Normal)
            .unwrap();
        assert_eq!(normal.capacity, None);
    }

    #[test]
    fn mutable_means() {
        let r = |strategy, trial, step, rate| MutableRecord {
            strategy,
            m: 4,
            n: 64,
            trial,
            step,
            retrieval_rate: rate,
        };
        let records = vec![
            r(CleanupStrategy::Krop, 0, 1, 1.0),
            r(CleanupStrategy::Krop, 0, 2, 0.5),
            r(CleanupStrategy::Krop, 1, 1, 0.5),
            r(CleanupStrategy::Krop, 1, 2, 0.5),
            r(CleanupStrategy::None, 0, 1, 0.0),
        ];
        let (per_step, averaged) = summarize_mutable(&records);
        assert_eq!(per_step.len(), 3);
        assert_eq!(per_step[0].mean_retrieval_rate, 0.75);
        assert_eq!(per_step[1].mean_retrieval_rate, 0.5);
        assert_eq!(averaged[0].mean_retrieval_rate, 0.625);
        assert_eq!(averaged[1].strategy, CleanupStrategy::None);
    }

    #[test]
    fn csv_lines() {
        let mut out = String::new();
        Record::Timing(TimingRecord {
            k: 3,
            n: 8,
            rep: 0,
            method: Method::Direct,
            seconds: None,
            index_agreement: Agreement::Skipped,
        })
        .csv_line(&mut out);
        Record::Capacity(cap(Family::Sylvester, 6, 2, 4, 0.75)).csv_line(&mut out);
        assert_eq!(
            out,
            "timing,3,8,0,direct,,skipped\ncapacity,sylvester,6,64,2,4,4,0.75,false\n"
        );
    }

    #[test]
    fn median_cases() {
        assert_eq!(median(&mut []), None);
        assert_eq!(median(&mut [3.0, 1.0, 2.0]), Some(2.0));
        assert_eq!(median(&mut [4.0, 1.0, 2.0, 3.0]), Some(2.5));
    }
}
