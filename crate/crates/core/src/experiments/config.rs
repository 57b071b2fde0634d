use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::codebook::ThetaScheme;
use crate::error::{Error, Result};
use crate::memory::CleanupStrategy;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExperimentKind {
    Timing,
    Capacity,
    Mutable,
}

impl ExperimentKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ExperimentKind::Timing => "timing",
            ExperimentKind::Capacity => "capacity",
            ExperimentKind::Mutable => "mutable",
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Value codebooks compared in the capacity experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Normal,
    Binary,
    Sylvester,
    Krop,
}

impl Family {
    pub const ALL: [Family; 4] = [
        Family::Normal,
        Family::Binary,
        Family::Sylvester,
        Family::Krop,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Family::Normal => "normal",
            Family::Binary => "binary",
            Family::Sylvester => "sylvester",
            Family::Krop => "krop",
        }
    }

    /// Whether clean-up for this family is a dense scan over explicit rows.
    pub fn is_dense(self) -> bool {
        matches!(self, Family::Normal | Family::Binary)
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Family::ALL
            .into_iter()
            .find(|f| f.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown codebook family {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
    Both,
}

impl OutputFormat {
    pub fn csv(self) -> bool {
        matches!(self, OutputFormat::Csv | OutputFormat::Both)
    }

    pub fn json(self) -> bool {
        matches!(self, OutputFormat::Json | OutputFormat::Both)
    }
}

impl std::str::FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            "both" => Ok(OutputFormat::Both),
            other => Err(Error::Config(format!("unknown output format {other:?}"))),
        }
    }
}

/// One `(M, N = 2^K)` memory size for the mutable experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MemoryShape {
    #[serde(rename = "M")]
    pub m: usize,
    #[serde(rename = "K")]
    pub k: usize,
}

/// Parameters of one experiment run. Every field has a default matching
/// the full-scale experiment for its kind, so a config file may list only
/// what it changes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub seed: u64,
    /// Inclusive range of `K = log2 N`.
    pub k_min: usize,
    pub k_max: usize,
    /// Largest `K` accepted at all.
    pub k_ceiling: usize,
    /// Inclusive range of `J = log2 M`; the upper end is further capped at
    /// `K - 2` per cell. `None` means `K - 2`.
    pub j_min: usize,
    pub j_max: Option<usize>,
    /// Timed repetitions per `K` (timing).
    pub reps: usize,
    /// Untimed warm-up repetitions per `K` (timing).
    pub warmup: usize,
    /// Largest `K` at which the dense baseline runs (timing); larger cells
    /// are recorded as skipped.
    pub direct_k_max: usize,
    /// Random trials per cell (capacity, mutable).
    pub trials: usize,
    /// Overwrites per trial (mutable).
    pub steps: usize,
    pub theta_scheme: ThetaScheme,
    pub families: Vec<Family>,
    /// Largest `K` for the dense families (normal, binary).
    pub dense_k_max: usize,
    pub strategies: Vec<CleanupStrategy>,
    /// Explicit `(M, K)` cells for the mutable experiment. When empty, the
    /// grid `k_min..=k_max` x `j_min..=j_max` is used.
    pub shapes: Vec<MemoryShape>,
    /// Worker threads; `None` uses one for timing and all cores otherwise.
    pub threads: Option<usize>,
    pub out_dir: Option<PathBuf>,
    pub format: OutputFormat,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig::timing()
    }
}

impl ExperimentConfig {
    fn base(experiment: ExperimentKind) -> Self {
        ExperimentConfig {
            experiment,
            seed: 0,
            k_min: 1,
            k_max: 15,
            k_ceiling: 15,
            j_min: 2,
            j_max: None,
            reps: 30,
            warmup: 3,
            direct_k_max: 14,
            trials: 30,
            steps: 30,
            theta_scheme: ThetaScheme::EvenlySpaced,
            families: Family::ALL.to_vec(),
            dense_k_max: 12,
            strategies: vec![
                CleanupStrategy::Krop,
                CleanupStrategy::Sign,
                CleanupStrategy::None,
            ],
            shapes: Vec::new(),
            threads: None,
            out_dir: None,
            format: OutputFormat::Csv,
        }
    }

    /// `K` in 1..=15, 30 repetitions, dense baseline up to `K = 14`.
    pub fn timing() -> Self {
        Self::base(ExperimentKind::Timing)
    }

    /// `K` in 2..=15, `J` in 2..=K-2, 30 trials, dense families up to
    /// `K = 12`.
    pub fn capacity() -> Self {
        ExperimentConfig {
            k_min: 2,
            ..Self::base(ExperimentKind::Capacity)
        }
    }

    /// 30 overwrites, 10 trials. Two sizes one octave inside the measured
    /// krop capacity (8 at `K = 10`, 32 at `K = 12`) and one an octave
    /// beyond it.
    pub fn mutable() -> Self {
        ExperimentConfig {
            k_min: 10,
            k_max: 12,
            trials: 10,
            shapes: vec![
                MemoryShape { m: 4, k: 10 },
                MemoryShape { m: 16, k: 12 },
                MemoryShape { m: 64, k: 12 },
            ],
            ..Self::base(ExperimentKind::Mutable)
        }
    }

    pub fn for_kind(kind: ExperimentKind) -> Self {
        match kind {
            ExperimentKind::Timing => Self::timing(),
            ExperimentKind::Capacity => Self::capacity(),
            ExperimentKind::Mutable => Self::mutable(),
        }
    }

    /// Parses a possibly partial JSON config. Missing fields take the
    /// defaults of the named experiment (timing when unnamed).
    pub fn from_json_str(text: &str) -> Result<Self> {
        let bad = |e: serde_json::Error| Error::Config(e.to_string());
        let given: serde_json::Value = serde_json::from_str(text).map_err(bad)?;
        let serde_json::Value::Object(fields) = given else {
            return Err(Error::Config("config must be a JSON object".into()));
        };
        let kind = match fields.get("experiment") {
            Some(v) => serde_json::from_value(v.clone()).map_err(bad)?,
            None => ExperimentKind::Timing,
        };
        let mut merged = serde_json::to_value(Self::for_kind(kind)).map_err(bad)?;
        let target = merged.as_object_mut().expect("config is an object");
        for (key, value) in fields {
            target.insert(key, value);
        }
        serde_json::from_value(merged).map_err(bad)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json_str(&text).map_err(|e| Error::Malformed {
            path: path.to_path_buf(),
            message: e.to_string(),
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn k_values(&self) -> std::ops::RangeInclusive<usize> {
        self.k_min..=self.k_max
    }

    /// `J` values tested at dimension `2^k`.
    pub fn j_values(&self, k: usize) -> std::ops::RangeInclusive<usize> {
        let cap = k.saturating_sub(2);
        let hi = self.j_max.map_or(cap, |j| j.min(cap));
        self.j_min..=hi
    }

    /// Mutable-experiment cells in run order.
    pub fn memory_shapes(&self) -> Vec<MemoryShape> {
        if !self.shapes.is_empty() {
            return self.shapes.clone();
        }
        self.k_values()
            .flat_map(|k| self.j_values(k).map(move |j| MemoryShape { m: 1 << j, k }))
            .collect()
    }

    pub fn effective_threads(&self) -> usize {
        self.threads.unwrap_or(match self.experiment {
            ExperimentKind::Timing => 1,
            _ => std::thread::available_parallelism().map_or(1, |n| n.get()),
        })
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(msg));
        if self.k_min < 1 || self.k_min > self.k_max {
            return fail(format!("empty K range {}..{}", self.k_min, self.k_max));
        }
        if self.k_max > self.k_ceiling {
            return fail(format!(
                "K = {} exceeds the ceiling {}",
                self.k_max, self.k_ceiling
            ));
        }
        if self.k_ceiling >= usize::BITS as usize / 2 {
            return fail(format!("K ceiling {} is too large", self.k_ceiling));
        }
        if self.threads == Some(0) {
            return fail("threads must be at least 1".into());
        }
        match self.experiment {
            ExperimentKind::Timing => {
                if self.reps == 0 {
                    return fail("reps must be at least 1".into());
                }
            }
            ExperimentKind::Capacity => {
                if self.trials == 0 {
                    return fail("trials must be at least 1".into());
                }
                if self.families.is_empty() {
                    return fail("no codebook families selected".into());
                }
                if self.j_min < 1 {
                    return fail("J must be at least 1".into());
                }
                if self.k_values().all(|k| self.j_values(k).is_empty()) {
                    return fail("no (K, J) cell satisfies J <= K - 2".into());
                }
            }
            ExperimentKind::Mutable => {
                if self.trials == 0 || self.steps == 0 {
                    return fail("trials and steps must be at least 1".into());
                }
                if self.strategies.is_empty() {
                    return fail("no strategies selected".into());
                }
                if let Some(s) = self
                    .strategies
                    .iter()
                    .find(|s| **s == CleanupStrategy::Direct)
                {
                    return fail(format!(
                        "strategy {s} is not part of the mutable experiment"
                    ));
                }
                let shapes = self.memory_shapes();
                if shapes.is_empty() {
                    return fail("no (M, N) cells".into());
                }
                for s in shapes {
                    if s.m == 0 || s.k < 1 || s.k > self.k_ceiling {
                        return fail(format!("invalid cell M = {}, K = {}", s.m, s.k));
                    }
                }
            }
        }
        Ok(())
    }
}
