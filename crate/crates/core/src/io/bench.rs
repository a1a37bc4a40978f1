use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::{
    generate, load_csv, preset, replay_stream, GeneratorSpec, IoError, MetricsMode, ReplayOptions,
};
use crate::metrics::OutlierPolicy;
use crate::spatial::IndexBackend;
use crate::stream::StreamConfig;

fn default_true() -> bool {
    true
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DatasetSource {
    Csv {
        path: PathBuf,
        #[serde(default = "default_true")]
        labels: bool,
    },
    Generate {
        spec: GeneratorSpec,
    },
}

/// One benchmark row. Stream parameters come from `preset`, from `stream`,
/// or from `stream` layered over `preset` when both are given; `backend`
/// replaces whichever backend that produced.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub name: String,
    pub dataset: DatasetSource,
    #[serde(default)]
    pub preset: Option<String>,
    #[serde(default)]
    pub stream: Option<StreamConfig>,
    #[serde(default)]
    pub backend: Option<IndexBackend>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_true")]
    pub normalize: bool,
    #[serde(default)]
    pub metrics: MetricsMode,
    #[serde(default)]
    pub outlier_policy: OutlierPolicy,
}

impl RunConfig {
    /// The validated engine configuration for this row.
    pub fn resolve(&self) -> Result<StreamConfig, IoError> {
        let mut config = match (&self.stream, &self.preset) {
            (Some(s), _) => *s,
            (None, Some(name)) => {
                preset(name).ok_or_else(|| IoError::UnknownPreset(name.clone()))?
            }
            (None, None) => {
                return Err(IoError::Config(format!(
                    "run {:?} needs a preset or stream parameters",
                    self.name
                )))
            }
        };
        if let Some(name) = &self.preset {
            if preset(name).is_none() {
                return Err(IoError::UnknownPreset(name.clone()));
            }
        }
        if let Some(b) = self.backend {
            config.backend = b;
        }
        config.validate()?;
        Ok(config)
    }

    pub fn load_data(&self) -> Result<super::Dataset, IoError> {
        match &self.dataset {
            DatasetSource::Csv { path, labels } => load_csv(path, *labels, self.normalize),
            DatasetSource::Generate { spec } => {
                let ds = generate(spec, self.seed)?;
                Ok(if self.normalize {
                    super::Dataset {
                        points: super::min_max_normalize(&ds.points),
                        labels: ds.labels,
                    }
                } else {
                    ds
                })
            }
        }
    }
}

/// A list of `[[run]]` tables.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkConfig {
    #[serde(default)]
    pub run: Vec<RunConfig>,
}

impl BenchmarkConfig {
    pub fn from_toml(text: &str) -> Result<Self, IoError> {
        toml::from_str(text).map_err(|e| IoError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, IoError> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }
}

/// One scorecard line. Scores are absent for unlabeled data and for failed
/// runs; `error` holds the failure.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScoreRow {
    pub dataset: String,
    pub backend: String,
    pub purity: Option<f64>,
    pub ari: Option<f64>,
    pub nmi: Option<f64>,
    pub wall_ms: f64,
    pub n_mc: usize,
    pub n_macro: usize,
    pub params: Option<StreamConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

fn run_one(run: &RunConfig) -> ScoreRow {
    let mut row = ScoreRow {
        dataset: run.name.clone(),
        backend: run
            .backend
            .or(run.stream.map(|s| s.backend))
            .map_or("unknown", |b| b.name())
            .to_string(),
        purity: None,
        ari: None,
        nmi: None,
        wall_ms: 0.0,
        n_mc: 0,
        n_macro: 0,
        params: None,
        error: None,
    };
    let config = match run.resolve() {
        Ok(c) => c,
        Err(e) => {
            row.error = Some(e.to_string());
            return row;
        }
    };
    row.backend = config.backend.name().to_string();
    row.params = Some(config);
    let data = match run.load_data() {
        Ok(d) => d,
        Err(e) => {
            row.error = Some(e.to_string());
            return row;
        }
    };
    let options = ReplayOptions {
        metrics: run.metrics,
        outlier_policy: run.outlier_policy,
        snapshot_every: None,
    };
    let start = Instant::now();
    let outcome = replay_stream(&data, &config, &options);
    row.wall_ms = start.elapsed().as_secs_f64() * 1e3;
    match outcome {
        Ok(o) => {
            row.n_mc = o.n_mc;
            row.n_macro = o.n_macro;
            match o.scores {
                Some(Ok(s)) => {
                    row.purity = Some(s.purity);
                    row.ari = Some(s.ari);
                    row.nmi = Some(s.nmi);
                }
                Some(Err(e)) => row.error = Some(e.to_string()),
                None => {}
            }
        }
        Err(e) => row.error = Some(e.to_string()),
    }
    row
}

/// Runs every row in order. A failing row is recorded and the rest still
/// run.
pub fn run_benchmark(config: &BenchmarkConfig) -> Vec<ScoreRow> {
    config.run.iter().map(run_one).collect()
}

pub fn write_score_rows(mut out: impl Write, rows: &[ScoreRow]) -> Result<(), IoError> {
    for r in rows {
        serde_json::to_writer(&mut out, r)?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

/// Fixed-width text table with one line per row.
pub fn format_table(rows: &[ScoreRow]) -> String {
    let score = |v: Option<f64>| v.map_or_else(|| "-".to_string(), |x| format!("{x:.5}"));
    let mut out = format!(
        "{:<20} {:<10} {:>8} {:>8} {:>8} {:>10} {:>6} {:>7}\n",
        "dataset", "backend", "purity", "ari", "nmi", "wall_ms", "mcs", "macros"
    );
    for r in rows {
        out.push_str(&format!(
            "{:<20} {:<10} {:>8} {:>8} {:>8} {:>10.1} {:>6} {:>7}",
            r.dataset,
            r.backend,
            score(r.purity),
            score(r.ari),
            score(r.nmi),
            r.wall_ms,
            r.n_mc,
            r.n_macro
        ));
        if let Some(e) = &r.error {
            out.push_str(&format!("  error: {e}"));
        }
        out.push('\n');
    }
    out
}
