use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use super::{Dataset, IoError};
use crate::metrics::{evaluate, MetricsError, OutlierPolicy, Scores};
use crate::stream::{StreamConfig, StreamEngine, StreamSnapshot};

/// Which points the final scores cover.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricsMode {
    /// Points still in the window after the last arrival.
    #[default]
    FinalWindow,
    /// Every point, scored with the label it held when it left the window
    /// (or its final label if it never left).
    Cumulative,
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ReplayOptions {
    pub metrics: MetricsMode,
    pub outlier_policy: OutlierPolicy,
    /// Snapshot period in arrivals; defaults to the window size.
    pub snapshot_every: Option<usize>,
}

#[derive(Clone, Debug)]
pub struct ReplayOutcome {
    /// Periodic snapshots plus one at the end of the stream.
    pub snapshots: Vec<StreamSnapshot>,
    /// `None` for unlabeled data.
    pub scores: Option<Result<Scores, MetricsError>>,
    pub n_mc: usize,
    pub n_macro: usize,
}

/// Feeds `data` to a fresh engine in id order.
pub fn replay_stream(
    data: &Dataset,
    config: &StreamConfig,
    options: &ReplayOptions,
) -> Result<ReplayOutcome, IoError> {
    let mut engine = StreamEngine::new(*config)?;
    let every = options.snapshot_every.unwrap_or(config.window).max(1);
    let labeled = data.has_labels();
    if labeled && data.labels.len() != data.len() {
        return Err(IoError::Config(format!(
            "{} labels for {} points",
            data.labels.len(),
            data.len()
        )));
    }
    let mut snapshots = Vec::new();
    for (pos, (id, x)) in data.points.iter().enumerate() {
        let label = labeled.then(|| data.labels[pos]);
        engine.push(id, x.to_vec(), label)?;
        let last = pos + 1 == data.len();
        if last {
            engine.flush()?;
        }
        if (pos + 1) % every == 0 || last {
            snapshots.push(engine.snapshot());
        }
    }
    let scores = labeled.then(|| {
        let (mut truth, mut predicted) = (Vec::new(), Vec::new());
        if options.metrics == MetricsMode::Cumulative {
            for e in engine.evicted() {
                truth.push(e.true_label.unwrap_or(0));
                predicted.push(e.predicted);
            }
        }
        for p in engine.live_points() {
            truth.push(p.true_label.unwrap_or(0));
            predicted.push(engine.predicted_label(p));
        }
        evaluate(&truth, &predicted, options.outlier_policy)
    });
    Ok(ReplayOutcome {
        snapshots,
        scores,
        n_mc: engine.micro_clusters().len(),
        n_macro: engine.macro_clusters().len(),
    })
}

/// One JSON object per line.
pub fn write_snapshots(mut out: impl Write, snapshots: &[StreamSnapshot]) -> Result<(), IoError> {
    for s in snapshots {
        serde_json::to_writer(&mut out, s)?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_snapshots(input: impl BufRead) -> Result<Vec<StreamSnapshot>, IoError> {
    let mut out = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| IoError::Snapshot {
            line: i + 1,
            message: e.to_string(),
        })?);
    }
    Ok(out)
}
