use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::EncodingConfig;
use crate::signal::{SignalError, SignalTrace};
use crate::spiking::{spikes_from_csv, spikes_to_csv, SpikeTrain, SpikingError};
use crate::syntax::Category;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NodeKind {
    Leaf,
    Node,
}

/// One slot of the bottom-up schedule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScheduleEntry {
    /// Lexical id for leaves, `n<k>` for the k-th internal node.
    pub node_id: String,
    pub kind: NodeKind,
    pub start: f64,
    pub category: Category,
    /// Height above the leaves (leaves are 0).
    pub depth: u32,
}

/// Everything [`encode_tree`](super::encode_tree) produces.
#[derive(Debug, Clone, PartialEq)]
pub struct EncodedBundle {
    /// Category phase code `S(t)`, one slot per node.
    pub lf_trace: SignalTrace,
    /// Wave-modulated gamma banks, one slot per node.
    pub hf_trace: SignalTrace,
    /// One train per leaf, in linear order.
    pub spike_trains: Vec<SpikeTrain>,
    /// Leaf ids backing `spike_trains`.
    pub neurons: Vec<String>,
    pub schedule: Vec<ScheduleEntry>,
}

#[derive(Debug, Error)]
pub enum BundleError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{path}: {source}")]
    Json { path: String, source: serde_json::Error },
    #[error("{path}: {source}")]
    Trace { path: String, source: SignalError },
    #[error("{path}: {source}")]
    Spikes { path: String, source: SpikingError },
    #[error("inconsistent bundle: {0}")]
    Inconsistent(String),
}

#[derive(Serialize, Deserialize)]
struct ScheduleFile {
    neurons: Vec<String>,
    entries: Vec<ScheduleEntry>,
}

impl EncodedBundle {
    pub fn duration(&self) -> f64 {
        self.lf_trace.duration()
    }

    /// Writes `lf.csv`, `hf.csv`, `spikes.csv`, `schedule.json` and
    /// `config.json` into `dir`, creating it if needed.
    pub fn write_dir(&self, dir: &Path, cfg: &EncodingConfig) -> Result<(), BundleError> {
        fs::create_dir_all(dir).map_err(|source| BundleError::Io {
            path: dir.display().to_string(),
            source,
        })?;
        let schedule = ScheduleFile {
            neurons: self.neurons.clone(),
            entries: self.schedule.clone(),
        };
        let files = [
            ("lf.csv", self.lf_trace.to_csv()),
            ("hf.csv", self.hf_trace.to_csv()),
            ("spikes.csv", spikes_to_csv(&self.spike_trains)),
            ("schedule.json", pretty(&schedule)),
            ("config.json", pretty(cfg)),
        ];
        for (name, text) in files {
            let path = dir.join(name);
            fs::write(&path, text).map_err(|source| BundleError::Io {
                path: path.display().to_string(),
                source,
            })?;
        }
        Ok(())
    }

    /// Reads a directory written by [`write_dir`](Self::write_dir).
    pub fn read_dir(dir: &Path) -> Result<(EncodedBundle, EncodingConfig), BundleError> {
        let read = |name: &str| {
            let path = dir.join(name);
            fs::read_to_string(&path)
                .map(|t| (path.display().to_string(), t))
                .map_err(|source| BundleError::Io {
                    path: path.display().to_string(),
                    source,
                })
        };
        let (path, text) = read("config.json")?;
        let cfg: EncodingConfig =
            serde_json::from_str(&text).map_err(|source| BundleError::Json { path, source })?;
        let (path, text) = read("schedule.json")?;
        let schedule: ScheduleFile =
            serde_json::from_str(&text).map_err(|source| BundleError::Json { path, source })?;
        let trace = |name: &str| -> Result<SignalTrace, BundleError> {
            let (path, text) = read(name)?;
            SignalTrace::from_csv(&text, Some(cfg.sample_rate))
                .map_err(|source| BundleError::Trace { path, source })
        };
        let lf_trace = trace("lf.csv")?;
        let hf_trace = trace("hf.csv")?;
        if lf_trace.len() != hf_trace.len() {
            return Err(BundleError::Inconsistent("lf and hf traces differ in length".into()));
        }
        let (path, text) = read("spikes.csv")?;
        let spike_trains = spikes_from_csv(&text, schedule.neurons.len(), lf_trace.duration())
            .map_err(|source| BundleError::Spikes { path, source })?;
        Ok((
            EncodedBundle {
                lf_trace,
                hf_trace,
                spike_trains,
                neurons: schedule.neurons,
                schedule: schedule.entries,
            },
            cfg,
        ))
    }
}

fn pretty<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}
