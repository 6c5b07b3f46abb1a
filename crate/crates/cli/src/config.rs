//! Pipeline configuration and the two named presets.

use std::ops::RangeInclusive;
use std::path::PathBuf;
use std::str::FromStr;

use phenocluster::dataset::{MeasurementKey, GRADER_KEYS, PRODUCTIVITY_KEYS};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    /// Target BW; the dorsum-view measurements end up selected.
    Dorsum,
    /// Target SS; structure-correlated measurements end up selected.
    Structure,
}

impl FromStr for Preset {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "dorsum" => Ok(Preset::Dorsum),
            "structure" => Ok(Preset::Structure),
            other => Err(CliError::Config(format!("unknown preset {other:?}"))),
        }
    }
}

impl Preset {
    pub fn target(self) -> MeasurementKey {
        match self {
            Preset::Dorsum => key("BW"),
            Preset::Structure => key("SS"),
        }
    }

    /// Productivity metrics and grader scores; the dorsum preset also drops
    /// the averaged structure score.
    pub fn exclude(self) -> Vec<MeasurementKey> {
        let mut out: Vec<MeasurementKey> = PRODUCTIVITY_KEYS
            .iter()
            .chain(GRADER_KEYS.iter())
            .map(|k| key(k))
            .collect();
        if self == Preset::Dorsum {
            out.push(key("SS"));
        }
        out
    }
}

fn key(s: &str) -> MeasurementKey {
    MeasurementKey::new(s).expect("static key")
}

/// Inclusive range of cluster counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct KRange {
    pub min: usize,
    pub max: usize,
}

impl KRange {
    pub fn as_range(self) -> RangeInclusive<usize> {
        self.min..=self.max
    }
}

impl Default for KRange {
    fn default() -> Self {
        KRange { min: 1, max: 10 }
    }
}

impl FromStr for KRange {
    type Err = CliError;

    /// Accepts `1..10`, `1..=10`, `1-10` or `1,10`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || CliError::Config(format!("invalid k range {s:?}; expected e.g. 1..10"));
        let (lo, hi) = s
            .split_once("..=")
            .or_else(|| s.split_once(".."))
            .or_else(|| s.split_once('-'))
            .or_else(|| s.split_once(','))
            .ok_or_else(bad)?;
        let min: usize = lo.trim().parse().map_err(|_| bad())?;
        let max: usize = hi.trim().parse().map_err(|_| bad())?;
        if min < 1 || max < min {
            return Err(bad());
        }
        Ok(KRange { min, max })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub input: PathBuf,
    pub preset: Option<Preset>,
    pub target: MeasurementKey,
    pub feature_count: usize,
    pub exclude: Vec<MeasurementKey>,
    /// Manual k; the knee of the elbow curve is used when absent.
    pub k: Option<usize>,
    pub k_range: KRange,
    pub seed: u64,
    pub alpha: f64,
    /// Dependent variables for ANOVA and Tukey HSD.
    pub responses: Vec<MeasurementKey>,
    pub out_dir: PathBuf,
    pub emit_charts: bool,
}

impl PipelineConfig {
    pub fn new(
        input: impl Into<PathBuf>,
        target: MeasurementKey,
        out_dir: impl Into<PathBuf>,
    ) -> Self {
        PipelineConfig {
            input: input.into(),
            preset: None,
            target,
            feature_count: 3,
            exclude: Vec::new(),
            k: None,
            k_range: KRange::default(),
            seed: 0,
            alpha: 0.05,
            responses: vec![key("BW"), key("SS")],
            out_dir: out_dir.into(),
            emit_charts: false,
        }
    }

    pub fn from_preset(
        preset: Preset,
        input: impl Into<PathBuf>,
        out_dir: impl Into<PathBuf>,
    ) -> Self {
        PipelineConfig {
            preset: Some(preset),
            exclude: preset.exclude(),
            ..PipelineConfig::new(input, preset.target(), out_dir)
        }
    }

    pub(crate) fn validate(&self, n_animals: usize) -> Result<()> {
        if self.feature_count == 0 {
            return Err(CliError::Config("--features must be positive".into()));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(CliError::Config("--alpha must lie in (0, 1)".into()));
        }
        if let Some(k) = self.k {
            if k < 1 || k > n_animals {
                return Err(CliError::Config(format!(
                    "--k {k} outside [1, {n_animals}] for {n_animals} animals"
                )));
            }
        }
        if self.k_range.min > n_animals {
            return Err(CliError::Config(format!(
                "k range starts at {} but there are only {n_animals} animals",
                self.k_range.min
            )));
        }
        Ok(())
    }
}
