//! Run report, model export and the on-disk artifacts.

use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use phenocluster::clustering::{self, ElbowResult, KMeansConfig, KMeansModel};
use phenocluster::dataset::{DescriptiveStats, HerdTable, MeasurementKey, ScoreSummary};
use phenocluster::inference::{AnovaResult, TukeyResult};
use phenocluster::stats::{CorrelationMatrix, FeatureSelection};
use serde::{Deserialize, Serialize};

use crate::config::PipelineConfig;
use crate::error::{CliError, Result};

pub const REPORT_FILE: &str = "report.json";
pub const MODEL_FILE: &str = "model.json";
pub const CENTROIDS_FILE: &str = "centroids.csv";
pub const LABELS_FILE: &str = "labels.csv";
pub const CORRELATION_FILE: &str = "correlation.csv";
pub const DESCRIPTIVE_FILE: &str = "descriptive.csv";

/// A fitted, ordered model in a form that can score new animals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelExport {
    /// Feature keys in selection order.
    pub keys: Vec<MeasurementKey>,
    pub means: Vec<f64>,
    pub stds: Vec<f64>,
    /// Centroids in z-score space, ordered as clusters 1..k.
    pub centroids: Vec<Vec<f64>>,
    pub k: usize,
    pub seed: u64,
    pub inertia: f64,
}

impl ModelExport {
    pub fn from_model(
        model: &KMeansModel,
        keys: &[MeasurementKey],
        means: &[f64],
        stds: &[f64],
    ) -> Self {
        ModelExport {
            keys: keys.to_vec(),
            means: means.to_vec(),
            stds: stds.to_vec(),
            centroids: model.centroids.clone(),
            k: model.k(),
            seed: model.config.seed,
            inertia: model.inertia,
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let model: ModelExport = serde_json::from_str(&text).map_err(phenocluster::Error::from)?;
        let d = model.keys.len();
        let consistent = model.means.len() == d
            && model.stds.len() == d
            && model.centroids.len() == model.k
            && model.centroids.iter().all(|c| c.len() == d);
        if !consistent || model.k == 0 {
            return Err(CliError::Config(format!(
                "{}: model dimensions are inconsistent",
                path.display()
            )));
        }
        Ok(model)
    }

    /// Nearest-centroid cluster (from 1) for each animal of `table`.
    pub fn assign(&self, table: &HerdTable) -> Result<Vec<usize>> {
        let rows = table.rows(&self.keys)?;
        let z: Vec<Vec<f64>> = rows
            .iter()
            .map(|r| {
                r.iter()
                    .zip(self.means.iter().zip(&self.stds))
                    .map(|(x, (m, s))| (x - m) / s)
                    .collect()
            })
            .collect();
        let model = KMeansModel {
            centroids: self.centroids.clone(),
            labels: Vec::new(),
            inertia: self.inertia,
            config: KMeansConfig::new(self.k).with_seed(self.seed),
            ordered: true,
            n_iter: 0,
            inertia_trace: Vec::new(),
        };
        Ok(clustering::assign(&model, &z)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KSource {
    Knee,
    Override,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnimalLabel {
    pub animal: String,
    pub cluster: usize,
}

/// ANOVA and Tukey HSD of one response across clusters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub response: MeasurementKey,
    /// Per-animal response values, in table order.
    pub values: Vec<f64>,
    pub anova: AnovaResult,
    /// Absent when the within-cluster variance is zero.
    pub tukey: Option<TukeyResult>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelCorrelation {
    pub key: MeasurementKey,
    /// `None` for a constant column.
    pub r: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub tool: String,
    pub version: String,
    /// The only field that differs between identical runs.
    pub timestamp: String,
    pub config: PipelineConfig,
    pub n_animals: usize,
    pub descriptive: Vec<DescriptiveStats>,
    pub scores: Option<Vec<ScoreSummary>>,
    pub correlation: CorrelationMatrix,
    pub selection: FeatureSelection,
    pub elbow: ElbowResult,
    pub chosen_k: usize,
    pub k_source: KSource,
    pub model: ModelExport,
    pub n_iter: usize,
    /// Standardized feature rows, in table order.
    pub points: Vec<Vec<f64>>,
    pub labels: Vec<AnimalLabel>,
    pub evaluations: Vec<Evaluation>,
    pub label_correlations: Vec<LabelCorrelation>,
    /// Files written next to the report, relative to the output directory.
    pub artifacts: Vec<String>,
}

impl RunReport {
    pub fn cluster_labels(&self) -> Vec<usize> {
        self.labels.iter().map(|l| l.cluster).collect()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self).map_err(phenocluster::Error::from)?)
    }
}

pub fn create_file(path: &Path) -> Result<BufWriter<fs::File>> {
    fs::File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CliError::io(path, e))
}

pub fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

fn finish(path: &Path, mut w: impl Write) -> Result<()> {
    w.flush().map_err(|e| CliError::io(path, e))
}

/// `cluster,<feature>...` with one row per ordered centroid.
pub fn write_centroids_csv(model: &ModelExport, out: impl Write) -> io::Result<()> {
    let mut wtr = csv::Writer::from_writer(out);
    let mut header = vec!["cluster".to_string()];
    header.extend(model.keys.iter().map(|k| k.to_string()));
    wtr.write_record(&header)?;
    for (i, c) in model.centroids.iter().enumerate() {
        let mut row = vec![(i + 1).to_string()];
        row.extend(c.iter().map(|v| v.to_string()));
        wtr.write_record(&row)?;
    }
    wtr.flush()
}

pub fn write_labels_csv(labels: &[AnimalLabel], out: impl Write) -> io::Result<()> {
    let mut wtr = csv::Writer::from_writer(out);
    wtr.write_record(["animal", "cluster"])?;
    for l in labels {
        wtr.write_record([l.animal.as_str(), &l.cluster.to_string()])?;
    }
    wtr.flush()
}

/// Read an `animal,cluster` file back in.
pub fn read_labels_csv(path: &Path) -> Result<Vec<AnimalLabel>> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(phenocluster::Error::from)?;
    let mut out = Vec::new();
    for (i, rec) in rdr.deserialize::<AnimalLabel>().enumerate() {
        let rec =
            rec.map_err(|e| CliError::Config(format!("{} line {}: {e}", path.display(), i + 2)))?;
        if rec.cluster == 0 {
            return Err(CliError::Config(format!(
                "{} line {}: cluster labels start at 1",
                path.display(),
                i + 2
            )));
        }
        out.push(rec);
    }
    Ok(out)
}

/// Write the report and the data artifacts into `dir`. Chart files listed
/// in `report.artifacts` are expected to be written by the caller.
pub(crate) fn write_core_artifacts(report: &RunReport, dir: &Path) -> Result<()> {
    ensure_dir(dir)?;
    let path = |name: &str| -> PathBuf { dir.join(name) };

    let p = path(MODEL_FILE);
    let json = serde_json::to_string_pretty(&report.model).map_err(phenocluster::Error::from)?;
    write_text(&p, &(json + "\n"))?;

    let p = path(CENTROIDS_FILE);
    let mut w = create_file(&p)?;
    write_centroids_csv(&report.model, &mut w).map_err(|e| CliError::io(&p, e))?;
    finish(&p, w)?;

    let p = path(LABELS_FILE);
    let mut w = create_file(&p)?;
    write_labels_csv(&report.labels, &mut w).map_err(|e| CliError::io(&p, e))?;
    finish(&p, w)?;

    let p = path(CORRELATION_FILE);
    let mut w = create_file(&p)?;
    report.correlation.write_csv(&mut w)?;
    finish(&p, w)?;

    let p = path(DESCRIPTIVE_FILE);
    let mut w = create_file(&p)?;
    phenocluster::dataset::write_stats_csv(&report.descriptive, &mut w)?;
    finish(&p, w)?;

    write_text(&path(REPORT_FILE), &(report.to_json()? + "\n"))
}
