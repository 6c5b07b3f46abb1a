//! The full describe → correlate → select → standardize → elbow → cluster →
//! order → evaluate chain.

use phenocluster::clustering::{
    elbow_scan_models, kmeans_fit, order_clusters, ElbowResult, KMeansConfig, KMeansModel,
};
use phenocluster::dataset::{
    aggregate_scores, describe_all, load_table, HerdTable, MeasurementKey, GRADER_KEYS,
};
use phenocluster::inference::{one_way_anova, tukey_hsd};
use phenocluster::stats::{
    correlation_matrix, label_correlation, select_features, zscore, StandardizedMatrix,
};
use phenocluster::Error;

use crate::charts;
use crate::config::PipelineConfig;
use crate::error::{CliError, Result};
use crate::report::{
    self, AnimalLabel, Evaluation, KSource, LabelCorrelation, ModelExport, RunReport,
    CENTROIDS_FILE, CORRELATION_FILE, DESCRIPTIVE_FILE, LABELS_FILE, MODEL_FILE, REPORT_FILE,
};

pub const TOOL_NAME: &str = "phenocluster";

/// Result of the clustering stage.
pub struct ClusterOutcome {
    pub standardized: StandardizedMatrix,
    pub elbow: ElbowResult,
    pub model: KMeansModel,
    pub k_source: KSource,
}

/// Scan the configured k range over the standardized `keys`, choose k and
/// return the ordered model.
pub fn cluster_features(
    table: &HerdTable,
    keys: &[MeasurementKey],
    cfg: &PipelineConfig,
) -> Result<ClusterOutcome> {
    let n = table.n_animals();
    cfg.validate(n)?;
    let standardized = zscore(table, keys)?;
    let (lo, hi) = (cfg.k_range.min, cfg.k_range.max.min(n));
    let template = KMeansConfig::new(lo).with_seed(cfg.seed);
    let (elbow, models) = elbow_scan_models(&standardized.z, lo..=hi, &template)?;

    let (k, k_source) = match (cfg.k, elbow.knee) {
        (Some(k), _) => (k, KSource::Override),
        (None, Some(k)) => (k, KSource::Knee),
        (None, None) => return Err(CliError::NoKnee(lo, hi)),
    };
    let model = match elbow.k_values.iter().position(|&kv| kv == k) {
        Some(i) => models[i].clone(),
        None => kmeans_fit(&standardized.z, &KMeansConfig { k, ..template })?,
    };
    Ok(ClusterOutcome {
        standardized,
        elbow,
        model: order_clusters(&model),
        k_source,
    })
}

/// ANOVA plus Tukey HSD of `response` across `labels`.
pub fn evaluate_response(
    table: &HerdTable,
    labels: &[usize],
    response: &MeasurementKey,
    alpha: f64,
) -> Result<Evaluation> {
    let values = table.column(response)?.to_vec();
    let anova = one_way_anova(&values, labels)?;
    let tukey = if anova.degenerate {
        None
    } else {
        Some(tukey_hsd(&values, labels, alpha)?)
    };
    Ok(Evaluation {
        response: response.clone(),
        values,
        anova,
        tukey,
    })
}

/// Pearson r between the cluster labels and every column of `table`.
pub fn label_correlations(table: &HerdTable, labels: &[usize]) -> Result<Vec<LabelCorrelation>> {
    table
        .keys()
        .iter()
        .map(|key| match label_correlation(labels, table, key) {
            Ok(r) => Ok(LabelCorrelation {
                key: key.clone(),
                r: Some(r),
            }),
            Err(Error::ZeroVariance(_)) => Ok(LabelCorrelation {
                key: key.clone(),
                r: None,
            }),
            Err(e) => Err(e.into()),
        })
        .collect()
}

/// Run the pipeline on an in-memory table. Nothing is written to disk.
pub fn run_on_table(table: &HerdTable, cfg: &PipelineConfig) -> Result<RunReport> {
    cfg.validate(table.n_animals())?;
    if !table.contains(&cfg.target) {
        return Err(Error::UnknownKey(cfg.target.to_string()).into());
    }
    let descriptive = describe_all(table);
    let has_scores = GRADER_KEYS
        .iter()
        .all(|g| table.keys().iter().any(|k| k.as_str() == *g));
    let scores = if has_scores {
        Some(aggregate_scores(table)?)
    } else {
        None
    };

    let correlation = correlation_matrix(table, table.keys())?;
    let selection = select_features(&correlation, &cfg.target, cfg.feature_count, &cfg.exclude)?;
    let outcome = cluster_features(table, &selection.selected, cfg)?;
    let model = &outcome.model;
    let labels = model.labels.clone();

    let evaluations = if model.k() >= 2 {
        cfg.responses
            .iter()
            .filter(|r| table.contains(r))
            .map(|r| evaluate_response(table, &labels, r, cfg.alpha))
            .collect::<Result<Vec<_>>>()?
    } else {
        Vec::new()
    };

    let mut artifacts: Vec<String> = [
        REPORT_FILE,
        MODEL_FILE,
        CENTROIDS_FILE,
        LABELS_FILE,
        CORRELATION_FILE,
        DESCRIPTIVE_FILE,
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    if cfg.emit_charts {
        artifacts.push(charts::ELBOW_FILE.into());
        artifacts.push(charts::SCATTER_FILE.into());
        if !evaluations.is_empty() {
            artifacts.push(charts::BOXPLOT_FILE.into());
        }
    }

    Ok(RunReport {
        tool: TOOL_NAME.into(),
        version: env!("CARGO_PKG_VERSION").into(),
        timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
        config: cfg.clone(),
        n_animals: table.n_animals(),
        descriptive,
        scores,
        correlation,
        label_correlations: label_correlations(table, &labels)?,
        chosen_k: model.k(),
        k_source: outcome.k_source,
        model: ModelExport::from_model(
            model,
            &outcome.standardized.keys,
            &outcome.standardized.means,
            &outcome.standardized.stds,
        ),
        n_iter: model.n_iter,
        points: outcome.standardized.z.clone(),
        labels: table
            .animal_ids()
            .iter()
            .zip(&labels)
            .map(|(a, &c)| AnimalLabel {
                animal: a.clone(),
                cluster: c,
            })
            .collect(),
        selection,
        elbow: outcome.elbow,
        evaluations,
        artifacts,
    })
}

/// Load the input, run the pipeline and write every artifact to the output
/// directory.
pub fn run_pipeline(cfg: &PipelineConfig) -> Result<RunReport> {
    let table = load_table(&cfg.input, None)?;
    let report = run_on_table(&table, cfg)?;
    report::write_core_artifacts(&report, &cfg.out_dir)?;
    if cfg.emit_charts {
        charts::write_charts(&report, &cfg.out_dir)?;
    }
    Ok(report)
}
