use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use phenocluster::dataset::{
    describe_all, load_table, parse_keys, write_stats_csv, HerdTable, MeasurementKey,
};
use phenocluster::stats::{correlation_matrix, select_features};
use phenocluster_cli::pipeline::{cluster_features, evaluate_response};
use phenocluster_cli::report::{self as rpt, AnimalLabel, ModelExport};
use phenocluster_cli::{run_pipeline, CliError, KRange, PipelineConfig, Preset, Result};

#[derive(Parser)]
#[command(
    name = "phenocluster",
    version,
    about = "Cluster animals on correlation-selected body measurements"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Descriptive statistics for every column.
    Describe {
        #[arg(long)]
        input: PathBuf,
        /// Write descriptive.csv and descriptive.json here instead of printing.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Pearson correlation matrix, optionally with feature selection.
    Correlate {
        #[arg(long)]
        input: PathBuf,
        #[command(flatten)]
        select: SelectArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fit k-means on the selected features, or score animals with a saved model.
    Cluster {
        #[command(flatten)]
        run: RunArgs,
        /// Assign animals to the clusters of a saved model.json instead of fitting.
        #[arg(long)]
        model: Option<PathBuf>,
    },
    /// One-way ANOVA and Tukey HSD of responses across given cluster labels.
    Evaluate {
        #[arg(long)]
        input: PathBuf,
        /// CSV with columns animal,cluster.
        #[arg(long)]
        labels: PathBuf,
        /// Response columns (default BW and SS).
        #[arg(long, value_delimiter = ',')]
        response: Vec<String>,
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the full chain and write the report and artifacts.
    Pipeline {
        #[command(flatten)]
        run: RunArgs,
        /// Response columns for ANOVA and Tukey HSD (default BW and SS).
        #[arg(long, value_delimiter = ',')]
        response: Vec<String>,
        #[arg(long)]
        alpha: Option<f64>,
        /// Also write elbow.svg, scatter.svg and boxplot.svg.
        #[arg(long)]
        charts: bool,
    },
}

#[derive(Args)]
struct SelectArgs {
    /// Named configuration: dorsum (target BW) or structure (target SS).
    #[arg(long)]
    preset: Option<Preset>,
    /// Column whose strongest correlates are selected.
    #[arg(long)]
    target: Option<String>,
    /// Number of features to select.
    #[arg(long)]
    features: Option<usize>,
    /// Columns never selected (comma separated); added to the preset's list.
    #[arg(long, value_delimiter = ',')]
    exclude: Vec<String>,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    input: PathBuf,
    #[command(flatten)]
    select: SelectArgs,
    /// Use this k instead of the detected knee.
    #[arg(long)]
    k: Option<usize>,
    /// Range of k scanned for the elbow, e.g. 1..10.
    #[arg(long)]
    k_range: Option<KRange>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "phenocluster-out")]
    out: PathBuf,
}

impl SelectArgs {
    fn config(&self, input: &Path, out: &Path) -> Result<PipelineConfig> {
        let mut cfg = match (self.preset, &self.target) {
            (Some(p), _) => PipelineConfig::from_preset(p, input, out),
            (None, Some(t)) => PipelineConfig::new(input, MeasurementKey::new(t)?, out),
            (None, None) => {
                return Err(CliError::Config(
                    "either --preset or --target is required".into(),
                ))
            }
        };
        if let Some(t) = &self.target {
            cfg.target = MeasurementKey::new(t)?;
        }
        if let Some(n) = self.features {
            cfg.feature_count = n;
        }
        for k in parse_keys(&self.exclude)? {
            if !cfg.exclude.contains(&k) {
                cfg.exclude.push(k);
            }
        }
        Ok(cfg)
    }
}

impl RunArgs {
    fn config(&self) -> Result<PipelineConfig> {
        let mut cfg = self.select.config(&self.input, &self.out)?;
        cfg.k = self.k;
        if let Some(r) = self.k_range {
            cfg.k_range = r;
        }
        cfg.seed = self.seed;
        Ok(cfg)
    }
}

fn stdout() -> io::StdoutLock<'static> {
    io::stdout().lock()
}

fn print(text: &str) -> Result<()> {
    let mut out = stdout();
    writeln!(out, "{text}").map_err(|e| CliError::io("<stdout>", e))
}

fn to_json<T: serde::Serialize>(v: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(v).map_err(phenocluster::Error::from)? + "\n")
}

fn describe(input: &Path, out: Option<&Path>) -> Result<()> {
    let table = load_table(input, None)?;
    let stats = describe_all(&table);
    match out {
        Some(dir) => {
            rpt::ensure_dir(dir)?;
            let p = dir.join(rpt::DESCRIPTIVE_FILE);
            write_stats_csv(&stats, rpt::create_file(&p)?)?;
            rpt::write_text(&dir.join("descriptive.json"), &to_json(&stats)?)?;
        }
        None => write_stats_csv(&stats, stdout())?,
    }
    Ok(())
}

fn correlate(input: &Path, select: &SelectArgs, out: Option<&Path>) -> Result<()> {
    let table = load_table(input, None)?;
    let m = correlation_matrix(&table, table.keys())?;
    let selection = if select.preset.is_some() || select.target.is_some() {
        let cfg = select.config(input, out.unwrap_or(Path::new(".")))?;
        Some(select_features(
            &m,
            &cfg.target,
            cfg.feature_count,
            &cfg.exclude,
        )?)
    } else {
        None
    };
    match out {
        Some(dir) => {
            rpt::ensure_dir(dir)?;
            m.write_csv(rpt::create_file(&dir.join(rpt::CORRELATION_FILE))?)?;
            rpt::write_text(&dir.join("correlation.json"), &to_json(&m)?)?;
            if let Some(s) = &selection {
                rpt::write_text(&dir.join("selection.json"), &to_json(s)?)?;
            }
        }
        None => {
            m.write_csv(stdout())?;
            if let Some(s) = &selection {
                let parts: Vec<String> = s
                    .selected
                    .iter()
                    .zip(&s.r_values)
                    .map(|(k, r)| format!("{k} (r = {r:.3})"))
                    .collect();
                print(&format!("selected for {}: {}", s.target, parts.join(", ")))?;
            }
        }
    }
    Ok(())
}

fn labels_for(table: &HerdTable, clusters: &[usize]) -> Vec<AnimalLabel> {
    table
        .animal_ids()
        .iter()
        .zip(clusters)
        .map(|(a, &c)| AnimalLabel {
            animal: a.clone(),
            cluster: c,
        })
        .collect()
}

fn write_labels(dir: &Path, labels: &[AnimalLabel]) -> Result<()> {
    let p = dir.join(rpt::LABELS_FILE);
    rpt::write_labels_csv(labels, rpt::create_file(&p)?).map_err(|e| CliError::io(&p, e))
}

fn cluster(run: &RunArgs, model_path: Option<&Path>) -> Result<()> {
    let table = load_table(&run.input, None)?;
    rpt::ensure_dir(&run.out)?;
    if let Some(path) = model_path {
        let model = ModelExport::load(path)?;
        let labels = labels_for(&table, &model.assign(&table)?);
        write_labels(&run.out, &labels)?;
        return print(&format!(
            "assigned {} animals to {} clusters; wrote {}",
            labels.len(),
            model.k,
            run.out.join(rpt::LABELS_FILE).display()
        ));
    }
    let cfg = run.config()?;
    let m = correlation_matrix(&table, table.keys())?;
    let selection = select_features(&m, &cfg.target, cfg.feature_count, &cfg.exclude)?;
    let outcome = cluster_features(&table, &selection.selected, &cfg)?;
    let s = &outcome.standardized;
    let export = ModelExport::from_model(&outcome.model, &s.keys, &s.means, &s.stds);
    rpt::write_text(&run.out.join(rpt::MODEL_FILE), &to_json(&export)?)?;
    rpt::write_centroids_csv(
        &export,
        rpt::create_file(&run.out.join(rpt::CENTROIDS_FILE))?,
    )
    .map_err(|e| CliError::io(run.out.join(rpt::CENTROIDS_FILE), e))?;
    write_labels(&run.out, &labels_for(&table, &outcome.model.labels))?;
    let keys: Vec<&str> = s.keys.iter().map(|k| k.as_str()).collect();
    print(&format!(
        "k = {} on {} (inertia {:.4}); wrote model, centroids and labels to {}",
        export.k,
        keys.join(", "),
        export.inertia,
        run.out.display()
    ))
}

fn response_keys(
    raw: &[String],
    table: &HerdTable,
    defaults: &[MeasurementKey],
) -> Result<Vec<MeasurementKey>> {
    if raw.is_empty() {
        Ok(defaults
            .iter()
            .filter(|k| table.contains(k))
            .cloned()
            .collect())
    } else {
        Ok(parse_keys(raw)?)
    }
}

fn evaluate(
    input: &Path,
    labels_path: &Path,
    responses: &[String],
    alpha: f64,
    out: Option<&Path>,
) -> Result<()> {
    let table = load_table(input, None)?;
    let given = rpt::read_labels_csv(labels_path)?;
    let mut clusters = Vec::with_capacity(table.n_animals());
    for id in table.animal_ids() {
        let l = given
            .iter()
            .find(|l| &l.animal == id)
            .ok_or_else(|| CliError::Config(format!("animal {id:?} has no cluster label")))?;
        clusters.push(l.cluster);
    }
    let defaults = PipelineConfig::new(input, MeasurementKey::new("BW")?, ".").responses;
    let keys = response_keys(responses, &table, &defaults)?;
    if keys.is_empty() {
        return Err(CliError::Config(
            "no response columns; pass --response".into(),
        ));
    }
    let evals = keys
        .iter()
        .map(|k| evaluate_response(&table, &clusters, k, alpha))
        .collect::<Result<Vec<_>>>()?;
    if let Some(dir) = out {
        rpt::ensure_dir(dir)?;
        rpt::write_text(&dir.join("evaluation.json"), &to_json(&evals)?)?;
    }
    for e in &evals {
        print(&format!("== {} ==\n{}", e.response, e.anova))?;
        match &e.tukey {
            Some(t) => print(&format!("{t}"))?,
            None => print("Tukey HSD skipped: zero within-cluster variance")?,
        }
    }
    Ok(())
}

fn pipeline(
    run: &RunArgs,
    responses: &[String],
    alpha: Option<f64>,
    emit_charts: bool,
) -> Result<()> {
    let mut cfg = run.config()?;
    if !responses.is_empty() {
        cfg.responses = parse_keys(responses)?;
    }
    if let Some(a) = alpha {
        cfg.alpha = a;
    }
    cfg.emit_charts = emit_charts;
    let report = run_pipeline(&cfg)?;
    let keys: Vec<&str> = report
        .selection
        .selected
        .iter()
        .map(|k| k.as_str())
        .collect();
    let mut summary = format!(
        "selected {} for {}; k = {} ({:?})",
        keys.join(", "),
        report.selection.target,
        report.chosen_k,
        report.k_source
    );
    for e in &report.evaluations {
        let p = e
            .anova
            .p_value
            .map_or("NA".to_string(), |p| format!("{p:.3e}"));
        summary.push_str(&format!("\n{}: ANOVA p = {p}", e.response));
    }
    summary.push_str(&format!(
        "\nwrote {} files to {}",
        report.artifacts.len(),
        cfg.out_dir.display()
    ));
    print(&summary)
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Describe { input, out } => describe(&input, out.as_deref()),
        Command::Correlate { input, select, out } => correlate(&input, &select, out.as_deref()),
        Command::Cluster { run, model } => cluster(&run, model.as_deref()),
        Command::Evaluate {
            input,
            labels,
            response,
            alpha,
            out,
        } => evaluate(&input, &labels, &response, alpha, out.as_deref()),
        Command::Pipeline {
            run,
            response,
            alpha,
            charts,
        } => pipeline(&run, &response, alpha, charts),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(phenocluster_cli::EXIT_VALIDATION as u8)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            let mut src = std::error::Error::source(&e);
            while let Some(s) = src {
                eprintln!("  caused by: {s}");
                src = s.source();
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
