//! Replicated experiment runner: per replicate, draw (or resample) data,
//! split, fit the requested models, extract kernels and alignment spectra,
//! score kernel ridge predictions on the held-out rows, then aggregate into
//! report tables and plots.
//!
//! Every replicate derives its own seed from (master_seed, replicate index),
//! so reports are byte-identical no matter how many worker threads run them.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::alignment::{
    alignment_spectrum, pearson, summarize_alignment, AlignmentComponent, AlignmentSpectrum,
};
use crate::data::Dataset;
use crate::dataio::{load_csv, subsample, DatasetSchema};
use crate::error::{Error, Result};
use crate::gbt::{fit_gbt, predict_gbt, GbtModel, GbtParams};
use crate::kernel::{cross_kernel, kernel_matrix, LeafEnsemble};
use crate::krr::{fit_krr, predict_krr};
use crate::landmark::{landmark_alignment, select_landmarks, LandmarkDesign};
use crate::linalg::sym_eig_auto;
use crate::plot::{line_chart, scatter_chart, ChartConfig, Series};
use crate::rf::{fit_rf, predict_rf, RandomForest};
use crate::seed::derive_seed;
use crate::simgen::{generate, split_train_test, split_train_test_sized, ScenarioFamily, ScenarioSpec};
use crate::tree::TreeConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    RfKernel,
    XgbKernel,
    Rf,
    Xgb,
}

impl ModelKind {
    pub fn name(&self) -> &'static str {
        match self {
            ModelKind::RfKernel => "rf_kernel",
            ModelKind::XgbKernel => "xgb_kernel",
            ModelKind::Rf => "rf",
            ModelKind::Xgb => "xgb",
        }
    }

    /// Kernel models score through KRR and carry alignment spectra; the raw
    /// ensembles only predict.
    pub fn is_kernel(&self) -> bool {
        matches!(self, ModelKind::RfKernel | ModelKind::XgbKernel)
    }

    fn uses_forest(&self) -> bool {
        matches!(self, ModelKind::RfKernel | ModelKind::Rf)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum DataSource {
    Simulated {
        family: ScenarioFamily,
        n: usize,
        p: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        noise_sd: Option<f64>,
    },
    Csv {
        path: PathBuf,
        schema: DatasetSchema,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        n_subsample: Option<usize>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_name")]
    pub name: String,
    pub data: DataSource,
    #[serde(default = "default_models")]
    pub models: Vec<ModelKind>,
    #[serde(default = "default_replicates")]
    pub replicates: usize,
    /// Landmark counts for the sensitivity spectra; empty disables.
    #[serde(default)]
    pub landmark_counts: Vec<usize>,
    #[serde(default = "default_components")]
    pub n_components: usize,
    #[serde(default)]
    pub master_seed: u64,
    /// Train share of each split; ignored when `train_size` is set.
    #[serde(default = "default_train_fraction")]
    pub train_fraction: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub train_size: Option<usize>,
    #[serde(default = "default_rf_trees")]
    pub rf_trees: usize,
    #[serde(default = "default_xgb_rounds")]
    pub xgb_rounds: usize,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
}

fn default_name() -> String {
    "experiment".into()
}
fn default_models() -> Vec<ModelKind> {
    vec![ModelKind::RfKernel, ModelKind::XgbKernel]
}
fn default_replicates() -> usize {
    20
}
fn default_components() -> usize {
    30
}
fn default_train_fraction() -> f64 {
    0.75
}
fn default_rf_trees() -> usize {
    500
}
fn default_xgb_rounds() -> usize {
    100
}
fn default_output_dir() -> PathBuf {
    PathBuf::from("treekta-out")
}

impl ExperimentConfig {
    pub fn new(data: DataSource) -> Self {
        ExperimentConfig {
            name: default_name(),
            data,
            models: default_models(),
            replicates: default_replicates(),
            landmark_counts: Vec::new(),
            n_components: default_components(),
            master_seed: 0,
            train_fraction: default_train_fraction(),
            train_size: None,
            rf_trees: default_rf_trees(),
            xgb_rounds: default_xgb_rounds(),
            output_dir: default_output_dir(),
        }
    }

    /// Reduced scale for quick runs: 20 replicates, 200 forest trees.
    pub fn desk_preset(mut self) -> Self {
        self.replicates = 20;
        self.rf_trees = 200;
        self
    }

    pub fn from_json_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.replicates == 0 {
            return Err(Error::InvalidConfig("replicates must be >= 1".into()));
        }
        if self.models.is_empty() {
            return Err(Error::InvalidConfig("at least one model required".into()));
        }
        if self.train_size.is_none() && !(self.train_fraction > 0.0 && self.train_fraction < 1.0)
        {
            return Err(Error::InvalidConfig(format!(
                "train_fraction must be in (0, 1), got {}",
                self.train_fraction
            )));
        }
        if self.rf_trees == 0 || self.xgb_rounds == 0 {
            return Err(Error::InvalidConfig(
                "rf_trees and xgb_rounds must be >= 1".into(),
            ));
        }
        Ok(())
    }
}

/// One model's results on one replicate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicateRecord {
    pub replicate: usize,
    pub model: ModelKind,
    /// |pearson| between test predictions and test targets.
    pub test_cc: f64,
    pub test_mse: f64,
    pub align_first: Option<f64>,
    pub align_best: Option<f64>,
    pub align_top5: Option<f64>,
    pub spectrum: Option<AlignmentSpectrum>,
    /// (n_landmarks, spectrum) pairs, in config order.
    pub landmark_spectra: Vec<(usize, AlignmentSpectrum)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricStat {
    pub mean: f64,
    /// Sample standard deviation (n-1); 0 for a single replicate.
    pub sd: f64,
}

fn metric_stat(values: &[f64]) -> MetricStat {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let sd = if values.len() < 2 {
        0.0
    } else {
        (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    };
    MetricStat { mean, sd }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelAggregate {
    pub model: ModelKind,
    pub replicates: usize,
    pub test_cc: MetricStat,
    pub test_mse: MetricStat,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub align_first: Option<MetricStat>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub align_best: Option<MetricStat>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub align_top5: Option<MetricStat>,
}

/// Component-wise mean spectrum of one model across replicates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeanSpectrum {
    pub model: ModelKind,
    /// None for the full-kernel spectrum, Some(n_L) for landmark designs.
    pub n_landmarks: Option<usize>,
    pub components: Vec<AlignmentComponent>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub records: Vec<ReplicateRecord>,
    pub aggregates: Vec<ModelAggregate>,
    pub mean_spectra: Vec<MeanSpectrum>,
}

impl ExperimentReport {
    pub fn aggregate_for(&self, model: ModelKind) -> Option<&ModelAggregate> {
        self.aggregates.iter().find(|a| a.model == model)
    }

    /// The stable summary document (config + aggregates), pretty-printed.
    pub fn summary_json(&self) -> String {
        #[derive(Serialize)]
        struct Summary<'a> {
            name: &'a str,
            config: &'a ExperimentConfig,
            aggregates: &'a [ModelAggregate],
        }
        let mut s = serde_json::to_string_pretty(&Summary {
            name: &self.config.name,
            config: &self.config,
            aggregates: &self.aggregates,
        })
        .expect("report serialization cannot fail");
        s.push('\n');
        s
    }
}

enum FittedEnsemble {
    Forest(RandomForest),
    Boosted(GbtModel),
}

impl FittedEnsemble {
    fn predict(&self, x: &[f64]) -> f64 {
        match self {
            FittedEnsemble::Forest(f) => predict_rf(f, x),
            FittedEnsemble::Boosted(g) => predict_gbt(g, x),
        }
    }
}

impl LeafEnsemble for FittedEnsemble {
    fn trees(&self) -> &[crate::tree::Tree] {
        match self {
            FittedEnsemble::Forest(f) => f.trees(),
            FittedEnsemble::Boosted(g) => g.trees(),
        }
    }
    fn n_features(&self) -> usize {
        match self {
            FittedEnsemble::Forest(f) => LeafEnsemble::n_features(f),
            FittedEnsemble::Boosted(g) => LeafEnsemble::n_features(g),
        }
    }
}

// seed stream tags within a replicate
const STREAM_DATA: u64 = 0;
const STREAM_SPLIT: u64 = 1;
const STREAM_LANDMARKS: u64 = 2;
const STREAM_FOREST: u64 = 16;
const STREAM_BOOST: u64 = 17;

fn replicate_data(
    config: &ExperimentConfig,
    source: Option<&Dataset>,
    rep_seed: u64,
) -> Result<(Dataset, Dataset)> {
    let full = match (&config.data, source) {
        (DataSource::Simulated { family, n, p, noise_sd }, _) => {
            let mut spec = ScenarioSpec::new(*family, *n, *p, derive_seed(rep_seed, STREAM_DATA));
            if let Some(sd) = noise_sd {
                spec = spec.with_noise_sd(*sd);
            }
            generate(&spec)?
        }
        (DataSource::Csv { n_subsample, .. }, Some(data)) => {
            if let Some(n_sub) = n_subsample {
                let mut rng =
                    ChaCha8Rng::seed_from_u64(derive_seed(rep_seed, STREAM_DATA));
                subsample(data, *n_sub, &mut rng)?
            } else {
                data.clone()
            }
        }
        (DataSource::Csv { .. }, None) => {
            return Err(Error::InvalidConfig(
                "csv source requires preloaded data".into(),
            ))
        }
    };

    let mut split_rng = ChaCha8Rng::seed_from_u64(derive_seed(rep_seed, STREAM_SPLIT));
    match config.train_size {
        Some(size) => split_train_test_sized(&full, size, &mut split_rng),
        None => split_train_test(&full, config.train_fraction, &mut split_rng),
    }
}

/// Runs every configured model on one replicate. Deterministic in
/// (config.master_seed, replicate).
pub fn run_replicate(
    config: &ExperimentConfig,
    source: Option<&Dataset>,
    replicate: usize,
) -> Result<Vec<ReplicateRecord>> {
    let rep_seed = derive_seed(config.master_seed, replicate as u64);
    let (train, test) = replicate_data(config, source, rep_seed)?;

    // one fitted ensemble per family, shared between its kernel and raw views
    let mut forest: Option<FittedEnsemble> = None;
    let mut boosted: Option<FittedEnsemble> = None;

    let mut records = Vec::with_capacity(config.models.len());
    for model in &config.models {
        let ensemble: &FittedEnsemble = if model.uses_forest() {
            if forest.is_none() {
                let cfg = TreeConfig::for_forest(train.p());
                forest = Some(FittedEnsemble::Forest(fit_rf(
                    &train,
                    config.rf_trees,
                    &cfg,
                    derive_seed(rep_seed, STREAM_FOREST),
                )?));
            }
            forest.as_ref().unwrap()
        } else {
            if boosted.is_none() {
                boosted = Some(FittedEnsemble::Boosted(fit_gbt(
                    &train,
                    config.xgb_rounds,
                    &GbtParams::default(),
                    derive_seed(rep_seed, STREAM_BOOST),
                )?));
            }
            boosted.as_ref().unwrap()
        };

        let record = if model.is_kernel() {
            let k = kernel_matrix(ensemble, &train)?;
            let eig = sym_eig_auto(k.values())?;
            let n_comp = config.n_components.min(train.n());
            let spectrum =
                alignment_spectrum(&eig.eigenvectors, &eig.eigenvalues, train.y(), n_comp)?;
            let summary = summarize_alignment(&spectrum)?;

            let mut landmark_spectra = Vec::with_capacity(config.landmark_counts.len());
            for &n_l in &config.landmark_counts {
                let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(
                    derive_seed(rep_seed, STREAM_LANDMARKS),
                    n_l as u64,
                ));
                let indices = select_landmarks(train.n(), n_l, &mut rng)?;
                let design = LandmarkDesign::from_kernel(&k, &indices)?;
                let lspec =
                    landmark_alignment(&design, train.y(), config.n_components.min(n_l))?;
                landmark_spectra.push((n_l, lspec));
            }

            let krr = fit_krr(&k, train.y())?;
            let kx = cross_kernel(ensemble, &test, &train)?;
            let preds = predict_krr(&krr, &kx)?;
            let (cc, mse) = score(&preds, test.y());
            ReplicateRecord {
                replicate,
                model: *model,
                test_cc: cc,
                test_mse: mse,
                align_first: Some(summary.first),
                align_best: Some(summary.best),
                align_top5: Some(summary.top5_of_10),
                spectrum: Some(spectrum),
                landmark_spectra,
            }
        } else {
            let preds: Vec<f64> = (0..test.n()).map(|i| ensemble.predict(test.row(i))).collect();
            let (cc, mse) = score(&preds, test.y());
            ReplicateRecord {
                replicate,
                model: *model,
                test_cc: cc,
                test_mse: mse,
                align_first: None,
                align_best: None,
                align_top5: None,
                spectrum: None,
                landmark_spectra: Vec::new(),
            }
        };
        records.push(record);
    }
    Ok(records)
}

fn score(preds: &[f64], targets: &[f64]) -> (f64, f64) {
    let cc = pearson(preds, targets).abs();
    let mse = preds
        .iter()
        .zip(targets)
        .map(|(p, y)| (p - y).powi(2))
        .sum::<f64>()
        / targets.len() as f64;
    (cc, mse)
}

/// Runs all replicates (in parallel when available) and aggregates.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentReport> {
    config.validate()?;
    let source: Option<Dataset> = match &config.data {
        DataSource::Csv { path, schema, .. } => Some(load_csv(path, schema)?),
        DataSource::Simulated { .. } => None,
    };
    let source_ref = source.as_ref();

    let indices: Vec<usize> = (0..config.replicates).collect();
    #[cfg(feature = "parallel")]
    let nested: Result<Vec<Vec<ReplicateRecord>>> = indices
        .par_iter()
        .map(|&r| run_replicate(config, source_ref, r))
        .collect();
    #[cfg(not(feature = "parallel"))]
    let nested: Result<Vec<Vec<ReplicateRecord>>> = indices
        .iter()
        .map(|&r| run_replicate(config, source_ref, r))
        .collect();

    let records: Vec<ReplicateRecord> = nested?.into_iter().flatten().collect();
    let aggregates = aggregate(config, &records)?;
    let mean_spectra = mean_spectra(config, &records);

    Ok(ExperimentReport {
        config: config.clone(),
        records,
        aggregates,
        mean_spectra,
    })
}

/// Means and sample standard deviations per model, in config order.
pub fn aggregate(
    config: &ExperimentConfig,
    records: &[ReplicateRecord],
) -> Result<Vec<ModelAggregate>> {
    let mut out = Vec::with_capacity(config.models.len());
    for model in &config.models {
        let rows: Vec<&ReplicateRecord> = records.iter().filter(|r| r.model == *model).collect();
        if rows.is_empty() {
            return Err(Error::InvalidConfig(format!(
                "no records for model {}",
                model.name()
            )));
        }
        let collect = |f: &dyn Fn(&ReplicateRecord) -> f64| -> Vec<f64> {
            rows.iter().map(|r| f(r)).collect()
        };
        let opt_stat = |f: &dyn Fn(&ReplicateRecord) -> Option<f64>| -> Option<MetricStat> {
            let vals: Vec<f64> = rows.iter().filter_map(|r| f(r)).collect();
            if vals.len() == rows.len() {
                Some(metric_stat(&vals))
            } else {
                None
            }
        };
        out.push(ModelAggregate {
            model: *model,
            replicates: rows.len(),
            test_cc: metric_stat(&collect(&|r| r.test_cc)),
            test_mse: metric_stat(&collect(&|r| r.test_mse)),
            align_first: opt_stat(&|r| r.align_first),
            align_best: opt_stat(&|r| r.align_best),
            align_top5: opt_stat(&|r| r.align_top5),
        });
    }
    Ok(out)
}

fn mean_components(spectra: &[&AlignmentSpectrum]) -> Vec<AlignmentComponent> {
    if spectra.is_empty() {
        return Vec::new();
    }
    let n_comp = spectra.iter().map(|s| s.len()).min().unwrap_or(0);
    (0..n_comp)
        .map(|i| {
            let m = spectra.len() as f64;
            AlignmentComponent {
                index: i + 1,
                value: spectra.iter().map(|s| s.components[i].value).sum::<f64>() / m,
                alignment: spectra
                    .iter()
                    .map(|s| s.components[i].alignment)
                    .sum::<f64>()
                    / m,
            }
        })
        .collect()
}

fn mean_spectra(config: &ExperimentConfig, records: &[ReplicateRecord]) -> Vec<MeanSpectrum> {
    let mut out = Vec::new();
    for model in &config.models {
        if !model.is_kernel() {
            continue;
        }
        let rows: Vec<&ReplicateRecord> = records.iter().filter(|r| r.model == *model).collect();
        let kernel_specs: Vec<&AlignmentSpectrum> =
            rows.iter().filter_map(|r| r.spectrum.as_ref()).collect();
        out.push(MeanSpectrum {
            model: *model,
            n_landmarks: None,
            components: mean_components(&kernel_specs),
        });
        for &n_l in &config.landmark_counts {
            let lspecs: Vec<&AlignmentSpectrum> = rows
                .iter()
                .flat_map(|r| {
                    r.landmark_spectra
                        .iter()
                        .filter(move |(c, _)| *c == n_l)
                        .map(|(_, s)| s)
                })
                .collect();
            out.push(MeanSpectrum {
                model: *model,
                n_landmarks: Some(n_l),
                components: mean_components(&lspecs),
            });
        }
    }
    out
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Writes report.csv, spectra.csv, summary.json and the SVG plots.
pub fn emit_outputs(report: &ExperimentReport, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();

    // per-replicate metric table
    let mut csv = String::from("replicate,model,test_cc,test_mse,align_first,align_best,align_top5\n");
    for r in &report.records {
        csv.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            r.replicate,
            r.model.name(),
            r.test_cc,
            r.test_mse,
            fmt_opt(r.align_first),
            fmt_opt(r.align_best),
            fmt_opt(r.align_top5),
        ));
    }
    written.push(write_file(dir.join("report.csv"), &csv)?);

    // mean spectra
    let mut csv = String::from("model,source,n_landmarks,component,value,alignment\n");
    for spec in &report.mean_spectra {
        let source = if spec.n_landmarks.is_some() { "landmark" } else { "kernel" };
        for c in &spec.components {
            csv.push_str(&format!(
                "{},{},{},{},{},{}\n",
                spec.model.name(),
                source,
                spec.n_landmarks.map(|v| v.to_string()).unwrap_or_default(),
                c.index,
                c.value,
                c.alignment,
            ));
        }
    }
    written.push(write_file(dir.join("spectra.csv"), &csv)?);

    written.push(write_file(dir.join("summary.json"), &report.summary_json())?);

    for path in render_plots(&report.config.name, &report.mean_spectra, &report.records, dir)? {
        written.push(path);
    }
    Ok(written)
}

fn write_file(path: PathBuf, content: &str) -> Result<PathBuf> {
    let mut f = fs::File::create(&path)?;
    f.write_all(content.as_bytes())?;
    Ok(path)
}

/// Spectrum chart per kernel model plus the three alignment-vs-performance
/// scatters. Factored out so `replot` can reuse it on parsed CSVs.
fn render_plots(
    name: &str,
    mean_spectra: &[MeanSpectrum],
    records: &[ReplicateRecord],
    dir: &Path,
) -> Result<Vec<PathBuf>> {
    let mut written = Vec::new();

    let mut models: Vec<ModelKind> = Vec::new();
    for s in mean_spectra {
        if !models.contains(&s.model) {
            models.push(s.model);
        }
    }
    for model in &models {
        let mut series = Vec::new();
        for spec in mean_spectra.iter().filter(|s| s.model == *model) {
            let label = match spec.n_landmarks {
                None => "full kernel".to_string(),
                Some(n_l) => format!("{} landmarks", n_l),
            };
            series.push(Series::new(
                label,
                spec.components
                    .iter()
                    .map(|c| (c.index as f64, c.alignment))
                    .collect(),
            ));
        }
        let cfg = ChartConfig::new(
            format!("{}: {} alignment spectrum", name, model.name()),
            "component",
            "|corr(u_i, Y)|",
        )
        .with_integer_x_ticks();
        let path = dir.join(format!("{}_spectrum.svg", model.name()));
        written.push(write_file(path, &line_chart(&cfg, &series))?);
    }

    let scatter_metrics: [(&str, fn(&ReplicateRecord) -> Option<f64>); 3] = [
        ("first", |r| r.align_first),
        ("best", |r| r.align_best),
        ("top5", |r| r.align_top5),
    ];
    for (metric_name, getter) in scatter_metrics {
        let mut series = Vec::new();
        let mut kernel_models: Vec<ModelKind> = Vec::new();
        for r in records {
            if r.model.is_kernel() && !kernel_models.contains(&r.model) {
                kernel_models.push(r.model);
            }
        }
        for model in kernel_models {
            let points: Vec<(f64, f64)> = records
                .iter()
                .filter(|r| r.model == model)
                .filter_map(|r| getter(r).map(|a| (a, r.test_cc)))
                .collect();
            if !points.is_empty() {
                series.push(Series::new(model.name(), points));
            }
        }
        if series.is_empty() {
            continue;
        }
        let cfg = ChartConfig::new(
            format!("{}: alignment ({}) vs test correlation", name, metric_name),
            &format!("align_{}", metric_name),
            "test cc",
        );
        let path = dir.join(format!("alignment_vs_cc_{}.svg", metric_name));
        written.push(write_file(path, &scatter_chart(&cfg, &series))?);
    }
    Ok(written)
}

fn parse_model(s: &str) -> Result<ModelKind> {
    match s {
        "rf_kernel" => Ok(ModelKind::RfKernel),
        "xgb_kernel" => Ok(ModelKind::XgbKernel),
        "rf" => Ok(ModelKind::Rf),
        "xgb" => Ok(ModelKind::Xgb),
        other => Err(Error::CsvFormat(format!("unknown model '{}'", other))),
    }
}

/// Re-renders the SVG plots of a report directory from its CSV files.
pub fn replot(dir: &Path) -> Result<Vec<PathBuf>> {
    let parse_f64 = |s: &str, row: usize, col: usize| -> Result<f64> {
        s.parse::<f64>().map_err(|e| Error::CsvParse {
            row,
            col,
            message: e.to_string(),
        })
    };

    // spectra.csv -> MeanSpectrum list
    let text = fs::read_to_string(dir.join("spectra.csv"))?;
    let mut mean_spectra: Vec<MeanSpectrum> = Vec::new();
    for (i, line) in text.lines().enumerate().skip(1) {
        if line.is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != 6 {
            return Err(Error::CsvFormat(format!(
                "spectra.csv row {}: expected 6 columns",
                i + 1
            )));
        }
        let model = parse_model(cells[0])?;
        let n_landmarks = if cells[2].is_empty() {
            None
        } else {
            Some(cells[2].parse::<usize>().map_err(|e| Error::CsvParse {
                row: i + 1,
                col: 3,
                message: e.to_string(),
            })?)
        };
        let component = AlignmentComponent {
            index: cells[3].parse().map_err(|_| Error::CsvParse {
                row: i + 1,
                col: 4,
                message: "bad component index".into(),
            })?,
            value: parse_f64(cells[4], i + 1, 5)?,
            alignment: parse_f64(cells[5], i + 1, 6)?,
        };
        match mean_spectra
            .iter_mut()
            .find(|s| s.model == model && s.n_landmarks == n_landmarks)
        {
            Some(s) => s.components.push(component),
            None => mean_spectra.push(MeanSpectrum {
                model,
                n_landmarks,
                components: vec![component],
            }),
        }
    }

    // report.csv -> skeleton records (only fields the plots need)
    let text = fs::read_to_string(dir.join("report.csv"))?;
    let mut records: Vec<ReplicateRecord> = Vec::new();
    for (i, line) in text.lines().enumerate().skip(1) {
        if line.is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != 7 {
            return Err(Error::CsvFormat(format!(
                "report.csv row {}: expected 7 columns",
                i + 1
            )));
        }
        let opt = |s: &str, col: usize| -> Result<Option<f64>> {
            if s.is_empty() {
                Ok(None)
            } else {
                parse_f64(s, i + 1, col).map(Some)
            }
        };
        records.push(ReplicateRecord {
            replicate: cells[0].parse().unwrap_or(0),
            model: parse_model(cells[1])?,
            test_cc: parse_f64(cells[2], i + 1, 3)?,
            test_mse: parse_f64(cells[3], i + 1, 4)?,
            align_first: opt(cells[4], 5)?,
            align_best: opt(cells[5], 6)?,
            align_top5: opt(cells[6], 7)?,
            spectrum: None,
            landmark_spectra: Vec::new(),
        });
    }

    let name = dir
        .file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "report".into());
    render_plots(&name, &mean_spectra, &records, dir)
}
