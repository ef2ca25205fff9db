//! Browser demo: fit a tree ensemble on a simulated benchmark, extract its
//! leaf co-occurrence kernel and render alignment spectra, eigenvalue decay
//! and held-out KRR predictions as SVG, all client-side.

use wasm_bindgen::prelude::*;

use treekta::alignment::{alignment_spectrum, pearson};
use treekta::dataio;
use treekta::error::{Error, Result};
use treekta::gbt::{fit_gbt, GbtParams};
use treekta::harness::{run_replicate, DataSource, ExperimentConfig, ModelKind};
use treekta::kernel::{cross_kernel, kernel_matrix, LeafEnsemble};
use treekta::krr::{fit_krr, predict_krr};
use treekta::landmark::{landmark_alignment, select_landmarks, LandmarkDesign};
use treekta::linalg::sym_eig_auto;
use treekta::plot::{line_chart, scatter_with_lines, ChartConfig, Series};
use treekta::rf::fit_rf;
use treekta::rng::{ChaCha8Rng, SeedableRng};
use treekta::seed::derive_seed;
use treekta::simgen::{generate, split_train_test, ScenarioFamily, ScenarioSpec};
use treekta::tree::TreeConfig;
use treekta::Dataset;

const MAX_N: usize = 1000;
const MAX_P: usize = 60;
const MAX_TREES: usize = 500;

fn clamp_inputs(n: usize, p: usize, trees: usize) -> Result<()> {
    if n > MAX_N || p > MAX_P || trees > MAX_TREES {
        return Err(Error::InvalidConfig(format!(
            "demo limits: n <= {}, p <= {}, ensemble size <= {}",
            MAX_N, MAX_P, MAX_TREES
        )));
    }
    Ok(())
}

enum Ensemble {
    Forest(treekta::rf::RandomForest),
    Boosted(treekta::gbt::GbtModel),
}

impl LeafEnsemble for Ensemble {
    fn trees(&self) -> &[treekta::tree::Tree] {
        match self {
            Ensemble::Forest(f) => f.trees(),
            Ensemble::Boosted(g) => g.trees(),
        }
    }
    fn n_features(&self) -> usize {
        match self {
            Ensemble::Forest(f) => LeafEnsemble::n_features(f),
            Ensemble::Boosted(g) => LeafEnsemble::n_features(g),
        }
    }
}

fn fit_ensemble(model: &str, data: &Dataset, trees: usize, seed: u64) -> Result<Ensemble> {
    match model {
        "rf" => Ok(Ensemble::Forest(fit_rf(
            data,
            trees,
            &TreeConfig::for_forest(data.p()),
            seed,
        )?)),
        "xgb" => Ok(Ensemble::Boosted(fit_gbt(
            data,
            trees,
            &GbtParams::default(),
            seed,
        )?)),
        other => Err(Error::InvalidConfig(format!(
            "unknown model '{}' (expected rf or xgb)",
            other
        ))),
    }
}

fn parse_counts(landmarks: &str) -> Result<Vec<usize>> {
    let trimmed = landmarks.trim();
    if trimmed.is_empty() {
        return Ok(Vec::new());
    }
    trimmed
        .split(',')
        .map(|s| {
            s.trim()
                .parse::<usize>()
                .map_err(|_| Error::InvalidConfig(format!("bad landmark count '{}'", s)))
        })
        .collect()
}

/// Alignment spectrum SVG: full-kernel line plus one line per landmark count.
pub fn spectrum_svg_impl(
    family: &str,
    n: usize,
    p: usize,
    model: &str,
    trees: usize,
    seed: u64,
    landmarks: &str,
) -> Result<String> {
    clamp_inputs(n, p, trees)?;
    let spec = ScenarioSpec::new(ScenarioFamily::parse(family)?, n, p, seed);
    let data = generate(&spec)?;
    let ensemble = fit_ensemble(model, &data, trees, derive_seed(seed, 1))?;
    let kernel = kernel_matrix(&ensemble, &data)?;
    let eig = sym_eig_auto(kernel.values())?;
    let n_comp = 30.min(data.n());
    let spectrum = alignment_spectrum(&eig.eigenvectors, &eig.eigenvalues, data.y(), n_comp)?;

    let mut series = vec![Series::new(
        "full kernel",
        spectrum
            .components
            .iter()
            .map(|c| (c.index as f64, c.alignment))
            .collect(),
    )];
    for n_l in parse_counts(landmarks)? {
        if n_l == 0 || n_l > data.n() {
            return Err(Error::InvalidConfig(format!(
                "landmark count {} out of range (1..={})",
                n_l,
                data.n()
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, 2 + n_l as u64));
        let indices = select_landmarks(data.n(), n_l, &mut rng)?;
        let design = LandmarkDesign::from_kernel(&kernel, &indices)?;
        let lspec = landmark_alignment(&design, data.y(), n_comp.min(n_l))?;
        series.push(Series::new(
            format!("{} landmarks", n_l),
            lspec
                .components
                .iter()
                .map(|c| (c.index as f64, c.alignment))
                .collect(),
        ));
    }

    let cfg = ChartConfig::new(
        format!("{} / {}: kernel-target alignment", family, model),
        "component (by decreasing eigenvalue)",
        "|corr(u_i, Y)|",
    )
    .with_integer_x_ticks();
    Ok(line_chart(&cfg, &series))
}

/// Eigenvalue decay SVG for the same kernel (first 30 components).
pub fn eigenvalues_svg_impl(
    family: &str,
    n: usize,
    p: usize,
    model: &str,
    trees: usize,
    seed: u64,
) -> Result<String> {
    clamp_inputs(n, p, trees)?;
    let spec = ScenarioSpec::new(ScenarioFamily::parse(family)?, n, p, seed);
    let data = generate(&spec)?;
    let ensemble = fit_ensemble(model, &data, trees, derive_seed(seed, 1))?;
    let kernel = kernel_matrix(&ensemble, &data)?;
    let eig = sym_eig_auto(kernel.values())?;
    let n_comp = 30.min(data.n());
    let series = vec![Series::new(
        "eigenvalue",
        (0..n_comp)
            .map(|i| ((i + 1) as f64, eig.eigenvalues[i]))
            .collect(),
    )];
    let cfg = ChartConfig::new(
        format!("{} / {}: kernel eigenvalue decay", family, model),
        "component",
        "eigenvalue",
    )
    .with_integer_x_ticks();
    Ok(line_chart(&cfg, &series))
}

/// Held-out predictions SVG: kernel ridge regression on a 75/25 split,
/// predicted vs observed with the identity line.
pub fn prediction_svg_impl(
    family: &str,
    n: usize,
    p: usize,
    model: &str,
    trees: usize,
    seed: u64,
) -> Result<String> {
    clamp_inputs(n, p, trees)?;
    let spec = ScenarioSpec::new(ScenarioFamily::parse(family)?, n, p, seed);
    let data = generate(&spec)?;
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, 3));
    let (train, test) = split_train_test(&data, 0.75, &mut rng)?;

    let ensemble = fit_ensemble(model, &train, trees, derive_seed(seed, 1))?;
    let kernel = kernel_matrix(&ensemble, &train)?;
    let krr = fit_krr(&kernel, train.y())?;
    let kx = cross_kernel(&ensemble, &test, &train)?;
    let preds = predict_krr(&krr, &kx)?;

    let cc = pearson(&preds, test.y()).abs();
    let mse = preds
        .iter()
        .zip(test.y())
        .map(|(p, y)| (p - y).powi(2))
        .sum::<f64>()
        / test.n() as f64;

    let points: Vec<(f64, f64)> = test.y().iter().cloned().zip(preds).collect();
    let lo = points
        .iter()
        .flat_map(|&(a, b)| [a, b])
        .fold(f64::INFINITY, f64::min);
    let hi = points
        .iter()
        .flat_map(|&(a, b)| [a, b])
        .fold(f64::NEG_INFINITY, f64::max);
    let cfg = ChartConfig::new(
        format!(
            "{} / {} kernel ridge: cc {:.3}, mse {:.3}",
            family, model, cc, mse
        ),
        "observed Y",
        "predicted Y",
    );
    Ok(scatter_with_lines(
        &cfg,
        &[Series::new("test points", points)],
        &[Series::new("identity", vec![(lo, lo), (hi, hi)])],
    ))
}

/// One-replicate experiment summary as plain text (console-style).
pub fn replicate_summary_impl(
    family: &str,
    n: usize,
    p: usize,
    trees: usize,
    seed: u64,
) -> Result<String> {
    clamp_inputs(n, p, trees)?;
    let mut config = ExperimentConfig::new(DataSource::Simulated {
        family: ScenarioFamily::parse(family)?,
        n,
        p,
        noise_sd: None,
    });
    config.replicates = 1;
    config.rf_trees = trees;
    config.xgb_rounds = trees.min(100);
    config.master_seed = seed;
    config.models = vec![ModelKind::RfKernel, ModelKind::XgbKernel];
    let records = run_replicate(&config, None, 0)?;
    let mut out = String::new();
    for r in records {
        out.push_str(&format!(
            "{}: test cc {:.3}, mse {:.3}, align first {:.3} / best {:.3} / top5 {:.3}\n",
            r.model.name(),
            r.test_cc,
            r.test_mse,
            r.align_first.unwrap_or(0.0),
            r.align_best.unwrap_or(0.0),
            r.align_top5.unwrap_or(0.0),
        ));
    }
    Ok(out)
}

/// Simulated dataset as CSV text (x1..xp, y) for download.
pub fn dataset_csv_impl(family: &str, n: usize, p: usize, seed: u64) -> Result<String> {
    clamp_inputs(n, p, 1)?;
    let spec = ScenarioSpec::new(ScenarioFamily::parse(family)?, n, p, seed);
    let data = generate(&spec)?;
    Ok(dataio::to_csv_string(&data))
}

fn to_js<T>(r: Result<T>) -> std::result::Result<T, JsValue> {
    r.map_err(|e| JsValue::from_str(&e.to_string()))
}

#[wasm_bindgen]
pub fn spectrum_svg(
    family: &str,
    n: usize,
    p: usize,
    model: &str,
    trees: usize,
    seed: u64,
    landmarks: &str,
) -> std::result::Result<String, JsValue> {
    to_js(spectrum_svg_impl(family, n, p, model, trees, seed, landmarks))
}

#[wasm_bindgen]
pub fn eigenvalues_svg(
    family: &str,
    n: usize,
    p: usize,
    model: &str,
    trees: usize,
    seed: u64,
) -> std::result::Result<String, JsValue> {
    to_js(eigenvalues_svg_impl(family, n, p, model, trees, seed))
}

#[wasm_bindgen]
pub fn prediction_svg(
    family: &str,
    n: usize,
    p: usize,
    model: &str,
    trees: usize,
    seed: u64,
) -> std::result::Result<String, JsValue> {
    to_js(prediction_svg_impl(family, n, p, model, trees, seed))
}

#[wasm_bindgen]
pub fn replicate_summary(
    family: &str,
    n: usize,
    p: usize,
    trees: usize,
    seed: u64,
) -> std::result::Result<String, JsValue> {
    to_js(replicate_summary_impl(family, n, p, trees, seed))
}

#[wasm_bindgen]
pub fn dataset_csv(
    family: &str,
    n: usize,
    p: usize,
    seed: u64,
) -> std::result::Result<String, JsValue> {
    to_js(dataset_csv_impl(family, n, p, seed))
}
