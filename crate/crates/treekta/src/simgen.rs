//! Simulation benchmark generators: Friedman, Checkerboard, van der Laan,
//! Meier 1 and Meier 2.
//!
//! All draw features i.i.d. Uniform(0,1) except Checkerboard, which draws
//! rows from N(0, Sigma) with Sigma[j][k] = 0.9^|j-k| via a Cholesky factor.
//! Targets are f(x) plus one N(0, noise_sd^2) draw per row.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::linalg::cholesky;
use crate::matrix::Mat;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioFamily {
    Friedman,
    Checkerboard,
    VanDerLaan,
    Meier1,
    Meier2,
}

impl ScenarioFamily {
    pub const ALL: [ScenarioFamily; 5] = [
        ScenarioFamily::Friedman,
        ScenarioFamily::Checkerboard,
        ScenarioFamily::VanDerLaan,
        ScenarioFamily::Meier1,
        ScenarioFamily::Meier2,
    ];

    /// Features the response actually reads; `p` must be at least this.
    pub fn min_features(&self) -> usize {
        match self {
            ScenarioFamily::Friedman => 5,
            ScenarioFamily::Checkerboard => 20,
            ScenarioFamily::VanDerLaan => 10,
            ScenarioFamily::Meier1 => 4,
            ScenarioFamily::Meier2 => 4,
        }
    }

    /// Noise standard deviation: 1 for Friedman/Checkerboard, sqrt(0.5) for
    /// the rest (their N(0, 0.5) is read as variance 0.5).
    pub fn default_noise_sd(&self) -> f64 {
        match self {
            ScenarioFamily::Friedman | ScenarioFamily::Checkerboard => 1.0,
            _ => 0.5f64.sqrt(),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ScenarioFamily::Friedman => "friedman",
            ScenarioFamily::Checkerboard => "checkerboard",
            ScenarioFamily::VanDerLaan => "van_der_laan",
            ScenarioFamily::Meier1 => "meier1",
            ScenarioFamily::Meier2 => "meier2",
        }
    }

    pub fn parse(s: &str) -> Result<ScenarioFamily> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "friedman" => Ok(ScenarioFamily::Friedman),
            "checkerboard" => Ok(ScenarioFamily::Checkerboard),
            "van_der_laan" | "vanderlaan" | "vdl" => Ok(ScenarioFamily::VanDerLaan),
            "meier1" | "meier_1" => Ok(ScenarioFamily::Meier1),
            "meier2" | "meier_2" => Ok(ScenarioFamily::Meier2),
            other => Err(Error::InvalidConfig(format!(
                "unknown scenario family '{}'",
                other
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub family: ScenarioFamily,
    pub n: usize,
    pub p: usize,
    pub noise_sd: f64,
    pub seed: u64,
}

impl ScenarioSpec {
    /// Spec with the family's default noise level.
    pub fn new(family: ScenarioFamily, n: usize, p: usize, seed: u64) -> Self {
        ScenarioSpec {
            family,
            n,
            p,
            noise_sd: family.default_noise_sd(),
            seed,
        }
    }

    pub fn with_noise_sd(mut self, sd: f64) -> Self {
        self.noise_sd = sd;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.p < self.family.min_features() {
            return Err(Error::InvalidConfig(format!(
                "{} needs p >= {}, got {}",
                self.family.name(),
                self.family.min_features(),
                self.p
            )));
        }
        if self.n == 0 {
            return Err(Error::InvalidConfig("n must be >= 1".into()));
        }
        if !(self.noise_sd >= 0.0) {
            return Err(Error::InvalidConfig(format!(
                "noise_sd must be >= 0, got {}",
                self.noise_sd
            )));
        }
        Ok(())
    }
}

/// Noiseless regression function of each family, evaluated on one feature row.
pub fn response_surface(family: ScenarioFamily, x: &[f64]) -> f64 {
    use std::f64::consts::PI;
    let xt = |j: usize| 2.0 * (x[j] - 0.5);
    match family {
        ScenarioFamily::Friedman => {
            10.0 * (PI * x[0] * x[1]).sin() + 20.0 * (x[2] - 0.5).powi(2) + 10.0 * x[3]
                + 5.0 * x[4]
        }
        ScenarioFamily::Checkerboard => 2.0 * x[4] * x[9] + 2.0 * x[14] * x[19],
        ScenarioFamily::VanDerLaan => {
            xt(0) * xt(1) + xt(2).powi(2) + xt(7) * xt(9) - xt(5).powi(2)
        }
        ScenarioFamily::Meier1 => {
            -(2.0 * xt(0)).sin() + xt(1).powi(2) + xt(2) - xt(3).exp()
        }
        ScenarioFamily::Meier2 => {
            -xt(0)
                + (2.0 * xt(1) - 1.0).powi(2)
                + (2.0 * PI * xt(2)).sin() / (2.0 - (2.0 * PI * xt(3)).sin())
                + 2.0 * (2.0 * PI * xt(3)).cos()
                + 4.0 * (2.0 * PI * xt(3)).cos().powi(2)
        }
    }
}

/// Covariance used by the Checkerboard feature model.
pub fn checkerboard_covariance(p: usize) -> Mat {
    let mut sigma = Mat::zeros(p, p);
    for j in 0..p {
        for k in 0..p {
            sigma.set(j, k, 0.9f64.powi((j as i64 - k as i64).unsigned_abs() as i32));
        }
    }
    sigma
}

/// Draws a dataset: features, then one noise draw per row, all from a single
/// ChaCha stream seeded by `spec.seed`. Same spec, same bytes.
pub fn generate(spec: &ScenarioSpec) -> Result<Dataset> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let (n, p) = (spec.n, spec.p);

    let features = match spec.family {
        ScenarioFamily::Checkerboard => {
            let chol = cholesky(&checkerboard_covariance(p), 0.0)?;
            let mut data = vec![0.0; n * p];
            let mut z = vec![0.0; p];
            for row in data.chunks_exact_mut(p) {
                for zj in z.iter_mut() {
                    *zj = rng.sample(StandardNormal);
                }
                for (j, slot) in row.iter_mut().enumerate() {
                    let mut acc = 0.0;
                    let lrow = chol.row(j);
                    for k in 0..=j {
                        acc += lrow[k] * z[k];
                    }
                    *slot = acc;
                }
            }
            Mat::from_vec(n, p, data)?
        }
        _ => {
            let mut data = vec![0.0; n * p];
            for v in data.iter_mut() {
                *v = rng.gen::<f64>();
            }
            Mat::from_vec(n, p, data)?
        }
    };

    let mut targets = Vec::with_capacity(n);
    for i in 0..n {
        let noise: f64 = rng.sample(StandardNormal);
        targets.push(response_surface(spec.family, features.row(i)) + spec.noise_sd * noise);
    }

    Dataset::new(features, targets)
}

/// Random disjoint train/test split; train gets floor(fraction * n) rows.
pub fn split_train_test(
    data: &Dataset,
    train_fraction: f64,
    rng: &mut ChaCha8Rng,
) -> Result<(Dataset, Dataset)> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::InvalidConfig(format!(
            "train_fraction must be in (0, 1), got {}",
            train_fraction
        )));
    }
    let n = data.n();
    let n_train = (train_fraction * n as f64).floor() as usize;
    split_train_test_sized(data, n_train, rng)
}

/// Split with an explicit train size.
pub fn split_train_test_sized(
    data: &Dataset,
    n_train: usize,
    rng: &mut ChaCha8Rng,
) -> Result<(Dataset, Dataset)> {
    let n = data.n();
    if n_train == 0 || n_train >= n {
        return Err(Error::InvalidConfig(format!(
            "degenerate split: {} train rows of {}",
            n_train, n
        )));
    }
    let perm = rand::seq::index::sample(rng, n, n).into_vec();
    let train = data.select_rows(&perm[..n_train]);
    let test = data.select_rows(&perm[n_train..]);
    Ok((train, test))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_values() {
        // Friedman at x = 0.5 everywhere: 10 sin(pi/4) + 0 + 5 + 2.5
        let x = vec![0.5; 20];
        let f = response_surface(ScenarioFamily::Friedman, &x);
        assert!((f - (10.0 * (std::f64::consts::PI / 4.0).sin() + 7.5)).abs() < 1e-12);
        assert!((f - 14.571_067_811_865_476).abs() < 1e-12);

        let zeros = vec![0.0; 20];
        assert_eq!(response_surface(ScenarioFamily::Checkerboard, &zeros), 0.0);

        // x = 0.5 makes the shifted coordinates zero
        assert_eq!(response_surface(ScenarioFamily::VanDerLaan, &x), 0.0);
        assert!((response_surface(ScenarioFamily::Meier1, &x) - (-1.0)).abs() < 1e-12);
        assert!((response_surface(ScenarioFamily::Meier2, &x) - 7.0).abs() < 1e-12);
    }

    /// Second, independently written formula set; guards the production one.
    fn oracle_surface(family: ScenarioFamily, x: &[f64]) -> f64 {
        use std::f64::consts::PI;
        match family {
            ScenarioFamily::Friedman => {
                let s = (PI * x[0] * x[1]).sin();
                10.0 * s + 20.0 * (x[2] - 0.5) * (x[2] - 0.5) + 10.0 * x[3] + 5.0 * x[4]
            }
            ScenarioFamily::Checkerboard => 2.0 * (x[4] * x[9] + x[14] * x[19]),
            ScenarioFamily::VanDerLaan => {
                let t: Vec<f64> = x.iter().map(|v| 2.0 * v - 1.0).collect();
                t[0] * t[1] + t[2] * t[2] + t[7] * t[9] - t[5] * t[5]
            }
            ScenarioFamily::Meier1 => {
                let t: Vec<f64> = x.iter().map(|v| 2.0 * v - 1.0).collect();
                -(2.0 * t[0]).sin() + t[1] * t[1] + t[2] - t[3].exp()
            }
            ScenarioFamily::Meier2 => {
                let t: Vec<f64> = x.iter().map(|v| 2.0 * v - 1.0).collect();
                let two_pi = 2.0 * PI;
                -t[0] + (2.0 * t[1] - 1.0) * (2.0 * t[1] - 1.0)
                    + (two_pi * t[2]).sin() / (2.0 - (two_pi * t[3]).sin())
                    + 2.0 * (two_pi * t[3]).cos()
                    + 4.0 * (two_pi * t[3]).cos() * (two_pi * t[3]).cos()
            }
        }
    }

    #[test]
    fn noiseless_generation_matches_independent_oracle() {
        for family in ScenarioFamily::ALL {
            let spec = ScenarioSpec::new(family, 100, 20, 77).with_noise_sd(0.0);
            let data = generate(&spec).unwrap();
            for i in 0..data.n() {
                let expect = oracle_surface(family, data.row(i));
                assert!(
                    (data.y()[i] - expect).abs() <= 1e-12,
                    "{:?} row {}: {} vs {}",
                    family,
                    i,
                    data.y()[i],
                    expect
                );
            }
        }
    }

    #[test]
    fn same_seed_identical_dataset() {
        let spec = ScenarioSpec::new(ScenarioFamily::Checkerboard, 50, 20, 3);
        let a = generate(&spec).unwrap();
        let b = generate(&spec).unwrap();
        assert_eq!(a, b);
        let c = generate(&ScenarioSpec::new(ScenarioFamily::Checkerboard, 50, 20, 4)).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn checkerboard_sample_covariance_approaches_target() {
        let spec = ScenarioSpec::new(ScenarioFamily::Checkerboard, 20000, 20, 123);
        let data = generate(&spec).unwrap();
        let n = data.n() as f64;
        for j in 0..5 {
            for k in 0..5 {
                let mean_j: f64 = (0..data.n()).map(|i| data.x(i, j)).sum::<f64>() / n;
                let mean_k: f64 = (0..data.n()).map(|i| data.x(i, k)).sum::<f64>() / n;
                let cov: f64 = (0..data.n())
                    .map(|i| (data.x(i, j) - mean_j) * (data.x(i, k) - mean_k))
                    .sum::<f64>()
                    / (n - 1.0);
                let target = 0.9f64.powi((j as i32 - k as i32).abs());
                assert!(
                    (cov - target).abs() < 0.03,
                    "cov[{},{}] = {} vs {}",
                    j,
                    k,
                    cov,
                    target
                );
            }
        }
    }

    #[test]
    fn rejects_too_few_features() {
        let spec = ScenarioSpec::new(ScenarioFamily::Checkerboard, 100, 19, 0);
        assert!(matches!(generate(&spec), Err(Error::InvalidConfig(_))));
        let spec = ScenarioSpec::new(ScenarioFamily::Friedman, 100, 4, 0);
        assert!(generate(&spec).is_err());
    }

    #[test]
    fn split_sizes_and_partition() {
        let spec = ScenarioSpec::new(ScenarioFamily::Friedman, 800, 20, 5);
        let data = generate(&spec).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let (train, test) = split_train_test(&data, 0.75, &mut rng).unwrap();
        assert_eq!(train.n(), 600);
        assert_eq!(test.n(), 200);

        let small = generate(&ScenarioSpec::new(ScenarioFamily::Meier1, 4, 4, 0)).unwrap();
        let (tr, te) = split_train_test(&small, 0.75, &mut rng).unwrap();
        assert_eq!((tr.n(), te.n()), (3, 1));

        // every original row appears exactly once across the two halves
        let mut seen = vec![0usize; small.n()];
        for i in 0..tr.n() {
            let row = tr.row(i);
            let idx = (0..small.n())
                .find(|&r| small.row(r) == row)
                .expect("train row comes from the source");
            seen[idx] += 1;
        }
        for i in 0..te.n() {
            let row = te.row(i);
            let idx = (0..small.n())
                .find(|&r| small.row(r) == row)
                .expect("test row comes from the source");
            seen[idx] += 1;
        }
        assert!(seen.iter().all(|&c| c == 1));
    }

    #[test]
    fn split_rejects_degenerate() {
        let data = generate(&ScenarioSpec::new(ScenarioFamily::Meier1, 4, 4, 0)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(split_train_test(&data, 0.0, &mut rng).is_err());
        assert!(split_train_test(&data, 1.0, &mut rng).is_err());
        assert!(split_train_test(&data, 0.1, &mut rng).is_err()); // 0 train rows
    }
}
