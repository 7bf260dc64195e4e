//! Monte Carlo oracle: simulate linear processes and compare empirical
//! autocovariances with analytic ones.
//!
//! # Generator
//!
//! The noise stream is part of the output contract, so that a seed
//! reproduces a series bit for bit in any implementation:
//!
//! 1. State: xoshiro256** seeded from the 64-bit seed by four successive
//!    SplitMix64 outputs (the reference seeding procedure).
//! 2. Uniforms: `u = ((x >> 11) + 1) · 2^{−53}` in `(0, 1]` for each 64-bit
//!    output `x`.
//! 3. Gaussian noise: Box–Muller on consecutive pairs `(u1, u2)`, emitting
//!    `√(−2 ln u1) cos(2π u2)` then `√(−2 ln u1) sin(2π u2)`, scaled by
//!    `√variance`.
//! 4. Uniform noise: `√(3·variance) · (2u − 1)` from one uniform per draw.

use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256StarStar;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::acvf::{AcvfSequence, Tail};
use crate::error::{Error, Result};
use crate::weights::FilterWeights;

/// Truncation length used when simulating long-memory processes.
///
/// Dropping `ψ_n` for `n > N` lowers every autocovariance by about
/// `σ² Σ_{n>N} ψ_n ψ_{n+k}`, of order `N^{2d−1} / ((1−2d) Γ(d)²)`: about `3e-3`
/// at `d = 0.3` with unit variance.
pub const FARIMA_TRUNCATION: usize = 100_000;
/// Oracle agreement threshold in standard errors.
pub const Z_THRESHOLD: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub enum Noise {
    Gaussian(f64),
    /// Symmetric uniform with the given variance.
    Uniform(f64),
}

impl Noise {
    pub fn variance(&self) -> f64 {
        match *self {
            Noise::Gaussian(v) | Noise::Uniform(v) => v,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub n_samples: usize,
    pub burn_in: usize,
    pub seed: u64,
    pub noise: Noise,
}

impl SimConfig {
    pub fn gaussian(n_samples: usize, burn_in: usize, seed: u64) -> Self {
        Self {
            n_samples,
            burn_in,
            seed,
            noise: Noise::Gaussian(1.0),
        }
    }
}

/// The documented noise stream.
#[derive(Debug, Clone)]
pub struct NoiseStream {
    rng: Xoshiro256StarStar,
    noise: Noise,
    spare: Option<f64>,
}

impl NoiseStream {
    pub fn new(seed: u64, noise: Noise) -> Self {
        Self {
            rng: Xoshiro256StarStar::seed_from_u64(seed),
            noise,
            spare: None,
        }
    }

    /// Uniform on `(0, 1]`.
    pub fn next_uniform(&mut self) -> f64 {
        ((self.rng.next_u64() >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    fn next_standard_normal(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        let u1 = self.next_uniform();
        let u2 = self.next_uniform();
        let radius = (-2.0 * u1.ln()).sqrt();
        let angle = 2.0 * std::f64::consts::PI * u2;
        self.spare = Some(radius * angle.sin());
        radius * angle.cos()
    }

    pub fn next_value(&mut self) -> f64 {
        match self.noise {
            Noise::Gaussian(v) => v.sqrt() * self.next_standard_normal(),
            Noise::Uniform(v) => (3.0 * v).sqrt() * (2.0 * self.next_uniform() - 1.0),
        }
    }
}

fn validate(weights: &FilterWeights, config: &SimConfig) -> Result<()> {
    if config.n_samples < 1 {
        return Err(Error::Config("n_samples must be >= 1".into()));
    }
    let n = weights.len_minus_one();
    if config.burn_in < n {
        return Err(Error::Config(format!(
            "burn_in {} is shorter than the filter length {n}",
            config.burn_in
        )));
    }
    let v = config.noise.variance();
    if !(v.is_finite() && v > 0.0) {
        return Err(Error::Config(format!(
            "noise variance must be > 0, got {v}"
        )));
    }
    Ok(())
}

/// `X_t = Σ_{n=0}^{N} ψ_n b_{t−n}` for `t = 1..n_samples`, after discarding
/// `burn_in` noise values.
pub fn simulate_linear_process(weights: &FilterWeights, config: &SimConfig) -> Result<Vec<f64>> {
    validate(weights, config)?;
    let mut stream = NoiseStream::new(config.seed, config.noise);
    let noise: Vec<f64> = (0..config.burn_in + config.n_samples)
        .map(|_| stream.next_value())
        .collect();
    let mut out = filter_series(weights.coeffs(), &noise);
    out.drain(..config.burn_in - weights.len_minus_one());
    Ok(out)
}

/// Independent replicates using seeds `seed + i`.
pub fn simulate_replicates(
    weights: &FilterWeights,
    config: &SimConfig,
    count: usize,
) -> Result<Vec<Vec<f64>>> {
    validate(weights, config)?;
    (0..count as u64)
        .into_par_iter()
        .map(|i| {
            let cfg = SimConfig {
                seed: config.seed.wrapping_add(i),
                ..*config
            };
            simulate_linear_process(weights, &cfg)
        })
        .collect()
}

/// Applies a causal filter, returning `Y_t` for every `t ≥ N` (the first `N`
/// inputs only prime the filter).
pub fn apply_filter(weights: &FilterWeights, series: &[f64]) -> Result<Vec<f64>> {
    let n = weights.len_minus_one();
    if series.len() <= n {
        return Err(Error::Config(format!(
            "series of length {} is too short for a filter of length {}",
            series.len(),
            n + 1
        )));
    }
    Ok(filter_series(weights.coeffs(), series))
}

fn filter_series(psi: &[f64], input: &[f64]) -> Vec<f64> {
    let n = psi.len() - 1;
    (n..input.len())
        .into_par_iter()
        .map(|t| psi.iter().enumerate().map(|(m, &c)| c * input[t - m]).sum())
        .collect()
}

/// Biased estimator `γ̂_k = (1/n) Σ_{t=1}^{n−k} (x_t − x̄)(x_{t+k} − x̄)`.
pub fn empirical_acvf(series: &[f64], k_max: usize) -> Result<AcvfSequence> {
    let n = series.len();
    if k_max >= n {
        return Err(Error::Range(format!(
            "k_max {k_max} must be below the series length {n}"
        )));
    }
    let mean = series.iter().sum::<f64>() / n as f64;
    let centered: Vec<f64> = series.iter().map(|x| x - mean).collect();
    let values: Vec<f64> = (0..=k_max)
        .into_par_iter()
        .map(|k| {
            centered[..n - k]
                .iter()
                .zip(&centered[k..])
                .map(|(a, b)| a * b)
                .sum::<f64>()
                / n as f64
        })
        .collect();
    AcvfSequence::new(values, Tail::Unknown)
}

/// Bartlett standard error of `γ̂_k` for a Gaussian linear process,
/// `Var(γ̂_k) ≈ (1/n) Σ_j (γ_j² + γ_{j+k} γ_{j−k})`, summed over every lag the
/// estimate covers (lags beyond it count as zero).
pub fn bartlett_standard_error(empirical: &AcvfSequence, k: usize, n: usize) -> f64 {
    let j_max = empirical.max_lag() as isize;
    let g = |j: isize| empirical.at(j).unwrap_or(0.0);
    let var: f64 = (-j_max..=j_max)
        .map(|j| g(j) * g(j) + g(j + k as isize) * g(j - k as isize))
        .sum();
    (var.max(0.0) / n as f64).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LagAgreement {
    pub k: usize,
    pub analytic: f64,
    pub empirical: f64,
    pub se: f64,
    pub z: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleReport {
    pub n: usize,
    pub lags: Vec<LagAgreement>,
    pub max_abs_z: f64,
    pub pass: bool,
}

/// Per-lag `z_k = (γ̂_k − γ_k) / se_k` for `k ≤ k_max`; passes iff every
/// `|z_k| < Z_THRESHOLD`. A zero standard error counts as agreement only
/// when the two values coincide.
pub fn oracle_compare(
    analytic: &AcvfSequence,
    empirical: &AcvfSequence,
    k_max: usize,
    n: usize,
) -> Result<OracleReport> {
    let covered = analytic.max_lag().min(empirical.max_lag());
    if k_max > covered {
        return Err(Error::InsufficientLags {
            needed: k_max + 1,
            available: covered + 1,
        });
    }
    let lags: Vec<LagAgreement> = (0..=k_max)
        .map(|k| {
            let a = analytic.values()[k];
            let e = empirical.values()[k];
            let se = bartlett_standard_error(empirical, k, n);
            let diff = e - a;
            let z = if diff == 0.0 {
                0.0
            } else if se > 0.0 {
                diff / se
            } else {
                f64::INFINITY
            };
            LagAgreement {
                k,
                analytic: a,
                empirical: e,
                se,
                z,
            }
        })
        .collect();
    let max_abs_z = lags.iter().map(|l| l.z.abs()).fold(0.0, f64::max);
    Ok(OracleReport {
        n,
        lags,
        max_abs_z,
        pass: max_abs_z < Z_THRESHOLD,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn constant_series_has_zero_acvf() {
        let g = empirical_acvf(&[3.0; 10], 4).unwrap();
        assert!(g.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn alternating_series() {
        let g = empirical_acvf(&[1.0, -1.0, 1.0, -1.0], 1).unwrap();
        assert_eq!(g.values()[0], 1.0);
        assert_eq!(g.values()[1], -0.75);
    }

    #[test]
    fn empirical_range_error() {
        assert!(matches!(
            empirical_acvf(&[1.0, 2.0], 2),
            Err(Error::Range(_))
        ));
    }

    #[test]
    fn burn_in_must_cover_filter() {
        let w = FilterWeights::new(vec![1.0, 0.5, 0.25]).unwrap();
        let err = simulate_linear_process(&w, &SimConfig::gaussian(10, 1, 0));
        assert!(matches!(err, Err(Error::Config(_))));
        assert!(simulate_linear_process(&w, &SimConfig::gaussian(0, 5, 0)).is_err());
        let bad_noise = SimConfig {
            noise: Noise::Uniform(-1.0),
            ..SimConfig::gaussian(5, 5, 0)
        };
        assert!(simulate_linear_process(&w, &bad_noise).is_err());
    }

    #[test]
    fn filtered_output_lines_up_with_noise() {
        let w = FilterWeights::new(vec![1.0, 0.5]).unwrap();
        let cfg = SimConfig::gaussian(5, 3, 9);
        let x = simulate_linear_process(&w, &cfg).unwrap();
        let mut s = NoiseStream::new(9, Noise::Gaussian(1.0));
        let b: Vec<f64> = (0..8).map(|_| s.next_value()).collect();
        assert_eq!(x.len(), 5);
        for (t, v) in x.iter().enumerate() {
            assert_eq!(*v, b[t + 3] + 0.5 * b[t + 2]);
        }
    }

    #[test]
    fn uniform_noise_moments() {
        let mut s = NoiseStream::new(5, Noise::Uniform(2.0));
        let xs: Vec<f64> = (0..200_000).map(|_| s.next_value()).collect();
        let a = 6f64.sqrt();
        assert!(xs.iter().all(|x| x.abs() <= a));
        let var = xs.iter().map(|x| x * x).sum::<f64>() / xs.len() as f64;
        assert_relative_eq!(var, 2.0, max_relative = 0.02);
    }

    #[test]
    fn replicates_are_seed_streams() {
        let w = FilterWeights::identity();
        let cfg = SimConfig::gaussian(16, 0, 100);
        let reps = simulate_replicates(&w, &cfg, 3).unwrap();
        let second = simulate_linear_process(&w, &SimConfig { seed: 101, ..cfg }).unwrap();
        assert_eq!(reps[1], second);
        assert_ne!(reps[0], reps[1]);
    }

    #[test]
    fn apply_filter_drops_priming_values() {
        let w = FilterWeights::new(vec![1.0, -1.0]).unwrap();
        assert_eq!(apply_filter(&w, &[1.0, 3.0, 6.0]).unwrap(), vec![2.0, 3.0]);
        assert!(apply_filter(&w, &[1.0]).is_err());
    }

    #[test]
    fn identical_sequences_agree() {
        let g = AcvfSequence::new(vec![1.0, 0.5, 0.25], Tail::Unknown).unwrap();
        let r = oracle_compare(&g, &g, 2, 1000).unwrap();
        assert!(r.pass);
        assert_eq!(r.max_abs_z, 0.0);
    }

    #[test]
    fn shifted_lag_fails() {
        let emp = AcvfSequence::new(vec![1.0, 0.5, 0.25, 0.1], Tail::Unknown).unwrap();
        let n = 10_000;
        let se1 = bartlett_standard_error(&emp, 1, n);
        let mut v = emp.values().to_vec();
        v[1] += 10.0 * se1;
        let analytic = AcvfSequence::new(v, Tail::Unknown).unwrap();
        let r = oracle_compare(&analytic, &emp, 3, n).unwrap();
        assert!(!r.pass);
        assert_relative_eq!(r.lags[1].z, -10.0, max_relative = 1e-12);
        assert!(r.lags.iter().filter(|l| l.k != 1).all(|l| l.z == 0.0));
    }

    #[test]
    fn bartlett_for_white_noise() {
        let g = AcvfSequence::white_noise(2.0, 10);
        // lag 0 doubles: Var(γ̂_0) = 2γ_0²/n
        assert_relative_eq!(bartlett_standard_error(&g, 0, 100), (8.0f64 / 100.0).sqrt());
        assert_relative_eq!(bartlett_standard_error(&g, 3, 100), (4.0f64 / 100.0).sqrt());
    }
}
