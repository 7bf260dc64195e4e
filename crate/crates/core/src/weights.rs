//! One-sided filter weights from rational transfer functions.
//!
//! The forward (ψ) expansion of an ARMA model is the power series of
//! θ(z)/φ(z); the inverse (π) expansion is that of φ(z)/θ(z). Both are held
//! in [`FilterWeights`], together with a geometric envelope
//! `|ψ_n| ≤ tail_const · tail_ratio^n` that certifies how much mass the
//! truncation drops.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::models::{self, ArmaModel, FarimaSpec};

/// Default truncation stops once the envelope falls below this fraction of `Σ|ψ_n|`.
pub const TRUNCATION_REL_TOL: f64 = 1e-14;
/// Hard cap on the default truncation length.
pub const MAX_DEFAULT_LEN: usize = 100_000;
/// Number of trailing lags inspected when estimating the decay ratio.
pub const RATIO_WINDOW: usize = 20;
/// Estimated ratios are clamped to `1 − RATIO_CLAMP`.
pub const RATIO_CLAMP: f64 = 1e-6;
/// Slack allowed above the root-implied decay rate of an ARMA expansion.
pub const ROOT_RATE_MARGIN: f64 = 0.01;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FilterWeights {
    coeffs: Vec<f64>,
    tail_ratio: f64,
    tail_const: f64,
}

impl FilterWeights {
    /// A finite impulse response: the coefficients are the whole filter.
    pub fn new(coeffs: Vec<f64>) -> Result<Self> {
        validate(&coeffs)?;
        Ok(Self {
            coeffs,
            tail_ratio: 0.0,
            tail_const: 0.0,
        })
    }

    /// A truncated prefix of an infinite expansion; the envelope of the
    /// dropped tail is estimated from the trailing ratios.
    pub fn from_truncated(coeffs: Vec<f64>) -> Result<Self> {
        validate(&coeffs)?;
        Ok(Self::with_envelope(coeffs, None))
    }

    /// The identity filter ψ = (1).
    pub fn identity() -> Self {
        Self::with_envelope(vec![1.0], None)
    }

    fn with_envelope(coeffs: Vec<f64>, root_rate: Option<f64>) -> Self {
        let tail_ratio = estimate_ratio(&coeffs, root_rate);
        let tail_const = envelope_constant(&coeffs, tail_ratio);
        Self {
            coeffs,
            tail_ratio,
            tail_const,
        }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Index of the last coefficient, `N`.
    pub fn len_minus_one(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn tail_ratio(&self) -> f64 {
        self.tail_ratio
    }

    pub fn tail_const(&self) -> f64 {
        self.tail_const
    }

    /// Bound on the dropped mass `Σ_{n>N} |ψ_n|` implied by the envelope.
    pub fn tail_mass_bound(&self) -> f64 {
        if self.tail_const == 0.0 {
            return 0.0;
        }
        let r = self.tail_ratio;
        self.tail_const * r.powi(self.coeffs.len() as i32) / (1.0 - r)
    }

    /// `Σ|ψ_n|` over the computed range plus the envelope's tail bound.
    pub fn abs_sum_bound(&self) -> f64 {
        self.coeffs.iter().map(|c| c.abs()).sum::<f64>() + self.tail_mass_bound()
    }
}

fn validate(coeffs: &[f64]) -> Result<()> {
    if coeffs.is_empty() {
        return Err(Error::Domain(
            "filter needs at least one coefficient".into(),
        ));
    }
    if let Some(bad) = coeffs.iter().find(|c| !c.is_finite()) {
        return Err(Error::Domain(format!(
            "non-finite filter coefficient {bad}"
        )));
    }
    Ok(())
}

/// Largest `|ψ_{n+1}/ψ_n|` over the trailing window, skipping zero `ψ_n`.
///
/// For ARMA expansions the root-implied rate `ρ` is known and the estimate is
/// kept within `[ρ, ρ + ROOT_RATE_MARGIN]`, since near-zero crossings of
/// oscillating expansions can make individual ratios arbitrarily large.
fn estimate_ratio(coeffs: &[f64], root_rate: Option<f64>) -> f64 {
    let last_nonzero = coeffs.iter().rposition(|&c| c != 0.0);
    // finite support: exact zero tail
    match last_nonzero {
        None => return 0.0,
        Some(i) if i + 1 < coeffs.len() && root_rate.is_none_or(|r| r == 0.0) => return 0.0,
        _ => {}
    }
    let start = coeffs.len().saturating_sub(RATIO_WINDOW + 1);
    let estimate = coeffs[start..]
        .windows(2)
        .filter(|w| w[0] != 0.0)
        .map(|w| (w[1] / w[0]).abs())
        .fold(0.0, f64::max);
    let estimate = match root_rate {
        Some(rho) if rho > 0.0 => estimate.min(rho + ROOT_RATE_MARGIN).max(rho),
        Some(_) => 0.0,
        None => estimate,
    };
    estimate.min(1.0 - RATIO_CLAMP)
}

/// Smallest `C` with `|ψ_n| ≤ C r^n` over the whole computed range.
fn envelope_constant(coeffs: &[f64], r: f64) -> f64 {
    if r == 0.0 {
        // finite support; the envelope covers only the zero tail past it
        return 0.0;
    }
    let ln_r = r.ln();
    let ln_c = coeffs
        .iter()
        .enumerate()
        .filter(|(_, c)| **c != 0.0)
        .map(|(n, c)| c.abs().ln() - n as f64 * ln_r)
        .fold(f64::NEG_INFINITY, f64::max);
    if ln_c == f64::NEG_INFINITY {
        0.0
    } else {
        // Round up so the bound survives evaluation of C·r^n in floating point.
        ln_c.exp() * (1.0 + 1e-12)
    }
}

/// Power-series coefficients of `num(z)/den(z)` by the linear recursion
/// `c_n = (num_n − Σ_{i≥1} den_i c_{n−i}) / den_0`.
pub(crate) fn expand_ratio(num: &[f64], den: &[f64], n_max: usize) -> Vec<f64> {
    let d0 = den[0];
    let mut out = Vec::with_capacity(n_max + 1);
    for n in 0..=n_max {
        let mut acc = num.get(n).copied().unwrap_or(0.0);
        for (i, &di) in den.iter().enumerate().skip(1).take(n) {
            acc -= di * out[n - i];
        }
        out.push(acc / d0);
    }
    out
}

/// Root-implied decay rate, withheld when a polynomial expansion (no
/// denominator roots) is cut before its last nonzero term.
fn exact_rate(roots: &models::RootReport, num: &[f64], n_max: usize) -> Option<f64> {
    let rate = roots.decay_rate();
    let degree = num.iter().rposition(|&c| c != 0.0).unwrap_or(0);
    (rate > 0.0 || n_max >= degree).then_some(rate)
}

/// Expands with the default truncation rule: smallest `n` such that
/// `tail_const · tail_ratio^n < TRUNCATION_REL_TOL · Σ|ψ|`, capped at
/// [`MAX_DEFAULT_LEN`].
fn expand_with_default_length(num: &[f64], den: &[f64], root_rate: f64) -> FilterWeights {
    let mut len = 64usize;
    loop {
        let w = FilterWeights::with_envelope(expand_ratio(num, den, len), Some(root_rate));
        let needed = needed_length(&w);
        if needed <= len || len >= MAX_DEFAULT_LEN {
            let n = needed.min(len);
            let mut coeffs = w.coeffs;
            coeffs.truncate(n + 1);
            return FilterWeights::with_envelope(coeffs, Some(root_rate));
        }
        len = needed.min(MAX_DEFAULT_LEN);
    }
}

fn needed_length(w: &FilterWeights) -> usize {
    let r = w.tail_ratio;
    if r == 0.0 || w.tail_const == 0.0 {
        return w.coeffs.iter().rposition(|&c| c != 0.0).unwrap_or(0);
    }
    let abs_sum: f64 = w.coeffs.iter().map(|c| c.abs()).sum();
    let target = TRUNCATION_REL_TOL * abs_sum / w.tail_const;
    if target >= 1.0 {
        return 0;
    }
    // smallest n with r^n < target
    (target.ln() / r.ln()).floor() as usize + 1
}

/// ψ-weights: coefficients of θ(z)/φ(z), from `ψ_n = θ_n + Σ_i φ_i ψ_{n−i}`.
///
/// `n_max = None` applies the default truncation rule.
pub fn arma_psi_weights(model: &ArmaModel, n_max: Option<usize>) -> Result<FilterWeights> {
    let roots = models::ensure_stationary(model)?;
    let num = model.ma_polynomial();
    let den = model.ar_polynomial();
    Ok(match n_max {
        Some(n) => {
            FilterWeights::with_envelope(expand_ratio(&num, &den, n), exact_rate(&roots, &num, n))
        }
        None => expand_with_default_length(&num, &den, roots.decay_rate()),
    })
}

/// π-weights: coefficients of φ(z)/θ(z), the inverse filter taking `X_t`
/// back to the innovations `a_t = Σ π_n X_{t−n}`.
pub fn arma_pi_weights(model: &ArmaModel, n_max: Option<usize>) -> Result<FilterWeights> {
    let roots = models::ensure_invertible(model)?;
    let num = model.ar_polynomial();
    let den = model.ma_polynomial();
    Ok(match n_max {
        Some(n) => {
            FilterWeights::with_envelope(expand_ratio(&num, &den, n), exact_rate(&roots, &num, n))
        }
        None => expand_with_default_length(&num, &den, roots.decay_rate()),
    })
}

/// First `n_max + 1` coefficients of `numerator / denominator` by schoolbook
/// long division: each quotient term is subtracted times the full divisor
/// from a running remainder.
///
/// Makes no stationarity assumption; used as an independent check on the
/// recursions above.
pub fn long_division_oracle(
    numerator: &[f64],
    denominator: &[f64],
    n_max: usize,
) -> Result<Vec<f64>> {
    let lead = denominator.first().copied().unwrap_or(0.0);
    if lead == 0.0 {
        return Err(Error::Domain("denominator constant term is zero".into()));
    }
    let mut remainder = vec![0.0; n_max + denominator.len()];
    for (slot, &c) in remainder.iter_mut().zip(numerator.iter().take(n_max + 1)) {
        *slot = c;
    }
    let mut quotient = Vec::with_capacity(n_max + 1);
    for n in 0..=n_max {
        let q = remainder[n] / lead;
        for (i, &b) in denominator.iter().enumerate() {
            remainder[n + i] -= q * b;
        }
        quotient.push(q);
    }
    Ok(quotient)
}

/// Weights of `(1 − z)^{−d}`: `ψ_0 = 1`, `ψ_n = ψ_{n−1} (n − 1 + d) / n`.
pub fn fractional_weights(d: f64, n_max: usize) -> Result<FilterWeights> {
    if !(d.is_finite() && d.abs() < 0.5) {
        return Err(Error::Domain(format!(
            "fractional order must satisfy |d| < 0.5, got {d}"
        )));
    }
    let mut coeffs = Vec::with_capacity(n_max + 1);
    coeffs.push(1.0);
    for n in 1..=n_max {
        let prev = coeffs[n - 1];
        coeffs.push(prev * (n as f64 - 1.0 + d) / n as f64);
    }
    Ok(FilterWeights::with_envelope(coeffs, None))
}

/// ψ-weights of a FARIMA process: fractional weights convolved with the ARMA
/// ψ-weights, truncated at `n_max`.
pub fn farima_psi_weights(spec: &FarimaSpec, n_max: usize) -> Result<FilterWeights> {
    let arma = arma_psi_weights(spec.arma(), Some(n_max))?;
    if spec.d() == 0.0 {
        return Ok(arma);
    }
    let frac = fractional_weights(spec.d(), n_max)?;
    let mut coeffs = convolve(frac.coeffs(), arma.coeffs());
    coeffs.truncate(n_max + 1);
    Ok(FilterWeights::with_envelope(coeffs, None))
}

/// Full linear convolution of two coefficient lists.
pub fn convolve(a: &[f64], b: &[f64]) -> Vec<f64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0.0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}
