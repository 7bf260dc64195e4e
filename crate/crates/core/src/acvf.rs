//! Autocovariance sequences and their propagation through linear filters.
//!
//! For a causal filter `Y_t = Σ ψ_n X_{t−n}` the output autocovariances are
//!
//! ```text
//! γ^Y_k = Σ_h γ^W_h γ^X_{k+h},      γ^W_h = Σ_n ψ_n ψ_{n+h}
//! ```
//!
//! with both sequences extended symmetrically to negative lags. The infinite
//! sum over `h` is cut at a horizon `H` chosen from the geometric envelope
//! `|γ^W_h| ≤ C r^h`, which bounds the dropped terms by
//! `2 C r^{H+1} γ^X_0 / (1 − r)`.

use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::weights::FilterWeights;

/// Horizon is chosen so the truncation bound is below this fraction of `γ^X_0 γ^W_0`.
pub const HORIZON_REL_TOL: f64 = 1e-12;
pub const MAX_HORIZON: usize = 1_000_000;
/// Fitted decay rates at or above `1 − RATE_CEILING_GAP` count as no envelope.
pub const RATE_CEILING_GAP: f64 = 1e-6;
/// Envelope rejected when the decay exponent over the full range shrinks below
/// this fraction of its value over the first half (power-law signature).
pub const HALF_RANGE_DECAY_RATIO: f64 = 0.75;

/// What is known about an autocovariance sequence past its computed range.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Tail {
    /// `|γ_k| ≤ c r^k`.
    Geometric {
        c: f64,
        r: f64,
    },
    /// `|γ_k| ≈ c k^{−alpha}` asymptotically.
    Power {
        c: f64,
        alpha: f64,
    },
    /// Exactly zero past the computed range.
    Zero,
    Unknown,
}

impl Tail {
    fn scaled(self, factor: f64) -> Self {
        let factor = factor.abs();
        match self {
            Tail::Geometric { c, r } => Tail::Geometric { c: c * factor, r },
            Tail::Power { c, alpha } => Tail::Power {
                c: c * factor,
                alpha,
            },
            other => other,
        }
    }
}

/// A truncated autocovariance sequence `γ_0..γ_K`; `γ_{−k} = γ_k` is implied.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AcvfSequence {
    values: Vec<f64>,
    tail: Tail,
}

impl AcvfSequence {
    /// Validates `γ_0 ≥ 0`, finiteness, and `|γ_k| ≤ γ_0` up to rounding.
    pub fn new(values: Vec<f64>, tail: Tail) -> Result<Self> {
        let Some(&g0) = values.first() else {
            return Err(Error::Domain("autocovariance sequence is empty".into()));
        };
        if let Some((k, v)) = values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::Domain(format!("gamma_{k} = {v} is not finite")));
        }
        if g0 < 0.0 {
            return Err(Error::Domain(format!("gamma_0 = {g0} is negative")));
        }
        let slack = g0 * (1.0 + 1e-9);
        if let Some((k, v)) = values.iter().enumerate().find(|(_, v)| v.abs() > slack) {
            return Err(Error::Domain(format!(
                "|gamma_{k}| = {} exceeds gamma_0 = {g0}",
                v.abs()
            )));
        }
        Ok(Self { values, tail })
    }

    pub(crate) fn from_parts(values: Vec<f64>, tail: Tail) -> Self {
        debug_assert!(!values.is_empty());
        Self { values, tail }
    }

    /// White noise with variance `sigma2`, out to lag `k_max`.
    pub fn white_noise(sigma2: f64, k_max: usize) -> Self {
        let mut values = vec![0.0; k_max + 1];
        values[0] = sigma2;
        Self {
            values,
            tail: Tail::Zero,
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn tail(&self) -> &Tail {
        &self.tail
    }

    pub fn with_tail(mut self, tail: Tail) -> Self {
        self.tail = tail;
        self
    }

    /// Largest computed lag `K`.
    pub fn max_lag(&self) -> usize {
        self.values.len() - 1
    }

    pub fn gamma0(&self) -> f64 {
        self.values[0]
    }

    /// `γ_k` for any integer lag within the computed range, using symmetry.
    pub fn at(&self, k: isize) -> Option<f64> {
        self.values.get(k.unsigned_abs()).copied()
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            values: self.values.iter().map(|v| v * factor).collect(),
            tail: self.tail.scaled(factor),
        }
    }

    pub fn truncated(&self, k_max: usize) -> Self {
        let mut values = self.values.clone();
        values.truncate(k_max + 1);
        Self {
            values,
            tail: if k_max < self.max_lag() {
                Tail::Unknown
            } else {
                self.tail
            },
        }
    }

    /// Smallest eigenvalue of the `(k+1)×(k+1)` Toeplitz matrix `[γ_{|i−j|}]`.
    pub fn toeplitz_min_eigenvalue(&self, k: usize) -> Result<f64> {
        if k > self.max_lag() {
            return Err(Error::InsufficientLags {
                needed: k + 1,
                available: self.values.len(),
            });
        }
        let m = DMatrix::from_fn(k + 1, k + 1, |i, j| self.values[i.abs_diff(j)]);
        Ok(SymmetricEigen::new(m).eigenvalues.min())
    }
}

/// Constants of a geometric envelope `|γ_k| ≤ c r^k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExpBoundFit {
    pub c: f64,
    pub r: f64,
    /// Lag at which the envelope is tight (0 for a degenerate fit).
    pub binding_lag: usize,
}

/// Subnormal magnitudes carry no relative precision and count as zero.
fn significant(v: f64) -> bool {
    v.abs() >= f64::MIN_POSITIVE
}

/// True iff `|γ_k| ≤ c r^k` for every computed lag, evaluated the way the
/// downstream bounds evaluate it. Lags where `c r^k` underflows are compared
/// in log space; subnormal `γ_k` count as zero.
pub fn envelope_holds(values: &[f64], c: f64, r: f64) -> bool {
    values.iter().enumerate().all(|(k, v)| {
        let bound = c * r.powi(k as i32);
        if !significant(*v) || v.abs() <= bound {
            true
        } else if bound < f64::MIN_POSITIVE && r > 0.0 && c > 0.0 {
            v.abs().ln() <= c.ln() + k as f64 * r.ln()
        } else {
            false
        }
    })
}

/// Sup-based geometric envelope for an autocovariance sequence.
///
/// With `C₀ = γ_0`, the rate is `r = max_{k≥1} (|γ_k| / C₀)^{1/k}`, nudged by
/// bisection to the smallest value for which [`envelope_holds`] in floating
/// point; `C = C₀` is then minimal for that `r`. Sequences that vanish past
/// lag 0 get the degenerate fit `(γ_0, 0)`. Subnormal values count as zero.
///
/// Returns [`Error::NoGeometricEnvelope`] when the rate reaches
/// `1 − RATE_CEILING_GAP`, or when the decay exponent `−ln r` over the whole
/// range is less than [`HALF_RANGE_DECAY_RATIO`] times its value over the
/// first half, which is how a power law `k^{−α}` presents on a finite range.
pub fn fit_exponential_bound(acvf: &AcvfSequence) -> Result<ExpBoundFit> {
    let values = acvf.values();
    let g0 = values[0];
    let last_nonzero = values.iter().rposition(|&v| significant(v)).unwrap_or(0);
    if g0 <= 0.0 || last_nonzero == 0 {
        return Ok(ExpBoundFit {
            c: g0.max(0.0),
            r: 0.0,
            binding_lag: 0,
        });
    }

    let rate = |k: usize| (values[k].abs() / g0).powf(1.0 / k as f64);
    let (binding_lag, raw) = (1..=last_nonzero)
        .filter(|&k| significant(values[k]))
        .map(|k| (k, rate(k)))
        .fold(
            (0, 0.0),
            |best, cur| if cur.1 > best.1 { cur } else { best },
        );

    if raw >= 1.0 - RATE_CEILING_GAP {
        return Err(Error::NoGeometricEnvelope { rate: raw });
    }
    if last_nonzero >= 8 {
        let half = (1..=last_nonzero / 2)
            .filter(|&k| significant(values[k]))
            .map(rate)
            .fold(0.0, f64::max);
        if half > 0.0 && -raw.ln() < HALF_RANGE_DECAY_RATIO * -half.ln() {
            return Err(Error::NoGeometricEnvelope { rate: raw });
        }
    }

    let mut lo = raw * (1.0 - 1e-9);
    let mut hi = raw * (1.0 + 1e-9);
    while !envelope_holds(values, g0, hi) {
        hi = hi + (hi - raw).max(f64::EPSILON);
    }
    if envelope_holds(values, g0, lo) {
        hi = lo;
    } else {
        for _ in 0..64 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if envelope_holds(values, g0, mid) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
    }
    if hi >= 1.0 - RATE_CEILING_GAP {
        return Err(Error::NoGeometricEnvelope { rate: hi });
    }
    Ok(ExpBoundFit {
        c: g0,
        r: hi,
        binding_lag,
    })
}

/// `γ^W_k = Σ_{n=0}^{N−k} ψ_n ψ_{n+k}` for `0 ≤ k ≤ k_max`: the
/// autocovariances of the filter driven by unit-variance white noise.
///
/// The tail descriptor is the envelope from [`fit_exponential_bound`], or
/// [`Tail::Zero`] when the weights have finite support and `k_max` reaches
/// past it.
pub fn filter_self_acvf(weights: &FilterWeights, k_max: usize) -> AcvfSequence {
    let psi = weights.coeffs();
    let values: Vec<f64> = (0..=k_max)
        .into_par_iter()
        .map(|k| {
            if k >= psi.len() {
                return 0.0;
            }
            psi[..psi.len() - k]
                .iter()
                .zip(&psi[k..])
                .map(|(a, b)| a * b)
                .sum()
        })
        .collect();
    let support_covered = weights.tail_const() == 0.0 && k_max >= weights.len_minus_one();
    let mut acvf = AcvfSequence::from_parts(values, Tail::Unknown);
    acvf.tail = if support_covered {
        Tail::Zero
    } else {
        match fit_exponential_bound(&acvf) {
            Ok(fit) => Tail::Geometric { c: fit.c, r: fit.r },
            Err(_) => Tail::Unknown,
        }
    };
    acvf
}

/// [`filter_self_acvf`] over a range long enough for [`truncation_horizon`]
/// to fit inside it, so compositions are not capped at the weight length.
pub fn filter_acvf_to_horizon(weights: &FilterWeights) -> AcvfSequence {
    let mut k_max = weights.len_minus_one().max(1);
    loop {
        let gw = filter_self_acvf(weights, k_max);
        match truncation_horizon(&gw) {
            Ok(h) if h.lags == gw.max_lag() && k_max < MAX_HORIZON => k_max *= 2,
            _ => return gw,
        }
    }
}

/// Truncation horizon of the `h`-sum and the bound it certifies.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Horizon {
    /// `H`: the sum runs over `−H ≤ h ≤ H`.
    pub lags: usize,
    /// `2 C r^{H+1} / (1 − r)`; multiply by `γ^X_0` for the absolute error bound.
    pub bound_per_unit: f64,
}

/// Horizon for a filter autocovariance `gw`.
///
/// Geometric tails pick the smallest `H` with
/// `2 C r^{H+1}/(1 − r) < HORIZON_REL_TOL · γ^W_0`, capped at [`MAX_HORIZON`]
/// and at the computed range of `gw` (the bound then reports the residual).
pub fn truncation_horizon(gw: &AcvfSequence) -> Result<Horizon> {
    match *gw.tail() {
        Tail::Zero => {
            let lags = gw.values.iter().rposition(|&v| v != 0.0).unwrap_or(0);
            Ok(Horizon {
                lags,
                bound_per_unit: 0.0,
            })
        }
        Tail::Geometric { r: 0.0, .. } => Ok(Horizon {
            lags: 0,
            bound_per_unit: 0.0,
        }),
        Tail::Geometric { c, r } => {
            let target = HORIZON_REL_TOL * gw.gamma0() * (1.0 - r) / (2.0 * c);
            // smallest H with r^{H+1} < target
            let needed = if target >= 1.0 {
                0
            } else {
                ((target.ln() / r.ln()).floor() as usize).min(MAX_HORIZON)
            };
            let lags = needed.min(gw.max_lag());
            Ok(Horizon {
                lags,
                bound_per_unit: 2.0 * c * r.powi(lags as i32 + 1) / (1.0 - r),
            })
        }
        Tail::Power { .. } | Tail::Unknown => Err(Error::TailUnknown),
    }
}

/// Output of [`compose_acvf`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComposedAcvf {
    pub acvf: AcvfSequence,
    pub horizon: Horizon,
    /// Bound on `|γ^Y_k − computed γ^Y_k|` from truncation, valid at every lag.
    pub truncation_bound: f64,
}

fn ensure_gx_range(gx: &AcvfSequence, k_max: usize, horizon: &Horizon) -> Result<()> {
    let needed = k_max + horizon.lags + 1;
    if gx.values.len() < needed {
        return Err(Error::InsufficientLags {
            needed,
            available: gx.values.len(),
        });
    }
    Ok(())
}

/// `γ^Y_k = Σ_{h=−H}^{H} γ^W_{|h|} γ^X_{|k+h|}` for `0 ≤ k ≤ k_max`.
///
/// Each lag is summed in ascending `h`, so results do not depend on how the
/// lags are scheduled across threads.
pub fn compose_acvf(gw: &AcvfSequence, gx: &AcvfSequence, k_max: usize) -> Result<ComposedAcvf> {
    let horizon = truncation_horizon(gw)?;
    ensure_gx_range(gx, k_max, &horizon)?;
    let h = horizon.lags as isize;
    let w = &gw.values;
    let x = &gx.values;
    let values: Vec<f64> = (0..=k_max as isize)
        .into_par_iter()
        .map(|k| {
            (-h..=h)
                .map(|j| w[j.unsigned_abs()] * x[(k + j).unsigned_abs()])
                .sum()
        })
        .collect();

    let filter_gain: f64 = 2.0 * w[..=horizon.lags].iter().sum::<f64>() - w[0];
    let tail = match *gx.tail() {
        Tail::Power { c, alpha } => Tail::Power {
            c: c * filter_gain.abs(),
            alpha,
        },
        Tail::Zero | Tail::Geometric { .. } => {
            match fit_exponential_bound(&AcvfSequence::from_parts(values.clone(), Tail::Unknown)) {
                Ok(fit) => Tail::Geometric { c: fit.c, r: fit.r },
                Err(_) => Tail::Unknown,
            }
        }
        Tail::Unknown => Tail::Unknown,
    };
    Ok(ComposedAcvf {
        acvf: AcvfSequence::from_parts(values, tail),
        horizon,
        truncation_bound: horizon.bound_per_unit * gx.gamma0(),
    })
}

/// The three pieces `γ^Y_k = ξ_1(k) + ξ_2(k) + ξ_3(k)` of the composition sum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct XiTriple {
    pub k: usize,
    /// `Σ_{j≥1} γ^W_{k+j} γ_j` (terms `h ≤ −k−1`).
    pub xi1: f64,
    /// `Σ_{j=0}^{k−1} γ^W_{k−j} γ_j` (terms `−k ≤ h ≤ −1`).
    pub xi2: f64,
    /// `Σ_{j≥0} γ^W_j γ_{k+j}` (terms `h ≥ 0`).
    pub xi3: f64,
}

impl XiTriple {
    pub fn sum(&self) -> f64 {
        self.xi1 + self.xi2 + self.xi3
    }
}

/// Splits the composition sum at lag `k ≥ 1`, under the same horizon as
/// [`compose_acvf`].
pub fn xi_decomposition(gw: &AcvfSequence, gx: &AcvfSequence, k: usize) -> Result<XiTriple> {
    if k == 0 {
        return Err(Error::Range("xi decomposition needs k >= 1".into()));
    }
    let horizon = truncation_horizon(gw)?;
    ensure_gx_range(gx, k, &horizon)?;
    Ok(xi_with_horizon(gw.values(), gx.values(), k, horizon.lags))
}

pub(crate) fn xi_with_horizon(w: &[f64], x: &[f64], k: usize, h: usize) -> XiTriple {
    let xi1 = (1..=h.saturating_sub(k)).map(|j| w[k + j] * x[j]).sum();
    let xi2 = (k.saturating_sub(h)..k).map(|j| w[k - j] * x[j]).sum();
    let xi3 = (0..=h).map(|j| w[j] * x[k + j]).sum();
    XiTriple { k, xi1, xi2, xi3 }
}

/// Right-hand sides of the three inequalities controlling `|ξ_i(k)|`, given
/// the envelope `|γ^W_h| ≤ C r^h`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct XiBounds {
    /// `C γ_0 r^k · r/(1−r)`
    pub bound1: f64,
    /// `C γ_0 r^{k/2}/(1−r) + C |γ_{j*}| r/(1−r)`
    pub bound2: f64,
    /// `C Σ_{j=0}^{H} r^j |γ_{k+j}|`
    pub bound3: f64,
    /// `argmax{|γ_j| : ⌊k/2⌋+1 ≤ j ≤ k−1}`, smallest on ties; `None` if the range is empty.
    pub j_star: Option<usize>,
}

pub fn xi_bounds(fit: &ExpBoundFit, gx: &[f64], k: usize, horizon: usize) -> XiBounds {
    let (c, r) = (fit.c, fit.r);
    let g0 = gx[0];
    let geo = r / (1.0 - r);
    let j_star = (k / 2 + 1..k).fold(None, |best: Option<usize>, j| match best {
        Some(b) if gx[b].abs() >= gx[j].abs() => Some(b),
        _ => Some(j),
    });
    let bound1 = c * g0 * r.powi(k as i32) * geo;
    let bound2 =
        c * g0 * r.powf(k as f64 / 2.0) / (1.0 - r) + j_star.map_or(0.0, |j| c * gx[j].abs() * geo);
    let bound3 = c
        * (0..=horizon)
            .map(|j| r.powi(j as i32) * gx[k + j].abs())
            .sum::<f64>();
    XiBounds {
        bound1,
        bound2,
        bound3,
        j_star,
    }
}
