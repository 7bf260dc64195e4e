//! Finite-lag diagnostics for the Berman condition `|γ_k| ln k → 0` and the
//! summability condition `Σ_k |γ_k| / k^ε < ∞`.
//!
//! Limits cannot be decided from a finite prefix, so each verdict is
//! pass/fail/inconclusive under fixed, ratio-based thresholds. Rescaling a
//! sequence by `c > 0` never changes a verdict.

use rayon::prelude::*;
use serde::Serialize;

use crate::acvf::{self, AcvfSequence, ExpBoundFit, Horizon, Tail};
use crate::error::{Error, Result};

pub const GRID_POINTS_PER_DECADE: usize = 50;
/// Berman passes only if the last-decade trend of `ln b_k` vs `ln k` is below this.
pub const BERMAN_TREND_MAX: f64 = -0.05;
/// Summability passes on an unknown tail when the last-decade increment is at
/// most this fraction of the final partial sum.
pub const CAUCHY_REL_TOL: f64 = 1e-6;
/// Power tails `k^{−α}` pass when `α + ε > 1 + POWER_MARGIN`.
pub const POWER_MARGIN: f64 = 0.02;
/// Magnitudes below `γ_0` times this are treated as zero by the Berman diagnostic.
pub const NEGLIGIBLE_REL: f64 = 1e-250;
pub const DEFAULT_EPSILON: f64 = 0.8;
pub const DEFAULT_K_MIN: usize = 2;
pub const DEFAULT_K_MAX: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

/// Integer lags from `k_min` to `k_max` spaced geometrically, about
/// `per_decade` per factor of ten, deduplicated and including both ends.
pub fn lag_grid(k_min: usize, k_max: usize, per_decade: usize) -> Vec<usize> {
    if k_max < k_min {
        return Vec::new();
    }
    let k_min = k_min.max(1);
    let step = 10f64.powf(1.0 / per_decade as f64);
    let mut grid = vec![k_min];
    let mut x = k_min as f64;
    loop {
        x *= step;
        let k = x.round() as usize;
        if k >= k_max {
            break;
        }
        if k > *grid.last().unwrap() {
            grid.push(k);
        }
    }
    if *grid.last().unwrap() != k_max {
        grid.push(k_max);
    }
    grid
}

/// `b_k = |γ_k| ln k`; zero at `k = 1`.
pub fn berman_statistic(acvf: &AcvfSequence, k: usize) -> Option<f64> {
    if k == 0 {
        return None;
    }
    acvf.values().get(k).map(|g| g.abs() * (k as f64).ln())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BermanReport {
    pub stats: Vec<(usize, f64)>,
    /// OLS slope of `ln b_k` on `ln k` over the last decade; `None` if fewer
    /// than two positive values are available.
    pub trend: Option<f64>,
    pub first_decade_max: f64,
    pub last_decade_max: f64,
    pub last_decade_min: f64,
    pub verdict: Verdict,
}

impl BermanReport {
    /// `max b_k` over the first decade divided by `max b_k` over the last.
    pub fn decade_decay_factor(&self) -> f64 {
        self.first_decade_max / self.last_decade_max
    }
}

fn check_range(acvf: &AcvfSequence, k_min: usize, k_max: usize) -> Result<()> {
    if k_min < 2 {
        return Err(Error::Range(format!("k_min must be >= 2, got {k_min}")));
    }
    if k_max < k_min {
        return Err(Error::Range(format!("k_max {k_max} < k_min {k_min}")));
    }
    if k_max > acvf.max_lag() {
        return Err(Error::Range(format!(
            "k_max {k_max} exceeds computed range {}",
            acvf.max_lag()
        )));
    }
    Ok(())
}

fn slope(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 {
        return None;
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Berman statistics on a geometric lag grid over `[k_min, k_max]`.
///
/// The first decade is `[k_min, 10 k_min]`, the last `[k_max/10, k_max]`.
/// Verdict:
/// - pass if `b_k` vanishes over the last decade, or if its last-decade
///   maximum is below its first-decade maximum and the last-decade log-log
///   trend is below [`BERMAN_TREND_MAX`];
/// - fail if the last-decade minimum exceeds the first-decade maximum;
/// - inconclusive otherwise.
///
/// Lags with `|γ_k| ≤ γ_0 · NEGLIGIBLE_REL` count as exact zeros, so that
/// underflowing geometric tails read the same at every scale.
pub fn berman_diagnostic(acvf: &AcvfSequence, k_min: usize, k_max: usize) -> Result<BermanReport> {
    check_range(acvf, k_min, k_max)?;
    let floor = acvf.gamma0().abs() * NEGLIGIBLE_REL;
    let stats: Vec<(usize, f64)> = lag_grid(k_min, k_max, GRID_POINTS_PER_DECADE)
        .into_iter()
        .map(|k| {
            let negligible = acvf.values()[k].abs() <= floor;
            (
                k,
                if negligible {
                    0.0
                } else {
                    berman_statistic(acvf, k).unwrap()
                },
            )
        })
        .collect();

    let first_end = k_min.saturating_mul(10).min(k_max);
    let last_start = (k_max / 10).max(k_min);
    let first: Vec<f64> = stats
        .iter()
        .filter(|s| s.0 <= first_end)
        .map(|s| s.1)
        .collect();
    let last: Vec<(usize, f64)> = stats
        .iter()
        .copied()
        .filter(|s| s.0 >= last_start)
        .collect();

    let first_decade_max = first.iter().copied().fold(0.0, f64::max);
    let last_decade_max = last.iter().map(|s| s.1).fold(0.0, f64::max);
    let last_decade_min = last.iter().map(|s| s.1).fold(f64::INFINITY, f64::min);
    let log_points: Vec<(f64, f64)> = last
        .iter()
        .filter(|s| s.1 > 0.0)
        .map(|&(k, b)| ((k as f64).ln(), b.ln()))
        .collect();
    let trend = slope(&log_points);

    let verdict = if last_decade_max == 0.0 {
        Verdict::Pass
    } else if last_decade_min > first_decade_max {
        Verdict::Fail
    } else if last_decade_max < first_decade_max && trend.is_some_and(|t| t < BERMAN_TREND_MAX) {
        Verdict::Pass
    } else {
        Verdict::Inconclusive
    };

    Ok(BermanReport {
        stats,
        trend,
        first_decade_max,
        last_decade_max,
        last_decade_min,
        verdict,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummabilityReport {
    pub epsilon: f64,
    /// `(K, S_K)` with `S_K = Σ_{k=1}^{K} |γ_k| / k^ε`, on a geometric grid.
    pub partial_sums: Vec<(usize, f64)>,
    /// Bound on `Σ_{k>K_max}` from the tail descriptor; `None` if the tail is
    /// unknown or the bound diverges.
    pub tail_estimate: Option<f64>,
    /// `(S_{K_max} − S_{⌊K_max/10⌋}) / S_{K_max}` (0 when `S_{K_max} = 0`).
    pub last_decade_increment: f64,
    pub verdict: Verdict,
}

/// Partial sums of `|γ_k| / k^ε` up to `k_max`.
///
/// Verdict by tail descriptor: zero or geometric tails certify a finite
/// remainder (pass); a power tail `k^{−α}` passes when
/// `α + ε > 1 + POWER_MARGIN` and fails when `α + ε ≤ 1`; an unknown tail
/// passes only if the last-decade increment is within [`CAUCHY_REL_TOL`].
pub fn summability_diagnostic(
    acvf: &AcvfSequence,
    epsilon: f64,
    k_max: usize,
) -> Result<SummabilityReport> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::Domain(format!(
            "epsilon must lie in (0, 1), got {epsilon}"
        )));
    }
    if k_max < 1 || k_max > acvf.max_lag() {
        return Err(Error::Range(format!(
            "k_max {k_max} must lie in [1, {}]",
            acvf.max_lag()
        )));
    }
    let values = acvf.values();
    let mut cumulative = Vec::with_capacity(k_max + 1);
    cumulative.push(0.0);
    let mut s = 0.0;
    for (k, g) in values.iter().enumerate().take(k_max + 1).skip(1) {
        s += g.abs() / (k as f64).powf(epsilon);
        cumulative.push(s);
    }
    let partial_sums = lag_grid(1, k_max, GRID_POINTS_PER_DECADE)
        .into_iter()
        .map(|k| (k, cumulative[k]))
        .collect();
    let total = cumulative[k_max];
    let last_decade_increment = if total == 0.0 {
        0.0
    } else {
        (total - cumulative[k_max / 10]) / total
    };

    let kp1 = (k_max + 1) as f64;
    let (tail_estimate, verdict) = match *acvf.tail() {
        Tail::Zero => (Some(0.0), Verdict::Pass),
        Tail::Geometric { r: 0.0, .. } => (Some(0.0), Verdict::Pass),
        Tail::Geometric { c, r } => (
            Some(c * r.powf(kp1) / (kp1.powf(epsilon) * (1.0 - r))),
            Verdict::Pass,
        ),
        Tail::Power { c, alpha } => {
            let exponent = alpha + epsilon;
            let estimate = (exponent > 1.0)
                .then(|| c * (k_max as f64).powf(1.0 - exponent) / (exponent - 1.0));
            let verdict = if exponent > 1.0 + POWER_MARGIN {
                Verdict::Pass
            } else if exponent <= 1.0 {
                Verdict::Fail
            } else {
                Verdict::Inconclusive
            };
            (estimate, verdict)
        }
        Tail::Unknown => {
            let verdict = if last_decade_increment <= CAUCHY_REL_TOL {
                Verdict::Pass
            } else {
                Verdict::Inconclusive
            };
            (None, verdict)
        }
    };

    Ok(SummabilityReport {
        epsilon,
        partial_sums,
        tail_estimate,
        last_decade_increment,
        verdict,
    })
}

/// Both diagnostics on one sequence.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionReport {
    pub berman: BermanReport,
    pub summability: SummabilityReport,
}

impl ConditionReport {
    pub fn both_pass(&self) -> bool {
        self.berman.verdict == Verdict::Pass && self.summability.verdict == Verdict::Pass
    }

    pub fn any_fail(&self) -> bool {
        self.berman.verdict == Verdict::Fail || self.summability.verdict == Verdict::Fail
    }
}

pub fn condition_report(
    acvf: &AcvfSequence,
    k_min: usize,
    k_max: usize,
    epsilon: f64,
) -> Result<ConditionReport> {
    Ok(ConditionReport {
        berman: berman_diagnostic(acvf, k_min, k_max)?,
        summability: summability_diagnostic(acvf, epsilon, k_max)?,
    })
}

/// One lag of the three ξ inequalities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct XiCheck {
    pub k: usize,
    pub xi1: f64,
    pub xi2: f64,
    pub xi3: f64,
    pub bound1: f64,
    pub bound2: f64,
    pub bound3: f64,
    pub ok: bool,
}

/// Relative slack for summation rounding when comparing `|ξ_i|` to its bound.
const XI_REL_SLACK: f64 = 1e-10;

/// Filter autocovariance with its envelope: `gw` itself if its tail is
/// already zero, otherwise `gw` re-tagged with the fitted envelope.
fn with_envelope(gw: &AcvfSequence) -> Result<(AcvfSequence, ExpBoundFit)> {
    let fit = acvf::fit_exponential_bound(gw)?;
    let gw = match gw.tail() {
        Tail::Zero => gw.clone(),
        _ => gw.clone().with_tail(Tail::Geometric { c: fit.c, r: fit.r }),
    };
    Ok((gw, fit))
}

/// Evaluates `ξ_1, ξ_2, ξ_3` and their bounds at each lag in `lags`, using
/// the envelope fitted to `gw`.
pub fn xi_checks(
    gw: &AcvfSequence,
    gx: &AcvfSequence,
    lags: &[usize],
) -> Result<(ExpBoundFit, Vec<XiCheck>)> {
    let (gw, fit) = with_envelope(gw)?;
    let horizon = acvf::truncation_horizon(&gw)?;
    let k_top = lags.iter().copied().max().unwrap_or(0);
    let needed = k_top + horizon.lags + 1;
    if gx.values().len() < needed {
        return Err(Error::InsufficientLags {
            needed,
            available: gx.values().len(),
        });
    }
    if let Some(&k) = lags.iter().find(|&&k| k < 2) {
        return Err(Error::Range(format!("xi checks need k >= 2, got {k}")));
    }
    let slack_abs = 1e-15 * fit.c * gx.gamma0().abs();
    let checks = lags
        .par_iter()
        .map(|&k| {
            let xi = acvf::xi_with_horizon(gw.values(), gx.values(), k, horizon.lags);
            let b = acvf::xi_bounds(&fit, gx.values(), k, horizon.lags);
            let within = |x: f64, bound: f64| x.abs() <= bound * (1.0 + XI_REL_SLACK) + slack_abs;
            XiCheck {
                k,
                xi1: xi.xi1,
                xi2: xi.xi2,
                xi3: xi.xi3,
                bound1: b.bound1,
                bound2: b.bound2,
                bound3: b.bound3,
                ok: within(xi.xi1, b.bound1)
                    && within(xi.xi2, b.bound2)
                    && within(xi.xi3, b.bound3),
            }
        })
        .collect();
    Ok((fit, checks))
}

/// Full check of the filtering result on one (filter, input) pair.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TheoremReport {
    /// Envelope `|γ^W_k| ≤ C r^k` of the filter autocovariance.
    pub envelope: ExpBoundFit,
    pub horizon: Horizon,
    pub truncation_bound: f64,
    /// Diagnostics on the input autocovariance.
    pub input: ConditionReport,
    pub berman: BermanReport,
    pub summability: SummabilityReport,
    pub xi_checks: Vec<XiCheck>,
    /// Input passes both diagnostics (the envelope is implied by `Ok`).
    pub hypotheses_hold: bool,
    /// False iff some ξ inequality is violated, or the hypotheses hold and
    /// the output fails a diagnostic.
    pub theorem_consistent: bool,
}

/// Composes `gw` with `gx`, diagnoses input and output over `[k_min, k_max]`
/// and checks the ξ inequalities at every grid lag.
///
/// A filter autocovariance without a geometric envelope returns
/// [`Error::NoGeometricEnvelope`]: the hypothesis fails, which says nothing
/// about the conclusion.
pub fn theorem_check(
    gw: &AcvfSequence,
    gx: &AcvfSequence,
    k_min: usize,
    k_max: usize,
    epsilon: f64,
) -> Result<TheoremReport> {
    let (gw, envelope) = with_envelope(gw)?;
    let composed = acvf::compose_acvf(&gw, gx, k_max)?;
    let input = condition_report(gx, k_min, k_max, epsilon)?;
    let output = condition_report(&composed.acvf, k_min, k_max, epsilon)?;
    let grid = lag_grid(k_min, k_max, GRID_POINTS_PER_DECADE);
    let (_, xi_checks) = xi_checks(&gw, gx, &grid)?;

    let hypotheses_hold = input.both_pass();
    let xi_ok = xi_checks.iter().all(|c| c.ok);
    let theorem_consistent = xi_ok && !(hypotheses_hold && output.any_fail());
    Ok(TheoremReport {
        envelope,
        horizon: composed.horizon,
        truncation_bound: composed.truncation_bound,
        input,
        berman: output.berman,
        summability: output.summability,
        xi_checks,
        hypotheses_hold,
        theorem_consistent,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn level_shift(k_max: usize) -> AcvfSequence {
        let mut v = vec![0.5; k_max + 1];
        v[0] = 1.0;
        AcvfSequence::new(v, Tail::Unknown).unwrap()
    }

    #[test]
    fn grid_shape() {
        let g = lag_grid(2, 100_000, 50);
        assert_eq!(g[0], 2);
        assert_eq!(*g.last().unwrap(), 100_000);
        assert!(g.windows(2).all(|w| w[0] < w[1]));
        // ~50 per decade over 4.7 decades, fewer at the dense low end
        assert!(g.len() > 180 && g.len() < 250, "{}", g.len());
        assert_eq!(lag_grid(5, 5, 50), vec![5]);
        assert!(lag_grid(6, 5, 50).is_empty());
    }

    #[test]
    fn berman_stat_vanishes_at_lag_one() {
        let s = level_shift(3);
        assert_eq!(berman_statistic(&s, 1), Some(0.0));
        assert_eq!(berman_statistic(&s, 0), None);
    }

    #[test]
    fn white_noise_passes() {
        let wn = AcvfSequence::white_noise(2.0, 1000);
        let r = condition_report(&wn, 2, 1000, 0.5).unwrap();
        assert_eq!(r.berman.verdict, Verdict::Pass);
        assert_eq!(r.summability.verdict, Verdict::Pass);
        assert!(r.berman.stats.iter().all(|s| s.1 == 0.0));
        assert!(r.summability.partial_sums.iter().all(|s| s.1 == 0.0));
        // same data, tail forgotten: still passes on the Cauchy rule
        let bare = wn.clone().with_tail(Tail::Unknown);
        assert_eq!(
            summability_diagnostic(&bare, 0.5, 1000).unwrap().verdict,
            Verdict::Pass
        );
    }

    #[test]
    fn level_shift_fails_berman() {
        let r = berman_diagnostic(&level_shift(100_000), 2, 100_000).unwrap();
        assert_eq!(r.verdict, Verdict::Fail);
        assert!(r.trend.unwrap() > 0.0);
    }

    #[test]
    fn range_errors() {
        let s = level_shift(100);
        assert!(matches!(berman_diagnostic(&s, 1, 50), Err(Error::Range(_))));
        assert!(matches!(
            berman_diagnostic(&s, 2, 101),
            Err(Error::Range(_))
        ));
        assert!(matches!(
            berman_diagnostic(&s, 60, 50),
            Err(Error::Range(_))
        ));
        assert!(matches!(
            summability_diagnostic(&s, 1.0, 50),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            summability_diagnostic(&s, 0.0, 50),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            summability_diagnostic(&s, 0.5, 101),
            Err(Error::Range(_))
        ));
    }

    #[test]
    fn geometric_tail_estimate() {
        let v: Vec<f64> = (0..=50).map(|k| 4.0 / 3.0 * 0.5f64.powi(k)).collect();
        let s = AcvfSequence::new(
            v,
            Tail::Geometric {
                c: 4.0 / 3.0,
                r: 0.5,
            },
        )
        .unwrap();
        let r = summability_diagnostic(&s, 0.5, 50).unwrap();
        assert_eq!(r.verdict, Verdict::Pass);
        let est = r.tail_estimate.unwrap();
        let expected = 4.0 / 3.0 * 0.5f64.powi(51) / (51f64.sqrt() * 0.5);
        assert!((est - expected).abs() <= 1e-15 * expected);
        let total = r.partial_sums.last().unwrap().1;
        assert!(total < 4.0 / 3.0);
    }

    #[test]
    fn power_tail_rule() {
        let v: Vec<f64> = (0..=1000).map(|k| (1.0 + k as f64).powf(-0.4)).collect();
        let s = AcvfSequence::new(v, Tail::Power { c: 1.0, alpha: 0.4 }).unwrap();
        assert_eq!(
            summability_diagnostic(&s, 0.8, 1000).unwrap().verdict,
            Verdict::Pass
        );
        assert_eq!(
            summability_diagnostic(&s, 0.3, 1000).unwrap().verdict,
            Verdict::Fail
        );
        assert_eq!(
            summability_diagnostic(&s, 0.61, 1000).unwrap().verdict,
            Verdict::Inconclusive
        );
        assert!(summability_diagnostic(&s, 0.3, 1000)
            .unwrap()
            .tail_estimate
            .is_none());
    }

    #[test]
    fn partial_sums_nondecreasing() {
        let s = level_shift(5000);
        let r = summability_diagnostic(&s, 0.5, 5000).unwrap();
        assert!(r.partial_sums.windows(2).all(|w| w[0].1 <= w[1].1));
        assert_eq!(r.verdict, Verdict::Inconclusive);
    }
}
