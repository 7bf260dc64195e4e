//! Named models and filters used by the test suites and the CLI examples.

use crate::acvf::{self, AcvfSequence};
use crate::models::{ArmaModel, FarimaSpec, ProcessModel};
use crate::weights::{self, FilterWeights};
use crate::Result;

fn arma(ar: &[f64], ma: &[f64], sigma2: f64) -> ArmaModel {
    ArmaModel::new(ar.to_vec(), ma.to_vec(), sigma2).expect("zoo model")
}

/// Input processes: short-memory ARMA and long-memory FARIMA.
pub fn processes() -> Vec<(&'static str, ProcessModel)> {
    let farima =
        |d: f64, m: ArmaModel| ProcessModel::Farima(FarimaSpec::new(d, m).expect("zoo model"));
    vec![
        ("white_noise", ProcessModel::Arma(arma(&[], &[], 2.0))),
        ("ar1_0.5", ProcessModel::Arma(arma(&[0.5], &[], 1.0))),
        ("ar1_0.9", ProcessModel::Arma(arma(&[0.9], &[], 1.0))),
        ("ar1_-0.7", ProcessModel::Arma(arma(&[-0.7], &[], 1.0))),
        ("ma1_0.4", ProcessModel::Arma(arma(&[], &[0.4], 1.0))),
        ("ma2", ProcessModel::Arma(arma(&[], &[0.5, -0.3], 1.0))),
        (
            "ar2_real",
            ProcessModel::Arma(arma(&[1.5, -0.56], &[], 1.0)),
        ),
        (
            "ar2_complex",
            ProcessModel::Arma(arma(&[1.0, -0.5], &[], 1.0)),
        ),
        ("arma11", ProcessModel::Arma(arma(&[0.5], &[0.4], 1.0))),
        (
            "arma21",
            ProcessModel::Arma(arma(&[1.0, -0.5], &[0.3], 1.5)),
        ),
        ("farima_0.3", farima(0.3, arma(&[], &[], 1.0))),
        ("farima_0.1", farima(0.1, arma(&[], &[], 1.0))),
        ("farima_-0.3", farima(-0.3, arma(&[], &[], 1.0))),
        ("farima_1_0.2_1", farima(0.2, arma(&[0.5], &[0.4], 1.0))),
    ]
}

/// Invertible ARMA models whose π-weights serve as filters.
pub fn invertible_models() -> Vec<(&'static str, ArmaModel)> {
    vec![
        ("arma11", arma(&[0.5], &[0.4], 1.0)),
        ("ma1_0.4", arma(&[], &[0.4], 1.0)),
        ("ma1_-0.6", arma(&[], &[-0.6], 1.0)),
        ("ar2_real", arma(&[1.5, -0.56], &[], 1.0)),
        ("arma22", arma(&[0.3, 0.2], &[1.0, 0.5], 1.0)),
        ("arma12", arma(&[-0.3], &[0.5, 0.2], 1.0)),
    ]
}

/// Filters with geometric envelopes: identity, a geometric FIR, and π-weights.
pub fn filters() -> Vec<(&'static str, FilterWeights)> {
    let geometric: Vec<f64> = (0..60).map(|n| 0.5f64.powi(n)).collect();
    let mut out = vec![
        ("identity", FilterWeights::identity()),
        (
            "geometric_0.5",
            FilterWeights::new(geometric).expect("finite"),
        ),
    ];
    for (name, m) in invertible_models() {
        out.push((
            name,
            weights::arma_pi_weights(&m, None).expect("invertible"),
        ));
    }
    out
}

/// Every analytic autocovariance sequence the zoo produces, out to `k_max`.
pub fn analytic_sequences(k_max: usize) -> Result<Vec<(String, AcvfSequence)>> {
    let mut out = Vec::new();
    for (name, m) in processes() {
        out.push((format!("process:{name}"), m.acvf(k_max)?));
    }
    for (name, w) in filters() {
        out.push((format!("filter:{name}"), acvf::filter_self_acvf(&w, k_max)));
    }
    Ok(out)
}

/// Input/filter pairs used for Monte Carlo agreement; all inputs are ARMA so
/// they can be simulated without truncation bias.
pub fn monte_carlo_pairs() -> Vec<(&'static str, ArmaModel, FilterWeights)> {
    let geometric: Vec<f64> = (0..60).map(|n| 0.5f64.powi(n)).collect();
    let pi = |m: ArmaModel| weights::arma_pi_weights(&m, None).expect("invertible");
    vec![
        (
            "ar1_0.9 | geometric_0.5",
            arma(&[0.9], &[], 1.0),
            FilterWeights::new(geometric).expect("finite"),
        ),
        (
            "ma2 | pi(arma11)",
            arma(&[], &[0.5, -0.3], 1.0),
            pi(arma(&[0.5], &[0.4], 1.0)),
        ),
        (
            "arma11 | pi(arma11)",
            arma(&[0.5], &[0.4], 1.0),
            pi(arma(&[0.5], &[0.4], 1.0)),
        ),
        (
            "ar2_real | pi(ma1_0.4)",
            arma(&[1.5, -0.56], &[], 1.0),
            pi(arma(&[], &[0.4], 1.0)),
        ),
        (
            "arma21 | pi(arma12)",
            arma(&[1.0, -0.5], &[0.3], 1.5),
            pi(arma(&[-0.3], &[0.5, 0.2], 1.0)),
        ),
    ]
}
