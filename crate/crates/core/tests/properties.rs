mod common;

use common::{random_arma, random_polynomial, Draws};
use lincov::acvf::{self, envelope_holds, fit_exponential_bound, AcvfSequence, Tail};
use lincov::diagnostics::{self, condition_report, summability_diagnostic, Verdict};
use lincov::models::{self, arma_acvf, farima_acvf, ArmaModel, FarimaSpec};
use lincov::weights::{self, convolve, long_division_oracle};
use lincov::zoo;
use proptest::prelude::*;

fn coeff() -> impl Strategy<Value = f64> {
    -2.0..2.0f64
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn long_division_reconvolves(
        num in prop::collection::vec(coeff(), 1..6),
        mut den in prop::collection::vec(coeff(), 1..5),
        lead in 0.5..2.0f64,
    ) {
        den[0] = lead;
        let n_max = 30;
        let q = long_division_oracle(&num, &den, n_max).unwrap();
        let back = convolve(&den, &q);
        for (n, b) in back.iter().enumerate().take(n_max + 1) {
            let target = num.get(n).copied().unwrap_or(0.0);
            let scale = 1.0f64.max(q.iter().take(n + 1).map(|c| c.abs()).fold(0.0, f64::max));
            prop_assert!((b - target).abs() <= 1e-12 * scale, "n={} {} vs {}", n, b, target);
        }
    }

    #[test]
    fn empirical_acvf_is_bounded_by_variance(xs in prop::collection::vec(-10.0..10.0f64, 2..200)) {
        let k_max = xs.len() - 1;
        let g = lincov::simulation::empirical_acvf(&xs, k_max).unwrap();
        let g0 = g.gamma0();
        prop_assert!(g.values().iter().all(|v| v.abs() <= g0 * (1.0 + 1e-12) + 1e-12));
    }

    #[test]
    fn random_models_satisfy_invariants(seed in any::<u64>()) {
        let mut draws = Draws::new(seed);
        let m = random_arma(&mut draws);

        // ψ ⋆ π = δ
        let psi = weights::arma_psi_weights(&m, Some(200)).unwrap();
        let pi = weights::arma_pi_weights(&m, Some(200)).unwrap();
        let conv = convolve(psi.coeffs(), pi.coeffs());
        for (n, c) in conv.iter().take(201).enumerate() {
            let target = if n == 0 { 1.0 } else { 0.0 };
            prop_assert!((c - target).abs() <= 1e-10, "n={} c={}", n, c);
        }

        // Yule–Walker past the MA order
        let g = arma_acvf(&m, 80).unwrap();
        let (p, q) = m.orders();
        for k in (q + 1).max(p)..=80 {
            let rhs: f64 = (0..p).map(|i| m.ar_coeffs()[i] * g.values()[k - 1 - i]).sum();
            prop_assert!((g.values()[k] - rhs).abs() <= 1e-10 * g.gamma0());
        }

        // σ² ψ-weight autocovariance reproduces the exact values
        let psi_full = weights::arma_psi_weights(&m, None).unwrap();
        let via_weights = acvf::filter_self_acvf(&psi_full, 80).scaled(m.innovation_variance());
        for k in 0..=80 {
            prop_assert!((via_weights.values()[k] - g.values()[k]).abs() <= 1e-10 * g.gamma0());
        }

        // valid autocovariance prefix
        prop_assert!(g.toeplitz_min_eigenvalue(80).unwrap() >= -1e-8 * g.gamma0());

        // envelope
        let fit = fit_exponential_bound(&g).unwrap();
        prop_assert!(envelope_holds(g.values(), fit.c, fit.r));
        prop_assert!(fit.r < 1.0);
    }
}

#[test]
fn recursion_matches_long_division() {
    let mut draws = Draws::new(7);
    for _ in 0..50 {
        let m = random_arma(&mut draws);
        let psi = weights::arma_psi_weights(&m, Some(200)).unwrap();
        let pi = weights::arma_pi_weights(&m, Some(200)).unwrap();
        let psi_o = long_division_oracle(&m.ma_polynomial(), &m.ar_polynomial(), 200).unwrap();
        let pi_o = long_division_oracle(&m.ar_polynomial(), &m.ma_polynomial(), 200).unwrap();
        for n in 0..=200 {
            assert!((psi.coeffs()[n] - psi_o[n]).abs() <= 1e-12 * psi_o[n].abs().max(1.0));
            assert!((pi.coeffs()[n] - pi_o[n]).abs() <= 1e-12 * pi_o[n].abs().max(1.0));
        }
    }
}

#[test]
fn pi_weights_decay_at_the_ma_root_rate() {
    let mut draws = Draws::new(11);
    for _ in 0..30 {
        let m = random_arma(&mut draws);
        let rate = models::check_invertible(&m).decay_rate();
        let pi = weights::arma_pi_weights(&m, Some(600)).unwrap();
        for n in 300..=600 {
            let c = pi.coeffs()[n].abs();
            if c > 0.0 {
                assert!(c.powf(1.0 / n as f64) <= rate + 0.01, "n={n} rate={rate}");
            }
        }
    }
}

#[test]
fn random_poly_helper_has_roots_outside() {
    let mut draws = Draws::new(3);
    for _ in 0..20 {
        let p = random_polynomial(&mut draws, 3, 0.9);
        let roots = models::polynomial_roots(&p);
        assert!(roots.iter().all(|z| z.norm() >= 1.0 / 0.9 - 1e-9));
    }
}

#[test]
fn roots_reproduce_polynomial() {
    let mut draws = Draws::new(5);
    for _ in 0..20 {
        let p = random_polynomial(&mut draws, 3, 0.95);
        let c0 = p[0];
        let roots = models::polynomial_roots(&p);
        // reconstruct Π (1 − z/ρ) and compare
        let mut re = vec![nalgebra::Complex::new(c0, 0.0)];
        for r in &roots {
            let inv = nalgebra::Complex::new(1.0, 0.0) / r;
            let mut next = vec![nalgebra::Complex::new(0.0, 0.0); re.len() + 1];
            for (i, c) in re.iter().enumerate() {
                next[i] += c;
                next[i + 1] -= c * inv;
            }
            re = next;
        }
        for (a, b) in re.iter().zip(&p) {
            assert!((a.re - b).abs() <= 1e-10 && a.im.abs() <= 1e-10);
        }
    }
}

/// γ_k = (σ²/π) ∫_0^π (2 sin(λ/2))^{−2d} cos(kλ) dλ, with λ = t^m,
/// m = 1/(1−2d), removing the integrable singularity at 0; composite Simpson.
fn fractional_noise_spectral_acvf(d: f64, k: usize) -> f64 {
    let m = 1.0 / (1.0 - 2.0 * d);
    let upper = std::f64::consts::PI.powf(1.0 / m);
    let f = |t: f64| -> f64 {
        if t == 0.0 {
            // limit of (2 sin(λ/2))^{−2d} m t^{m−1} as t → 0
            return m;
        }
        let lambda = t.powf(m);
        (2.0 * (lambda / 2.0).sin()).powf(-2.0 * d)
            * (k as f64 * lambda).cos()
            * m
            * t.powf(m - 1.0)
    };
    let n = 400_000;
    let h = upper / n as f64;
    let mut s = f(0.0) + f(upper);
    for i in 1..n {
        s += f(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0 / std::f64::consts::PI
}

#[test]
fn farima_recursion_matches_spectral_quadrature() {
    let g = farima_acvf(&FarimaSpec::fractional_noise(0.3, 1.0).unwrap(), 5).unwrap();
    for k in 0..=5 {
        let oracle = fractional_noise_spectral_acvf(0.3, k);
        assert!(
            (g.values()[k] - oracle).abs() <= 1e-7 * g.gamma0(),
            "k={k} {} vs {oracle}",
            g.values()[k]
        );
    }
    assert!((g.values()[1] / g.values()[0] - 3.0 / 7.0).abs() < 1e-14);
}

#[test]
fn farima_log_log_slope() {
    let g = farima_acvf(&FarimaSpec::fractional_noise(0.3, 1.0).unwrap(), 100_000).unwrap();
    let pts: Vec<(f64, f64)> = diagnostics::lag_grid(1000, 100_000, 50)
        .into_iter()
        .map(|k| ((k as f64).ln(), g.values()[k].ln()))
        .collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let slope = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>()
        / pts.iter().map(|p| (p.0 - mx).powi(2)).sum::<f64>();
    assert!((slope + 0.4).abs() < 0.02, "slope {slope}");
}

#[test]
fn xi_triple_sums_to_composition() {
    let mut draws = Draws::new(21);
    for _ in 0..10 {
        let filter = random_arma(&mut draws);
        let input = random_arma(&mut draws);
        let gw = acvf::filter_acvf_to_horizon(&weights::arma_pi_weights(&filter, None).unwrap());
        let hz = acvf::truncation_horizon(&gw).unwrap();
        let gx = arma_acvf(&input, 60 + hz.lags).unwrap();
        let y = acvf::compose_acvf(&gw, &gx, 60).unwrap();
        for k in 1..=60 {
            let xi = acvf::xi_decomposition(&gw, &gx, k).unwrap();
            assert!((xi.sum() - y.acvf.values()[k]).abs() <= 1e-10 * gx.gamma0() * gw.gamma0());
            // reflected form Σ_h γ^W_h γ^X_{k−h}
            let h = hz.lags as isize;
            let reflected: f64 = (-h..=h)
                .map(|j| gw.at(j).unwrap() * gx.at(k as isize - j).unwrap())
                .sum();
            assert!((reflected - y.acvf.values()[k]).abs() <= 1e-10 * gx.gamma0() * gw.gamma0());
        }
    }
}

#[test]
fn xi_bounds_hold_for_fixed_envelope() {
    let (c, r) = (1.25, 0.5f64);
    let gw_values: Vec<f64> = (0..200).map(|k| c * r.powi(k)).collect();
    let gw = AcvfSequence::new(gw_values, Tail::Geometric { c, r }).unwrap();
    let hz = acvf::truncation_horizon(&gw).unwrap();
    let gx = farima_acvf(
        &FarimaSpec::fractional_noise(0.3, 1.0).unwrap(),
        500 + hz.lags,
    )
    .unwrap();
    let fit = acvf::ExpBoundFit {
        c,
        r,
        binding_lag: 0,
    };
    for k in 2..=500 {
        let xi = acvf::xi_decomposition(&gw, &gx, k).unwrap();
        let b = acvf::xi_bounds(&fit, gx.values(), k, hz.lags);
        assert!(xi.xi1.abs() <= b.bound1 * (1.0 + 1e-12), "k={k}");
        assert!(xi.xi2.abs() <= b.bound2 * (1.0 + 1e-12), "k={k}");
        assert!(xi.xi3.abs() <= b.bound3 * (1.0 + 1e-12), "k={k}");
        let closed = c * gx.gamma0() * r.powi(k as i32 + 1) / (1.0 - r);
        assert!((b.bound1 - closed).abs() <= 1e-14 * closed);
    }
}

#[test]
fn compose_truncation_bound_is_reported() {
    let w = weights::arma_pi_weights(&ArmaModel::new(vec![0.5], vec![0.4], 1.0).unwrap(), None)
        .unwrap();
    let gw = acvf::filter_acvf_to_horizon(&w);
    let hz = acvf::truncation_horizon(&gw).unwrap();
    let gx = arma_acvf(
        &ArmaModel::new(vec![0.9], vec![], 1.0).unwrap(),
        30 + hz.lags,
    )
    .unwrap();
    let y = acvf::compose_acvf(&gw, &gx, 30).unwrap();
    assert!(y.truncation_bound < 1e-12 * gx.gamma0() * gw.gamma0());
    // identical to a composition over a longer horizon within the bound
    let long_gx = arma_acvf(
        &ArmaModel::new(vec![0.9], vec![], 1.0).unwrap(),
        30 + 3 * hz.lags,
    )
    .unwrap();
    let y2 = acvf::compose_acvf(&gw, &long_gx, 30).unwrap();
    for k in 0..=30 {
        assert!((y.acvf.values()[k] - y2.acvf.values()[k]).abs() <= y.truncation_bound + 1e-14);
    }
}

#[test]
fn verdicts_are_scale_invariant() {
    let sequences = [
        farima_acvf(&FarimaSpec::fractional_noise(0.3, 1.0).unwrap(), 100_000).unwrap(),
        arma_acvf(&ArmaModel::new(vec![0.9], vec![], 1.0).unwrap(), 100_000).unwrap(),
        {
            let mut v = vec![0.5; 100_001];
            v[0] = 1.0;
            AcvfSequence::new(v, Tail::Unknown).unwrap()
        },
    ];
    for g in &sequences {
        let base = condition_report(g, 2, 100_000, 0.8).unwrap();
        for c in [1e-6, 1.0, 1e6] {
            let r = condition_report(&g.scaled(c), 2, 100_000, 0.8).unwrap();
            assert_eq!(r.berman.verdict, base.berman.verdict);
            assert_eq!(r.summability.verdict, base.summability.verdict);
        }
    }
}

#[test]
fn summability_is_monotone_in_epsilon() {
    for (name, m) in zoo::processes() {
        let g = m.acvf(20_000).unwrap();
        let mut passed = false;
        for eps in [0.3, 0.5, 0.8, 0.95] {
            let v = summability_diagnostic(&g, eps, 20_000).unwrap().verdict;
            if passed {
                assert_eq!(v, Verdict::Pass, "{name} eps={eps}");
            }
            passed |= v == Verdict::Pass;
        }
    }
}

#[test]
fn farima_diagnostics() {
    let g = farima_acvf(&FarimaSpec::fractional_noise(0.3, 1.0).unwrap(), 100_000).unwrap();
    let b = diagnostics::berman_diagnostic(&g, 100, 100_000).unwrap();
    assert_eq!(b.verdict, Verdict::Pass);
    let trend = b.trend.unwrap();
    // −0.4 plus the 1/ln k contribution of the log factor
    assert!(trend < -0.25 && trend > -0.4, "trend {trend}");
    assert_eq!(
        summability_diagnostic(&g, 0.8, 100_000).unwrap().verdict,
        Verdict::Pass
    );
    assert_eq!(
        summability_diagnostic(&g, 0.3, 100_000).unwrap().verdict,
        Verdict::Fail
    );

    let ar = arma_acvf(&ArmaModel::new(vec![0.5], vec![], 1.0).unwrap(), 200).unwrap();
    let s = summability_diagnostic(&ar, 0.5, 200).unwrap();
    assert_eq!(s.verdict, Verdict::Pass);
    assert!(s.partial_sums.last().unwrap().1 < 4.0 / 3.0);
}

#[test]
fn farima_has_no_geometric_envelope() {
    let g = farima_acvf(&FarimaSpec::fractional_noise(0.3, 1.0).unwrap(), 10_000).unwrap();
    assert!(matches!(
        fit_exponential_bound(&g),
        Err(lincov::Error::NoGeometricEnvelope { .. })
    ));
    assert!(matches!(
        diagnostics::theorem_check(&g, &g, 2, 100, 0.8),
        Err(lincov::Error::NoGeometricEnvelope { .. })
    ));
}
