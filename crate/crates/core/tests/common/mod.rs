#![allow(dead_code)]

use lincov::models::ArmaModel;
use lincov::simulation::{Noise, NoiseStream};

/// Deterministic uniform source for drawing test models.
pub struct Draws(NoiseStream);

impl Draws {
    pub fn new(seed: u64) -> Self {
        Self(NoiseStream::new(seed, Noise::Uniform(1.0)))
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.0.next_uniform()
    }

    pub fn below(&mut self, n: usize) -> usize {
        ((self.0.next_uniform() * n as f64).ceil() as usize).clamp(1, n) - 1
    }
}

/// Coefficients of `Π (1 − λ_i z)` for reciprocal roots with modulus ≤ `max_rad`;
/// complex reciprocal roots come in conjugate pairs.
pub fn random_polynomial(draws: &mut Draws, degree: usize, max_rad: f64) -> Vec<f64> {
    let mut poly = vec![1.0];
    let mut left = degree;
    while left > 0 {
        let factor = if left >= 2 && draws.uniform(0.0, 1.0) < 0.5 {
            let rad = draws.uniform(0.05, max_rad);
            let angle = draws.uniform(0.1, std::f64::consts::PI - 0.1);
            left -= 2;
            vec![1.0, -2.0 * rad * angle.cos(), rad * rad]
        } else {
            left -= 1;
            vec![1.0, -draws.uniform(-max_rad, max_rad)]
        };
        poly = lincov::weights::convolve(&poly, &factor);
    }
    poly
}

/// Stationary and invertible ARMA(p ≤ 3, q ≤ 3) with roots at modulus ≥ 1/0.9.
pub fn random_arma(draws: &mut Draws) -> ArmaModel {
    let p = draws.below(4);
    let q = draws.below(4);
    let ar = random_polynomial(draws, p, 0.9);
    let ma = random_polynomial(draws, q, 0.9);
    let sigma2 = draws.uniform(0.5, 2.0);
    ArmaModel::new(
        ar[1..].iter().map(|c| -c).collect(),
        ma[1..].to_vec(),
        sigma2,
    )
    .unwrap()
}
