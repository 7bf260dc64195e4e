//! Stationary linear-process models and their exact autocovariances.
//!
//! Polynomial conventions (Box–Jenkins):
//!
//! ```text
//! φ(z) = 1 − φ_1 z − … − φ_p z^p
//! θ(z) = 1 + θ_1 z + … + θ_q z^q
//! φ(B) X_t = θ(B) a_t,   Var(a_t) = σ²
//! ```
//!
//! A model is stationary iff every root of φ lies strictly outside the unit
//! circle and invertible iff every root of θ does. Roots with modulus
//! `≤ 1 + UNIT_CIRCLE_TOL` are treated as lying on the circle.

use nalgebra::{Complex, DMatrix, DVector};
use statrs::function::gamma::ln_gamma;

use crate::acvf::{self, AcvfSequence, Tail};
use crate::error::{Error, Result};
use crate::weights;

/// Roots with modulus at or below `1 + UNIT_CIRCLE_TOL` fail the check.
pub const UNIT_CIRCLE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct ArmaModel {
    ar: Vec<f64>,
    ma: Vec<f64>,
    sigma2: f64,
}

impl ArmaModel {
    pub fn new(ar: Vec<f64>, ma: Vec<f64>, sigma2: f64) -> Result<Self> {
        if !(sigma2.is_finite() && sigma2 > 0.0) {
            return Err(Error::Domain(format!(
                "innovation variance must be finite and > 0, got {sigma2}"
            )));
        }
        if let Some(bad) = ar.iter().chain(ma.iter()).find(|c| !c.is_finite()) {
            return Err(Error::Domain(format!("non-finite coefficient {bad}")));
        }
        Ok(Self { ar, ma, sigma2 })
    }

    pub fn white_noise(sigma2: f64) -> Result<Self> {
        Self::new(Vec::new(), Vec::new(), sigma2)
    }

    pub fn ar_coeffs(&self) -> &[f64] {
        &self.ar
    }

    pub fn ma_coeffs(&self) -> &[f64] {
        &self.ma
    }

    pub fn innovation_variance(&self) -> f64 {
        self.sigma2
    }

    /// Same polynomials, different innovation variance.
    pub fn with_variance(&self, sigma2: f64) -> Result<Self> {
        Self::new(self.ar.clone(), self.ma.clone(), sigma2)
    }

    /// Coefficients of φ(z) in ascending powers: `(1, −φ_1, …, −φ_p)`.
    pub fn ar_polynomial(&self) -> Vec<f64> {
        std::iter::once(1.0)
            .chain(self.ar.iter().map(|c| -c))
            .collect()
    }

    /// Coefficients of θ(z) in ascending powers: `(1, θ_1, …, θ_q)`.
    pub fn ma_polynomial(&self) -> Vec<f64> {
        std::iter::once(1.0)
            .chain(self.ma.iter().copied())
            .collect()
    }

    /// Effective orders with trailing zero coefficients dropped.
    pub fn orders(&self) -> (usize, usize) {
        (
            effective_degree(&self.ar_polynomial()),
            effective_degree(&self.ma_polynomial()),
        )
    }
}

/// FARIMA(p, d, q): `(1 − B)^d φ(B) X_t = θ(B) a_t`.
#[derive(Debug, Clone, PartialEq)]
pub struct FarimaSpec {
    d: f64,
    arma: ArmaModel,
}

impl FarimaSpec {
    pub fn new(d: f64, arma: ArmaModel) -> Result<Self> {
        if !(d.is_finite() && d.abs() < 0.5) {
            return Err(Error::Domain(format!(
                "fractional order d must satisfy |d| < 0.5, got {d}"
            )));
        }
        Ok(Self { d, arma })
    }

    /// FARIMA(0, d, 0) with innovation variance `sigma2`.
    pub fn fractional_noise(d: f64, sigma2: f64) -> Result<Self> {
        Self::new(d, ArmaModel::white_noise(sigma2)?)
    }

    pub fn d(&self) -> f64 {
        self.d
    }

    pub fn arma(&self) -> &ArmaModel {
        &self.arma
    }
}

/// Either kind of model, as read from a model file.
#[derive(Debug, Clone, PartialEq)]
pub enum ProcessModel {
    Arma(ArmaModel),
    Farima(FarimaSpec),
}

impl ProcessModel {
    pub fn arma(&self) -> &ArmaModel {
        match self {
            ProcessModel::Arma(m) => m,
            ProcessModel::Farima(f) => f.arma(),
        }
    }

    pub fn acvf(&self, k_max: usize) -> Result<AcvfSequence> {
        match self {
            ProcessModel::Arma(m) => arma_acvf(m, k_max),
            ProcessModel::Farima(f) => farima_acvf(f, k_max),
        }
    }

    /// Forward weights; long-memory models are cut at `n_max`, or at
    /// [`crate::simulation::FARIMA_TRUNCATION`] when none is given.
    pub fn psi_weights(&self, n_max: Option<usize>) -> Result<weights::FilterWeights> {
        match self {
            ProcessModel::Arma(m) => weights::arma_psi_weights(m, n_max),
            ProcessModel::Farima(f) if f.d() == 0.0 => weights::arma_psi_weights(f.arma(), n_max),
            ProcessModel::Farima(f) => weights::farima_psi_weights(
                f,
                n_max.unwrap_or(crate::simulation::FARIMA_TRUNCATION),
            ),
        }
    }

    /// Same model with a different innovation variance.
    pub fn with_variance(&self, sigma2: f64) -> Result<Self> {
        Ok(match self {
            ProcessModel::Arma(m) => ProcessModel::Arma(m.with_variance(sigma2)?),
            ProcessModel::Farima(f) => {
                ProcessModel::Farima(FarimaSpec::new(f.d(), f.arma().with_variance(sigma2)?)?)
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RootReport {
    pub roots: Vec<Complex<f64>>,
    pub moduli: Vec<f64>,
    /// `+∞` for a degree-0 polynomial.
    pub min_modulus: f64,
    /// True iff `min_modulus > 1 + UNIT_CIRCLE_TOL`.
    pub outside_unit_circle: bool,
}

impl RootReport {
    fn from_roots(roots: Vec<Complex<f64>>) -> Self {
        let moduli: Vec<f64> = roots.iter().map(|z| z.norm()).collect();
        let min_modulus = moduli.iter().copied().fold(f64::INFINITY, f64::min);
        Self {
            outside_unit_circle: min_modulus > 1.0 + UNIT_CIRCLE_TOL,
            roots,
            moduli,
            min_modulus,
        }
    }

    /// Geometric decay rate `1 / min|root|` of the associated expansion (0 if no roots).
    pub fn decay_rate(&self) -> f64 {
        if self.min_modulus.is_infinite() {
            0.0
        } else {
            1.0 / self.min_modulus
        }
    }
}

pub fn check_stationary(model: &ArmaModel) -> RootReport {
    RootReport::from_roots(polynomial_roots(&model.ar_polynomial()))
}

pub fn check_invertible(model: &ArmaModel) -> RootReport {
    RootReport::from_roots(polynomial_roots(&model.ma_polynomial()))
}

pub(crate) fn ensure_stationary(model: &ArmaModel) -> Result<RootReport> {
    let report = check_stationary(model);
    if report.outside_unit_circle {
        Ok(report)
    } else {
        Err(Error::NonStationary {
            min_modulus: report.min_modulus,
        })
    }
}

pub(crate) fn ensure_invertible(model: &ArmaModel) -> Result<RootReport> {
    let report = check_invertible(model);
    if report.outside_unit_circle {
        Ok(report)
    } else {
        Err(Error::NonInvertible {
            min_modulus: report.min_modulus,
        })
    }
}

fn effective_degree(coeffs: &[f64]) -> usize {
    coeffs.iter().rposition(|&c| c != 0.0).unwrap_or(0)
}

/// Roots of `c_0 + c_1 z + … + c_n z^n` with `c_0 ≠ 0`.
///
/// The reciprocal roots are the eigenvalues of the companion matrix of the
/// reversed polynomial `z^n + (c_1/c_0) z^{n−1} + … + c_n/c_0`. Each inverted
/// eigenvalue is then polished by a few Newton steps on the original
/// polynomial.
pub fn polynomial_roots(coeffs: &[f64]) -> Vec<Complex<f64>> {
    let n = effective_degree(coeffs);
    if n == 0 {
        return Vec::new();
    }
    let c0 = coeffs[0];
    assert!(c0 != 0.0, "constant term must be nonzero");

    let mut companion = DMatrix::<f64>::zeros(n, n);
    for j in 0..n {
        companion[(0, j)] = -coeffs[j + 1] / c0;
    }
    for i in 1..n {
        companion[(i, i - 1)] = 1.0;
    }
    let reciprocal = companion.complex_eigenvalues();

    let poly = &coeffs[..=n];
    reciprocal
        .iter()
        .map(|lambda| polish_root(poly, Complex::new(1.0, 0.0) / lambda))
        .collect()
}

fn polish_root(poly: &[f64], mut z: Complex<f64>) -> Complex<f64> {
    for _ in 0..8 {
        let (p, dp) = horner_with_derivative(poly, z);
        if dp.norm() == 0.0 {
            break;
        }
        let step = p / dp;
        let next = z - step;
        // Newton diverging (clustered roots): keep the eigenvalue estimate.
        if !next.re.is_finite() || !next.im.is_finite() {
            break;
        }
        if horner_with_derivative(poly, next).0.norm() > p.norm() {
            break;
        }
        z = next;
        if step.norm() <= f64::EPSILON * z.norm() {
            break;
        }
    }
    z
}

fn horner_with_derivative(poly: &[f64], z: Complex<f64>) -> (Complex<f64>, Complex<f64>) {
    let mut p = Complex::new(0.0, 0.0);
    let mut dp = Complex::new(0.0, 0.0);
    for &c in poly.iter().rev() {
        dp = dp * z + p;
        p = p * z + c;
    }
    (p, dp)
}

/// Autocovariances γ_0..γ_{k_max} of a stationary ARMA process.
///
/// Solves the `(m+1)`-dimensional linear system
/// `γ_k − Σ_i φ_i γ_{|k−i|} = σ² Σ_{j=k}^{q} θ_j ψ_{j−k}` for
/// `k = 0..=m`, `m = max(p, q)`, then continues with the Yule–Walker
/// recursion `γ_k = Σ_i φ_i γ_{k−i}` for `k > m`.
pub fn arma_acvf(model: &ArmaModel, k_max: usize) -> Result<AcvfSequence> {
    let roots = ensure_stationary(model)?;
    let (p, q) = model.orders();
    let phi = &model.ar[..p];
    let theta = model.ma_polynomial();
    let m = p.max(q);
    let sigma2 = model.sigma2;

    let psi = weights::expand_ratio(&model.ma_polynomial(), &model.ar_polynomial(), q);

    let mut system = DMatrix::<f64>::zeros(m + 1, m + 1);
    let mut rhs = DVector::<f64>::zeros(m + 1);
    for k in 0..=m {
        system[(k, k)] += 1.0;
        for (i, &phi_i) in phi.iter().enumerate() {
            let lag = (k as isize - (i as isize + 1)).unsigned_abs();
            system[(k, lag)] -= phi_i;
        }
        rhs[k] = sigma2 * (k..=q).map(|j| theta[j] * psi[j - k]).sum::<f64>();
    }
    let head = system.lu().solve(&rhs).ok_or(Error::NonStationary {
        min_modulus: roots.min_modulus,
    })?;

    // Extended range used only to fit the tail envelope.
    let k_fit = k_max.max(4 * (m + 1)).max(64);
    let mut values = Vec::with_capacity(k_fit + 1);
    values.extend(head.iter().copied().take(k_fit + 1));
    for k in values.len()..=k_fit {
        let next: f64 = phi
            .iter()
            .enumerate()
            .map(|(i, &c)| c * values[k - 1 - i])
            .sum();
        // subnormals would otherwise stall at the smallest representable value
        values.push(if next.abs() < f64::MIN_POSITIVE {
            0.0
        } else {
            next
        });
    }

    let tail = if p == 0 && k_max >= q {
        Tail::Zero
    } else {
        let probe = AcvfSequence::from_parts(values.clone(), Tail::Unknown);
        match acvf::fit_exponential_bound(&probe) {
            Ok(fit) => Tail::Geometric {
                c: fit.c,
                r: fit.r.max(roots.decay_rate()),
            },
            Err(_) => Tail::Unknown,
        }
    };
    values.truncate(k_max + 1);
    Ok(AcvfSequence::from_parts(values, tail))
}

/// γ_0 of FARIMA(0, d, 0): `σ² Γ(1−2d) / Γ(1−d)²`, evaluated in log space.
pub fn fractional_noise_variance(d: f64, sigma2: f64) -> f64 {
    sigma2 * (ln_gamma(1.0 - 2.0 * d) - 2.0 * ln_gamma(1.0 - d)).exp()
}

/// Asymptotic constant `c` in `γ_k ~ c k^{2d−1}` for FARIMA(0, d, 0).
///
/// `c = σ² Γ(1−2d) / (Γ(d) Γ(1−d))`, written with `Γ(d) = Γ(1+d)/d` so the
/// sign follows `d`.
pub fn fractional_noise_tail_constant(d: f64, sigma2: f64) -> f64 {
    sigma2 * d * (ln_gamma(1.0 - 2.0 * d) - ln_gamma(1.0 + d) - ln_gamma(1.0 - d)).exp()
}

fn fractional_noise_acvf(d: f64, sigma2: f64, k_max: usize) -> Vec<f64> {
    let mut values = Vec::with_capacity(k_max + 1);
    let mut gamma = fractional_noise_variance(d, sigma2);
    values.push(gamma);
    for k in 0..k_max {
        let k = k as f64;
        gamma *= (k + d) / (k + 1.0 - d);
        values.push(gamma);
    }
    values
}

/// Autocovariances of a FARIMA(p, d, q) process.
///
/// `d = 0` delegates to [`arma_acvf`]. For FARIMA(0, d, 0) the values come
/// from the ratio recursion `γ_{k+1} = γ_k (k+d)/(k+1−d)`. A nontrivial ARMA
/// part is applied as a filter on fractional noise via
/// [`acvf::compose_acvf`].
pub fn farima_acvf(spec: &FarimaSpec, k_max: usize) -> Result<AcvfSequence> {
    let d = spec.d;
    if d == 0.0 {
        return arma_acvf(&spec.arma, k_max);
    }
    ensure_stationary(&spec.arma)?;
    let sigma2 = spec.arma.sigma2;
    let alpha = 1.0 - 2.0 * d;
    let tail_c = fractional_noise_tail_constant(d, sigma2).abs();

    let (p, q) = spec.arma.orders();
    if p == 0 && q == 0 {
        let values = fractional_noise_acvf(d, sigma2, k_max);
        return Ok(AcvfSequence::from_parts(
            values,
            Tail::Power { c: tail_c, alpha },
        ));
    }

    let unit = spec.arma.with_variance(1.0)?;
    let psi = weights::arma_psi_weights(&unit, None)?;
    let gw = acvf::filter_self_acvf(&psi, psi.coeffs().len() - 1);
    let horizon = acvf::truncation_horizon(&gw)?;
    let noise = AcvfSequence::from_parts(
        fractional_noise_acvf(d, sigma2, k_max + horizon.lags),
        Tail::Power { c: tail_c, alpha },
    );
    Ok(acvf::compose_acvf(&gw, &noise, k_max)?.acvf)
}
