//! Linear (moving-average) processes and their theoretical spectral objects.
//!
//! A process here is `X_t = sum_{k=0}^{d} theta_k eps_{t-k}` driven by
//! independent mean-zero unit-variance innovations. Infinite-order processes
//! are always realized by truncation to a finite order with a controlled
//! coefficient tail (see [`ar1_truncation`]).

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::spectra::EmpiricalDistribution;

/// Draws used for the statistical moment validation of custom bounded laws.
const CUSTOM_VALIDATION_DRAWS: usize = 100_000;

#[derive(Debug, Error)]
pub enum ProcessError {
    #[error("innovation sample length must be >= 1")]
    NonPositiveLength,
    #[error("theta must be non-empty")]
    EmptyTheta,
    #[error("theta[0] must be non-zero")]
    ZeroLeadingCoefficient,
    #[error("theta[{index}] = {value} is negative but the spec is flagged nonnegative")]
    NegativeCoefficient { index: usize, value: f64 },
    #[error("AR(1) parameter must satisfy |phi| < 1, got {0}")]
    InvalidPhi(f64),
    #[error("tail tolerance must be positive, got {0}")]
    InvalidTailTolerance(f64),
    #[error("custom bounded law needs support bound >= 1, got {0}")]
    InvalidSupportBound(f64),
    #[error("custom bounded law failed moment validation: {0}")]
    MomentValidation(String),
    #[error("coefficient {0} is not finite")]
    NonFiniteCoefficient(f64),
}

/// Innovation distribution. Every law has mean 0 and variance 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum InnovationLaw {
    /// Standard normal.
    Gaussian,
    /// Uniform on {-1, +1}.
    Rademacher,
    /// Uniform on [-sqrt(3), sqrt(3)], so the variance is exactly 1.
    UniformScaled,
    /// Symmetric three-point law on {-b, 0, +b} with P(+-b) = 1/(2 b^2).
    /// Bounded by `support_bound`, which must be >= 1.
    CustomBounded { support_bound: f64 },
}

/// Validated innovation specification.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InnovationSpec {
    law: InnovationLaw,
}

impl InnovationSpec {
    /// Builds the spec. Custom bounded laws are checked statistically: 1e5
    /// draws must reproduce mean 0 and variance 1 within five standard
    /// errors.
    pub fn new(law: InnovationLaw) -> Result<Self, ProcessError> {
        if let InnovationLaw::CustomBounded { support_bound } = law {
            if !(support_bound >= 1.0) || !support_bound.is_finite() {
                return Err(ProcessError::InvalidSupportBound(support_bound));
            }
            let spec = Self { law };
            spec.validate_moments()?;
            return Ok(spec);
        }
        Ok(Self { law })
    }

    pub fn gaussian() -> Self {
        Self { law: InnovationLaw::Gaussian }
    }

    pub fn rademacher() -> Self {
        Self { law: InnovationLaw::Rademacher }
    }

    pub fn uniform_scaled() -> Self {
        Self { law: InnovationLaw::UniformScaled }
    }

    pub fn law(&self) -> InnovationLaw {
        self.law
    }

    /// Upper bound on |eps| when the law is bounded, `None` for Gaussian.
    pub fn support_bound(&self) -> Option<f64> {
        match self.law {
            InnovationLaw::Gaussian => None,
            InnovationLaw::Rademacher => Some(1.0),
            InnovationLaw::UniformScaled => Some(3f64.sqrt()),
            InnovationLaw::CustomBounded { support_bound } => Some(support_bound),
        }
    }

    fn validate_moments(&self) -> Result<(), ProcessError> {
        let n = CUSTOM_VALIDATION_DRAWS;
        let draws = {
            let mut stream = InnovationStream::new(*self, 0x6d6f6d656e7473, 0);
            (0..n).map(|_| stream.sample()).collect::<Vec<_>>()
        };
        let mean = draws.iter().sum::<f64>() / n as f64;
        let var = draws.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n as f64;
        // SE of the mean is 1/sqrt(n); SE of the variance is bounded by
        // sqrt(E eps^4)/sqrt(n) <= b^2/sqrt(n) for a bounded law.
        let b = self.support_bound().unwrap_or(2.0);
        let se_mean = (n as f64).sqrt().recip();
        let se_var = b * b * se_mean;
        if mean.abs() > 5.0 * se_mean {
            return Err(ProcessError::MomentValidation(format!(
                "sample mean {mean} exceeds 5 standard errors"
            )));
        }
        if (var - 1.0).abs() > 5.0 * se_var {
            return Err(ProcessError::MomentValidation(format!(
                "sample variance {var} exceeds 5 standard errors from 1"
            )));
        }
        Ok(())
    }
}

/// Counter-based innovation source: the stream is fully determined by
/// (spec, seed, stream id), so parallel workers can carve out disjoint
/// streams without coordination.
pub struct InnovationStream {
    spec: InnovationSpec,
    rng: ChaCha8Rng,
}

impl InnovationStream {
    pub fn new(spec: InnovationSpec, seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Self { spec, rng }
    }

    pub fn sample(&mut self) -> f64 {
        match self.spec.law {
            InnovationLaw::Gaussian => StandardNormal.sample(&mut self.rng),
            InnovationLaw::Rademacher => {
                if self.rng.random::<bool>() {
                    1.0
                } else {
                    -1.0
                }
            }
            InnovationLaw::UniformScaled => {
                let u: f64 = self.rng.random();
                (2.0 * u - 1.0) * 3f64.sqrt()
            }
            InnovationLaw::CustomBounded { support_bound } => {
                let p = 0.5 / (support_bound * support_bound);
                let u: f64 = self.rng.random();
                if u < p {
                    -support_bound
                } else if u >= 1.0 - p {
                    support_bound
                } else {
                    0.0
                }
            }
        }
    }
}

/// Generates `length` i.i.d. innovations from stream 0 of `seed`.
pub fn make_innovations(
    spec: &InnovationSpec,
    length: usize,
    seed: u64,
) -> Result<Vec<f64>, ProcessError> {
    if length == 0 {
        return Err(ProcessError::NonPositiveLength);
    }
    let mut stream = InnovationStream::new(*spec, seed, 0);
    Ok((0..length).map(|_| stream.sample()).collect())
}

/// A finite-order moving-average specification: coefficients
/// `theta_0..theta_d` (theta_0 != 0) plus the innovation law.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProcessSpec {
    theta: Vec<f64>,
    innovations: InnovationSpec,
    nonnegative: bool,
}

impl ProcessSpec {
    pub fn new(theta: Vec<f64>, innovations: InnovationSpec) -> Result<Self, ProcessError> {
        Self::build(theta, innovations, false)
    }

    /// Like [`ProcessSpec::new`] but additionally requires theta_j >= 0 for
    /// all j (the hypothesis behind the monotonicity and unbounded-support
    /// properties).
    pub fn new_nonnegative(
        theta: Vec<f64>,
        innovations: InnovationSpec,
    ) -> Result<Self, ProcessError> {
        Self::build(theta, innovations, true)
    }

    fn build(
        theta: Vec<f64>,
        innovations: InnovationSpec,
        nonnegative: bool,
    ) -> Result<Self, ProcessError> {
        if theta.is_empty() {
            return Err(ProcessError::EmptyTheta);
        }
        if theta[0] == 0.0 {
            return Err(ProcessError::ZeroLeadingCoefficient);
        }
        for (index, &value) in theta.iter().enumerate() {
            if !value.is_finite() {
                return Err(ProcessError::NonFiniteCoefficient(value));
            }
            if nonnegative && value < 0.0 {
                return Err(ProcessError::NegativeCoefficient { index, value });
            }
        }
        Ok(Self { theta, innovations, nonnegative })
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    /// MA order d (theta has d+1 entries).
    pub fn order(&self) -> usize {
        self.theta.len() - 1
    }

    pub fn innovations(&self) -> &InnovationSpec {
        &self.innovations
    }

    pub fn is_nonnegative(&self) -> bool {
        self.nonnegative
    }

    pub fn with_innovations(mut self, innovations: InnovationSpec) -> Self {
        self.innovations = innovations;
        self
    }

    /// Theoretical autocovariance table of this process.
    pub fn acvf(&self) -> AcvfTable {
        AcvfTable::from_theta(&self.theta)
    }
}

/// Theoretical autocovariances `gamma(0)..gamma(d)`; gamma(k) = 0 for k > d
/// and gamma(-k) = gamma(k).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AcvfTable {
    gamma: Vec<f64>,
}

impl AcvfTable {
    pub fn from_theta(theta: &[f64]) -> Self {
        let d = theta.len().saturating_sub(1);
        let gamma = (0..=d).map(|lag| acvf_theoretical(theta, lag)).collect();
        Self { gamma }
    }

    /// Builds directly from gamma values (gamma[0] first).
    pub fn from_gamma(gamma: Vec<f64>) -> Self {
        assert!(!gamma.is_empty(), "need at least gamma(0)");
        Self { gamma }
    }

    pub fn gamma(&self, lag: usize) -> f64 {
        self.gamma.get(lag).copied().unwrap_or(0.0)
    }

    pub fn values(&self) -> &[f64] {
        &self.gamma
    }

    pub fn max_lag(&self) -> usize {
        self.gamma.len() - 1
    }
}

/// `gamma(lag) = sum_{k=0}^{d-lag} theta_k theta_{lag+k}`, zero beyond the
/// order.
pub fn acvf_theoretical(theta: &[f64], lag: usize) -> f64 {
    if lag >= theta.len() {
        return 0.0;
    }
    theta[..theta.len() - lag]
        .iter()
        .zip(&theta[lag..])
        .map(|(a, b)| a * b)
        .sum()
}

/// Spectral density `f(t) = sum_k gamma(k) cos(2 pi t k)` over k in [-d, d],
/// for t in (0, 1].
pub fn spectral_density(acvf: &AcvfTable, t: f64) -> f64 {
    let mut f = acvf.gamma(0);
    for k in 1..=acvf.max_lag() {
        f += 2.0 * acvf.gamma(k) * (std::f64::consts::TAU * t * k as f64).cos();
    }
    f
}

/// A simulated realization X_1..X_L together with its provenance.
#[derive(Debug, Clone)]
pub struct SampleSeries {
    values: Vec<f64>,
    origin: ProcessSpec,
    seed: u64,
}

impl SampleSeries {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn origin(&self) -> &ProcessSpec {
        &self.origin
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }
}

/// Simulates `X_t = sum_k theta_k eps_{t-k}` for t = 1..length, drawing
/// length + d innovations internally. Bit-identical for equal
/// (spec, length, seed).
pub fn simulate_ma(
    spec: &ProcessSpec,
    length: usize,
    seed: u64,
) -> Result<SampleSeries, ProcessError> {
    if length == 0 {
        return Err(ProcessError::NonPositiveLength);
    }
    let d = spec.order();
    let eps = make_innovations(&spec.innovations, length + d, seed)?;
    // eps[i] plays the role of eps_{1-d+i}, so X_t uses eps[t-1-k+d].
    let theta = &spec.theta;
    let values = (0..length)
        .map(|t| {
            theta
                .iter()
                .enumerate()
                .map(|(k, &th)| th * eps[t + d - k])
                .sum()
        })
        .collect();
    Ok(SampleSeries { values, origin: spec.clone(), seed })
}

/// Truncates an AR(1) with parameter `phi` to the minimal finite order d such
/// that the absolute coefficient tail `sum_{k>d} |phi|^k` is at most
/// `tail_tol`. Gaussian innovations by default.
pub fn ar1_truncation(phi: f64, tail_tol: f64) -> Result<ProcessSpec, ProcessError> {
    if !(phi.abs() < 1.0) {
        return Err(ProcessError::InvalidPhi(phi));
    }
    if !(tail_tol > 0.0) {
        return Err(ProcessError::InvalidTailTolerance(tail_tol));
    }
    let mut theta = vec![1.0];
    if phi != 0.0 {
        // tail(d) = |phi|^{d+1} / (1 - |phi|)
        let a = phi.abs();
        let mut d = 0usize;
        while a.powi(d as i32 + 1) / (1.0 - a) > tail_tol {
            d += 1;
        }
        for k in 1..=d {
            theta.push(phi.powi(k as i32));
        }
    }
    ProcessSpec::new(theta, InnovationSpec::gaussian())
}

/// Draws `count` i.i.d. values of f_X(U) with U uniform on (0, 1]; this is
/// the reference distribution every consistent estimator's spectrum must
/// approach.
pub fn sample_fu(
    acvf: &AcvfTable,
    count: usize,
    seed: u64,
) -> Result<EmpiricalDistribution, ProcessError> {
    if count == 0 {
        return Err(ProcessError::NonPositiveLength);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1);
    let atoms: Vec<f64> = (0..count)
        .map(|_| {
            let u: f64 = 1.0 - rng.random::<f64>(); // (0, 1]
            spectral_density(acvf, u)
        })
        .collect();
    Ok(EmpiricalDistribution::from_atoms(atoms))
}
