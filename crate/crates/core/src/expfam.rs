//! Exponential families `p_θ(x) = exp(t(x)ᵀθ − F(θ) + k(x))` in natural
//! coordinates.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::{Distribution, Exp, Normal, Poisson};

use crate::convex::{
    self, sigmoid, Domain, ExpSum, GaussianCumulant, LogSumExp, NegLog, Potential,
    Softplus, SquaredNorm,
};
use crate::divergence;
use crate::error::{check_dim, Error, Result};
use crate::model::{SampleSpace, StatisticalModel};
use crate::rng::SeededRng;
use crate::tensor::Tensor3;

const LN_2PI: f64 = 1.837_877_066_409_345_5;

/// The built-in exponential families.
#[derive(Debug, Clone, PartialEq)]
pub enum ExponentialFamily {
    /// `θ = log(p/(1−p))`, `t(x) = x ∈ {0,1}`.
    Bernoulli,
    /// `categories` outcomes `0..categories`; `θᵢ = log(pᵢ/p_last)` for the
    /// first `categories − 1`.
    Categorical { categories: usize },
    /// `θ = log λ`, `t(x) = x`.
    Poisson,
    /// Normal with known standard deviation: `θ = μ`, `t(x) = x/σ²`.
    GaussianLocation { sigma: f64 },
    /// Normal with `θ = (μ/σ², −1/(2σ²))`, `t(x) = (x, x²)`.
    Gaussian,
    /// Exponential distribution with rate `λ`: `θ = −λ`, `t(x) = x`.
    Exponential,
}

macro_rules! with_cumulant {
    ($fam:expr, $p:ident => $body:expr) => {
        match $fam {
            ExponentialFamily::Bernoulli => {
                let $p = Softplus { dim: 1 };
                $body
            }
            ExponentialFamily::Categorical { categories } => {
                let $p = LogSumExp { dim: categories - 1 };
                $body
            }
            ExponentialFamily::Poisson => {
                let $p = ExpSum { dim: 1 };
                $body
            }
            ExponentialFamily::GaussianLocation { sigma } => {
                let $p = SquaredNorm::scaled(1, 1.0 / (sigma * sigma));
                $body
            }
            ExponentialFamily::Gaussian => {
                let $p = GaussianCumulant;
                $body
            }
            ExponentialFamily::Exponential => {
                let $p = NegLog { dim: 1 };
                $body
            }
        }
    };
}

impl ExponentialFamily {
    pub fn categorical(categories: usize) -> Result<Self> {
        if categories < 2 {
            return Err(Error::Invalid("a categorical family needs at least 2 outcomes".into()));
        }
        Ok(Self::Categorical { categories })
    }

    pub fn gaussian_location(sigma: f64) -> Result<Self> {
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::Invalid(format!("standard deviation {sigma} must be positive")));
        }
        Ok(Self::GaussianLocation { sigma })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Bernoulli => "bernoulli",
            Self::Categorical { .. } => "categorical",
            Self::Poisson => "poisson",
            Self::GaussianLocation { .. } => "gaussian_fixed_var",
            Self::Gaussian => "gaussian",
            Self::Exponential => "exponential",
        }
    }

    /// Order `D` of the family.
    pub fn order(&self) -> usize {
        match self {
            Self::Categorical { categories } => categories - 1,
            Self::Gaussian => 2,
            _ => 1,
        }
    }

    /// Natural parameter from the usual parameters: `p` (Bernoulli), the
    /// probability vector (categorical), `λ` (Poisson, exponential), `μ`
    /// (location) or `(μ, σ)` (normal).
    pub fn natural_from_source(&self, source: &[f64]) -> Result<Vec<f64>> {
        let bad = |what: &str| Err(Error::Domain(format!("{what}: {source:?}")));
        match self {
            Self::Bernoulli => {
                check_dim(1, source.len())?;
                let p = source[0];
                if !(p > 0.0 && p < 1.0) {
                    return bad("probability must lie in (0,1)");
                }
                Ok(vec![(p / (1.0 - p)).ln()])
            }
            Self::Categorical { categories } => {
                check_dim(*categories, source.len())?;
                if source.iter().any(|p| !(*p > 0.0)) || (source.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
                    return bad("probabilities must be positive and sum to 1");
                }
                let last = source[categories - 1];
                Ok(source[..categories - 1].iter().map(|p| (p / last).ln()).collect())
            }
            Self::Poisson => {
                check_dim(1, source.len())?;
                if !(source[0] > 0.0) {
                    return bad("rate must be positive");
                }
                Ok(vec![source[0].ln()])
            }
            Self::GaussianLocation { .. } => {
                check_dim(1, source.len())?;
                Ok(vec![source[0]])
            }
            Self::Gaussian => {
                check_dim(2, source.len())?;
                let (mu, sigma) = (source[0], source[1]);
                if !(sigma > 0.0) {
                    return bad("standard deviation must be positive");
                }
                let v = sigma * sigma;
                Ok(vec![mu / v, -0.5 / v])
            }
            Self::Exponential => {
                check_dim(1, source.len())?;
                if !(source[0] > 0.0) {
                    return bad("rate must be positive");
                }
                Ok(vec![-source[0]])
            }
        }
    }

    /// Inverse of [`ExponentialFamily::natural_from_source`].
    pub fn source_from_natural(&self, theta: &[f64]) -> Result<Vec<f64>> {
        self.check_parameter(theta)?;
        Ok(match self {
            Self::Bernoulli => vec![sigmoid(theta[0])],
            Self::Categorical { .. } => {
                let mut p = LogSumExp::probabilities(theta);
                let rest = 1.0 - p.iter().sum::<f64>();
                p.push(rest);
                p
            }
            Self::Poisson => vec![theta[0].exp()],
            Self::GaussianLocation { .. } => vec![theta[0]],
            Self::Gaussian => {
                let v = -0.5 / theta[1];
                vec![theta[0] * v, v.sqrt()]
            }
            Self::Exponential => vec![-theta[0]],
        })
    }

    /// `t(x)`.
    pub fn sufficient(&self, x: f64) -> Vec<f64> {
        match self {
            Self::Categorical { categories } => (0..categories - 1)
                .map(|i| if x == i as f64 { 1.0 } else { 0.0 })
                .collect(),
            Self::GaussianLocation { sigma } => vec![x / (sigma * sigma)],
            Self::Gaussian => vec![x, x * x],
            _ => vec![x],
        }
    }

    /// Carrier term `k(x)`.
    pub fn carrier(&self, x: f64) -> f64 {
        match self {
            Self::Poisson => -ln_factorial(x),
            Self::GaussianLocation { sigma } => {
                -x * x / (2.0 * sigma * sigma) - 0.5 * LN_2PI - sigma.ln()
            }
            Self::Gaussian => -0.5 * LN_2PI,
            _ => 0.0,
        }
    }

    /// Whether `x` is a possible observation.
    pub fn in_support(&self, x: f64) -> bool {
        match self {
            Self::Bernoulli => x == 0.0 || x == 1.0,
            Self::Categorical { categories } => {
                x >= 0.0 && x < *categories as f64 && x.fract() == 0.0
            }
            Self::Poisson => x >= 0.0 && x.fract() == 0.0 && x.is_finite(),
            Self::Exponential => x >= 0.0 && x.is_finite(),
            _ => x.is_finite(),
        }
    }

    /// `log p_θ(x)` with parameter and support checks.
    pub fn log_density_checked(&self, theta: &[f64], x: f64) -> Result<f64> {
        self.check_parameter(theta)?;
        if !self.in_support(x) {
            return Err(Error::Domain(format!("{x} is outside the sample space")));
        }
        Ok(StatisticalModel::log_density(self, theta, x))
    }

    /// Fisher information `∇²F(θ)`.
    pub fn fim(&self, theta: &[f64]) -> Result<DMatrix<f64>> {
        convex::hessian(self, theta)
    }

    /// `KL[p_θ1 : p_θ2] = B_F(θ2 : θ1)`.
    pub fn kl(&self, theta1: &[f64], theta2: &[f64]) -> Result<f64> {
        divergence::bregman(self, theta2, theta1)
    }

    /// `E[t(X)]`, the expectation parameter.
    pub fn mean_parameter(&self, theta: &[f64]) -> Result<Vec<f64>> {
        convex::grad(self, theta)
    }

    /// `n` draws, reproducible from `seed`.
    pub fn sample(&self, theta: &[f64], n: usize, seed: u64) -> Result<Vec<f64>> {
        self.check_parameter(theta)?;
        let mut rng = crate::rng::seeded(seed);
        Ok((0..n).map(|_| self.draw(theta, &mut rng)).collect())
    }

    /// Maximum-likelihood estimate by moment matching, `θ̂ = ∇F*(mean t(x))`.
    pub fn mle(&self, data: &[f64]) -> Result<Vec<f64>> {
        if data.is_empty() {
            return Err(Error::Invalid("no observations".into()));
        }
        let eta = self.mean_sufficient(data);
        convex::eta_to_theta(self, &eta)
    }

    /// Average sufficient statistic of a sample.
    pub fn mean_sufficient(&self, data: &[f64]) -> Vec<f64> {
        let mut eta = vec![0.0; self.order()];
        for &x in data {
            for (e, t) in eta.iter_mut().zip(self.sufficient(x)) {
                *e += t;
            }
        }
        let n = data.len() as f64;
        eta.iter_mut().for_each(|e| *e /= n);
        eta
    }

    fn draw(&self, theta: &[f64], rng: &mut SeededRng) -> f64 {
        match self {
            Self::Bernoulli => {
                if rng.random::<f64>() < sigmoid(theta[0]) {
                    1.0
                } else {
                    0.0
                }
            }
            Self::Categorical { categories } => {
                let p = LogSumExp::probabilities(theta);
                let u: f64 = rng.random();
                let mut acc = 0.0;
                for (i, pi) in p.iter().enumerate() {
                    acc += pi;
                    if u < acc {
                        return i as f64;
                    }
                }
                (categories - 1) as f64
            }
            Self::Poisson => Poisson::new(theta[0].exp())
                .expect("positive rate")
                .sample(rng),
            Self::GaussianLocation { sigma } => Normal::new(theta[0], *sigma)
                .expect("positive scale")
                .sample(rng),
            Self::Gaussian => {
                let v = -0.5 / theta[1];
                Normal::new(theta[0] * v, v.sqrt())
                    .expect("positive scale")
                    .sample(rng)
            }
            Self::Exponential => Exp::new(-theta[0]).expect("positive rate").sample(rng),
        }
    }
}

fn ln_factorial(x: f64) -> f64 {
    if x < 2.0 {
        return 0.0;
    }
    if x < 30.0 {
        return (2..=x as u64).map(|k| (k as f64).ln()).sum();
    }
    // Stirling series
    let x1 = x + 1.0;
    (x1 - 0.5) * x1.ln() - x1 + 0.5 * LN_2PI + 1.0 / (12.0 * x1) - 1.0 / (360.0 * x1.powi(3))
        + 1.0 / (1260.0 * x1.powi(5))
}

impl Potential for ExponentialFamily {
    fn dim(&self) -> usize {
        self.order()
    }
    fn domain(&self) -> Domain {
        with_cumulant!(*self, p => p.domain())
    }
    fn value(&self, theta: &[f64]) -> f64 {
        with_cumulant!(*self, p => p.value(theta))
    }
    fn exact_gradient(&self, theta: &[f64]) -> Option<Vec<f64>> {
        with_cumulant!(*self, p => p.exact_gradient(theta))
    }
    fn exact_hessian(&self, theta: &[f64]) -> Option<DMatrix<f64>> {
        with_cumulant!(*self, p => p.exact_hessian(theta))
    }
    fn exact_third(&self, theta: &[f64]) -> Option<Tensor3> {
        with_cumulant!(*self, p => p.exact_third(theta))
    }
    fn exact_inverse_gradient(&self, eta: &[f64]) -> Option<Vec<f64>> {
        with_cumulant!(*self, p => p.exact_inverse_gradient(eta))
    }
    fn dual_domain(&self) -> Option<Domain> {
        with_cumulant!(*self, p => p.dual_domain())
    }
}

impl StatisticalModel for ExponentialFamily {
    fn dim(&self) -> usize {
        self.order()
    }

    fn check_parameter(&self, theta: &[f64]) -> Result<()> {
        convex::check_point(self, theta)
    }

    fn log_density(&self, theta: &[f64], x: f64) -> f64 {
        if !self.in_support(x) {
            return f64::NEG_INFINITY;
        }
        let t = self.sufficient(x);
        convex::dot(&t, theta) - Potential::value(self, theta) + self.carrier(x)
    }

    fn score(&self, theta: &[f64], x: f64) -> Vec<f64> {
        let eta = with_cumulant!(*self, p => p.exact_gradient(theta)).expect("closed-form gradient");
        self.sufficient(x).iter().zip(&eta).map(|(t, e)| t - e).collect()
    }

    fn log_density_hessian(&self, theta: &[f64], _x: f64) -> DMatrix<f64> {
        -with_cumulant!(*self, p => p.exact_hessian(theta)).expect("closed-form Hessian")
    }

    fn sample(&self, theta: &[f64], rng: &mut SeededRng) -> f64 {
        self.draw(theta, rng)
    }

    fn sample_space(&self, theta: &[f64]) -> SampleSpace {
        match self {
            Self::Bernoulli => SampleSpace::Discrete(vec![0.0, 1.0]),
            Self::Categorical { categories } => {
                SampleSpace::Discrete((0..*categories).map(|i| i as f64).collect())
            }
            Self::Poisson => {
                let rate = theta[0].exp();
                let top = (rate + 20.0 * rate.sqrt() + 40.0).ceil() as usize;
                SampleSpace::Discrete((0..=top).map(|i| i as f64).collect())
            }
            Self::Exponential => SampleSpace::Continuous {
                lower: 0.0,
                upper: f64::INFINITY,
            },
            _ => SampleSpace::Continuous {
                lower: f64::NEG_INFINITY,
                upper: f64::INFINITY,
            },
        }
    }

    fn breakpoints(&self, theta: &[f64]) -> Vec<f64> {
        match self {
            Self::GaussianLocation { .. } => vec![theta[0]],
            Self::Gaussian => vec![-0.5 * theta[0] / theta[1]],
            _ => Vec::new(),
        }
    }
}
