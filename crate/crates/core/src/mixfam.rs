//! Mixture families with prescribed components.
//!
//! With components `p₀, …, p_{k−1}` and weights `θ ∈ {θᵢ > 0, Σθᵢ < 1}`, the
//! density is `m(x;θ) = Σᵢ θᵢ pᵢ(x) + (1 − Σθᵢ) p₀(x)`. The convex potential
//! is the negative entropy `F(θ) = ∫ m log m`, computed either by quadrature
//! or by a Monte-Carlo estimator over a frozen sample.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::{Cauchy, Distribution, Normal};

use crate::convex::{Domain, Potential};
use crate::error::{check_dim, Error, Result};
use crate::model::{SampleSpace, StatisticalModel};
use crate::quadrature::{self, Options};
use crate::rng::SeededRng;
use crate::tensor::Tensor3;

/// Weights closer than this to the simplex boundary are rejected.
pub const BOUNDARY_CLEARANCE: f64 = 1e-9;

const QUAD_TOL: f64 = 1e-10;
const LN_2PI: f64 = 1.837_877_066_409_345_5;

/// A fixed component density on the real line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ComponentDensity {
    Gaussian { mu: f64, sigma: f64 },
    Laplace { mu: f64, b: f64 },
    Cauchy { x0: f64, gamma: f64 },
}

impl ComponentDensity {
    pub fn gaussian(mu: f64, sigma: f64) -> Result<Self> {
        Self::checked(Self::Gaussian { mu, sigma }, mu, sigma)
    }

    pub fn laplace(mu: f64, b: f64) -> Result<Self> {
        Self::checked(Self::Laplace { mu, b }, mu, b)
    }

    pub fn cauchy(x0: f64, gamma: f64) -> Result<Self> {
        Self::checked(Self::Cauchy { x0, gamma }, x0, gamma)
    }

    fn checked(c: Self, loc: f64, scale: f64) -> Result<Self> {
        if !loc.is_finite() || !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::Invalid(format!("invalid component {c:?}")));
        }
        Ok(c)
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Self::Gaussian { .. } => "gaussian",
            Self::Laplace { .. } => "laplace",
            Self::Cauchy { .. } => "cauchy",
        }
    }

    pub fn location(&self) -> f64 {
        match *self {
            Self::Gaussian { mu, .. } | Self::Laplace { mu, .. } => mu,
            Self::Cauchy { x0, .. } => x0,
        }
    }

    pub fn pdf(&self, x: f64) -> f64 {
        match *self {
            Self::Gaussian { mu, sigma } => {
                let z = (x - mu) / sigma;
                (-0.5 * z * z).exp() / (sigma * (2.0 * std::f64::consts::PI).sqrt())
            }
            Self::Laplace { mu, b } => (-(x - mu).abs() / b).exp() / (2.0 * b),
            Self::Cauchy { x0, gamma } => {
                let z = (x - x0) / gamma;
                1.0 / (std::f64::consts::PI * gamma * (1.0 + z * z))
            }
        }
    }

    /// Differential entropy `−∫ p log p`.
    pub fn entropy(&self) -> f64 {
        match *self {
            Self::Gaussian { sigma, .. } => 0.5 * (LN_2PI + 1.0) + sigma.ln(),
            Self::Laplace { b, .. } => 1.0 + (2.0 * b).ln(),
            Self::Cauchy { gamma, .. } => (4.0 * std::f64::consts::PI * gamma).ln(),
        }
    }

    pub fn sample(&self, rng: &mut SeededRng) -> f64 {
        match *self {
            Self::Gaussian { mu, sigma } => Normal::new(mu, sigma).expect("valid scale").sample(rng),
            Self::Laplace { mu, b } => {
                let u: f64 = rng.random::<f64>() - 0.5;
                mu - b * u.signum() * (1.0 - 2.0 * u.abs()).ln()
            }
            Self::Cauchy { x0, gamma } => Cauchy::new(x0, gamma).expect("valid scale").sample(rng),
        }
    }
}

/// `{m(·;θ)}` over the open simplex of weights for components `p₁..p_{k−1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct MixtureFamily {
    components: Vec<ComponentDensity>,
}

impl MixtureFamily {
    /// Requires at least two components; the first is the reference `p₀`.
    pub fn new(components: Vec<ComponentDensity>) -> Result<Self> {
        if components.len() < 2 {
            return Err(Error::Invalid("a mixture family needs at least two components".into()));
        }
        Ok(Self { components })
    }

    pub fn components(&self) -> &[ComponentDensity] {
        &self.components
    }

    /// Order `D = k − 1`.
    pub fn order(&self) -> usize {
        self.components.len() - 1
    }

    /// Full weight vector `(1 − Σθᵢ, θ₁, …)`.
    pub fn weights(&self, theta: &[f64]) -> Vec<f64> {
        let mut w = Vec::with_capacity(self.components.len());
        w.push(1.0 - theta.iter().sum::<f64>());
        w.extend_from_slice(theta);
        w
    }

    /// Enforces `θᵢ ≥ 1e-9` and `Σθᵢ ≤ 1 − 1e-9`.
    pub fn check_weights(&self, theta: &[f64]) -> Result<()> {
        check_dim(self.order(), theta.len())?;
        let s: f64 = theta.iter().sum();
        if theta.iter().any(|t| !(*t >= BOUNDARY_CLEARANCE)) || !(s <= 1.0 - BOUNDARY_CLEARANCE) {
            return Err(Error::Domain(format!(
                "weights {theta:?} are within {BOUNDARY_CLEARANCE} of the simplex boundary"
            )));
        }
        Ok(())
    }

    fn component_values(&self, x: f64) -> Vec<f64> {
        self.components.iter().map(|c| c.pdf(x)).collect()
    }

    /// `m(x;θ)` without validation.
    pub fn mixture_density(&self, theta: &[f64], x: f64) -> f64 {
        mix(theta, &self.component_values(x))
    }

    fn breaks(&self) -> Vec<f64> {
        let mut b: Vec<f64> = self.components.iter().map(|c| c.location()).collect();
        b.sort_by(f64::total_cmp);
        b.dedup();
        b
    }

    fn integrate(&self, f: impl Fn(f64) -> f64) -> Result<f64> {
        let r = quadrature::integrate_with_breaks(
            f,
            f64::NEG_INFINITY,
            f64::INFINITY,
            &self.breaks(),
            Options::abs(QUAD_TOL),
        )?;
        if r.value.is_finite() {
            Ok(r.value)
        } else {
            Err(Error::Quadrature("integral is not finite".into()))
        }
    }

    /// `∫ m log m` by adaptive quadrature.
    pub fn generator_exact(&self, theta: &[f64]) -> Result<f64> {
        self.check_weights(theta)?;
        self.integrate(|x| xlogx(self.mixture_density(theta, x)))
    }

    /// `∇F(θ)ᵢ = ∫ (pᵢ − p₀) log m`.
    pub fn generator_gradient(&self, theta: &[f64]) -> Result<Vec<f64>> {
        self.check_weights(theta)?;
        (1..self.components.len())
            .map(|i| {
                self.integrate(|x| {
                    let v = self.component_values(x);
                    let m = mix(theta, &v);
                    if m > 0.0 {
                        (v[i] - v[0]) * m.ln()
                    } else {
                        0.0
                    }
                })
            })
            .collect()
    }

    /// Fisher information `∫ (pᵢ − p₀)(pⱼ − p₀)/m`, which is also `∇²F(θ)`.
    pub fn fim_quadrature(&self, theta: &[f64]) -> Result<DMatrix<f64>> {
        self.check_weights(theta)?;
        let d = self.order();
        let mut g = DMatrix::zeros(d, d);
        for i in 0..d {
            for j in i..d {
                let v = self.integrate(|x| {
                    let c = self.component_values(x);
                    let m = mix(theta, &c);
                    if m > 0.0 {
                        (c[i + 1] - c[0]) * (c[j + 1] - c[0]) / m
                    } else {
                        0.0
                    }
                })?;
                g[(i, j)] = v;
                g[(j, i)] = v;
            }
        }
        Ok(g)
    }

    /// `KL[m_θ1 : m_θ2]` by quadrature.
    pub fn kl_mixtures(&self, theta1: &[f64], theta2: &[f64]) -> Result<f64> {
        self.check_weights(theta1)?;
        self.check_weights(theta2)?;
        let v = self.integrate(|x| {
            let c = self.component_values(x);
            let (m1, m2) = (mix(theta1, &c), mix(theta2, &c));
            if m1 > 0.0 && m2 > 0.0 {
                m1 * (m1 / m2).ln()
            } else {
                0.0
            }
        })?;
        Ok(v.max(0.0))
    }

    /// Monte-Carlo generator over `m` draws from the equal-weight mixture of
    /// all components.
    pub fn mc_generator(&self, m: usize, seed: u64) -> Result<MonteCarloGenerator> {
        MonteCarloGenerator::new(self.clone(), m, seed)
    }

    /// The quadrature generator viewed as a [`Potential`].
    pub fn exact_generator(&self) -> ExactGenerator<'_> {
        ExactGenerator { family: self }
    }
}

fn mix(theta: &[f64], comp: &[f64]) -> f64 {
    let c0 = comp[0];
    c0 + theta
        .iter()
        .zip(&comp[1..])
        .map(|(t, ci)| t * (ci - c0))
        .sum::<f64>()
}

fn xlogx(x: f64) -> f64 {
    if x > 0.0 {
        x * x.ln()
    } else {
        0.0
    }
}

impl StatisticalModel for MixtureFamily {
    fn dim(&self) -> usize {
        self.order()
    }

    fn check_parameter(&self, theta: &[f64]) -> Result<()> {
        self.check_weights(theta)
    }

    fn log_density(&self, theta: &[f64], x: f64) -> f64 {
        self.mixture_density(theta, x).ln()
    }

    fn score(&self, theta: &[f64], x: f64) -> Vec<f64> {
        let c = self.component_values(x);
        let m = mix(theta, &c);
        c[1..].iter().map(|ci| (ci - c[0]) / m).collect()
    }

    fn log_density_hessian(&self, theta: &[f64], x: f64) -> DMatrix<f64> {
        let s = self.score(theta, x);
        let d = s.len();
        DMatrix::from_fn(d, d, |i, j| -s[i] * s[j])
    }

    fn sample(&self, theta: &[f64], rng: &mut SeededRng) -> f64 {
        let w = self.weights(theta);
        let u: f64 = rng.random();
        let mut acc = 0.0;
        let mut pick = w.len() - 1;
        for (i, wi) in w.iter().enumerate() {
            acc += wi;
            if u < acc {
                pick = i;
                break;
            }
        }
        self.components[pick].sample(rng)
    }

    fn sample_space(&self, _theta: &[f64]) -> SampleSpace {
        SampleSpace::Continuous {
            lower: f64::NEG_INFINITY,
            upper: f64::INFINITY,
        }
    }

    fn breakpoints(&self, _theta: &[f64]) -> Vec<f64> {
        self.breaks()
    }

    fn density(&self, theta: &[f64], x: f64) -> f64 {
        self.mixture_density(theta, x)
    }
}

/// Negative entropy of a mixture family, evaluated by quadrature.
#[derive(Debug, Clone, Copy)]
pub struct ExactGenerator<'a> {
    family: &'a MixtureFamily,
}

impl Potential for ExactGenerator<'_> {
    fn dim(&self) -> usize {
        self.family.order()
    }
    fn domain(&self) -> Domain {
        Domain::Simplex {
            dim: self.family.order(),
        }
    }
    fn value(&self, theta: &[f64]) -> f64 {
        self.family.generator_exact(theta).unwrap_or(f64::NAN)
    }
    fn exact_gradient(&self, theta: &[f64]) -> Option<Vec<f64>> {
        self.family.generator_gradient(theta).ok()
    }
    fn exact_hessian(&self, theta: &[f64]) -> Option<DMatrix<f64>> {
        self.family.fim_quadrature(theta).ok()
    }
}

/// `F̃_S(θ) = (1/m) Σ_s m(x_s;θ) log m(x_s;θ) / q(x_s)` over a frozen sample
/// `S` drawn from the proposal `q`, the equal-weight mixture of all
/// components. `F̃_S` is convex in `θ` for every `S`, so it defines a dually
/// flat geometry of its own.
#[derive(Debug, Clone)]
pub struct MonteCarloGenerator {
    family: MixtureFamily,
    samples: Vec<f64>,
    /// Component densities at each sample, row-major `m × k`.
    comp: Vec<f64>,
    proposal: Vec<f64>,
}

impl MonteCarloGenerator {
    pub fn new(family: MixtureFamily, m: usize, seed: u64) -> Result<Self> {
        if m == 0 {
            return Err(Error::Invalid("at least one Monte-Carlo sample is required".into()));
        }
        let mut rng = crate::rng::seeded(seed);
        let k = family.components.len();
        let samples: Vec<f64> = (0..m)
            .map(|_| {
                let j = rng.random_range(0..k);
                family.components[j].sample(&mut rng)
            })
            .collect();
        Ok(Self::from_samples(family, samples))
    }

    /// Generator over a caller-supplied sample, taken as draws from the
    /// equal-weight proposal.
    pub fn from_samples(family: MixtureFamily, samples: Vec<f64>) -> Self {
        let k = family.components.len();
        let mut comp = Vec::with_capacity(samples.len() * k);
        let mut proposal = Vec::with_capacity(samples.len());
        for &x in &samples {
            let v = family.component_values(x);
            proposal.push(v.iter().sum::<f64>() / k as f64);
            comp.extend(v);
        }
        Self {
            family,
            samples,
            comp,
            proposal,
        }
    }

    /// Generator over the first `m` samples, so that prefixes are nested.
    pub fn prefix(&self, m: usize) -> Self {
        let m = m.min(self.samples.len()).max(1);
        let k = self.family.components.len();
        Self {
            family: self.family.clone(),
            samples: self.samples[..m].to_vec(),
            comp: self.comp[..m * k].to_vec(),
            proposal: self.proposal[..m].to_vec(),
        }
    }

    pub fn family(&self) -> &MixtureFamily {
        &self.family
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn sample_count(&self) -> usize {
        self.samples.len()
    }

    fn row(&self, s: usize) -> &[f64] {
        let k = self.family.components.len();
        &self.comp[s * k..(s + 1) * k]
    }

    fn per_sample<'a, T>(
        &'a self,
        f: impl Fn(&[f64], f64) -> T + 'a,
    ) -> impl Iterator<Item = T> + 'a {
        (0..self.samples.len()).map(move |s| f(self.row(s), self.proposal[s]))
    }

    /// Summands of `B_{F̃_S}(θ1:θ2)`; each is the pointwise Bregman gap of
    /// `u log u`, `(m₁ log(m₁/m₂) − m₁ + m₂)/q`, hence nonnegative.
    pub fn bregman_terms(&self, theta1: &[f64], theta2: &[f64]) -> Result<Vec<f64>> {
        self.family.check_weights(theta1)?;
        self.family.check_weights(theta2)?;
        Ok(self
            .per_sample(|c, q| {
                let (m1, m2) = (mix(theta1, c), mix(theta2, c));
                (m1 * (m1 / m2).ln() - m1 + m2).max(0.0) / q
            })
            .collect())
    }

    /// `B_{F̃_S}(θ1:θ2)` with its Monte-Carlo standard error `sd/√m`.
    pub fn bregman_with_stderr(&self, theta1: &[f64], theta2: &[f64]) -> Result<(f64, f64)> {
        let terms = self.bregman_terms(theta1, theta2)?;
        Ok(mean_and_stderr(&terms))
    }

    /// `F̃_S(θ)` with the standard error of the sample mean.
    pub fn value_with_stderr(&self, theta: &[f64]) -> Result<(f64, f64)> {
        self.family.check_weights(theta)?;
        let terms: Vec<f64> = self
            .per_sample(|c, q| xlogx(mix(theta, c)) / q)
            .collect();
        Ok(mean_and_stderr(&terms))
    }
}

pub(crate) fn mean_and_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, f64::INFINITY);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

impl Potential for MonteCarloGenerator {
    fn dim(&self) -> usize {
        self.family.order()
    }

    fn domain(&self) -> Domain {
        Domain::Simplex {
            dim: self.family.order(),
        }
    }

    fn value(&self, theta: &[f64]) -> f64 {
        let mut total = 0.0;
        for s in 0..self.samples.len() {
            total += xlogx(mix(theta, self.row(s))) / self.proposal[s];
        }
        total / self.samples.len() as f64
    }

    fn exact_gradient(&self, theta: &[f64]) -> Option<Vec<f64>> {
        let d = self.family.order();
        let mut g = vec![0.0; d];
        for s in 0..self.samples.len() {
            let c = self.row(s);
            let m = mix(theta, c);
            let w = (m.ln() + 1.0) / self.proposal[s];
            for i in 0..d {
                g[i] += (c[i + 1] - c[0]) * w;
            }
        }
        let n = self.samples.len() as f64;
        Some(g.into_iter().map(|v| v / n).collect())
    }

    fn exact_hessian(&self, theta: &[f64]) -> Option<DMatrix<f64>> {
        let d = self.family.order();
        let mut h = DMatrix::zeros(d, d);
        for s in 0..self.samples.len() {
            let c = self.row(s);
            let w = 1.0 / (mix(theta, c) * self.proposal[s]);
            for i in 0..d {
                let di = c[i + 1] - c[0];
                for j in 0..=i {
                    h[(i, j)] += di * (c[j + 1] - c[0]) * w;
                }
            }
        }
        let n = self.samples.len() as f64;
        for i in 0..d {
            for j in 0..=i {
                h[(i, j)] /= n;
                h[(j, i)] = h[(i, j)];
            }
        }
        Some(h)
    }

    fn exact_third(&self, theta: &[f64]) -> Option<Tensor3> {
        let d = self.family.order();
        let mut t = Tensor3::zeros(d);
        let n = self.samples.len() as f64;
        for s in 0..self.samples.len() {
            let c = self.row(s);
            let m = mix(theta, c);
            let w = -1.0 / (m * m * self.proposal[s] * n);
            for i in 0..d {
                for j in 0..d {
                    for k in 0..d {
                        let v = t.get(i, j, k)
                            + (c[i + 1] - c[0]) * (c[j + 1] - c[0]) * (c[k + 1] - c[0]) * w;
                        t.set(i, j, k, v);
                    }
                }
            }
        }
        Some(t)
    }
}
