//! Built-in potentials with exact derivatives and inverse gradients.

use nalgebra::DMatrix;

use super::{Domain, Potential};
use crate::tensor::Tensor3;

pub(crate) fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

pub(crate) fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

fn diag(values: impl ExactSizeIterator<Item = f64>) -> DMatrix<f64> {
    let v: Vec<f64> = values.collect();
    DMatrix::from_diagonal(&nalgebra::DVector::from_vec(v))
}

fn diag3(values: &[f64]) -> Tensor3 {
    let mut t = Tensor3::zeros(values.len());
    for (i, &v) in values.iter().enumerate() {
        t.set(i, i, i, v);
    }
    t
}

/// `F(θ) = (s/2)‖θ‖²`. Self-dual up to scale; with `s = 1/σ²` it is the
/// cumulant of the fixed-variance normal location family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SquaredNorm {
    pub dim: usize,
    pub scale: f64,
}

impl SquaredNorm {
    pub fn new(dim: usize) -> Self {
        Self { dim, scale: 1.0 }
    }

    pub fn scaled(dim: usize, scale: f64) -> Self {
        assert!(scale > 0.0, "scale must be positive");
        Self { dim, scale }
    }
}

impl Potential for SquaredNorm {
    fn dim(&self) -> usize {
        self.dim
    }
    fn domain(&self) -> Domain {
        Domain::whole(self.dim)
    }
    fn value(&self, theta: &[f64]) -> f64 {
        0.5 * self.scale * theta.iter().map(|t| t * t).sum::<f64>()
    }
    fn exact_gradient(&self, theta: &[f64]) -> Option<Vec<f64>> {
        Some(theta.iter().map(|t| self.scale * t).collect())
    }
    fn exact_hessian(&self, _theta: &[f64]) -> Option<DMatrix<f64>> {
        Some(DMatrix::identity(self.dim, self.dim) * self.scale)
    }
    fn exact_third(&self, _theta: &[f64]) -> Option<Tensor3> {
        Some(Tensor3::zeros(self.dim))
    }
    fn exact_inverse_gradient(&self, eta: &[f64]) -> Option<Vec<f64>> {
        Some(eta.iter().map(|e| e / self.scale).collect())
    }
    fn dual_domain(&self) -> Option<Domain> {
        Some(Domain::whole(self.dim))
    }
}

/// `F(θ) = Σ exp(θᵢ)`: product of Poisson cumulants.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExpSum {
    pub dim: usize,
}

impl Potential for ExpSum {
    fn dim(&self) -> usize {
        self.dim
    }
    fn domain(&self) -> Domain {
        Domain::whole(self.dim)
    }
    fn value(&self, theta: &[f64]) -> f64 {
        theta.iter().map(|t| t.exp()).sum()
    }
    fn exact_gradient(&self, theta: &[f64]) -> Option<Vec<f64>> {
        Some(theta.iter().map(|t| t.exp()).collect())
    }
    fn exact_hessian(&self, theta: &[f64]) -> Option<DMatrix<f64>> {
        Some(diag(theta.iter().map(|t| t.exp())))
    }
    fn exact_third(&self, theta: &[f64]) -> Option<Tensor3> {
        let v: Vec<f64> = theta.iter().map(|t| t.exp()).collect();
        Some(diag3(&v))
    }
    fn exact_inverse_gradient(&self, eta: &[f64]) -> Option<Vec<f64>> {
        Some(eta.iter().map(|e| e.ln()).collect())
    }
    fn dual_domain(&self) -> Option<Domain> {
        Some(Domain::positive(self.dim))
    }
}

/// `F(θ) = Σ log(1 + exp(θᵢ))`: product of Bernoulli cumulants.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Softplus {
    pub dim: usize,
}

impl Potential for Softplus {
    fn dim(&self) -> usize {
        self.dim
    }
    fn domain(&self) -> Domain {
        Domain::whole(self.dim)
    }
    fn value(&self, theta: &[f64]) -> f64 {
        theta.iter().map(|&t| softplus(t)).sum()
    }
    fn exact_gradient(&self, theta: &[f64]) -> Option<Vec<f64>> {
        Some(theta.iter().map(|&t| sigmoid(t)).collect())
    }
    fn exact_hessian(&self, theta: &[f64]) -> Option<DMatrix<f64>> {
        Some(diag(theta.iter().map(|&t| {
            let s = sigmoid(t);
            s * (1.0 - s)
        })))
    }
    fn exact_third(&self, theta: &[f64]) -> Option<Tensor3> {
        let v: Vec<f64> = theta
            .iter()
            .map(|&t| {
                let s = sigmoid(t);
                s * (1.0 - s) * (1.0 - 2.0 * s)
            })
            .collect();
        Some(diag3(&v))
    }
    fn exact_inverse_gradient(&self, eta: &[f64]) -> Option<Vec<f64>> {
        Some(eta.iter().map(|&e| (e / (1.0 - e)).ln()).collect())
    }
    fn dual_domain(&self) -> Option<Domain> {
        Some(Domain::unit_box(self.dim))
    }
}

/// `F(θ) = log(1 + Σ exp(θᵢ))`: categorical cumulant with the last class as
/// reference.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LogSumExp {
    pub dim: usize,
}

impl LogSumExp {
    /// Class probabilities of the non-reference classes.
    pub fn probabilities(theta: &[f64]) -> Vec<f64> {
        let m = theta.iter().copied().fold(0.0, f64::max);
        let z = (-m).exp() + theta.iter().map(|t| (t - m).exp()).sum::<f64>();
        theta.iter().map(|t| (t - m).exp() / z).collect()
    }
}

impl Potential for LogSumExp {
    fn dim(&self) -> usize {
        self.dim
    }
    fn domain(&self) -> Domain {
        Domain::whole(self.dim)
    }
    fn value(&self, theta: &[f64]) -> f64 {
        let m = theta.iter().copied().fold(0.0, f64::max);
        m + ((-m).exp() + theta.iter().map(|t| (t - m).exp()).sum::<f64>()).ln()
    }
    fn exact_gradient(&self, theta: &[f64]) -> Option<Vec<f64>> {
        Some(Self::probabilities(theta))
    }
    fn exact_hessian(&self, theta: &[f64]) -> Option<DMatrix<f64>> {
        let p = Self::probabilities(theta);
        let d = p.len();
        Some(DMatrix::from_fn(d, d, |i, j| {
            if i == j {
                p[i] - p[i] * p[j]
            } else {
                -p[i] * p[j]
            }
        }))
    }
    fn exact_third(&self, theta: &[f64]) -> Option<Tensor3> {
        let p = Self::probabilities(theta);
        let delta = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
        Some(Tensor3::from_fn(p.len(), |i, j, k| {
            let mut v = 2.0 * p[i] * p[j] * p[k];
            if i == j && j == k {
                v += p[i];
            }
            v - delta(i, j) * p[i] * p[k] - delta(i, k) * p[i] * p[j] - delta(j, k) * p[i] * p[j]
        }))
    }
    fn exact_inverse_gradient(&self, eta: &[f64]) -> Option<Vec<f64>> {
        let rest = 1.0 - eta.iter().sum::<f64>();
        Some(eta.iter().map(|e| (e / rest).ln()).collect())
    }
    fn dual_domain(&self) -> Option<Domain> {
        Some(Domain::Simplex { dim: self.dim })
    }
}

/// `F(θ) = Σ θᵢ log θᵢ` on the positive orthant; its Bregman divergence is
/// the extended Kullback-Leibler divergence.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NegEntropy {
    pub dim: usize,
}

impl Potential for NegEntropy {
    fn dim(&self) -> usize {
        self.dim
    }
    fn domain(&self) -> Domain {
        Domain::positive(self.dim)
    }
    fn value(&self, theta: &[f64]) -> f64 {
        theta.iter().map(|t| t * t.ln()).sum()
    }
    fn exact_gradient(&self, theta: &[f64]) -> Option<Vec<f64>> {
        Some(theta.iter().map(|t| t.ln() + 1.0).collect())
    }
    fn exact_hessian(&self, theta: &[f64]) -> Option<DMatrix<f64>> {
        Some(diag(theta.iter().map(|t| 1.0 / t)))
    }
    fn exact_third(&self, theta: &[f64]) -> Option<Tensor3> {
        let v: Vec<f64> = theta.iter().map(|t| -1.0 / (t * t)).collect();
        Some(diag3(&v))
    }
    fn exact_inverse_gradient(&self, eta: &[f64]) -> Option<Vec<f64>> {
        Some(eta.iter().map(|e| (e - 1.0).exp()).collect())
    }
    fn dual_domain(&self) -> Option<Domain> {
        Some(Domain::whole(self.dim))
    }
}

/// `F(θ) = Σ −log(−θᵢ)` on the negative orthant: product of exponential
/// distribution cumulants (`θ = −rate`).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NegLog {
    pub dim: usize,
}

impl Potential for NegLog {
    fn dim(&self) -> usize {
        self.dim
    }
    fn domain(&self) -> Domain {
        Domain::negative(self.dim)
    }
    fn value(&self, theta: &[f64]) -> f64 {
        theta.iter().map(|t| -(-t).ln()).sum()
    }
    fn exact_gradient(&self, theta: &[f64]) -> Option<Vec<f64>> {
        Some(theta.iter().map(|t| -1.0 / t).collect())
    }
    fn exact_hessian(&self, theta: &[f64]) -> Option<DMatrix<f64>> {
        Some(diag(theta.iter().map(|t| 1.0 / (t * t))))
    }
    fn exact_third(&self, theta: &[f64]) -> Option<Tensor3> {
        let v: Vec<f64> = theta.iter().map(|t| -2.0 / (t * t * t)).collect();
        Some(diag3(&v))
    }
    fn exact_inverse_gradient(&self, eta: &[f64]) -> Option<Vec<f64>> {
        Some(eta.iter().map(|e| -1.0 / e).collect())
    }
    fn dual_domain(&self) -> Option<Domain> {
        Some(Domain::positive(self.dim))
    }
}

/// Cumulant of the univariate normal in natural coordinates
/// `θ = (μ/σ², −1/(2σ²))`: `F(θ) = −θ₁²/(4θ₂) − ½ log(−2θ₂)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct GaussianCumulant;

impl Potential for GaussianCumulant {
    fn dim(&self) -> usize {
        2
    }
    fn domain(&self) -> Domain {
        Domain::Box {
            lower: vec![f64::NEG_INFINITY, f64::NEG_INFINITY],
            upper: vec![f64::INFINITY, 0.0],
        }
    }
    fn value(&self, t: &[f64]) -> f64 {
        -t[0] * t[0] / (4.0 * t[1]) - 0.5 * (-2.0 * t[1]).ln()
    }
    fn exact_gradient(&self, t: &[f64]) -> Option<Vec<f64>> {
        let (a, b) = (t[0], t[1]);
        Some(vec![-a / (2.0 * b), a * a / (4.0 * b * b) - 1.0 / (2.0 * b)])
    }
    fn exact_hessian(&self, t: &[f64]) -> Option<DMatrix<f64>> {
        let (a, b) = (t[0], t[1]);
        let h11 = -1.0 / (2.0 * b);
        let h12 = a / (2.0 * b * b);
        let h22 = -a * a / (2.0 * b * b * b) + 1.0 / (2.0 * b * b);
        Some(DMatrix::from_row_slice(2, 2, &[h11, h12, h12, h22]))
    }
    fn exact_third(&self, t: &[f64]) -> Option<Tensor3> {
        let (a, b) = (t[0], t[1]);
        let c112 = 1.0 / (2.0 * b * b);
        let c122 = -a / (b * b * b);
        let c222 = 1.5 * a * a / b.powi(4) - 1.0 / (b * b * b);
        Some(Tensor3::from_fn(2, |i, j, k| match i + j + k {
            0 => 0.0,
            1 => c112,
            2 => c122,
            _ => c222,
        }))
    }
    fn exact_inverse_gradient(&self, eta: &[f64]) -> Option<Vec<f64>> {
        let var = eta[1] - eta[0] * eta[0];
        Some(vec![eta[0] / var, -1.0 / (2.0 * var)])
    }
    fn dual_domain(&self) -> Option<Domain> {
        Some(Domain::Parabolic)
    }
}

type ScalarField = Box<dyn Fn(&[f64]) -> f64 + Send + Sync>;
type VectorField = Box<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;

/// Potential assembled from closures; derivatives not supplied are taken by
/// finite differences.
pub struct FnPotential {
    dim: usize,
    domain: Domain,
    value: ScalarField,
    gradient: Option<VectorField>,
    dual_domain: Option<Domain>,
}

impl FnPotential {
    pub fn new(domain: Domain, value: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            dim: domain.dim(),
            domain,
            value: Box::new(value),
            gradient: None,
            dual_domain: None,
        }
    }

    pub fn with_gradient(
        mut self,
        gradient: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    ) -> Self {
        self.gradient = Some(Box::new(gradient));
        self
    }

    pub fn with_dual_domain(mut self, domain: Domain) -> Self {
        self.dual_domain = Some(domain);
        self
    }
}

impl std::fmt::Debug for FnPotential {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FnPotential")
            .field("dim", &self.dim)
            .field("domain", &self.domain)
            .finish_non_exhaustive()
    }
}

impl Potential for FnPotential {
    fn dim(&self) -> usize {
        self.dim
    }
    fn domain(&self) -> Domain {
        self.domain.clone()
    }
    fn value(&self, theta: &[f64]) -> f64 {
        (self.value)(theta)
    }
    fn exact_gradient(&self, theta: &[f64]) -> Option<Vec<f64>> {
        self.gradient.as_ref().map(|g| g(theta))
    }
    fn dual_domain(&self) -> Option<Domain> {
        self.dual_domain.clone()
    }
}
