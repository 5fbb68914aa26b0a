//! Parametric densities on the real line (or a subset of the integers) that
//! can be evaluated, differentiated in the parameter and sampled.

use nalgebra::DMatrix;

use crate::diff;
use crate::error::{Error, Result};
use crate::quadrature::{self, Options};
use crate::rng::SeededRng;

/// Where observations live, as needed to sum or integrate over them.
#[derive(Debug, Clone, PartialEq)]
pub enum SampleSpace {
    /// Finitely many atoms (possibly a truncation carrying all but a
    /// negligible amount of mass).
    Discrete(Vec<f64>),
    /// Interval with a density; bounds may be infinite.
    Continuous { lower: f64, upper: f64 },
}

/// A model `x ↦ p(x;θ)` with scalar observations. Categorical outcomes are
/// encoded by their index.
pub trait StatisticalModel: Send + Sync {
    /// Number of parameters.
    fn dim(&self) -> usize;

    fn check_parameter(&self, theta: &[f64]) -> Result<()>;

    /// `log p(x;θ)`; callers guarantee `θ` is valid.
    fn log_density(&self, theta: &[f64], x: f64) -> f64;

    /// `∇_θ log p(x;θ)`.
    fn score(&self, theta: &[f64], x: f64) -> Vec<f64> {
        diff::gradient(|t| self.log_density(t, x), theta)
    }

    /// `∇²_θ log p(x;θ)`.
    fn log_density_hessian(&self, theta: &[f64], x: f64) -> DMatrix<f64> {
        diff::symmetric_jacobian(|t| self.score(t, x), theta, diff::hessian_step)
    }

    fn sample(&self, theta: &[f64], rng: &mut SeededRng) -> f64;

    fn sample_space(&self, theta: &[f64]) -> SampleSpace;

    /// Points where the density has kinks or concentrated mass, used to split
    /// quadrature panels.
    fn breakpoints(&self, _theta: &[f64]) -> Vec<f64> {
        Vec::new()
    }

    fn density(&self, theta: &[f64], x: f64) -> f64 {
        self.log_density(theta, x).exp()
    }
}

macro_rules! forward_model {
    ($($ty:ty),*) => {$(
        impl<M: StatisticalModel + ?Sized> StatisticalModel for $ty {
            fn dim(&self) -> usize { (**self).dim() }
            fn check_parameter(&self, theta: &[f64]) -> Result<()> { (**self).check_parameter(theta) }
            fn log_density(&self, theta: &[f64], x: f64) -> f64 { (**self).log_density(theta, x) }
            fn score(&self, theta: &[f64], x: f64) -> Vec<f64> { (**self).score(theta, x) }
            fn log_density_hessian(&self, theta: &[f64], x: f64) -> DMatrix<f64> { (**self).log_density_hessian(theta, x) }
            fn sample(&self, theta: &[f64], rng: &mut SeededRng) -> f64 { (**self).sample(theta, rng) }
            fn sample_space(&self, theta: &[f64]) -> SampleSpace { (**self).sample_space(theta) }
            fn breakpoints(&self, theta: &[f64]) -> Vec<f64> { (**self).breakpoints(theta) }
            fn density(&self, theta: &[f64], x: f64) -> f64 { (**self).density(theta, x) }
        }
    )*};
}

forward_model!(&M, Box<M>, std::sync::Arc<M>);

/// `∫ g(x) p(x;θ) dx` (or the corresponding sum) for a scalar integrand.
pub fn expectation<M, G>(model: &M, theta: &[f64], g: G, opts: Options) -> Result<f64>
where
    M: StatisticalModel + ?Sized,
    G: Fn(f64) -> f64,
{
    model.check_parameter(theta)?;
    match model.sample_space(theta) {
        SampleSpace::Discrete(atoms) => Ok(atoms
            .iter()
            .map(|&x| {
                let p = model.density(theta, x);
                if p > 0.0 {
                    p * g(x)
                } else {
                    0.0
                }
            })
            .sum()),
        SampleSpace::Continuous { lower, upper } => {
            let breaks = model.breakpoints(theta);
            let integrand = |x: f64| {
                let p = model.density(theta, x);
                if p > 0.0 {
                    p * g(x)
                } else {
                    0.0
                }
            };
            let r = quadrature::integrate_with_breaks(integrand, lower, upper, &breaks, opts)?;
            if r.value.is_finite() {
                Ok(r.value)
            } else {
                Err(Error::Quadrature("expectation is not finite".into()))
            }
        }
    }
}

/// Draws `n` observations.
pub fn sample_n<M: StatisticalModel + ?Sized>(
    model: &M,
    theta: &[f64],
    n: usize,
    rng: &mut SeededRng,
) -> Vec<f64> {
    (0..n).map(|_| model.sample(theta, rng)).collect()
}
