//! Potential functions and convex duality.
//!
//! A [`Potential`] is a strictly convex smooth `F` on an open convex
//! [`Domain`]. It may supply exact derivatives; anything it leaves out is
//! recovered by central finite differences. The dual coordinates are
//! `η = ∇F(θ)` and the Legendre-Fenchel conjugate
//! `F*(η) = sup_θ { θᵀη − F(θ) }` is computed by damped Newton.

mod builtin;

pub use builtin::{
    ExpSum, FnPotential, GaussianCumulant, LogSumExp, NegEntropy, NegLog, Softplus, SquaredNorm,
};

pub(crate) use builtin::sigmoid;

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::diff;
use crate::error::{check_dim, Error, Result};
use crate::optim::{self, NewtonOptions, Objective};
use crate::tensor::Tensor3;

/// Iterates must stay at least this far inside the domain.
pub const DOMAIN_MARGIN: f64 = 1e-12;

/// Open convex region on which a potential is defined.
#[derive(Debug, Clone, PartialEq)]
pub enum Domain {
    /// Axis-aligned box; bounds may be infinite.
    Box { lower: Vec<f64>, upper: Vec<f64> },
    /// Interior of the probability simplex: `xᵢ > 0`, `Σ xᵢ < 1`.
    Simplex { dim: usize },
    /// `{(a, b) : b > a²}`, the expectation domain of the univariate normal.
    Parabolic,
}

impl Domain {
    pub fn whole(dim: usize) -> Self {
        Domain::Box {
            lower: vec![f64::NEG_INFINITY; dim],
            upper: vec![f64::INFINITY; dim],
        }
    }

    pub fn positive(dim: usize) -> Self {
        Domain::Box {
            lower: vec![0.0; dim],
            upper: vec![f64::INFINITY; dim],
        }
    }

    pub fn negative(dim: usize) -> Self {
        Domain::Box {
            lower: vec![f64::NEG_INFINITY; dim],
            upper: vec![0.0; dim],
        }
    }

    pub fn unit_box(dim: usize) -> Self {
        Domain::Box {
            lower: vec![0.0; dim],
            upper: vec![1.0; dim],
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Domain::Box { lower, .. } => lower.len(),
            Domain::Simplex { dim } => *dim,
            Domain::Parabolic => 2,
        }
    }

    /// Strict interior membership.
    pub fn contains(&self, x: &[f64]) -> bool {
        self.contains_with_margin(x, 0.0)
    }

    /// Interior membership with a clearance of at least `margin` from every
    /// boundary face.
    pub fn contains_with_margin(&self, x: &[f64], margin: f64) -> bool {
        if x.len() != self.dim() || x.iter().any(|v| !v.is_finite()) {
            return false;
        }
        let d = self.boundary_distance(x);
        d > 0.0 && d >= margin
    }

    /// A lower bound on the sup-norm distance from `x` to the boundary
    /// (negative when outside, `+∞` for unbounded directions).
    pub fn boundary_distance(&self, x: &[f64]) -> f64 {
        match self {
            Domain::Box { lower, upper } => x
                .iter()
                .zip(lower.iter().zip(upper))
                .map(|(&v, (&lo, &hi))| (v - lo).min(hi - v))
                .fold(f64::INFINITY, f64::min),
            Domain::Simplex { dim } => {
                let slack = 1.0 - x.iter().sum::<f64>();
                let lo = x.iter().copied().fold(f64::INFINITY, f64::min);
                lo.min(slack / *dim as f64)
            }
            Domain::Parabolic => {
                let (a, b) = (x[0], x[1]);
                (b - a * a) / (2.0 * (1.0 + 2.0 * a.abs()) + 1.0)
            }
        }
    }

    /// A canonical interior point.
    pub fn reference_point(&self) -> Vec<f64> {
        match self {
            Domain::Box { lower, upper } => lower
                .iter()
                .zip(upper)
                .map(|(&lo, &hi)| match (lo.is_finite(), hi.is_finite()) {
                    (true, true) => 0.5 * (lo + hi),
                    (true, false) => lo + 1.0,
                    (false, true) => hi - 1.0,
                    (false, false) => 0.0,
                })
                .collect(),
            Domain::Simplex { dim } => vec![1.0 / (*dim as f64 + 1.0); *dim],
            Domain::Parabolic => vec![0.0, 1.0],
        }
    }
}

/// Strictly convex smooth function on an open convex domain.
///
/// Only [`Potential::value`] is mandatory. The `exact_*` hooks return `None`
/// when no closed form is known.
pub trait Potential: Send + Sync {
    fn dim(&self) -> usize;
    fn domain(&self) -> Domain;
    /// `F(θ)`; callers guarantee `θ` is interior.
    fn value(&self, theta: &[f64]) -> f64;

    fn exact_gradient(&self, _theta: &[f64]) -> Option<Vec<f64>> {
        None
    }
    fn exact_hessian(&self, _theta: &[f64]) -> Option<DMatrix<f64>> {
        None
    }
    fn exact_third(&self, _theta: &[f64]) -> Option<Tensor3> {
        None
    }
    /// Closed-form `θ = (∇F)⁻¹(η)`.
    fn exact_inverse_gradient(&self, _eta: &[f64]) -> Option<Vec<f64>> {
        None
    }
    /// Range of `∇F`, when it is one of the supported domain shapes.
    fn dual_domain(&self) -> Option<Domain> {
        None
    }
}

macro_rules! forward_potential {
    ($($ty:ty),*) => {$(
        impl<P: Potential + ?Sized> Potential for $ty {
            fn dim(&self) -> usize { (**self).dim() }
            fn domain(&self) -> Domain { (**self).domain() }
            fn value(&self, theta: &[f64]) -> f64 { (**self).value(theta) }
            fn exact_gradient(&self, theta: &[f64]) -> Option<Vec<f64>> { (**self).exact_gradient(theta) }
            fn exact_hessian(&self, theta: &[f64]) -> Option<DMatrix<f64>> { (**self).exact_hessian(theta) }
            fn exact_third(&self, theta: &[f64]) -> Option<Tensor3> { (**self).exact_third(theta) }
            fn exact_inverse_gradient(&self, eta: &[f64]) -> Option<Vec<f64>> { (**self).exact_inverse_gradient(eta) }
            fn dual_domain(&self) -> Option<Domain> { (**self).dual_domain() }
        }
    )*};
}

forward_potential!(&P, Box<P>, Arc<P>);

pub(crate) fn check_point<P: Potential + ?Sized>(f: &P, theta: &[f64]) -> Result<()> {
    check_dim(f.dim(), theta.len())?;
    if f.domain().contains(theta) {
        Ok(())
    } else {
        Err(Error::Domain(format!("{theta:?} is not interior")))
    }
}

fn step_cap<P: Potential + ?Sized>(f: &P, theta: &[f64]) -> f64 {
    0.5 * f.domain().boundary_distance(theta)
}

/// `F(θ)` with a domain check.
pub fn value<P: Potential + ?Sized>(f: &P, theta: &[f64]) -> Result<f64> {
    check_point(f, theta)?;
    Ok(f.value(theta))
}

/// `η = ∇F(θ)`: exact when the potential provides it, else central
/// differences.
pub fn grad<P: Potential + ?Sized>(f: &P, theta: &[f64]) -> Result<Vec<f64>> {
    check_point(f, theta)?;
    Ok(grad_unchecked(f, theta))
}

fn grad_unchecked<P: Potential + ?Sized>(f: &P, theta: &[f64]) -> Vec<f64> {
    f.exact_gradient(theta).unwrap_or_else(|| {
        diff::gradient_capped(|x| f.value(x), theta, step_cap(f, theta))
    })
}

/// Alias of [`grad`] named for the coordinate change it performs.
pub fn theta_to_eta<P: Potential + ?Sized>(f: &P, theta: &[f64]) -> Result<Vec<f64>> {
    grad(f, theta)
}

/// `∇²F(θ)`.
pub fn hessian<P: Potential + ?Sized>(f: &P, theta: &[f64]) -> Result<DMatrix<f64>> {
    check_point(f, theta)?;
    Ok(hessian_unchecked(f, theta))
}

fn hessian_unchecked<P: Potential + ?Sized>(f: &P, theta: &[f64]) -> DMatrix<f64> {
    if let Some(h) = f.exact_hessian(theta) {
        return h;
    }
    let cap = step_cap(f, theta);
    if f.exact_gradient(theta).is_some() {
        diff::symmetric_jacobian(
            |x| grad_unchecked(f, x),
            theta,
            |v| diff::hessian_step(v).min(cap),
        )
    } else {
        diff::hessian_capped(|x| f.value(x), theta, cap)
    }
}

/// `C_ijk = ∂_i∂_j∂_k F(θ)`, totally symmetric.
pub fn cubic_tensor<P: Potential + ?Sized>(f: &P, theta: &[f64]) -> Result<Tensor3> {
    check_point(f, theta)?;
    if let Some(t) = f.exact_third(theta) {
        return Ok(t);
    }
    Ok(diff::third_from_hessian(
        |x| hessian_unchecked(f, x),
        theta,
        step_cap(f, theta),
    ))
}

/// Value and maximiser of the Legendre-Fenchel transform at `η`.
#[derive(Debug, Clone, PartialEq)]
pub struct Conjugate {
    pub value: f64,
    pub theta: Vec<f64>,
    pub iterations: usize,
    /// `‖∇F(θ) − η‖∞` at the returned point.
    pub residual: f64,
}

struct ConjugateObjective<'a, P: ?Sized> {
    f: &'a P,
    eta: &'a [f64],
}

impl<P: Potential + ?Sized> Objective for ConjugateObjective<'_, P> {
    fn value(&self, x: &[f64]) -> Result<f64> {
        if !self.f.domain().contains_with_margin(x, DOMAIN_MARGIN) {
            return Err(Error::Domain("iterate left the domain".into()));
        }
        let v = self.f.value(x) - dot(x, self.eta);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::Domain("potential not finite".into()))
        }
    }
    fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        Ok(grad_unchecked(self.f, x)
            .iter()
            .zip(self.eta)
            .map(|(g, e)| g - e)
            .collect())
    }
    fn hessian(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        Ok(hessian_unchecked(self.f, x))
    }
}

/// `F*(η)` by damped Newton on `θ ↦ F(θ) − θᵀη`, started at the domain's
/// reference point. The residual `‖∇F(θ*) − η‖∞` is driven below `1e-10`.
pub fn legendre_conjugate<P: Potential + ?Sized>(f: &P, eta: &[f64]) -> Result<Conjugate> {
    conjugate_from(f, eta, &f.domain().reference_point())
}

fn conjugate_from<P: Potential + ?Sized>(f: &P, eta: &[f64], start: &[f64]) -> Result<Conjugate> {
    check_dim(f.dim(), eta.len())?;
    if let Some(dd) = f.dual_domain() {
        if !dd.contains(eta) {
            return Err(Error::Domain(format!(
                "{eta:?} lies outside the range of the gradient"
            )));
        }
    }
    let obj = ConjugateObjective { f, eta };
    let out = optim::minimize(&obj, start, None, NewtonOptions::default())?;
    Ok(Conjugate {
        value: -out.value,
        theta: out.x,
        iterations: out.iterations,
        residual: out.residual,
    })
}

/// `θ = ∇F*(η)`: closed form when available, else the conjugate solve.
pub fn eta_to_theta<P: Potential + ?Sized>(f: &P, eta: &[f64]) -> Result<Vec<f64>> {
    check_dim(f.dim(), eta.len())?;
    if let Some(dd) = f.dual_domain() {
        if !dd.contains(eta) {
            return Err(Error::Domain(format!(
                "{eta:?} lies outside the range of the gradient"
            )));
        }
    }
    if let Some(theta) = f.exact_inverse_gradient(eta) {
        if f.domain().contains(&theta) {
            return Ok(theta);
        }
    }
    legendre_conjugate(f, eta).map(|c| c.theta)
}

/// `F*(η)` evaluated through the closed-form inverse when available.
pub fn conjugate_value<P: Potential + ?Sized>(f: &P, eta: &[f64]) -> Result<f64> {
    let theta = eta_to_theta(f, eta)?;
    Ok(dot(&theta, eta) - f.value(&theta))
}

/// `‖∇²F(θ)·∇²F*(∇F(θ)) − I‖` (max-entry norm), with `∇²F*` from
/// five-point differences of the numerically solved inverse map.
pub fn crouzeix_residual<P: Potential + ?Sized>(f: &P, theta: &[f64]) -> Result<f64> {
    let h = hessian(f, theta)?;
    let eta = grad(f, theta)?;
    let cap = f
        .dual_domain()
        .map(|d| 0.25 * d.boundary_distance(&eta))
        .unwrap_or(f64::INFINITY);
    let failure = std::cell::RefCell::new(None);
    let hstar = diff::symmetric_jacobian_5pt(
        |e| match conjugate_from(f, e, theta) {
            Ok(c) => c.theta,
            Err(err) => {
                failure.borrow_mut().get_or_insert(err);
                vec![f64::NAN; e.len()]
            }
        },
        &eta,
        |v| diff::hessian_step(v).min(cap),
    );
    if let Some(err) = failure.into_inner() {
        return Err(err);
    }
    let prod = h * hstar - DMatrix::identity(theta.len(), theta.len());
    Ok(prod.amax())
}

/// A point carried in both affine coordinate systems.
#[derive(Debug, Clone, PartialEq)]
pub struct DualCoords {
    pub theta: Vec<f64>,
    pub eta: Vec<f64>,
}

impl DualCoords {
    pub fn from_theta<P: Potential + ?Sized>(f: &P, theta: &[f64]) -> Result<Self> {
        Ok(Self {
            eta: grad(f, theta)?,
            theta: theta.to_vec(),
        })
    }

    pub fn from_eta<P: Potential + ?Sized>(f: &P, eta: &[f64]) -> Result<Self> {
        Ok(Self {
            theta: eta_to_theta(f, eta)?,
            eta: eta.to_vec(),
        })
    }
}

/// The conjugate `F*` realised numerically: values come from
/// [`legendre_conjugate`] and `∇F*(η)` is the maximiser.
#[derive(Debug, Clone)]
pub struct NumericConjugate<P> {
    primal: P,
}

impl<P: Potential> NumericConjugate<P> {
    pub fn new(primal: P) -> Self {
        Self { primal }
    }
}

impl<P: Potential> Potential for NumericConjugate<P> {
    fn dim(&self) -> usize {
        self.primal.dim()
    }
    fn domain(&self) -> Domain {
        self.primal
            .dual_domain()
            .unwrap_or_else(|| Domain::whole(self.primal.dim()))
    }
    fn value(&self, eta: &[f64]) -> f64 {
        legendre_conjugate(&self.primal, eta)
            .map(|c| c.value)
            .unwrap_or(f64::NAN)
    }
    fn exact_gradient(&self, eta: &[f64]) -> Option<Vec<f64>> {
        Some(
            legendre_conjugate(&self.primal, eta)
                .map(|c| c.theta)
                .unwrap_or_else(|_| vec![f64::NAN; eta.len()]),
        )
    }
    fn dual_domain(&self) -> Option<Domain> {
        Some(self.primal.domain())
    }
}

/// Symmetric positive-definite matrix defining a fixed tangent-space metric.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticForm {
    matrix: DMatrix<f64>,
}

impl QuadraticForm {
    pub fn new(matrix: DMatrix<f64>) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::Dimension {
                expected: matrix.nrows(),
                got: matrix.ncols(),
            });
        }
        let scale = matrix.amax().max(1.0);
        if (&matrix - matrix.transpose()).amax() > 1e-12 * scale {
            return Err(Error::Invalid("quadratic form is not symmetric".into()));
        }
        if matrix.clone().cholesky().is_none() {
            return Err(Error::Invalid(
                "quadratic form is not positive-definite".into(),
            ));
        }
        Ok(Self { matrix })
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            matrix: DMatrix::identity(dim, dim),
        }
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    /// `√((u−v)ᵀ G (u−v))`.
    pub fn mahalanobis(&self, u: &[f64], v: &[f64]) -> Result<f64> {
        check_dim(self.matrix.nrows(), u.len())?;
        check_dim(self.matrix.nrows(), v.len())?;
        let d = DVector::from_iterator(u.len(), u.iter().zip(v).map(|(a, b)| a - b));
        let q = d.dot(&(&self.matrix * &d));
        Ok(q.max(0.0).sqrt())
    }
}

pub fn mahalanobis(q: &QuadraticForm, u: &[f64], v: &[f64]) -> Result<f64> {
    q.mahalanobis(u, v)
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[cfg(test)]
mod tests;
