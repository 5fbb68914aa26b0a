//! Dually flat manifolds: dual geodesics, m-bisectors, Bregman projections
//! onto affine submanifolds, Pythagorean identities and alternating
//! projections.

use nalgebra::{DMatrix, DVector};

use crate::convex::{self, dot, DualCoords, Potential, DOMAIN_MARGIN};
use crate::divergence::bregman;
use crate::error::{check_dim, Error, Result};
use crate::optim::{self, NewtonOptions, Objective};

/// Which affine coordinate system a construction refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Chart {
    /// Natural coordinates `θ`; flat for the primal connection.
    Primal,
    /// Expectation coordinates `η`; flat for the dual connection.
    Dual,
}

/// `{x : A x = b}` in one chart, with `A` of full row rank `c < D`.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineSubmanifold {
    chart: Chart,
    a: DMatrix<f64>,
    b: DVector<f64>,
}

impl AffineSubmanifold {
    pub fn new(chart: Chart, a: DMatrix<f64>, b: Vec<f64>) -> Result<Self> {
        check_dim(a.nrows(), b.len())?;
        if a.nrows() == 0 || a.nrows() >= a.ncols() {
            return Err(Error::Invalid(format!(
                "need 0 < constraints < dimension, got {}x{}",
                a.nrows(),
                a.ncols()
            )));
        }
        if a.rank(1e-10 * a.amax().max(1.0)) < a.nrows() {
            return Err(Error::Invalid("constraint matrix is rank deficient".into()));
        }
        Ok(Self {
            chart,
            a,
            b: DVector::from_vec(b),
        })
    }

    /// Row-major constraint rows followed by the right-hand side.
    pub fn from_rows(chart: Chart, rows: &[Vec<f64>], b: Vec<f64>) -> Result<Self> {
        let d = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != d) {
            return Err(Error::Invalid("constraint rows differ in length".into()));
        }
        let a = DMatrix::from_fn(rows.len(), d, |i, j| rows[i][j]);
        Self::new(chart, a, b)
    }

    pub fn chart(&self) -> Chart {
        self.chart
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn rhs(&self) -> &DVector<f64> {
        &self.b
    }

    pub fn ambient_dim(&self) -> usize {
        self.a.ncols()
    }

    /// `‖A x − b‖∞`.
    pub fn residual(&self, x: &[f64]) -> f64 {
        (&self.a * DVector::from_column_slice(x) - &self.b).amax()
    }

    /// Euclidean projection (in chart coordinates) onto the affine set.
    pub fn nearest(&self, x: &[f64]) -> Vec<f64> {
        let xv = DVector::from_column_slice(x);
        let gram = &self.a * self.a.transpose();
        let r = &self.a * &xv - &self.b;
        let corr = gram
            .lu()
            .solve(&r)
            .expect("full row rank checked at construction");
        (xv - self.a.transpose() * corr).as_slice().to_vec()
    }
}

/// Straight segment in `θ` (primal) or `η` (dual) coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct GeodesicSegment {
    pub kind: Chart,
    pub start: DualCoords,
    pub end: DualCoords,
}

/// A potential together with its dual coordinate machinery.
#[derive(Debug, Clone)]
pub struct DuallyFlatManifold<P> {
    potential: P,
}

/// Outcome of alternating projections between two affine submanifolds.
#[derive(Debug, Clone, PartialEq)]
pub struct SetDivergence {
    /// `B_F(θ_s : θ_s′)` at the final pair.
    pub value: f64,
    /// Point of the primal-affine set.
    pub first: DualCoords,
    /// Point of the dual-affine set.
    pub second: DualCoords,
    /// Divergence after each full alternation; non-increasing.
    pub history: Vec<f64>,
}

const SET_TOL: f64 = 1e-10;
const SET_MAX_ITER: usize = 500;

impl<P: Potential> DuallyFlatManifold<P> {
    pub fn new(potential: P) -> Self {
        Self { potential }
    }

    pub fn potential(&self) -> &P {
        &self.potential
    }

    pub fn dim(&self) -> usize {
        self.potential.dim()
    }

    pub fn theta_to_eta(&self, theta: &[f64]) -> Result<Vec<f64>> {
        convex::grad(&self.potential, theta)
    }

    pub fn eta_to_theta(&self, eta: &[f64]) -> Result<Vec<f64>> {
        convex::eta_to_theta(&self.potential, eta)
    }

    pub fn from_theta(&self, theta: &[f64]) -> Result<DualCoords> {
        DualCoords::from_theta(&self.potential, theta)
    }

    pub fn from_eta(&self, eta: &[f64]) -> Result<DualCoords> {
        DualCoords::from_eta(&self.potential, eta)
    }

    /// `B_F(θ1:θ2)`.
    pub fn divergence(&self, theta1: &[f64], theta2: &[f64]) -> Result<f64> {
        bregman(&self.potential, theta1, theta2)
    }

    pub fn geodesic(&self, kind: Chart, start: &[f64], end: &[f64]) -> Result<GeodesicSegment> {
        Ok(GeodesicSegment {
            kind,
            start: self.from_theta(start)?,
            end: self.from_theta(end)?,
        })
    }

    /// Point at parameter `t ∈ [0,1]` of a geodesic.
    pub fn geodesic_point(&self, seg: &GeodesicSegment, t: f64) -> Result<DualCoords> {
        let lerp = |a: &[f64], b: &[f64]| -> Vec<f64> {
            a.iter().zip(b).map(|(x, y)| (1.0 - t) * x + t * y).collect()
        };
        match seg.kind {
            Chart::Primal => self.from_theta(&lerp(&seg.start.theta, &seg.end.theta)),
            Chart::Dual => self.from_eta(&lerp(&seg.start.eta, &seg.end.eta)),
        }
    }

    /// `F(θ1) − F(θ2) + η(P)ᵀ(θ2 − θ1)`, which equals
    /// `B_F(θ1:θ_P) − B_F(θ2:θ_P)` and vanishes on the m-bisector.
    pub fn m_bisector_value(&self, theta1: &[f64], theta2: &[f64], theta_p: &[f64]) -> Result<f64> {
        let f1 = convex::value(&self.potential, theta1)?;
        let f2 = convex::value(&self.potential, theta2)?;
        let eta = self.theta_to_eta(theta_p)?;
        let d: Vec<f64> = theta2.iter().zip(theta1).map(|(a, b)| a - b).collect();
        Ok(f1 - f2 + dot(&eta, &d))
    }

    fn chart_contains(&self, chart: Chart, x: &[f64]) -> bool {
        match chart {
            Chart::Primal => self.potential.domain().contains_with_margin(x, DOMAIN_MARGIN),
            Chart::Dual => match self.potential.dual_domain() {
                Some(d) => d.contains_with_margin(x, DOMAIN_MARGIN),
                None => convex::eta_to_theta(&self.potential, x).is_ok(),
            },
        }
    }

    fn reference(&self, chart: Chart) -> Result<Vec<f64>> {
        let r = self.potential.domain().reference_point();
        match chart {
            Chart::Primal => Ok(r),
            Chart::Dual => self.theta_to_eta(&r),
        }
    }

    /// A point of `sub` inside the chart's domain: the nearest feasible point
    /// to `hint`, to the domain's reference point, or to the origin.
    fn feasible_start(&self, sub: &AffineSubmanifold, hint: &[f64]) -> Result<Vec<f64>> {
        let mut candidates = vec![sub.nearest(hint), sub.nearest(&self.reference(sub.chart)?)];
        candidates.push(sub.nearest(&vec![0.0; sub.ambient_dim()]));
        // Blends toward the reference point help when the constraint cuts
        // the domain near its boundary.
        let r = sub.nearest(&self.reference(sub.chart)?);
        let h = sub.nearest(hint);
        for k in 1..10 {
            let w = k as f64 / 10.0;
            candidates.push(h.iter().zip(&r).map(|(a, b)| (1.0 - w) * a + w * b).collect());
        }
        candidates
            .into_iter()
            .find(|c| self.chart_contains(sub.chart, c))
            .ok_or_else(|| Error::Infeasible("no feasible point inside the domain".into()))
    }

    /// `argmin_{Q∈S} B_F(θ_Q : θ_P)` over a primal-affine `S`.
    pub fn project_dual(&self, theta_p: &[f64], sub: &AffineSubmanifold) -> Result<DualCoords> {
        self.project_dual_from(theta_p, sub, theta_p)
    }

    /// As [`DuallyFlatManifold::project_dual`] with an explicit starting hint.
    pub fn project_dual_from(
        &self,
        theta_p: &[f64],
        sub: &AffineSubmanifold,
        hint: &[f64],
    ) -> Result<DualCoords> {
        if sub.chart != Chart::Primal {
            return Err(Error::Invalid("dual projection needs a primal-affine set".into()));
        }
        check_dim(self.dim(), sub.ambient_dim())?;
        let eta_p = self.theta_to_eta(theta_p)?;
        let x0 = self.feasible_start(sub, hint)?;
        let obj = PrimalObjective {
            f: &self.potential,
            eta: &eta_p,
        };
        let out = optim::minimize(&obj, &x0, Some(&sub.a), NewtonOptions::default())?;
        self.from_theta(&out.x)
    }

    /// `argmin_{Q∈S} B_F(θ_P : θ_Q)` over a dual-affine `S`, solved in `η`
    /// where the objective `B_{F*}(η_Q : η_P)` is convex.
    pub fn project_primal(&self, theta_p: &[f64], sub: &AffineSubmanifold) -> Result<DualCoords> {
        let eta_p = self.theta_to_eta(theta_p)?;
        self.project_primal_from(theta_p, sub, &eta_p)
    }

    /// As [`DuallyFlatManifold::project_primal`] with an explicit `η` hint.
    pub fn project_primal_from(
        &self,
        theta_p: &[f64],
        sub: &AffineSubmanifold,
        hint: &[f64],
    ) -> Result<DualCoords> {
        if sub.chart != Chart::Dual {
            return Err(Error::Invalid("primal projection needs a dual-affine set".into()));
        }
        check_dim(self.dim(), sub.ambient_dim())?;
        convex::check_point(&self.potential, theta_p)?;
        let x0 = self.feasible_start(sub, hint)?;
        let obj = DualObjective {
            f: &self.potential,
            theta: theta_p,
        };
        let out = optim::minimize(&obj, &x0, Some(&sub.a), NewtonOptions::default())?;
        self.from_eta(&out.x)
    }

    /// `((η_P − η_Q)ᵀ(θ_Q − θ_R), (θ_P − θ_Q)ᵀ(η_Q − η_R))`.
    ///
    /// When the first vanishes, `B(θ_R:θ_P) = B(θ_R:θ_Q) + B(θ_Q:θ_P)`; when
    /// the second vanishes, `B(θ_P:θ_R) = B(θ_P:θ_Q) + B(θ_Q:θ_R)`.
    pub fn pythagoras_residuals(&self, p: &[f64], q: &[f64], r: &[f64]) -> Result<(f64, f64)> {
        let (p, q, r) = (self.from_theta(p)?, self.from_theta(q)?, self.from_theta(r)?);
        let sub = |a: &[f64], b: &[f64]| -> Vec<f64> { a.iter().zip(b).map(|(x, y)| x - y).collect() };
        let first = dot(&sub(&p.eta, &q.eta), &sub(&q.theta, &r.theta));
        let second = dot(&sub(&p.theta, &q.theta), &sub(&q.eta, &r.eta));
        Ok((first, second))
    }

    /// `min B_F(θ_s : θ_s′)` over `s ∈ S` (primal-affine) and `s′ ∈ S′`
    /// (dual-affine) by alternating projections.
    pub fn set_divergence(
        &self,
        first: &AffineSubmanifold,
        second: &AffineSubmanifold,
    ) -> Result<SetDivergence> {
        if first.chart != Chart::Primal || second.chart != Chart::Dual {
            return Err(Error::Invalid(
                "alternating projections need a primal-affine and a dual-affine set".into(),
            ));
        }
        let start = self.reference(Chart::Dual)?;
        let mut s_prime = self.from_eta(&self.feasible_start(second, &start)?)?;
        let mut s = self.project_dual(&s_prime.theta, first)?;
        let mut value = self.divergence(&s.theta, &s_prime.theta)?;
        let mut history = vec![value];
        for _ in 0..SET_MAX_ITER {
            s_prime = self.project_primal_from(&s.theta, second, &s_prime.eta)?;
            s = self.project_dual_from(&s_prime.theta, first, &s.theta)?;
            let next = self.divergence(&s.theta, &s_prime.theta)?;
            // Each half-step minimises exactly, so any increase is round-off.
            let next = next.min(value);
            history.push(next);
            let done = value - next < SET_TOL;
            value = next;
            if done {
                return Ok(SetDivergence {
                    value,
                    first: s,
                    second: s_prime,
                    history,
                });
            }
        }
        Err(Error::Convergence(format!(
            "alternating projections still decreasing after {SET_MAX_ITER} rounds"
        )))
    }
}

struct PrimalObjective<'a, P> {
    f: &'a P,
    eta: &'a [f64],
}

impl<P: Potential> Objective for PrimalObjective<'_, P> {
    fn value(&self, x: &[f64]) -> Result<f64> {
        if !self.f.domain().contains_with_margin(x, DOMAIN_MARGIN) {
            return Err(Error::Domain("iterate left the domain".into()));
        }
        Ok(self.f.value(x) - dot(x, self.eta))
    }
    fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        let g = convex::grad(self.f, x)?;
        Ok(g.iter().zip(self.eta).map(|(a, b)| a - b).collect())
    }
    fn hessian(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        convex::hessian(self.f, x)
    }
}

/// `η ↦ F*(η) − ηᵀθ_P`, with `∇F*(η) = θ(η)` and `∇²F*(η) = ∇²F(θ(η))⁻¹`.
struct DualObjective<'a, P> {
    f: &'a P,
    theta: &'a [f64],
}

impl<P: Potential> DualObjective<'_, P> {
    fn inverse(&self, eta: &[f64]) -> Result<Vec<f64>> {
        if let Some(d) = self.f.dual_domain() {
            if !d.contains_with_margin(eta, DOMAIN_MARGIN) {
                return Err(Error::Domain("iterate left the dual domain".into()));
            }
        }
        convex::eta_to_theta(self.f, eta)
    }
}

impl<P: Potential> Objective for DualObjective<'_, P> {
    fn value(&self, eta: &[f64]) -> Result<f64> {
        let th = self.inverse(eta)?;
        let fstar = dot(&th, eta) - self.f.value(&th);
        Ok(fstar - dot(eta, self.theta))
    }
    fn gradient(&self, eta: &[f64]) -> Result<Vec<f64>> {
        let th = self.inverse(eta)?;
        Ok(th.iter().zip(self.theta).map(|(a, b)| a - b).collect())
    }
    fn hessian(&self, eta: &[f64]) -> Result<DMatrix<f64>> {
        let th = self.inverse(eta)?;
        convex::hessian(self.f, &th)?
            .try_inverse()
            .ok_or_else(|| Error::SingularMetric("Hessian of the potential is singular".into()))
    }
}
