//! Parameter divergences built from a potential, and the f-divergence family.

use std::fmt;
use std::sync::Arc;

use crate::convex::{self, check_point, dot, Potential};
use crate::diff;
use crate::error::{check_dim, Error, Result};
use crate::quadrature::{self, Options};

/// `B_F(θ1:θ2) = F(θ1) − F(θ2) − (θ1−θ2)ᵀ∇F(θ2)`.
pub fn bregman<P: Potential + ?Sized>(f: &P, theta1: &[f64], theta2: &[f64]) -> Result<f64> {
    check_point(f, theta1)?;
    let g = convex::grad(f, theta2)?;
    let diff: Vec<f64> = theta1.iter().zip(theta2).map(|(a, b)| a - b).collect();
    let b = f.value(theta1) - f.value(theta2) - dot(&diff, &g);
    Ok(b.max(0.0))
}

/// Bregman divergence when `∇F(θ2)` is already known.
pub(crate) fn bregman_with_gradient<P: Potential + ?Sized>(
    f: &P,
    theta1: &[f64],
    theta2: &[f64],
    f2: f64,
    grad2: &[f64],
) -> f64 {
    let lin: f64 = theta1
        .iter()
        .zip(theta2)
        .zip(grad2)
        .map(|((a, b), g)| (a - b) * g)
        .sum();
    (f.value(theta1) - f2 - lin).max(0.0)
}

/// Mixed-coordinate divergence `F(θ) + F*(η′) − θᵀη′`.
pub fn canonical<P: Potential + ?Sized>(f: &P, theta: &[f64], eta_prime: &[f64]) -> Result<f64> {
    check_point(f, theta)?;
    let fstar = convex::conjugate_value(f, eta_prime)?;
    Ok((f.value(theta) + fstar - dot(theta, eta_prime)).max(0.0))
}

/// `αF(θ1) + (1−α)F(θ2) − F(αθ1 + (1−α)θ2)` for `α ∈ (0,1)`.
pub fn skew_jensen<P: Potential + ?Sized>(
    f: &P,
    alpha: f64,
    theta1: &[f64],
    theta2: &[f64],
) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Range(format!("skew parameter {alpha} not in (0,1)")));
    }
    check_point(f, theta1)?;
    check_point(f, theta2)?;
    let mid: Vec<f64> = theta1
        .iter()
        .zip(theta2)
        .map(|(a, b)| alpha * a + (1.0 - alpha) * b)
        .collect();
    check_point(f, &mid)?;
    let j = alpha * f.value(theta1) + (1.0 - alpha) * f.value(theta2) - f.value(&mid);
    Ok(j.max(0.0))
}

const NEGLIGIBLE_DENSITY: f64 = 1e-200;

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Convex generator `f` on `(0, ∞)` with `f(1) = 0`.
///
/// Besides the function itself it carries the derivatives at `u = 1` and the
/// two boundary limits `f(0⁺)` and `lim f(u)/u` as `u → ∞`, which decide how
/// zero-probability cells contribute.
#[derive(Clone)]
pub struct FGenerator {
    name: String,
    f: ScalarFn,
    fprime1: f64,
    fsecond1: f64,
    fthird1: f64,
    at_zero: f64,
    slope_at_infinity: f64,
}

impl fmt::Debug for FGenerator {
    fn fmt(&self, fmt: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt.debug_struct("FGenerator")
            .field("name", &self.name)
            .field("fprime1", &self.fprime1)
            .field("fsecond1", &self.fsecond1)
            .field("fthird1", &self.fthird1)
            .finish()
    }
}

impl FGenerator {
    /// Generator from a closure. Derivatives at 1 are estimated by central
    /// differences; both boundary limits default to `+∞` until set with
    /// [`FGenerator::with_limits`].
    pub fn custom(name: impl Into<String>, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        let (d1, d2, d3) = diff::scalar_derivatives(&f, 1.0);
        Self {
            name: name.into(),
            fprime1: d1,
            fsecond1: d2,
            fthird1: d3,
            at_zero: f64::INFINITY,
            slope_at_infinity: f64::INFINITY,
            f: Arc::new(f),
        }
    }

    /// Sets `f(0⁺)` and `lim f(u)/u` at infinity.
    pub fn with_limits(mut self, at_zero: f64, slope_at_infinity: f64) -> Self {
        self.at_zero = at_zero;
        self.slope_at_infinity = slope_at_infinity;
        self
    }

    fn analytic(
        name: &str,
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
        derivs: (f64, f64, f64),
        at_zero: f64,
        slope_at_infinity: f64,
    ) -> Self {
        Self {
            name: name.to_string(),
            f: Arc::new(f),
            fprime1: derivs.0,
            fsecond1: derivs.1,
            fthird1: derivs.2,
            at_zero,
            slope_at_infinity,
        }
    }

    /// `−log u`, giving `KL(p:q)`.
    pub fn kl() -> Self {
        Self::analytic("kl", |u| -u.ln(), (-1.0, 1.0, -2.0), f64::INFINITY, 0.0)
    }

    /// `u log u`, giving `KL(q:p)`.
    pub fn reverse_kl() -> Self {
        Self::analytic(
            "reverse_kl",
            |u| if u == 0.0 { 0.0 } else { u * u.ln() },
            (1.0, 1.0, -1.0),
            0.0,
            f64::INFINITY,
        )
    }

    /// `(√u − 1)²`, the squared Hellinger distance without the ½ factor.
    pub fn hellinger() -> Self {
        Self::analytic(
            "hellinger",
            |u| (u.sqrt() - 1.0).powi(2),
            (0.0, 0.5, -0.75),
            1.0,
            1.0,
        )
    }

    /// `½[u log u − (u+1) log((1+u)/2)]`, the Jensen-Shannon divergence.
    pub fn jensen_shannon() -> Self {
        let ln2 = std::f64::consts::LN_2;
        Self::analytic(
            "js",
            |u| {
                let ulogu = if u == 0.0 { 0.0 } else { u * u.ln() };
                0.5 * (ulogu - (u + 1.0) * ((1.0 + u) / 2.0).ln())
            },
            (0.0, 0.25, -0.375),
            0.5 * ln2,
            0.5 * ln2,
        )
    }

    /// `½|u − 1|`, total variation.
    pub fn total_variation() -> Self {
        Self::analytic("tv", |u| 0.5 * (u - 1.0).abs(), (0.0, 0.0, 0.0), 0.5, 0.5)
    }

    /// Pearson `(u − 1)²`.
    pub fn chi_square() -> Self {
        Self::analytic(
            "chi2",
            |u| (u - 1.0).powi(2),
            (0.0, 2.0, 0.0),
            1.0,
            f64::INFINITY,
        )
    }

    /// Amari α-divergence generator `4/(1−α²)(1 − u^{(1+α)/2})`; the limits
    /// `α = −1` and `α = 1` are the KL and reverse-KL generators.
    pub fn alpha(alpha: f64) -> Self {
        if alpha == -1.0 {
            return Self::kl();
        }
        if alpha == 1.0 {
            return Self::reverse_kl();
        }
        let c = 4.0 / (1.0 - alpha * alpha);
        let p = 0.5 * (1.0 + alpha);
        let at_zero = if p > 0.0 { c } else { f64::INFINITY };
        let slope = if alpha < 1.0 { 0.0 } else { f64::INFINITY };
        Self::analytic(
            &format!("alpha({alpha})"),
            move |u| c * (1.0 - u.powf(p)),
            (-2.0 / (1.0 - alpha), 1.0, 0.5 * (alpha - 3.0)),
            at_zero,
            slope,
        )
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// `f(u)` for `u > 0`; `u = 0` returns the right limit.
    pub fn eval(&self, u: f64) -> f64 {
        if u == 0.0 {
            self.at_zero
        } else {
            (self.f)(u)
        }
    }

    pub fn fprime1(&self) -> f64 {
        self.fprime1
    }
    pub fn fsecond1(&self) -> f64 {
        self.fsecond1
    }
    pub fn fthird1(&self) -> f64 {
        self.fthird1
    }

    /// `f(0⁺)`.
    pub fn limit_at_zero(&self) -> f64 {
        self.at_zero
    }

    /// `lim_{u→∞} f(u)/u`.
    pub fn slope_at_infinity(&self) -> f64 {
        self.slope_at_infinity
    }

    /// `f′(1) = 0` and `f″(1) = 1` within `tol`.
    pub fn is_standard(&self, tol: f64) -> bool {
        self.fprime1.abs() <= tol && (self.fsecond1 - 1.0).abs() <= tol
    }

    /// `g(u) = (f(u) − f′(1)(u−1)) / f″(1)`.
    pub fn standardize(&self) -> Result<FGenerator> {
        let (d1, d2) = (self.fprime1, self.fsecond1);
        if !(d2 > 0.0) || !d2.is_finite() {
            return Err(Error::DegenerateGenerator(format!(
                "{} has f''(1) = {d2}",
                self.name
            )));
        }
        let f = Arc::clone(&self.f);
        Ok(FGenerator {
            name: format!("standard({})", self.name),
            f: Arc::new(move |u| (f(u) - d1 * (u - 1.0)) / d2),
            fprime1: 0.0,
            fsecond1: 1.0,
            fthird1: self.fthird1 / d2,
            at_zero: (self.at_zero + d1) / d2,
            slope_at_infinity: (self.slope_at_infinity - d1) / d2,
        })
    }

    /// `f◇(u) = u f(1/u)`, which swaps the arguments of the divergence.
    pub fn diamond(&self) -> FGenerator {
        let f = Arc::clone(&self.f);
        FGenerator {
            name: format!("diamond({})", self.name),
            f: Arc::new(move |u| u * f(1.0 / u)),
            fprime1: -self.fprime1,
            fsecond1: self.fsecond1,
            fthird1: -self.fthird1 - 3.0 * self.fsecond1,
            at_zero: self.slope_at_infinity,
            slope_at_infinity: self.at_zero,
        }
    }

    /// `α = 2f‴(1) + 3` for a standard generator.
    pub fn alpha_index(&self) -> f64 {
        2.0 * self.fthird1 + 3.0
    }

    /// `α` with `f‴(1)` taken by central differences of the function itself.
    pub fn alpha_index_numeric(&self) -> f64 {
        let (_, _, d3) = diff::scalar_derivatives(|u| (self.f)(u), 1.0);
        2.0 * d3 + 3.0
    }
}

/// Free-function alias of [`FGenerator::alpha_index`].
pub fn alpha_of_generator(gen: &FGenerator) -> f64 {
    gen.alpha_index()
}

/// Probability vector with nonnegative entries summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteDistribution {
    probs: Vec<f64>,
}

impl DiscreteDistribution {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::Invalid("empty distribution".into()));
        }
        if probs.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
            return Err(Error::Invalid(format!("{probs:?} has negative entries")));
        }
        let s: f64 = probs.iter().sum();
        if (s - 1.0).abs() > 1e-12 {
            return Err(Error::Invalid(format!("probabilities sum to {s}")));
        }
        Ok(Self { probs })
    }

    /// Normalises nonnegative weights.
    pub fn from_weights(weights: &[f64]) -> Result<Self> {
        let s: f64 = weights.iter().sum();
        if !(s > 0.0) || weights.iter().any(|w| *w < 0.0) {
            return Err(Error::Invalid("weights must be nonnegative with positive sum".into()));
        }
        Ok(Self {
            probs: weights.iter().map(|w| w / s).collect(),
        })
    }

    pub fn uniform(n: usize) -> Self {
        Self {
            probs: vec![1.0 / n as f64; n],
        }
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }
}

/// `I_f(p:q) = Σ pᵢ f(qᵢ/pᵢ)`.
///
/// A cell with `qᵢ = 0` contributes `pᵢ f(0⁺)`, so the result is `+∞` when
/// the generator blows up at zero. A cell with `pᵢ = 0` contributes
/// `qᵢ lim f(u)/u`; an infinite slope there is a support error.
pub fn f_divergence_discrete(
    gen: &FGenerator,
    p: &DiscreteDistribution,
    q: &DiscreteDistribution,
) -> Result<f64> {
    check_dim(p.len(), q.len())?;
    let mut total = 0.0;
    for (&pi, &qi) in p.probs.iter().zip(&q.probs) {
        total += match (pi > 0.0, qi > 0.0) {
            (true, true) => pi * (gen.f)(qi / pi),
            (true, false) => pi * gen.at_zero,
            (false, true) => {
                if gen.slope_at_infinity.is_finite() {
                    qi * gen.slope_at_infinity
                } else {
                    return Err(Error::Support(format!(
                        "first argument vanishes where the second is {qi} and {} has no finite slope at infinity",
                        gen.name
                    )));
                }
            }
            (false, false) => 0.0,
        };
    }
    Ok(total)
}

/// `I_f[p:q] = ∫ p f(q/p)` over `[lower, upper]` (infinite bounds allowed)
/// to absolute tolerance `1e-9`.
pub fn f_divergence_continuous(
    gen: &FGenerator,
    p: impl Fn(f64) -> f64,
    q: impl Fn(f64) -> f64,
    support: (f64, f64),
) -> Result<f64> {
    f_divergence_continuous_with(gen, p, q, support, &[], Options::abs(1e-9))
}

/// As [`f_divergence_continuous`] with explicit breakpoints and tolerances.
pub fn f_divergence_continuous_with(
    gen: &FGenerator,
    p: impl Fn(f64) -> f64,
    q: impl Fn(f64) -> f64,
    support: (f64, f64),
    breaks: &[f64],
    opts: Options,
) -> Result<f64> {
    let integrand = |x: f64| {
        let (px, qx) = (p(x), q(x));
        let term = if px > 0.0 && qx > 0.0 {
            let u = qx / px;
            if u.is_infinite() {
                qx * gen.slope_at_infinity
            } else if u == 0.0 {
                px * gen.at_zero
            } else {
                px * (gen.f)(u)
            }
        } else if px > 0.0 {
            px * gen.at_zero
        } else if qx > 0.0 {
            qx * gen.slope_at_infinity
        } else {
            0.0
        };
        // Far tails where both densities have underflowed carry no mass.
        if !term.is_finite() && px.max(qx) < NEGLIGIBLE_DENSITY {
            0.0
        } else {
            term
        }
    };
    let r = quadrature::integrate_with_breaks(integrand, support.0, support.1, breaks, opts)?;
    if r.value.is_nan() {
        return Err(Error::Quadrature("integrand is not finite".into()));
    }
    Ok(r.value)
}

/// Lumps cells of `theta` along a partition of its index set.
pub fn coarse_grain(theta: &DiscreteDistribution, partition: &[Vec<usize>]) -> Result<DiscreteDistribution> {
    let n = theta.len();
    let mut seen = vec![false; n];
    let mut probs = Vec::with_capacity(partition.len());
    for block in partition {
        if block.is_empty() {
            return Err(Error::Partition("empty block".into()));
        }
        let mut mass = 0.0;
        for &i in block {
            if i >= n {
                return Err(Error::Partition(format!("index {i} out of range 0..{n}")));
            }
            if std::mem::replace(&mut seen[i], true) {
                return Err(Error::Partition(format!("index {i} appears twice")));
            }
            mass += theta.probs[i];
        }
        probs.push(mass);
    }
    if let Some(i) = seen.iter().position(|s| !s) {
        return Err(Error::Partition(format!("index {i} is not covered")));
    }
    Ok(DiscreteDistribution { probs })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::convex::{NegEntropy, Softplus, SquaredNorm};
    use proptest::prelude::*;

    fn dd(v: &[f64]) -> DiscreteDistribution {
        DiscreteDistribution::new(v.to_vec()).unwrap()
    }

    fn kl_direct(p: &[f64], q: &[f64]) -> f64 {
        p.iter().zip(q).map(|(a, b)| a * (a / b).ln()).sum()
    }

    #[test]
    fn bregman_examples() {
        let b = bregman(&SquaredNorm::new(2), &[1.0, 2.0], &[0.0, 0.0]).unwrap();
        assert!((b - 2.5).abs() < 1e-15);
        let f = NegEntropy { dim: 2 };
        let b = bregman(&f, &[0.5, 0.5], &[0.25, 0.75]).unwrap();
        assert!((b - kl_direct(&[0.5, 0.5], &[0.25, 0.75])).abs() < 1e-12);
        assert!((b - 0.143_841).abs() < 1e-6);
        assert_eq!(bregman(&f, &[0.3, 0.9], &[0.3, 0.9]).unwrap(), 0.0);
        assert!(matches!(bregman(&f, &[-0.3, 0.9], &[0.3, 0.9]), Err(Error::Domain(_))));
    }

    #[test]
    fn canonical_examples() {
        let f = SquaredNorm::new(2);
        assert!(canonical(&f, &[1.0, 0.0], &[1.0, 0.0]).unwrap().abs() < 1e-15);
        assert!((canonical(&f, &[1.0, 0.0], &[0.0, 1.0]).unwrap() - 1.0).abs() < 1e-15);
        assert!(canonical(&Softplus { dim: 1 }, &[0.0], &[0.5]).unwrap().abs() < 1e-12);
    }

    #[test]
    fn skew_jensen_examples() {
        let f = SquaredNorm::new(2);
        let j = skew_jensen(&f, 0.5, &[2.0, 0.0], &[0.0, 0.0]).unwrap();
        assert!((j - 0.5).abs() < 1e-15);
        assert_eq!(skew_jensen(&f, 0.3, &[1.0, 1.0], &[1.0, 1.0]).unwrap(), 0.0);
        assert!(matches!(skew_jensen(&f, 1.0, &[1.0, 1.0], &[1.0, 1.0]), Err(Error::Range(_))));
    }

    #[test]
    fn skew_jensen_small_skew_limit() {
        let f = Softplus { dim: 1 };
        let (t1, t2) = ([1.5], [-0.5]);
        let ratio = skew_jensen(&f, 1e-4, &t1, &t2).unwrap() / 1e-4;
        let b = bregman(&f, &t1, &t2).unwrap();
        assert!((ratio - b).abs() <= 1e-3 * b);
        let reversed = bregman(&f, &t2, &t1).unwrap();
        assert!((ratio - reversed).abs() > 1e-3 * reversed);
    }

    #[test]
    fn discrete_examples() {
        let p = dd(&[0.5, 0.5]);
        let q = dd(&[0.25, 0.75]);
        let kl = f_divergence_discrete(&FGenerator::kl(), &p, &q).unwrap();
        assert!((kl - kl_direct(p.probs(), q.probs())).abs() < 1e-15);
        let tv = f_divergence_discrete(&FGenerator::total_variation(), &p, &q).unwrap();
        assert!((tv - 0.25).abs() < 1e-15);
        for gen in all_generators() {
            assert_eq!(f_divergence_discrete(&gen, &p, &p).unwrap(), 0.0, "{}", gen.name());
        }
    }

    #[test]
    fn zero_cells() {
        let p = dd(&[0.5, 0.5]);
        let q = dd(&[1.0, 0.0]);
        assert_eq!(
            f_divergence_discrete(&FGenerator::kl(), &p, &q).unwrap(),
            f64::INFINITY
        );
        let kl = f_divergence_discrete(&FGenerator::kl(), &q, &p).unwrap();
        assert!((kl - 2f64.ln()).abs() < 1e-15);
        assert!(matches!(
            f_divergence_discrete(&FGenerator::reverse_kl(), &q, &p),
            Err(Error::Support(_))
        ));
        let tv = f_divergence_discrete(&FGenerator::total_variation(), &q, &p).unwrap();
        assert!((tv - 0.5).abs() < 1e-15);
        let js = f_divergence_discrete(&FGenerator::jensen_shannon(), &q, &p).unwrap();
        let oracle = 0.5 * kl_direct(&[1.0], &[0.75])
            + 0.5 * (0.5 * (0.5f64 / 0.75).ln() + 0.5 * (0.5f64 / 0.25).ln());
        assert!((js - oracle).abs() < 1e-12);
        assert!(matches!(
            f_divergence_discrete(&FGenerator::kl(), &p, &dd(&[1.0])),
            Err(Error::Dimension { .. })
        ));
    }

    #[test]
    fn distribution_validation() {
        assert!(DiscreteDistribution::new(vec![0.5, 0.6]).is_err());
        assert!(DiscreteDistribution::new(vec![1.5, -0.5]).is_err());
        assert!(DiscreteDistribution::new(vec![]).is_err());
    }

    fn normal_pdf(mu: f64) -> impl Fn(f64) -> f64 {
        move |x: f64| (-(x - mu).powi(2) / 2.0).exp() / (2.0 * std::f64::consts::PI).sqrt()
    }

    #[test]
    fn continuous_examples() {
        let inf = f64::INFINITY;
        let kl = FGenerator::kl();
        let same = f_divergence_continuous(&kl, normal_pdf(0.0), normal_pdf(0.0), (-inf, inf)).unwrap();
        assert!(same.abs() < 1e-9);
        let v = f_divergence_continuous(&kl, normal_pdf(0.0), normal_pdf(1.0), (-inf, inf)).unwrap();
        assert!((v - 0.5).abs() < 1e-9);
        let h = f_divergence_continuous(
            &FGenerator::hellinger(),
            normal_pdf(0.0),
            normal_pdf(1.0),
            (-inf, inf),
        )
        .unwrap();
        assert!((h - 2.0 * (1.0 - (-0.125f64).exp())).abs() < 1e-9);
    }

    #[test]
    fn standardize_examples() {
        let g = FGenerator::reverse_kl().standardize().unwrap();
        let (d1, d2, _) = diff::scalar_derivatives(|u| g.eval(u), 1.0);
        assert!(d1.abs() < 1e-8 && (d2 - 1.0).abs() < 1e-6);
        for u in [0.1, 0.7, 2.0, 9.0] {
            assert!((g.eval(u) - (u * u.ln() - (u - 1.0))).abs() < 1e-14);
        }
        let g = FGenerator::chi_square().standardize().unwrap();
        for u in [0.1, 0.7, 2.0, 9.0] {
            assert!((g.eval(u) - (u - 1.0f64).powi(2) / 2.0).abs() < 1e-14);
        }
        let g = FGenerator::kl().standardize().unwrap();
        for u in [0.1, 0.7, 2.0, 9.0] {
            assert!((g.eval(u) - (-u.ln() + u - 1.0)).abs() < 1e-14);
        }
        assert!(matches!(
            FGenerator::total_variation().standardize(),
            Err(Error::DegenerateGenerator(_))
        ));
    }

    #[test]
    fn standardize_rescales_divergence() {
        let p = dd(&[0.2, 0.3, 0.5]);
        let q = dd(&[0.6, 0.1, 0.3]);
        for gen in [FGenerator::hellinger(), FGenerator::jensen_shannon(), FGenerator::alpha(0.5)] {
            let g = gen.standardize().unwrap();
            let a = f_divergence_discrete(&gen, &p, &q).unwrap();
            let b = f_divergence_discrete(&g, &p, &q).unwrap();
            assert!((b - a / gen.fsecond1()).abs() < 1e-12);
        }
    }

    #[test]
    fn diamond_examples() {
        let d = FGenerator::kl().diamond();
        let tv = FGenerator::total_variation();
        let h = FGenerator::hellinger();
        for i in 1..200 {
            let u = i as f64 * 0.05;
            assert!((d.eval(u) - u * u.ln()).abs() < 1e-12);
            assert!((tv.diamond().eval(u) - tv.eval(u)).abs() < 1e-12);
            assert!((h.diamond().eval(u) - h.eval(u)).abs() < 1e-12);
        }
        let s = FGenerator::kl().standardize().unwrap().diamond();
        assert!(s.is_standard(1e-12));
    }

    #[test]
    fn alpha_index_examples() {
        let kl = FGenerator::kl().standardize().unwrap();
        let rkl = FGenerator::reverse_kl().standardize().unwrap();
        assert!((kl.alpha_index() + 1.0).abs() < 1e-12);
        assert!((rkl.alpha_index() - 1.0).abs() < 1e-12);
        assert!((kl.alpha_index_numeric() + 1.0).abs() < 1e-3);
        assert!((rkl.alpha_index_numeric() - 1.0).abs() < 1e-3);
        let a0 = FGenerator::alpha(0.0).standardize().unwrap();
        assert!(a0.alpha_index().abs() < 1e-12);
        assert!(a0.alpha_index_numeric().abs() < 1e-3);
        for a in [-3.0, -0.5, 0.5, 2.0] {
            let g = FGenerator::alpha(a).standardize().unwrap();
            assert!((g.alpha_index_numeric() - a).abs() < 1e-3);
        }
        let custom = FGenerator::custom("pearson", |u| (u - 1.0) * (u - 1.0)).standardize().unwrap();
        assert!((custom.alpha_index() - 3.0).abs() < 1e-3);
    }

    #[test]
    fn analytic_metadata_matches_differences() {
        for gen in all_generators().into_iter().filter(|g| g.name() != "tv") {
            let (d1, d2, d3) = diff::scalar_derivatives(|u| gen.eval(u), 1.0);
            assert!((d1 - gen.fprime1()).abs() < 1e-6, "{}", gen.name());
            assert!((d2 - gen.fsecond1()).abs() < 1e-5, "{}", gen.name());
            assert!((d3 - gen.fthird1()).abs() < 1e-3, "{}", gen.name());
            assert!(gen.eval(1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn generators_are_convex() {
        for gen in all_generators() {
            for i in 1..1000 {
                let (a, b) = (i as f64 * 0.01, i as f64 * 0.01 + 0.02);
                let mid = gen.eval(0.5 * (a + b));
                assert!(mid <= 0.5 * (gen.eval(a) + gen.eval(b)) + 1e-10, "{}", gen.name());
            }
        }
    }

    #[test]
    fn coarse_grain_examples() {
        let p = dd(&[0.1, 0.2, 0.3, 0.4]);
        let id: Vec<Vec<usize>> = (0..4).map(|i| vec![i]).collect();
        assert_eq!(coarse_grain(&p, &id).unwrap(), p);
        let c = coarse_grain(&p, &[vec![0, 1], vec![2, 3]]).unwrap();
        assert!((c.probs()[0] - 0.3).abs() < 1e-15 && (c.probs()[1] - 0.7).abs() < 1e-15);
        assert!(matches!(coarse_grain(&p, &[vec![0, 1], vec![1, 2, 3]]), Err(Error::Partition(_))));
        assert!(matches!(coarse_grain(&p, &[vec![0, 1], vec![2]]), Err(Error::Partition(_))));
        assert!(matches!(coarse_grain(&p, &[vec![0, 1, 2, 3], vec![]]), Err(Error::Partition(_))));
    }

    fn all_generators() -> Vec<FGenerator> {
        vec![
            FGenerator::kl(),
            FGenerator::reverse_kl(),
            FGenerator::hellinger(),
            FGenerator::jensen_shannon(),
            FGenerator::total_variation(),
            FGenerator::chi_square(),
            FGenerator::alpha(-0.5),
            FGenerator::alpha(0.5),
            FGenerator::alpha(2.0),
        ]
    }

    fn simplex(raw: Vec<f64>) -> DiscreteDistribution {
        DiscreteDistribution::from_weights(&raw).unwrap()
    }

    proptest! {
        #[test]
        fn diamond_swaps_arguments(a in prop::collection::vec(0.01..1.0f64, 4),
                                   b in prop::collection::vec(0.01..1.0f64, 4)) {
            let (p, q) = (simplex(a), simplex(b));
            for gen in all_generators() {
                let lhs = f_divergence_discrete(&gen.diamond(), &p, &q).unwrap();
                let rhs = f_divergence_discrete(&gen, &q, &p).unwrap();
                prop_assert!((lhs - rhs).abs() <= 1e-12);
            }
        }

        #[test]
        fn f_divergences_are_nonnegative(a in prop::collection::vec(0.01..1.0f64, 5),
                                         b in prop::collection::vec(0.01..1.0f64, 5)) {
            let (p, q) = (simplex(a), simplex(b));
            for gen in all_generators() {
                prop_assert!(f_divergence_discrete(&gen, &p, &q).unwrap() >= -1e-15);
            }
        }
    }
}
