//! Bayesian hypothesis testing between members of an exponential family:
//! Bhattacharyya distances, Chernoff information and MAP error simulation.
//!
//! Conventions: `bhattacharyya(θ1, θ2, α) = −log ∫ p1^α p2^{1−α}`, which is
//! the skew Jensen divergence `αF(θ1) + (1−α)F(θ2) − F(αθ1 + (1−α)θ2)`. The
//! Chernoff optimum is parameterised along the natural-parameter segment
//! `θ_α = (1−α)θ1 + αθ2`, so the geodesic position `α*` corresponds to the
//! Bhattacharyya skew `1 − α*`.

use rayon::prelude::*;

use crate::convex::{self, Potential};
use crate::divergence::{bregman, skew_jensen};
use crate::error::{check_dim, Error, Result};
use crate::expfam::ExponentialFamily;
use crate::flat::DuallyFlatManifold;
use crate::model::{self, StatisticalModel};
use crate::quadrature::Options;
use crate::rng::{derive_seed, seeded};

const ALPHA_TOL: f64 = 1e-13;
const MAX_BISECTIONS: usize = 200;

fn lerp(a: &[f64], b: &[f64], t: f64) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| (1.0 - t) * x + t * y).collect()
}

fn check_pair(fam: &ExponentialFamily, theta1: &[f64], theta2: &[f64]) -> Result<()> {
    check_dim(Potential::dim(fam), theta1.len())?;
    check_dim(Potential::dim(fam), theta2.len())?;
    convex::check_point(fam, theta1)?;
    convex::check_point(fam, theta2)
}

fn check_distinct(theta1: &[f64], theta2: &[f64]) -> Result<()> {
    if theta1 == theta2 {
        return Err(Error::Invalid("hypotheses must differ".into()));
    }
    Ok(())
}

/// `−log ∫ p1^α p2^{1−α} dμ` in closed form.
pub fn bhattacharyya(fam: &ExponentialFamily, theta1: &[f64], theta2: &[f64], alpha: f64) -> Result<f64> {
    check_pair(fam, theta1, theta2)?;
    skew_jensen(fam, alpha, theta1, theta2)
}

/// The same quantity by summation or quadrature of `p2 (p1/p2)^α`.
pub fn bhattacharyya_quadrature(
    fam: &ExponentialFamily,
    theta1: &[f64],
    theta2: &[f64],
    alpha: f64,
) -> Result<f64> {
    check_pair(fam, theta1, theta2)?;
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Range(format!("skew parameter {alpha} not in (0,1)")));
    }
    let coefficient = model::expectation(
        fam,
        theta2,
        |x| (alpha * (fam.log_density(theta1, x) - fam.log_density(theta2, x))).exp(),
        Options::abs(1e-12),
    )?;
    Ok(-coefficient.ln())
}

/// Chernoff information and the point where it is attained.
#[derive(Debug, Clone, PartialEq)]
pub struct ChernoffResult {
    /// Position on `θ_α = (1−α)θ1 + αθ2`.
    pub alpha_star: f64,
    pub value: f64,
    pub theta_star: Vec<f64>,
}

/// Bisection for the sign change of a function that is negative at `0` and
/// positive at `1`.
fn bisect<G: FnMut(f64) -> Result<f64>>(mut g: G) -> Result<f64> {
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    let (g_lo, g_hi) = (g(lo)?, g(hi)?);
    if !(g_lo < 0.0 && g_hi > 0.0) {
        return Err(Error::Convergence(format!(
            "no sign change on the geodesic: g(0) = {g_lo}, g(1) = {g_hi}"
        )));
    }
    for _ in 0..MAX_BISECTIONS {
        let mid = 0.5 * (lo + hi);
        let v = g(mid)?;
        if !v.is_finite() {
            return Err(Error::Convergence(format!("non-finite value at α = {mid}")));
        }
        if v == 0.0 {
            return Ok(mid);
        }
        if v < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= ALPHA_TOL {
            return Ok(0.5 * (lo + hi));
        }
    }
    Err(Error::Convergence("bisection did not shrink the bracket".into()))
}

/// Chernoff information by bisection on
/// `g(α) = B_F(θ1:θ_α) − B_F(θ2:θ_α)`; the value is `B_F(θ1:θ_{α*})`.
pub fn chernoff(fam: &ExponentialFamily, theta1: &[f64], theta2: &[f64]) -> Result<ChernoffResult> {
    check_pair(fam, theta1, theta2)?;
    check_distinct(theta1, theta2)?;
    let g = |a: f64| -> Result<f64> {
        let t = lerp(theta1, theta2, a);
        Ok(bregman(fam, theta1, &t)? - bregman(fam, theta2, &t)?)
    };
    let alpha_star = bisect(g)?;
    let theta_star = lerp(theta1, theta2, alpha_star);
    let value = bregman(fam, theta1, &theta_star)?;
    Ok(ChernoffResult {
        alpha_star,
        value,
        theta_star,
    })
}

/// Intersection of the natural-parameter geodesic with the m-bisector,
/// found by bisection on the bisector value along the segment.
pub fn bisector_intersection(fam: &ExponentialFamily, theta1: &[f64], theta2: &[f64]) -> Result<Vec<f64>> {
    check_pair(fam, theta1, theta2)?;
    check_distinct(theta1, theta2)?;
    let m = DuallyFlatManifold::new(fam);
    let t = bisect(|a| m.m_bisector_value(theta1, theta2, &lerp(theta1, theta2, a)))?;
    Ok(lerp(theta1, theta2, t))
}

/// Two simple hypotheses with prior weights.
#[derive(Debug, Clone, PartialEq)]
pub struct BinaryHypothesis {
    family: ExponentialFamily,
    theta1: Vec<f64>,
    theta2: Vec<f64>,
    prior: (f64, f64),
}

impl BinaryHypothesis {
    /// Equal parameters are accepted so the simulator can be run on
    /// indistinguishable hypotheses; `chernoff` rejects them.
    pub fn new(family: ExponentialFamily, theta1: Vec<f64>, theta2: Vec<f64>, prior: (f64, f64)) -> Result<Self> {
        check_pair(&family, &theta1, &theta2)?;
        let (w1, w2) = prior;
        if !(w1 > 0.0 && w2 > 0.0 && (w1 + w2 - 1.0).abs() <= 1e-12) {
            return Err(Error::Invalid(format!("prior ({w1}, {w2}) must be positive and sum to 1")));
        }
        Ok(Self {
            family,
            theta1,
            theta2,
            prior,
        })
    }

    pub fn equal_priors(family: ExponentialFamily, theta1: Vec<f64>, theta2: Vec<f64>) -> Result<Self> {
        Self::new(family, theta1, theta2, (0.5, 0.5))
    }

    pub fn family(&self) -> &ExponentialFamily {
        &self.family
    }

    pub fn theta1(&self) -> &[f64] {
        &self.theta1
    }

    pub fn theta2(&self) -> &[f64] {
        &self.theta2
    }

    pub fn prior(&self) -> (f64, f64) {
        self.prior
    }

    pub fn chernoff(&self) -> Result<ChernoffResult> {
        chernoff(&self.family, &self.theta1, &self.theta2)
    }
}

/// Outcome of a MAP classification experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct MapSimulation {
    pub error_rate: f64,
    /// `−log(error_rate)/n_obs`.
    pub exponent: f64,
    pub errors: usize,
    pub trials: usize,
    /// Binomial standard error of `error_rate`.
    pub stderr: f64,
    /// At least ten errors were observed.
    pub reliable: bool,
}

/// Minimum error count for a trustworthy exponent estimate.
pub const RELIABLE_ERRORS: usize = 10;

/// Each trial (seeded from `seed` and its index) draws the true class from
/// the prior, samples `n_obs` observations and picks the class with the
/// larger `log w + Σ log p`; ties go to the first hypothesis.
pub fn map_error_simulation(h: &BinaryHypothesis, n_obs: usize, trials: usize, seed: u64) -> Result<MapSimulation> {
    if n_obs == 0 {
        return Err(Error::Invalid("n_obs must be at least 1".into()));
    }
    if trials < 100 {
        return Err(Error::Invalid(format!("at least 100 trials are required, got {trials}")));
    }
    let fam = &h.family;
    let (w1, w2) = h.prior;
    let errors: usize = (0..trials)
        .into_par_iter()
        .map(|i| {
            use rand::Rng;
            let mut rng = seeded(derive_seed(seed, i as u64));
            let first = rng.random::<f64>() < w1;
            let truth = if first { &h.theta1 } else { &h.theta2 };
            let xs = model::sample_n(fam, truth, n_obs, &mut rng);
            let (mut l1, mut l2) = (w1.ln(), w2.ln());
            for &x in &xs {
                l1 += fam.log_density(&h.theta1, x);
                l2 += fam.log_density(&h.theta2, x);
            }
            usize::from((l1 >= l2) != first)
        })
        .sum();
    if errors == 0 {
        return Err(Error::Degenerate(format!(
            "no classification errors in {trials} trials at n = {n_obs}"
        )));
    }
    let rate = errors as f64 / trials as f64;
    Ok(MapSimulation {
        error_rate: rate,
        exponent: -rate.ln() / n_obs as f64,
        errors,
        trials,
        stderr: (rate * (1.0 - rate) / trials as f64).sqrt(),
        reliable: errors >= RELIABLE_ERRORS,
    })
}

/// Smallest pairwise Chernoff information among several hypotheses.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiChernoff {
    /// Indices of the attaining pair, lowest first.
    pub pair: (usize, usize),
    pub value: f64,
    /// Two hypotheses coincide, so the exponent is zero.
    pub degenerate: bool,
}

/// Scans all pairs; ties keep the first pair in lexicographic order.
pub fn multi_chernoff(fam: &ExponentialFamily, thetas: &[Vec<f64>]) -> Result<MultiChernoff> {
    if thetas.len() < 2 {
        return Err(Error::Invalid("at least two hypotheses are required".into()));
    }
    for t in thetas {
        check_dim(Potential::dim(fam), t.len())?;
        convex::check_point(fam, t)?;
    }
    let mut best: Option<MultiChernoff> = None;
    for i in 0..thetas.len() {
        for j in i + 1..thetas.len() {
            let (value, degenerate) = if thetas[i] == thetas[j] {
                (0.0, true)
            } else {
                (chernoff(fam, &thetas[i], &thetas[j])?.value, false)
            };
            if best.as_ref().is_none_or(|b| value < b.value) {
                best = Some(MultiChernoff {
                    pair: (i, j),
                    value,
                    degenerate,
                });
            }
        }
    }
    Ok(best.expect("at least one pair"))
}
