//! Fisher information, the skewness tensor, expected α-connections,
//! Levi-Civita symbols, divergence-induced geometry, Fisher-Rao distances and
//! Cramér-Rao checks.

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::convex::{self, Potential};
use crate::divergence::DiscreteDistribution;
use crate::error::{check_dim, Error, Result};
use crate::expfam::ExponentialFamily;
use crate::model::{self, StatisticalModel};
use crate::quadrature::Options;
use crate::rng::{derive_seed, seeded};
use crate::tensor::Tensor3;

/// Running mean and variance of vector-valued samples (Welford).
#[derive(Debug, Clone)]
pub(crate) struct Moments {
    n: usize,
    mean: Vec<f64>,
    m2: Vec<f64>,
}

impl Moments {
    pub(crate) fn new(len: usize) -> Self {
        Self {
            n: 0,
            mean: vec![0.0; len],
            m2: vec![0.0; len],
        }
    }

    pub(crate) fn push(&mut self, x: &[f64]) {
        self.n += 1;
        let n = self.n as f64;
        for ((m, s), &v) in self.mean.iter_mut().zip(self.m2.iter_mut()).zip(x) {
            let d = v - *m;
            *m += d / n;
            *s += d * (v - *m);
        }
    }

    pub(crate) fn mean(&self) -> &[f64] {
        &self.mean
    }

    /// Standard error of each mean.
    pub(crate) fn stderr(&self) -> Vec<f64> {
        let n = self.n as f64;
        if self.n < 2 {
            return vec![f64::INFINITY; self.mean.len()];
        }
        self.m2.iter().map(|s| (s / (n - 1.0) / n).sqrt()).collect()
    }
}

/// How a Fisher information estimate was obtained.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FimMethod {
    ScoreOuter,
    NegHessian,
    /// `∫ ∂ᵢl^α ∂ⱼl^{−α}` for the given `α`.
    Alpha(f64),
    /// `4 ∫ ∂ᵢ√p ∂ⱼ√p`.
    Sqrt,
    Quadrature,
}

/// Fisher information estimate with entrywise standard errors.
#[derive(Debug, Clone, PartialEq)]
pub struct FimEstimate {
    pub matrix: DMatrix<f64>,
    pub stderr: DMatrix<f64>,
    /// Sample count; zero for deterministic methods.
    pub n: usize,
    pub method: FimMethod,
}

impl FimEstimate {
    fn from_moments(d: usize, m: &Moments, n: usize, method: FimMethod) -> Self {
        let se = m.stderr();
        let mut matrix = DMatrix::from_row_slice(d, d, m.mean());
        let mut stderr = DMatrix::from_row_slice(d, d, &se);
        // Symmetrise the (already symmetric up to round-off) estimates.
        matrix = (&matrix + matrix.transpose()) * 0.5;
        stderr = (&stderr + stderr.transpose()) * 0.5;
        Self {
            matrix,
            stderr,
            n,
            method,
        }
    }

    pub fn max_stderr(&self) -> f64 {
        self.stderr.amax()
    }
}

fn draw<M: StatisticalModel + ?Sized>(model: &M, theta: &[f64], n: usize, seed: u64) -> Vec<f64> {
    let mut rng = seeded(seed);
    model::sample_n(model, theta, n, &mut rng)
}

fn check_samples(n: usize, min: usize) -> Result<()> {
    if n < min {
        return Err(Error::Invalid(format!("at least {min} samples are required, got {n}")));
    }
    Ok(())
}

fn outer(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().flat_map(|x| b.iter().map(move |y| x * y)).collect()
}

/// Monte-Carlo mean of the score with its standard errors; zero in
/// expectation for regular models.
pub fn mean_score<M: StatisticalModel + ?Sized>(
    model: &M,
    theta: &[f64],
    n: usize,
    seed: u64,
) -> Result<(Vec<f64>, Vec<f64>)> {
    model.check_parameter(theta)?;
    check_samples(n, 2)?;
    let mut m = Moments::new(model.dim());
    for x in draw(model, theta, n, seed) {
        m.push(&model.score(theta, x));
    }
    Ok((m.mean().to_vec(), m.stderr()))
}

/// `E[∂ᵢl ∂ⱼl]` by Monte-Carlo.
pub fn fim_score_outer<M: StatisticalModel + ?Sized>(
    model: &M,
    theta: &[f64],
    n: usize,
    seed: u64,
) -> Result<FimEstimate> {
    model.check_parameter(theta)?;
    check_samples(n, 100)?;
    let d = model.dim();
    let mut m = Moments::new(d * d);
    for x in draw(model, theta, n, seed) {
        let s = model.score(theta, x);
        m.push(&outer(&s, &s));
    }
    Ok(FimEstimate::from_moments(d, &m, n, FimMethod::ScoreOuter))
}

/// `−E[∂ᵢ∂ⱼl]` by Monte-Carlo.
pub fn fim_neg_hessian<M: StatisticalModel + ?Sized>(
    model: &M,
    theta: &[f64],
    n: usize,
    seed: u64,
) -> Result<FimEstimate> {
    model.check_parameter(theta)?;
    check_samples(n, 100)?;
    let d = model.dim();
    let mut m = Moments::new(d * d);
    for x in draw(model, theta, n, seed) {
        let h = -model.log_density_hessian(theta, x);
        let row_major: Vec<f64> = (0..d * d).map(|k| h[(k / d, k % d)]).collect();
        m.push(&row_major);
    }
    Ok(FimEstimate::from_moments(d, &m, n, FimMethod::NegHessian))
}

/// The density embedding `k_α(u)`: `log u` for `α = 1`, otherwise
/// `2/(1−α) u^{(1−α)/2}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlphaRepresentation {
    pub alpha: f64,
}

impl AlphaRepresentation {
    pub fn new(alpha: f64) -> Self {
        Self { alpha }
    }

    pub fn k(&self, u: f64) -> f64 {
        if self.alpha == 1.0 {
            u.ln()
        } else {
            2.0 / (1.0 - self.alpha) * u.powf(0.5 * (1.0 - self.alpha))
        }
    }

    /// `k_α′(u) = u^{−(1+α)/2}`.
    pub fn k_prime(&self, u: f64) -> f64 {
        u.powf(-0.5 * (1.0 + self.alpha))
    }

    /// `l^α(x;θ) = k_α(p(x;θ))`.
    pub fn embed<M: StatisticalModel + ?Sized>(&self, model: &M, theta: &[f64], x: f64) -> f64 {
        if self.alpha == 1.0 {
            model.log_density(theta, x)
        } else {
            2.0 / (1.0 - self.alpha) * (0.5 * (1.0 - self.alpha) * model.log_density(theta, x)).exp()
        }
    }

    /// `∇_θ l^α` by central differences.
    pub fn gradient<M: StatisticalModel + ?Sized>(&self, model: &M, theta: &[f64], x: f64) -> Vec<f64> {
        crate::diff::gradient(|t| self.embed(model, t, x), theta)
    }
}

/// `∫ ∂ᵢl^α ∂ⱼl^{−α} dμ`, estimated as the mean of the integrand divided by
/// the density under samples from `p_θ`. Derivatives of the embeddings are
/// taken by central differences.
pub fn fim_alpha<M: StatisticalModel + ?Sized>(
    model: &M,
    theta: &[f64],
    alpha: f64,
    n: usize,
    seed: u64,
) -> Result<FimEstimate> {
    model.check_parameter(theta)?;
    check_samples(n, 100)?;
    let (ra, rb) = (AlphaRepresentation::new(alpha), AlphaRepresentation::new(-alpha));
    let d = model.dim();
    let mut m = Moments::new(d * d);
    for x in draw(model, theta, n, seed) {
        let p = model.density(theta, x);
        let ga = ra.gradient(model, theta, x);
        let gb = rb.gradient(model, theta, x);
        let row: Vec<f64> = outer(&ga, &gb).into_iter().map(|v| v / p).collect();
        m.push(&row);
    }
    Ok(FimEstimate::from_moments(d, &m, n, FimMethod::Alpha(alpha)))
}

/// `4 ∫ ∂ᵢ√p ∂ⱼ√p dμ` by Monte-Carlo with differenced `√p`.
pub fn fim_sqrt<M: StatisticalModel + ?Sized>(
    model: &M,
    theta: &[f64],
    n: usize,
    seed: u64,
) -> Result<FimEstimate> {
    model.check_parameter(theta)?;
    check_samples(n, 100)?;
    let d = model.dim();
    let mut m = Moments::new(d * d);
    for x in draw(model, theta, n, seed) {
        let p = model.density(theta, x);
        let g = crate::diff::gradient(|t| (0.5 * model.log_density(t, x)).exp(), theta);
        let row: Vec<f64> = outer(&g, &g).into_iter().map(|v| 4.0 * v / p).collect();
        m.push(&row);
    }
    Ok(FimEstimate::from_moments(d, &m, n, FimMethod::Sqrt))
}

/// `E[∂ᵢl ∂ⱼl]` by summation or adaptive quadrature over the sample space.
pub fn fim_quadrature<M: StatisticalModel + ?Sized>(model: &M, theta: &[f64]) -> Result<FimEstimate> {
    model.check_parameter(theta)?;
    let d = model.dim();
    let mut g = DMatrix::zeros(d, d);
    for i in 0..d {
        for j in i..d {
            let v = model::expectation(
                model,
                theta,
                |x| {
                    let s = model.score(theta, x);
                    s[i] * s[j]
                },
                Options::abs(1e-10),
            )?;
            g[(i, j)] = v;
            g[(j, i)] = v;
        }
    }
    Ok(FimEstimate {
        matrix: g,
        stderr: DMatrix::zeros(d, d),
        n: 0,
        method: FimMethod::Quadrature,
    })
}

/// `E[∂ᵢl ∂ⱼl ∂ₖl]` with entrywise standard errors.
pub fn skewness_tensor<M: StatisticalModel + ?Sized>(
    model: &M,
    theta: &[f64],
    n: usize,
    seed: u64,
) -> Result<(Tensor3, Tensor3)> {
    model.check_parameter(theta)?;
    check_samples(n, 1000)?;
    let d = model.dim();
    let mut m = Moments::new(d * d * d);
    for x in draw(model, theta, n, seed) {
        let s = model.score(theta, x);
        m.push(&outer(&outer(&s, &s), &s));
    }
    let t = Tensor3::from_fn(d, |i, j, k| m.mean()[(i * d + j) * d + k]);
    let se = m.stderr();
    let e = Tensor3::from_fn(d, |i, j, k| se[(i * d + j) * d + k]);
    Ok((t.symmetrized(), e))
}

/// Expected connection coefficients `Γ^α_{ij,k}` with standard errors.
#[derive(Debug, Clone, PartialEq)]
pub struct ConnectionEstimate {
    /// Index order `(i, j, k)`; symmetric in `(i, j)`.
    pub gamma: Tensor3,
    pub stderr: Tensor3,
    pub alpha: f64,
}

/// `Γ^α_{ij,k} = E[(∂ᵢ∂ⱼl + (1−α)/2 ∂ᵢl∂ⱼl) ∂ₖl]` for each requested `α`,
/// all computed from one sample set so linear identities between them hold
/// to round-off.
pub fn expected_alpha_christoffels<M: StatisticalModel + ?Sized>(
    model: &M,
    theta: &[f64],
    alphas: &[f64],
    n: usize,
    seed: u64,
) -> Result<Vec<ConnectionEstimate>> {
    model.check_parameter(theta)?;
    check_samples(n, 1000)?;
    let d = model.dim();
    let len = d * d * d;
    let mut per_alpha: Vec<Moments> = alphas.iter().map(|_| Moments::new(len)).collect();
    let mut hess_part = Moments::new(len);
    let mut cube_part = Moments::new(len);
    let mut row = vec![0.0; len];
    for x in draw(model, theta, n, seed) {
        let s = model.score(theta, x);
        let h = model.log_density_hessian(theta, x);
        let a: Vec<f64> = (0..len)
            .map(|idx| {
                let (i, j, k) = (idx / (d * d), (idx / d) % d, idx % d);
                h[(i, j)] * s[k]
            })
            .collect();
        let b: Vec<f64> = (0..len)
            .map(|idx| {
                let (i, j, k) = (idx / (d * d), (idx / d) % d, idx % d);
                s[i] * s[j] * s[k]
            })
            .collect();
        hess_part.push(&a);
        cube_part.push(&b);
        for (mom, &alpha) in per_alpha.iter_mut().zip(alphas) {
            let c = 0.5 * (1.0 - alpha);
            for (r, (x, y)) in row.iter_mut().zip(a.iter().zip(&b)) {
                *r = x + c * y;
            }
            mom.push(&row);
        }
    }
    let (am, bm) = (hess_part.mean(), cube_part.mean());
    Ok(alphas
        .iter()
        .zip(&per_alpha)
        .map(|(&alpha, mom)| {
            let c = 0.5 * (1.0 - alpha);
            let se = mom.stderr();
            ConnectionEstimate {
                gamma: Tensor3::from_fn(d, |i, j, k| {
                    let idx = (i * d + j) * d + k;
                    am[idx] + c * bm[idx]
                }),
                stderr: Tensor3::from_fn(d, |i, j, k| se[(i * d + j) * d + k]),
                alpha,
            }
        })
        .collect())
}

/// Christoffel symbols of the Levi-Civita connection of a metric field.
#[derive(Debug, Clone, PartialEq)]
pub struct LeviCivita {
    /// `Γ_{ij,l} = ½(∂ᵢg_jl + ∂ⱼg_il − ∂ₗg_ij)`.
    pub lowered: Tensor3,
    /// `Γᵏ_ij = g^{kl} Γ_{ij,l}`, stored at `(i, j, k)`.
    pub raised: Tensor3,
}

const METRIC_STEP: f64 = 1e-3;

/// Levi-Civita symbols with metric derivatives from five-point central
/// differences (step `1e-3`).
pub fn levi_civita_symbols<G>(metric: G, theta: &[f64]) -> Result<LeviCivita>
where
    G: Fn(&[f64]) -> Result<DMatrix<f64>>,
{
    let d = theta.len();
    let g = metric(theta)?;
    check_dim(d, g.nrows())?;
    let ginv = g
        .clone()
        .cholesky()
        .ok_or_else(|| Error::SingularMetric(format!("metric is not positive-definite at {theta:?}")))?
        .inverse();
    // dg[l] = ∂_l g
    let mut dg = Vec::with_capacity(d);
    for l in 0..d {
        let at = |s: f64| -> Result<DMatrix<f64>> {
            let mut t = theta.to_vec();
            t[l] += s * METRIC_STEP;
            metric(&t)
        };
        let (p1, m1, p2, m2) = (at(1.0)?, at(-1.0)?, at(2.0)?, at(-2.0)?);
        dg.push((8.0 * (p1 - m1) - (p2 - m2)) / (12.0 * METRIC_STEP));
    }
    let lowered = Tensor3::from_fn(d, |i, j, l| {
        0.5 * (dg[i][(j, l)] + dg[j][(i, l)] - dg[l][(i, j)])
    });
    let raised = Tensor3::from_fn(d, |i, j, k| {
        (0..d).map(|l| ginv[(k, l)] * lowered.get(i, j, l)).sum()
    });
    Ok(LeviCivita { lowered, raised })
}

const EGUCHI_STEP: f64 = 2e-4;
const EGUCHI_STEP3: f64 = 1e-3;

fn shifted(theta: &[f64], moves: &[(usize, f64)]) -> Vec<f64> {
    let mut t = theta.to_vec();
    for &(i, s) in moves {
        t[i] += s;
    }
    t
}

/// `g_ij = −∂ᵢ∂′ⱼ D(θ:θ′)` at `θ′ = θ`, by central differences.
pub fn eguchi_metric<D>(div: D, theta: &[f64]) -> Result<DMatrix<f64>>
where
    D: Fn(&[f64], &[f64]) -> Result<f64>,
{
    let d = theta.len();
    let h = EGUCHI_STEP;
    let mut g = DMatrix::zeros(d, d);
    for i in 0..d {
        for j in 0..d {
            let mut acc = 0.0;
            for (si, sj) in [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)] {
                let a = shifted(theta, &[(i, si * h)]);
                let b = shifted(theta, &[(j, sj * h)]);
                acc += si * sj * div(&a, &b)?;
            }
            g[(i, j)] = -acc / (4.0 * h * h);
        }
    }
    Ok((&g + g.transpose()) * 0.5)
}

/// `Γ_{ij,k} = −∂ᵢ∂ⱼ∂′ₖ D(θ:θ′)` at `θ′ = θ`, by central differences.
pub fn eguchi_christoffels<D>(div: D, theta: &[f64]) -> Result<Tensor3>
where
    D: Fn(&[f64], &[f64]) -> Result<f64>,
{
    let d = theta.len();
    let h = EGUCHI_STEP3;
    let mut t = Tensor3::zeros(d);
    for i in 0..d {
        for j in 0..d {
            for k in 0..d {
                let mut acc = 0.0;
                for si in [1.0, -1.0] {
                    for sj in [1.0, -1.0] {
                        for sk in [1.0, -1.0] {
                            let a = shifted(theta, &[(i, si * h), (j, sj * h)]);
                            let b = shifted(theta, &[(k, sk * h)]);
                            acc += si * sj * sk * div(&a, &b)?;
                        }
                    }
                }
                t.set(i, j, k, -acc / (8.0 * h * h * h));
            }
        }
    }
    Ok(t)
}

/// `2 arccos(Σ √(pᵢqᵢ))`, the Fisher-Rao distance between categorical
/// distributions.
pub fn rao_distance_categorical(p: &DiscreteDistribution, q: &DiscreteDistribution) -> Result<f64> {
    check_dim(p.len(), q.len())?;
    if p.probs().iter().chain(q.probs()).any(|v| *v <= 0.0) {
        return Err(Error::Support("categorical Rao distance needs positive entries".into()));
    }
    let bc: f64 = p
        .probs()
        .iter()
        .zip(q.probs())
        .map(|(a, b)| (a * b).sqrt())
        .sum();
    Ok(2.0 * bc.min(1.0).acos())
}

/// Result of a path-energy minimisation.
#[derive(Debug, Clone, PartialEq)]
pub struct RaoPath {
    /// Length of the best path found (never above `straight_length`).
    pub length: f64,
    /// Length of the straight segment in the given coordinates.
    pub straight_length: f64,
    /// Nodes of the optimised path, endpoints included.
    pub nodes: Vec<Vec<f64>>,
    pub iterations: usize,
}

const COARSE_SEGMENTS: usize = 16;
const LEVEL_MAX_ITER: usize = 200;

/// Fisher-Rao distance of an exponential or mixture family whose Fisher
/// metric is the Hessian of its potential.
pub fn rao_distance_numeric<P: Potential + ?Sized>(
    f: &P,
    theta1: &[f64],
    theta2: &[f64],
    segments: usize,
) -> Result<RaoPath> {
    convex::check_point(f, theta1)?;
    convex::check_point(f, theta2)?;
    rao_distance_with_metric(|t| convex::hessian(f, t), theta1, theta2, segments)
}

/// Minimises the discrete energy `Σ Δθᵀ g(mid) Δθ / Δt` over interior nodes,
/// starting from the straight segment on a 16-segment path and doubling the
/// resolution up to `segments`. Each level takes Gauss-Newton steps on all
/// interior nodes at once, halving any step that raises the energy.
pub fn rao_distance_with_metric<G>(
    metric: G,
    theta1: &[f64],
    theta2: &[f64],
    segments: usize,
) -> Result<RaoPath>
where
    G: Fn(&[f64]) -> Result<DMatrix<f64>> + Sync,
{
    check_dim(theta1.len(), theta2.len())?;
    if segments < COARSE_SEGMENTS {
        return Err(Error::Invalid(format!("at least {COARSE_SEGMENTS} segments are required")));
    }
    let d = theta1.len();
    let lerp = |t: f64| -> Vec<f64> {
        theta1.iter().zip(theta2).map(|(a, b)| (1.0 - t) * a + t * b).collect()
    };
    let straight: Vec<Vec<f64>> = (0..=segments).map(|u| lerp(u as f64 / segments as f64)).collect();
    let straight_length = path_length(&metric, &straight)?;
    if straight_length == 0.0 {
        return Ok(RaoPath {
            length: 0.0,
            straight_length,
            nodes: straight,
            iterations: 0,
        });
    }

    let mut n = COARSE_SEGMENTS.min(segments);
    let mut nodes: Vec<Vec<f64>> = (0..=n).map(|u| lerp(u as f64 / n as f64)).collect();
    let mut iterations = 0;
    loop {
        iterations += relax(&metric, &mut nodes, d)?;
        if n >= segments {
            break;
        }
        let next = (2 * n).min(segments);
        nodes = resample(&nodes, next);
        n = next;
    }
    let length = path_length(&metric, &nodes)?;
    Ok(RaoPath {
        length: length.min(straight_length),
        straight_length,
        nodes: if length <= straight_length { nodes } else { straight },
        iterations,
    })
}

fn quad_form(g: &DMatrix<f64>, v: &[f64]) -> f64 {
    let d = v.len();
    let mut s = 0.0;
    for i in 0..d {
        for j in 0..d {
            s += v[i] * g[(i, j)] * v[j];
        }
    }
    s
}

fn midpoint(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| 0.5 * (x + y)).collect()
}

fn delta(a: &[f64], b: &[f64]) -> Vec<f64> {
    b.iter().zip(a).map(|(x, y)| x - y).collect()
}

fn segment_energy<G: Fn(&[f64]) -> Result<DMatrix<f64>>>(metric: &G, a: &[f64], b: &[f64]) -> Result<f64> {
    let g = metric(&midpoint(a, b))?;
    Ok(quad_form(&g, &delta(a, b)))
}

fn path_length<G: Fn(&[f64]) -> Result<DMatrix<f64>>>(metric: &G, nodes: &[Vec<f64>]) -> Result<f64> {
    nodes
        .windows(2)
        .map(|w| segment_energy(metric, &w[0], &w[1]).map(|e| e.max(0.0).sqrt()))
        .sum()
}

fn path_energy<G: Fn(&[f64]) -> Result<DMatrix<f64>>>(metric: &G, nodes: &[Vec<f64>]) -> Result<f64> {
    let n = (nodes.len() - 1) as f64;
    let mut e = 0.0;
    for w in nodes.windows(2) {
        e += segment_energy(metric, &w[0], &w[1])?;
    }
    Ok(e * n)
}

/// Linear re-interpolation of a polyline at `n` uniform parameter steps.
fn resample(nodes: &[Vec<f64>], n: usize) -> Vec<Vec<f64>> {
    let m = nodes.len() - 1;
    (0..=n)
        .map(|u| {
            let s = u as f64 * m as f64 / n as f64;
            let k = (s.floor() as usize).min(m - 1);
            let w = s - k as f64;
            nodes[k]
                .iter()
                .zip(&nodes[k + 1])
                .map(|(a, b)| (1.0 - w) * a + w * b)
                .collect()
        })
        .collect()
}

fn relax<G>(metric: &G, nodes: &mut Vec<Vec<f64>>, d: usize) -> Result<usize>
where
    G: Fn(&[f64]) -> Result<DMatrix<f64>> + Sync,
{
    let n = nodes.len() - 1;
    if n < 2 {
        return Ok(0);
    }
    let mut energy = path_energy(metric, nodes)?;
    let scale = nodes
        .windows(2)
        .map(|w| delta(&w[0], &w[1]).iter().fold(0.0f64, |m, v| m.max(v.abs())))
        .sum::<f64>()
        .max(1e-300);
    for it in 0..LEVEL_MAX_ITER {
        let dir = gauss_newton_direction(metric, nodes, d)?;
        let biggest = dir.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if biggest <= 1e-12 * scale {
            return Ok(it);
        }
        let mut step = 1.0;
        let mut accepted = false;
        while step > 1e-8 {
            let trial: Vec<Vec<f64>> = nodes
                .iter()
                .enumerate()
                .map(|(u, x)| {
                    if u == 0 || u == n {
                        x.clone()
                    } else {
                        x.iter()
                            .enumerate()
                            .map(|(i, a)| a - step * dir[(u - 1) * d + i])
                            .collect()
                    }
                })
                .collect();
            match path_energy(metric, &trial) {
                Ok(e) if e <= energy => {
                    let stalled = energy - e <= 1e-15 * energy;
                    *nodes = trial;
                    energy = e;
                    accepted = true;
                    if stalled && biggest <= 1e-9 * scale {
                        return Ok(it + 1);
                    }
                    break;
                }
                _ => step *= 0.5,
            }
        }
        if !accepted {
            return Ok(it);
        }
    }
    Ok(LEVEL_MAX_ITER)
}

/// Solves `H Δ = ∇E` where `H` is the block-tridiagonal energy Hessian with
/// metric derivatives dropped: diagonal blocks `2n(g₋ + g₊)` and
/// off-diagonal blocks `−2n g` from the adjacent segment midpoints.
fn gauss_newton_direction<G>(metric: &G, nodes: &[Vec<f64>], d: usize) -> Result<Vec<f64>>
where
    G: Fn(&[f64]) -> Result<DMatrix<f64>> + Sync,
{
    let n = nodes.len() - 1;
    let m = (n - 1) * d;
    let grads: Vec<Vec<f64>> = (1..n)
        .into_par_iter()
        .map(|u| node_gradient(metric, &nodes[u - 1], &nodes[u], &nodes[u + 1], n, d))
        .collect::<Result<_>>()?;
    let mids: Vec<DMatrix<f64>> = nodes
        .par_windows(2)
        .map(|w| metric(&midpoint(&w[0], &w[1])))
        .collect::<Result<_>>()?;
    let c = 2.0 * n as f64;
    let mut h = DMatrix::zeros(m, m);
    for u in 1..n {
        let r = (u - 1) * d;
        for i in 0..d {
            for j in 0..d {
                h[(r + i, r + j)] = c * (mids[u - 1][(i, j)] + mids[u][(i, j)]);
                if u + 1 < n {
                    h[(r + i, r + d + j)] = -c * mids[u][(i, j)];
                    h[(r + d + i, r + j)] = -c * mids[u][(i, j)];
                }
            }
        }
    }
    let rhs = nalgebra::DVector::from_iterator(m, grads.into_iter().flatten());
    let sol = h
        .cholesky()
        .ok_or_else(|| Error::SingularMetric("metric is not positive-definite along the path".into()))?
        .solve(&rhs);
    Ok(sol.iter().copied().collect())
}

/// Gradient of the path energy with respect to one interior node.
fn node_gradient<G: Fn(&[f64]) -> Result<DMatrix<f64>>>(
    metric: &G,
    prev: &[f64],
    cur: &[f64],
    next: &[f64],
    n: usize,
    d: usize,
) -> Result<Vec<f64>> {
    let local = |x: &[f64]| -> Result<f64> {
        Ok(segment_energy(metric, prev, x)? + segment_energy(metric, x, next)?)
    };
    let span = delta(prev, next).iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let h = (1e-6 * span).max(1e-10);
    let mut grad = vec![0.0; d];
    let mut x = cur.to_vec();
    for i in 0..d {
        x[i] = cur[i] + h;
        let ep = local(&x)?;
        x[i] = cur[i] - h;
        let em = local(&x)?;
        x[i] = cur[i];
        grad[i] = n as f64 * (ep - em) / (2.0 * h);
    }
    Ok(grad)
}

/// Outcome of repeated maximum-likelihood fits.
#[derive(Debug, Clone, PartialEq)]
pub struct CrlbReport {
    pub n: usize,
    pub trials: usize,
    /// Empirical covariance of `η̂` (the sample mean of `t(x)`).
    pub cov_eta: DMatrix<f64>,
    /// `I_η⁻¹/n = ∇²F(θ)/n`.
    pub bound_eta: DMatrix<f64>,
    /// `cov_eta − bound_eta`.
    pub gap_eta: DMatrix<f64>,
    /// Smallest eigenvalue of the gap and its bootstrap standard error.
    pub gap_min_eigenvalue: f64,
    pub gap_min_eigenvalue_se: f64,
    /// Empirical covariance of `θ̂ = ∇F*(η̂)` and `I_θ⁻¹/n`.
    pub cov_theta: DMatrix<f64>,
    pub bound_theta: DMatrix<f64>,
}

impl CrlbReport {
    /// `λ_min(gap) < −3·SE`.
    pub fn significantly_negative(&self) -> bool {
        self.gap_min_eigenvalue < -3.0 * self.gap_min_eigenvalue_se
    }
}

const BOOTSTRAP_ROUNDS: usize = 200;

/// Runs `trials` independent fits of `n` observations each (trial `i` uses
/// a seed derived from `seed` and `i`) and compares the spread of the
/// estimates with the Cramér-Rao bound.
pub fn crlb_empirical(
    fam: &ExponentialFamily,
    theta: &[f64],
    n: usize,
    trials: usize,
    seed: u64,
) -> Result<CrlbReport> {
    convex::check_point(fam, theta)?;
    if n == 0 || trials < 2 {
        return Err(Error::Invalid("need n ≥ 1 and at least two trials".into()));
    }
    let fits: Vec<(Vec<f64>, Vec<f64>)> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let data = fam.sample(theta, n, derive_seed(seed, i as u64))?;
            let eta = fam.mean_sufficient(&data);
            let th = convex::eta_to_theta(fam, &eta)?;
            Ok((eta, th))
        })
        .collect::<Result<_>>()?;
    let etas: Vec<&[f64]> = fits.iter().map(|f| f.0.as_slice()).collect();
    let thetas: Vec<&[f64]> = fits.iter().map(|f| f.1.as_slice()).collect();
    let hess = convex::hessian(fam, theta)?;
    let bound_eta = &hess / n as f64;
    let bound_theta = hess
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::SingularMetric("Fisher information is singular".into()))?
        / n as f64;
    let cov_eta = covariance(&etas);
    let gap_eta = &cov_eta - &bound_eta;
    let gap_min = gap_eta.clone().symmetric_eigenvalues().min();

    let mut rng = seeded(derive_seed(seed, u64::MAX));
    let boot: Vec<f64> = (0..BOOTSTRAP_ROUNDS)
        .map(|_| {
            use rand::Rng;
            let pick: Vec<&[f64]> = (0..trials).map(|_| etas[rng.random_range(0..trials)]).collect();
            (covariance(&pick) - &bound_eta).symmetric_eigenvalues().min()
        })
        .collect();
    let bm = boot.iter().sum::<f64>() / boot.len() as f64;
    let bse = (boot.iter().map(|b| (b - bm).powi(2)).sum::<f64>() / (boot.len() - 1) as f64).sqrt();

    Ok(CrlbReport {
        n,
        trials,
        cov_eta,
        bound_eta,
        gap_eta,
        gap_min_eigenvalue: gap_min,
        gap_min_eigenvalue_se: bse,
        cov_theta: covariance(&thetas),
        bound_theta,
    })
}

fn covariance(xs: &[&[f64]]) -> DMatrix<f64> {
    let d = xs[0].len();
    let n = xs.len() as f64;
    let mut mean = vec![0.0; d];
    for x in xs {
        for (m, v) in mean.iter_mut().zip(x.iter()) {
            *m += v / n;
        }
    }
    let mut c = DMatrix::zeros(d, d);
    for x in xs {
        for i in 0..d {
            for j in 0..d {
                c[(i, j)] += (x[i] - mean[i]) * (x[j] - mean[j]);
            }
        }
    }
    c / (n - 1.0)
}
