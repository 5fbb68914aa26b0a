//! Bregman k-means on points of a dually flat manifold, with k-means++
//! seeding, and its use for clustering w-mixtures.
//!
//! Points enter the divergence as the first argument and centers as the
//! second, so every center is the arithmetic mean of its members.

use rand::Rng;
use rayon::prelude::*;

use crate::convex::{self, Potential};
use crate::divergence::bregman_with_gradient;
use crate::error::{check_dim, Error, Result};
use crate::mixfam::{MixtureFamily, MonteCarloGenerator};
use crate::rng::{derive_seed, seeded};

pub const MAX_ITERATIONS: usize = 300;
pub const MAX_RESEEDS: usize = 10;
pub const DEFAULT_RESTARTS: usize = 10;

/// Points to cluster under `B_F`.
#[derive(Debug, Clone)]
pub struct ClusteringProblem<P> {
    points: Vec<Vec<f64>>,
    potential: P,
    k: usize,
    seed: u64,
    restarts: usize,
}

impl<P: Potential> ClusteringProblem<P> {
    pub fn new(points: Vec<Vec<f64>>, potential: P, k: usize, seed: u64) -> Result<Self> {
        if k == 0 || k > points.len() {
            return Err(Error::Invalid(format!(
                "cluster count {k} must lie in 1..={}",
                points.len()
            )));
        }
        for p in &points {
            check_dim(potential.dim(), p.len())?;
            convex::check_point(&potential, p)?;
        }
        Ok(Self {
            points,
            potential,
            k,
            seed,
            restarts: DEFAULT_RESTARTS,
        })
    }

    /// Number of independently seeded Lloyd runs; the best one is kept.
    pub fn with_restarts(mut self, restarts: usize) -> Self {
        self.restarts = restarts.max(1);
        self
    }

    pub fn restarts(&self) -> usize {
        self.restarts
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn potential(&self) -> &P {
        &self.potential
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClusteringResult {
    /// Cluster label of each point, in `0..k`.
    pub assignments: Vec<usize>,
    pub centers: Vec<Vec<f64>>,
    /// `Σᵢ B_F(θᵢ : c_label(i))`.
    pub objective: f64,
    /// Number of center updates performed.
    pub iterations: usize,
    /// Objective after every assignment and every update, in order.
    pub history: Vec<f64>,
    /// Empty clusters repaired along the way.
    pub reseeds: usize,
    pub converged: bool,
}

/// Center with its potential value and gradient cached.
struct Anchor {
    point: Vec<f64>,
    value: f64,
    grad: Vec<f64>,
}

impl Anchor {
    fn new<P: Potential + ?Sized>(f: &P, point: Vec<f64>) -> Result<Self> {
        convex::check_point(f, &point)?;
        let grad = convex::grad(f, &point)?;
        Ok(Self {
            value: f.value(&point),
            point,
            grad,
        })
    }

    fn divergence<P: Potential + ?Sized>(&self, f: &P, x: &[f64]) -> f64 {
        bregman_with_gradient(f, x, &self.point, self.value, &self.grad)
    }
}

fn anchors<P: Potential + ?Sized>(f: &P, centers: &[Vec<f64>]) -> Result<Vec<Anchor>> {
    centers.iter().map(|c| Anchor::new(f, c.clone())).collect()
}

/// Nearest anchor (lowest index on ties) and the divergence to it.
fn nearest<P: Potential + ?Sized>(f: &P, anchors: &[Anchor], x: &[f64]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (j, a) in anchors.iter().enumerate() {
        let d = a.divergence(f, x);
        if d < best.1 {
            best = (j, d);
        }
    }
    best
}

/// Indices of `k` seed points: the first uniformly, each further one with
/// probability proportional to its divergence to the nearest chosen seed.
/// When every remaining point coincides with a seed the next one is drawn
/// uniformly from the unchosen indices.
pub fn kmeanspp_seed<P: Potential + ?Sized>(points: &[Vec<f64>], f: &P, k: usize, seed: u64) -> Result<Vec<usize>> {
    let n = points.len();
    if k == 0 || k > n {
        return Err(Error::Invalid(format!("cluster count {k} must lie in 1..={n}")));
    }
    for p in points {
        check_dim(f.dim(), p.len())?;
        convex::check_point(f, p)?;
    }
    let mut rng = seeded(seed);
    let mut chosen = vec![rng.random_range(0..n)];
    let mut taken = vec![false; n];
    taken[chosen[0]] = true;
    let first = Anchor::new(f, points[chosen[0]].clone())?;
    let mut dist: Vec<f64> = points.iter().map(|p| first.divergence(f, p)).collect();
    while chosen.len() < k {
        let total: f64 = dist
            .iter()
            .zip(&taken)
            .filter(|(_, t)| !**t)
            .map(|(d, _)| d)
            .sum();
        let next = if total > 0.0 {
            let target = rng.random::<f64>() * total;
            let mut acc = 0.0;
            let mut pick = None;
            for i in 0..n {
                if taken[i] || dist[i] <= 0.0 {
                    continue;
                }
                acc += dist[i];
                pick = Some(i);
                if acc > target {
                    break;
                }
            }
            pick.expect("positive total weight")
        } else {
            let free: Vec<usize> = (0..n).filter(|i| !taken[*i]).collect();
            free[rng.random_range(0..free.len())]
        };
        taken[next] = true;
        chosen.push(next);
        let a = Anchor::new(f, points[next].clone())?;
        for (d, p) in dist.iter_mut().zip(points) {
            *d = d.min(a.divergence(f, p));
        }
    }
    Ok(chosen)
}

fn assign<P: Potential + ?Sized>(f: &P, anchors: &[Anchor], points: &[Vec<f64>]) -> Vec<(usize, f64)> {
    points.par_iter().map(|x| nearest(f, anchors, x)).collect()
}

/// Assignment step with farthest-point repair of empty clusters.
fn assign_repairing<P: Potential + ?Sized>(
    f: &P,
    centers: &mut [Vec<f64>],
    points: &[Vec<f64>],
    reseeds: &mut usize,
) -> Result<(Vec<usize>, f64)> {
    let k = centers.len();
    let mut last_empty = 0;
    for _ in 0..=MAX_RESEEDS {
        let a = anchors(f, centers)?;
        let labelled = assign(f, &a, points);
        let mut sizes = vec![0usize; k];
        for (l, _) in &labelled {
            sizes[*l] += 1;
        }
        match sizes.iter().position(|s| *s == 0) {
            None => {
                let objective = labelled.iter().map(|(_, d)| d).sum();
                return Ok((labelled.into_iter().map(|(l, _)| l).collect(), objective));
            }
            Some(empty) => {
                last_empty = empty;
                let mut far = 0;
                for (i, (_, d)) in labelled.iter().enumerate() {
                    if *d > labelled[far].1 {
                        far = i;
                    }
                }
                centers[empty] = points[far].clone();
                *reseeds += 1;
            }
        }
    }
    Err(Error::EmptyCluster(last_empty))
}

fn means(points: &[Vec<f64>], labels: &[usize], k: usize) -> Vec<Vec<f64>> {
    let d = points[0].len();
    let mut sums = vec![vec![0.0; d]; k];
    let mut counts = vec![0usize; k];
    for (p, &l) in points.iter().zip(labels) {
        counts[l] += 1;
        for (s, v) in sums[l].iter_mut().zip(p) {
            *s += v;
        }
    }
    sums.into_iter()
        .zip(counts)
        .map(|(s, c)| s.into_iter().map(|v| v / c as f64).collect())
        .collect()
}

/// Sum of `B_F(θᵢ : c_label(i))`.
pub fn objective<P: Potential + ?Sized>(
    f: &P,
    points: &[Vec<f64>],
    labels: &[usize],
    centers: &[Vec<f64>],
) -> Result<f64> {
    let a = anchors(f, centers)?;
    Ok(points
        .iter()
        .zip(labels)
        .map(|(x, &l)| a[l].divergence(f, x))
        .sum())
}

/// Lloyd iteration from k-means++ seeds, repeated `restarts` times with
/// seeds derived from the problem seed; the run with the lowest objective
/// wins (earliest on ties).
pub fn bregman_kmeans<P: Potential>(prob: &ClusteringProblem<P>) -> Result<ClusteringResult> {
    let mut best: Option<ClusteringResult> = None;
    for r in 0..prob.restarts {
        let seeds = kmeanspp_seed(&prob.points, &prob.potential, prob.k, derive_seed(prob.seed, r as u64))?;
        let centers = seeds.iter().map(|&i| prob.points[i].clone()).collect();
        let run = bregman_kmeans_from(prob, centers)?;
        if best.as_ref().is_none_or(|b| run.objective < b.objective) {
            best = Some(run);
        }
    }
    Ok(best.expect("at least one restart"))
}

/// Lloyd iteration from the given centers: assign each point to its nearest
/// center under `B_F(θᵢ : c)` (lowest index on ties), move each center to the
/// mean of its members, and stop once the assignment no longer changes or
/// after 300 updates.
pub fn bregman_kmeans_from<P: Potential>(
    prob: &ClusteringProblem<P>,
    mut centers: Vec<Vec<f64>>,
) -> Result<ClusteringResult> {
    let (f, points, k) = (&prob.potential, &prob.points, prob.k);
    if centers.len() != k {
        return Err(Error::Invalid(format!("expected {k} centers, got {}", centers.len())));
    }
    let mut reseeds = 0;
    let (mut labels, first) = assign_repairing(f, &mut centers, points, &mut reseeds)?;
    let mut history = vec![first];
    let mut iterations = 0;
    let mut converged = false;
    while iterations < MAX_ITERATIONS {
        centers = means(points, &labels, k);
        iterations += 1;
        history.push(objective(f, points, &labels, &centers)?);
        let (next, obj) = assign_repairing(f, &mut centers, points, &mut reseeds)?;
        if next == labels {
            converged = true;
            break;
        }
        history.push(obj);
        labels = next;
    }
    if !converged {
        centers = means(points, &labels, k);
    }
    let objective = objective(f, points, &labels, &centers)?;
    Ok(ClusteringResult {
        assignments: labels,
        centers,
        objective,
        iterations,
        history,
        reseeds,
        converged,
    })
}

/// Clusters w-mixtures given by their weight parameters, using one shared
/// Monte-Carlo generator of `mc_samples` draws for every divergence.
pub fn cluster_wmixtures(
    fam: &MixtureFamily,
    thetas: Vec<Vec<f64>>,
    k: usize,
    mc_samples: usize,
    seed: u64,
) -> Result<ClusteringResult> {
    let generator = MonteCarloGenerator::new(fam.clone(), mc_samples, derive_seed(seed, 0))?;
    let prob = ClusteringProblem::new(thetas, generator, k, derive_seed(seed, 1))?;
    bregman_kmeans(&prob)
}

/// Adjusted Rand index between two labelings of the same items.
pub fn adjusted_rand_index(a: &[usize], b: &[usize]) -> Result<f64> {
    check_dim(a.len(), b.len())?;
    let n = a.len();
    if n < 2 {
        return Ok(1.0);
    }
    let (ka, kb) = (a.iter().max().unwrap() + 1, b.iter().max().unwrap() + 1);
    let mut table = vec![vec![0u64; kb]; ka];
    for (&x, &y) in a.iter().zip(b) {
        table[x][y] += 1;
    }
    let pairs = |c: u64| (c * c.saturating_sub(1) / 2) as f64;
    let index: f64 = table.iter().flatten().map(|&c| pairs(c)).sum();
    let rows: f64 = table.iter().map(|r| pairs(r.iter().sum())).sum();
    let cols: f64 = (0..kb).map(|j| pairs(table.iter().map(|r| r[j]).sum())).sum();
    let total = pairs(n as u64);
    let expected = rows * cols / total;
    let max = 0.5 * (rows + cols);
    if max == expected {
        return Ok(if index == expected { 1.0 } else { 0.0 });
    }
    Ok((index - expected) / (max - expected))
}
