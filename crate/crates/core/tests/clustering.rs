use infogeo::clustering::{self, ClusteringProblem};
use infogeo::convex::{ExpSum, SquaredNorm};
use infogeo::divergence;
use infogeo::rng::seeded;
use rand::Rng;

fn blobs(centres: &[[f64; 2]], per: usize, spread: f64, seed: u64) -> (Vec<Vec<f64>>, Vec<usize>) {
    let mut rng = seeded(seed);
    let mut points = Vec::new();
    let mut labels = Vec::new();
    for (c, centre) in centres.iter().enumerate() {
        for _ in 0..per {
            points.push(vec![
                centre[0] + spread * rng.random_range(-1.0..1.0),
                centre[1] + spread * rng.random_range(-1.0..1.0),
            ]);
            labels.push(c);
        }
    }
    (points, labels)
}

#[test]
fn separated_blobs_are_recovered() {
    let (points, truth) = blobs(&[[0.0, 0.0], [10.0, 0.0], [0.0, 10.0]], 15, 1.0, 3);
    let prob = ClusteringProblem::new(points, SquaredNorm::new(2), 3, 8).unwrap();
    let r = clustering::bregman_kmeans(&prob).unwrap();
    assert!(r.converged);
    assert_eq!(clustering::adjusted_rand_index(&r.assignments, &truth).unwrap(), 1.0);
}

#[test]
fn centers_are_member_means_under_a_non_euclidean_generator() {
    let mut rng = seeded(12);
    let points: Vec<Vec<f64>> = (0..40).map(|_| vec![rng.random_range(-2.0..2.0)]).collect();
    let f = ExpSum { dim: 1 };
    let prob = ClusteringProblem::new(points.clone(), f, 3, 2).unwrap();
    let r = clustering::bregman_kmeans(&prob).unwrap();
    for (c, center) in r.centers.iter().enumerate() {
        let members: Vec<f64> = points
            .iter()
            .zip(&r.assignments)
            .filter(|(_, a)| **a == c)
            .map(|(p, _)| p[0])
            .collect();
        let mean = members.iter().sum::<f64>() / members.len() as f64;
        assert!((center[0] - mean).abs() < 1e-12);
    }
    // Each point sits with the center of smallest B_F(point : center).
    for (p, a) in points.iter().zip(&r.assignments) {
        let d: Vec<f64> = r.centers.iter().map(|c| divergence::bregman(&f, p, c).unwrap()).collect();
        assert!(d.iter().all(|x| d[*a] <= *x + 1e-12));
    }
    assert!(r.history.windows(2).all(|w| w[1] <= w[0] + 1e-12));
}

fn choose2(n: usize) -> f64 {
    (n * n.saturating_sub(1)) as f64 / 2.0
}

/// ARI by direct pair counting.
fn ari_by_pairs(a: &[usize], b: &[usize]) -> f64 {
    let n = a.len();
    let (mut both, mut in_a, mut in_b) = (0.0, 0.0, 0.0);
    for i in 0..n {
        for j in i + 1..n {
            let (sa, sb) = (a[i] == a[j], b[i] == b[j]);
            both += (sa && sb) as u8 as f64;
            in_a += sa as u8 as f64;
            in_b += sb as u8 as f64;
        }
    }
    let expected = in_a * in_b / choose2(n);
    (both - expected) / (0.5 * (in_a + in_b) - expected)
}

#[test]
fn adjusted_rand_index_agrees_with_pair_counting() {
    let mut rng = seeded(5);
    for _ in 0..50 {
        let a: Vec<usize> = (0..30).map(|_| rng.random_range(0..3)).collect();
        let b: Vec<usize> = (0..30).map(|_| rng.random_range(0..4)).collect();
        let got = clustering::adjusted_rand_index(&a, &b).unwrap();
        assert!((got - ari_by_pairs(&a, &b)).abs() < 1e-12);
    }
    let a = [0, 0, 1, 1, 2, 2];
    let relabelled = [2, 2, 0, 0, 1, 1];
    assert_eq!(clustering::adjusted_rand_index(&a, &relabelled).unwrap(), 1.0);
}

#[test]
fn results_depend_only_on_the_seed() {
    let (points, _) = blobs(&[[0.0, 0.0], [3.0, 3.0]], 20, 2.5, 7);
    let run = |seed| {
        let prob = ClusteringProblem::new(points.clone(), SquaredNorm::new(2), 4, seed).unwrap();
        clustering::bregman_kmeans(&prob).unwrap()
    };
    assert_eq!(run(1), run(1));
}
