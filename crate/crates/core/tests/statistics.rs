use infogeo::fisher;
use infogeo::hypothesis::{self, BinaryHypothesis};
use infogeo::{ComponentDensity, ExponentialFamily, MixtureFamily};

/// Maximum of a unimodal function on [0, 1] by ternary search.
fn maximise(g: impl Fn(f64) -> f64) -> (f64, f64) {
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..200 {
        let (a, b) = (lo + (hi - lo) / 3.0, hi - (hi - lo) / 3.0);
        if g(a) < g(b) {
            lo = a;
        } else {
            hi = b;
        }
    }
    let x = 0.5 * (lo + hi);
    (x, g(x))
}

#[test]
fn poisson_chernoff_information() {
    let fam = ExponentialFamily::Poisson;
    for (l1, l2) in [(1.0f64, 4.0f64), (2.5, 0.5), (10.0, 12.0)] {
        // −log Σ p^a q^(1−a) = aλ₁ + (1−a)λ₂ − λ₁^a λ₂^(1−a).
        let (_, value) = maximise(|a| a * l1 + (1.0 - a) * l2 - l1.powf(a) * l2.powf(1.0 - a));
        let c = hypothesis::chernoff(&fam, &[l1.ln()], &[l2.ln()]).unwrap();
        assert!((c.value - value).abs() < 1e-9, "{} vs {value}", c.value);
    }
}

#[test]
fn bernoulli_chernoff_information() {
    let fam = ExponentialFamily::Bernoulli;
    let (p, q) = (0.2f64, 0.7f64);
    let (_, value) = maximise(|a| -(p.powf(a) * q.powf(1.0 - a) + (1.0 - p).powf(a) * (1.0 - q).powf(1.0 - a)).ln());
    let t1 = fam.natural_from_source(&[p]).unwrap();
    let t2 = fam.natural_from_source(&[q]).unwrap();
    let c = hypothesis::chernoff(&fam, &t1, &t2).unwrap();
    assert!((c.value - value).abs() < 1e-9);
    let b = hypothesis::bhattacharyya(&fam, &t1, &t2, 1.0 - c.alpha_star).unwrap();
    assert!((b - c.value).abs() < 1e-9);
}

#[test]
fn map_simulation_is_seeded() {
    let fam = ExponentialFamily::Gaussian;
    let h = BinaryHypothesis::equal_priors(fam, vec![0.0, -0.5], vec![1.0, -0.5]).unwrap();
    let a = hypothesis::map_error_simulation(&h, 3, 2000, 9).unwrap();
    let b = hypothesis::map_error_simulation(&h, 3, 2000, 9).unwrap();
    assert_eq!(a, b);
    assert!(a.error_rate > 0.0 && a.error_rate < 0.5);
}

fn normal_pdf(x: f64, mu: f64) -> f64 {
    (-(x - mu).powi(2) / 2.0).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

#[test]
fn mixture_fim_by_quadrature() {
    let fam = MixtureFamily::new(vec![
        ComponentDensity::gaussian(0.0, 1.0).unwrap(),
        ComponentDensity::gaussian(2.0, 1.0).unwrap(),
    ])
    .unwrap();
    let w = 0.35;
    // I(θ) = ∫ (p₁ − p₀)² / m, by the trapezoid rule on a wide grid.
    let (lo, hi, n) = (-30.0, 32.0, 200_000);
    let h = (hi - lo) / n as f64;
    let oracle: f64 = (0..=n)
        .map(|i| {
            let x = lo + i as f64 * h;
            let (p0, p1) = (normal_pdf(x, 0.0), normal_pdf(x, 2.0));
            let m = (1.0 - w) * p0 + w * p1;
            let weight = if i == 0 || i == n { 0.5 } else { 1.0 };
            weight * (p1 - p0).powi(2) / m
        })
        .sum::<f64>()
        * h;
    let est = fisher::fim_quadrature(&fam, &[w]).unwrap();
    assert!((est.matrix[(0, 0)] - oracle).abs() < 1e-8, "{} vs {oracle}", est.matrix[(0, 0)]);
}

#[test]
fn monte_carlo_fim_agrees_with_closed_form() {
    let fam = ExponentialFamily::Poisson;
    let lambda = 3.0f64;
    let est = fisher::fim_score_outer(&fam, &[lambda.ln()], 50_000, 21).unwrap();
    // In θ = log λ the information is λ.
    assert!((est.matrix[(0, 0)] - lambda).abs() < 4.0 * est.stderr[(0, 0)]);
}

#[test]
fn rao_distance_between_exponential_rates() {
    let fam = ExponentialFamily::Exponential;
    let (l1, l2) = (0.5f64, 4.0f64);
    let expected = (l2 / l1).ln();
    let err = |segments| (fisher::rao_distance_numeric(&fam, &[-l1], &[-l2], segments).unwrap().length - expected).abs();
    let (coarse, fine) = (err(64), err(256));
    // Second-order discretisation: four times the segments, about a
    // sixteenth of the error.
    assert!(fine < coarse / 10.0, "{coarse} then {fine}");
    assert!(fine < 1e-4 * expected, "{fine}");
}

#[test]
fn rao_distance_between_normals() {
    let fam = ExponentialFamily::Gaussian;
    let (m1, s1, m2, s2) = (0.0f64, 1.0f64, 1.0f64, 2.0f64);
    let t1 = fam.natural_from_source(&[m1, s1]).unwrap();
    let t2 = fam.natural_from_source(&[m2, s2]).unwrap();
    let path = fisher::rao_distance_numeric(&fam, &t1, &t2, 128).unwrap();
    // Scaled hyperbolic distance in (μ/√2, σ).
    let expected =
        2f64.sqrt() * (1.0 + ((m1 - m2).powi(2) / 2.0 + (s1 - s2).powi(2)) / (2.0 * s1 * s2)).acosh();
    assert!((path.length - expected).abs() < 1e-3 * expected, "{} vs {expected}", path.length);
}
