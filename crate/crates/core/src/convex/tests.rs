use super::*;
use proptest::prelude::*;
use rand::Rng;

fn bernoulli() -> Softplus {
    Softplus { dim: 1 }
}

fn poisson() -> ExpSum {
    ExpSum { dim: 1 }
}

/// Softplus without exact derivatives, so every derivative goes through
/// finite differences.
fn bernoulli_values_only() -> FnPotential {
    FnPotential::new(Domain::whole(1), |t| builtin::softplus(t[0]))
        .with_dual_domain(Domain::unit_box(1))
}

/// sup over a dense grid of θη − F(θ) on [−30, 30].
fn grid_sup(f: impl Fn(f64) -> f64, eta: f64) -> (f64, f64) {
    let n = 600_001;
    (0..n)
        .map(|i| -30.0 + 60.0 * i as f64 / (n - 1) as f64)
        .map(|t| (t * eta - f(t), t))
        .fold((f64::NEG_INFINITY, 0.0), |best, cur| if cur.0 > best.0 { cur } else { best })
}

#[test]
fn grad_examples() {
    assert_eq!(grad(&SquaredNorm::new(2), &[1.0, 2.0]).unwrap(), vec![1.0, 2.0]);
    assert!((grad(&poisson(), &[0.0]).unwrap()[0] - 1.0).abs() < 1e-15);
    let g = grad(&bernoulli_values_only(), &[0.0]).unwrap();
    assert!((g[0] - 0.5).abs() < 1e-9);
}

#[test]
fn grad_rejects_boundary_points() {
    let f = NegEntropy { dim: 2 };
    assert!(matches!(grad(&f, &[0.0, 1.0]), Err(Error::Domain(_))));
    assert!(matches!(grad(&f, &[-1.0, 1.0]), Err(Error::Domain(_))));
    assert!(matches!(grad(&f, &[1.0]), Err(Error::Dimension { .. })));
}

#[test]
fn conjugate_examples() {
    let c = legendre_conjugate(&SquaredNorm::new(2), &[3.0, -1.0]).unwrap();
    assert!((c.value - 5.0).abs() < 1e-12);
    assert!((c.theta[0] - 3.0).abs() < 1e-12 && (c.theta[1] + 1.0).abs() < 1e-12);

    let (sup, arg) = grid_sup(builtin::softplus, 0.5);
    let c = legendre_conjugate(&bernoulli(), &[0.5]).unwrap();
    assert!((c.value - sup).abs() < 1e-8);
    assert!((c.value + std::f64::consts::LN_2).abs() < 1e-12);
    assert!((c.theta[0] - arg).abs() < 1e-4);
    assert!(c.residual <= 1e-10);

    let (sup, _) = grid_sup(f64::exp, 1.0);
    let c = legendre_conjugate(&poisson(), &[1.0]).unwrap();
    assert!((c.value - sup).abs() < 1e-8);
    assert!((c.value + 1.0).abs() < 1e-12);
    assert!(c.theta[0].abs() < 1e-10);
}

#[test]
fn conjugate_with_finite_difference_derivatives() {
    let c = legendre_conjugate(&bernoulli_values_only(), &[0.8]).unwrap();
    assert!((c.theta[0] - 4f64.ln()).abs() < 1e-6);
}

#[test]
fn conjugate_outside_gradient_range() {
    assert!(matches!(
        legendre_conjugate(&bernoulli(), &[1.5]),
        Err(Error::Domain(_))
    ));
    assert!(matches!(
        legendre_conjugate(&poisson(), &[-1.0]),
        Err(Error::Domain(_))
    ));
}

#[test]
fn crouzeix_examples() {
    assert!(crouzeix_residual(&SquaredNorm::new(3), &[0.3, -1.0, 2.0]).unwrap() < 1e-12);
    assert!(crouzeix_residual(&bernoulli(), &[0.7]).unwrap() <= 1e-5);
    assert!(crouzeix_residual(&poisson(), &[1.3]).unwrap() <= 1e-5);
}

#[test]
fn cubic_tensor_examples() {
    assert_eq!(cubic_tensor(&SquaredNorm::new(2), &[1.0, 1.0]).unwrap().max_abs(), 0.0);
    assert!((cubic_tensor(&poisson(), &[0.0]).unwrap().get(0, 0, 0) - 1.0).abs() < 1e-15);
    // Finite differences on the values-only softplus.
    let c = cubic_tensor(&bernoulli_values_only(), &[0.0]).unwrap();
    assert!(c.get(0, 0, 0).abs() < 1e-4);
    let c = cubic_tensor(&bernoulli_values_only(), &[1.0]).unwrap();
    let s = builtin::sigmoid(1.0);
    assert!((c.get(0, 0, 0) - s * (1.0 - s) * (1.0 - 2.0 * s)).abs() < 1e-3);
}

#[test]
fn exact_third_derivatives_match_differences() {
    let cases: Vec<(Box<dyn Potential>, Vec<f64>)> = vec![
        (Box::new(LogSumExp { dim: 3 }), vec![0.2, -0.4, 1.1]),
        (Box::new(GaussianCumulant), vec![0.7, -0.8]),
        (Box::new(NegLog { dim: 2 }), vec![-0.5, -2.0]),
        (Box::new(NegEntropy { dim: 2 }), vec![0.5, 2.0]),
    ];
    for (f, theta) in cases {
        let exact = f.exact_third(&theta).unwrap();
        let fd = diff::third_from_hessian(|x| f.exact_hessian(x).unwrap(), &theta, f64::INFINITY);
        assert!(exact.max_abs_diff(&fd) < 1e-6 * exact.max_abs().max(1.0), "{exact:?} vs {fd:?}");
        assert!(exact.symmetry_defect() < 1e-12);
    }
}

#[test]
fn mahalanobis_examples() {
    let q = QuadraticForm::identity(2);
    assert!((q.mahalanobis(&[3.0, 4.0], &[0.0, 0.0]).unwrap() - 5.0).abs() < 1e-15);
    let q = QuadraticForm::new(DMatrix::from_row_slice(2, 2, &[4.0, 0.0, 0.0, 1.0])).unwrap();
    assert!((q.mahalanobis(&[1.0, 0.0], &[0.0, 0.0]).unwrap() - 2.0).abs() < 1e-15);
    let q = QuadraticForm::new(DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 2.0])).unwrap();
    // (1,1)ᵀ G (1,1) = 2 + 1 + 1 + 2
    assert!((q.mahalanobis(&[1.0, 1.0], &[0.0, 0.0]).unwrap() - 6f64.sqrt()).abs() < 1e-15);
    assert!(matches!(
        q.mahalanobis(&[1.0], &[0.0, 0.0]),
        Err(Error::Dimension { .. })
    ));
}

#[test]
fn quadratic_form_validation() {
    assert!(QuadraticForm::new(DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 0.0, 1.0])).is_err());
    assert!(QuadraticForm::new(DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0])).is_err());
}

#[test]
fn mahalanobis_triangle_inequality() {
    let mut rng = crate::rng::seeded(11);
    let q = QuadraticForm::new(DMatrix::from_row_slice(
        3,
        3,
        &[2.0, 0.5, 0.1, 0.5, 1.5, -0.3, 0.1, -0.3, 1.0],
    ))
    .unwrap();
    let mut draw = || -> Vec<f64> { (0..3).map(|_| rng.random_range(-5.0..5.0)).collect() };
    for _ in 0..1000 {
        let (a, b, c) = (draw(), draw(), draw());
        let ab = q.mahalanobis(&a, &b).unwrap();
        let bc = q.mahalanobis(&b, &c).unwrap();
        let ac = q.mahalanobis(&a, &c).unwrap();
        assert!(ac <= ab + bc + 1e-12);
    }
}

#[test]
fn dual_coords_round_trip() {
    let f = LogSumExp { dim: 2 };
    let p = DualCoords::from_theta(&f, &[0.3, -1.2]).unwrap();
    let q = DualCoords::from_eta(&f, &p.eta).unwrap();
    assert!((q.theta[0] - 0.3).abs() < 1e-12 && (q.theta[1] + 1.2).abs() < 1e-12);
}

fn random_theta(name: &str, rng: &mut impl Rng) -> Vec<f64> {
    match name {
        "bernoulli" => vec![rng.random_range(-3.0..3.0)],
        "poisson" => vec![rng.random_range(-2.0..2.0)],
        "gaussian" => vec![rng.random_range(-2.0..2.0), rng.random_range(-2.0..-0.2)],
        "categorical" => vec![rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)],
        _ => unreachable!(),
    }
}

fn builtin_by_name(name: &str) -> Box<dyn Potential> {
    match name {
        "bernoulli" => Box::new(Softplus { dim: 1 }),
        "poisson" => Box::new(ExpSum { dim: 1 }),
        "gaussian" => Box::new(GaussianCumulant),
        "categorical" => Box::new(LogSumExp { dim: 2 }),
        _ => unreachable!(),
    }
}

#[test]
fn biconjugation_and_crouzeix_on_builtins() {
    let mut rng = crate::rng::seeded(7);
    for name in ["bernoulli", "poisson", "gaussian", "categorical"] {
        let f = builtin_by_name(name);
        let fstar = NumericConjugate::new(builtin_by_name(name));
        for _ in 0..20 {
            let theta = random_theta(name, &mut rng);
            let back = legendre_conjugate(&fstar, &theta).unwrap();
            assert!(
                (back.value - f.value(&theta)).abs() <= 1e-8,
                "{name}: {} vs {}",
                back.value,
                f.value(&theta)
            );
            assert!(crouzeix_residual(&f, &theta).unwrap() <= 1e-5, "{name}");
        }
    }
}

#[test]
fn analytic_gradients_match_differences() {
    let mut rng = crate::rng::seeded(5);
    for name in ["bernoulli", "poisson", "gaussian", "categorical"] {
        let f = builtin_by_name(name);
        for _ in 0..20 {
            let theta = random_theta(name, &mut rng);
            let exact = f.exact_gradient(&theta).unwrap();
            let fd = diff::gradient(|x| f.value(x), &theta);
            for (a, b) in exact.iter().zip(&fd) {
                assert!((a - b).abs() <= 1e-5 * a.abs().max(1.0));
            }
            let h = hessian(&f, &theta).unwrap();
            assert!(h.clone().symmetric_eigenvalues().min() > 0.0);
        }
    }
}

proptest! {
    #[test]
    fn builtins_are_convex(a in -3.0..3.0f64, b in -3.0..3.0f64, c in -3.0..3.0f64,
                           d in -3.0..3.0f64, t in 0.01..0.99f64) {
        let cases: Vec<(Box<dyn Potential>, Vec<f64>, Vec<f64>)> = vec![
            (Box::new(Softplus { dim: 2 }), vec![a, b], vec![c, d]),
            (Box::new(ExpSum { dim: 2 }), vec![a, b], vec![c, d]),
            (Box::new(LogSumExp { dim: 2 }), vec![a, b], vec![c, d]),
            (Box::new(NegEntropy { dim: 2 }), vec![a.exp(), b.exp()], vec![c.exp(), d.exp()]),
            (Box::new(GaussianCumulant), vec![a, -b.exp()], vec![c, -d.exp()]),
        ];
        for (f, x, y) in cases {
            let mid: Vec<f64> = x.iter().zip(&y).map(|(p, q)| t * p + (1.0 - t) * q).collect();
            let lhs = f.value(&mid);
            let rhs = t * f.value(&x) + (1.0 - t) * f.value(&y);
            prop_assert!(lhs <= rhs + 1e-12 * rhs.abs().max(1.0));
        }
    }

    #[test]
    fn cubic_tensor_is_symmetric(a in -2.0..2.0f64, b in -2.0..2.0f64, c in -2.0..2.0f64) {
        let t = cubic_tensor(&LogSumExp { dim: 3 }, &[a, b, c]).unwrap();
        prop_assert!(t.symmetry_defect() <= 1e-8);
        let g = FnPotential::new(Domain::whole(2), |x| (x[0] + 2.0 * x[1]).exp() + x[0].powi(4));
        let t = cubic_tensor(&g, &[a * 0.3, b * 0.3]).unwrap();
        prop_assert!(t.symmetry_defect() <= 1e-8);
    }
}
