//! Central finite differences.
//!
//! Step sizes balance truncation against round-off: `max(1,|x|)·ε^{1/3}` for
//! first derivatives and `max(1,|x|)·ε^{1/4}` for second derivatives.

use nalgebra::DMatrix;

use crate::tensor::Tensor3;

pub fn gradient_step(x: f64) -> f64 {
    x.abs().max(1.0) * f64::EPSILON.cbrt()
}

pub fn hessian_step(x: f64) -> f64 {
    x.abs().max(1.0) * f64::EPSILON.sqrt().sqrt()
}

/// Central-difference gradient of a scalar field.
pub fn gradient<F>(f: F, x: &[f64]) -> Vec<f64>
where
    F: Fn(&[f64]) -> f64,
{
    gradient_capped(f, x, f64::INFINITY)
}

/// As [`gradient`], with every step capped at `cap` (half the distance to
/// the nearest domain boundary, typically).
pub fn gradient_capped<F>(f: F, x: &[f64], cap: f64) -> Vec<f64>
where
    F: Fn(&[f64]) -> f64,
{
    let mut probe = x.to_vec();
    (0..x.len())
        .map(|i| {
            let h = gradient_step(x[i]).min(cap);
            probe[i] = x[i] + h;
            let fp = f(&probe);
            probe[i] = x[i] - h;
            let fm = f(&probe);
            probe[i] = x[i];
            (fp - fm) / (2.0 * h)
        })
        .collect()
}

/// Hessian from second differences of values, symmetric by construction.
pub fn hessian<F>(f: F, x: &[f64]) -> DMatrix<f64>
where
    F: Fn(&[f64]) -> f64,
{
    hessian_capped(f, x, f64::INFINITY)
}

pub fn hessian_capped<F>(f: F, x: &[f64], cap: f64) -> DMatrix<f64>
where
    F: Fn(&[f64]) -> f64,
{
    let d = x.len();
    let mut h = DMatrix::zeros(d, d);
    let mut probe = x.to_vec();
    let f0 = f(x);
    for i in 0..d {
        let hi = hessian_step(x[i]).min(cap);
        probe[i] = x[i] + hi;
        let fp = f(&probe);
        probe[i] = x[i] - hi;
        let fm = f(&probe);
        probe[i] = x[i];
        h[(i, i)] = (fp - 2.0 * f0 + fm) / (hi * hi);
        for j in 0..i {
            let hj = hessian_step(x[j]).min(cap);
            let mut eval = |si: f64, sj: f64| {
                probe[i] = x[i] + si * hi;
                probe[j] = x[j] + sj * hj;
                let v = f(&probe);
                probe[i] = x[i];
                probe[j] = x[j];
                v
            };
            let v = (eval(1.0, 1.0) - eval(1.0, -1.0) - eval(-1.0, 1.0) + eval(-1.0, -1.0))
                / (4.0 * hi * hj);
            h[(i, j)] = v;
            h[(j, i)] = v;
        }
    }
    h
}

/// Jacobian of a vector field by central differences, symmetrised. Used for
/// Hessians when an exact gradient is available.
pub fn symmetric_jacobian<G>(g: G, x: &[f64], step: impl Fn(f64) -> f64) -> DMatrix<f64>
where
    G: Fn(&[f64]) -> Vec<f64>,
{
    let d = x.len();
    let mut jac = DMatrix::zeros(d, d);
    let mut probe = x.to_vec();
    for j in 0..d {
        let h = step(x[j]);
        probe[j] = x[j] + h;
        let gp = g(&probe);
        probe[j] = x[j] - h;
        let gm = g(&probe);
        probe[j] = x[j];
        for i in 0..d {
            jac[(i, j)] = (gp[i] - gm[i]) / (2.0 * h);
        }
    }
    (&jac + jac.transpose()) * 0.5
}

/// Fourth-order (five-point) symmetric Jacobian, for maps that are only
/// available through an inner solve.
pub fn symmetric_jacobian_5pt<G>(g: G, x: &[f64], step: impl Fn(f64) -> f64) -> DMatrix<f64>
where
    G: Fn(&[f64]) -> Vec<f64>,
{
    let d = x.len();
    let mut jac = DMatrix::zeros(d, d);
    let mut probe = x.to_vec();
    for j in 0..d {
        let h = step(x[j]);
        let mut at = |s: f64| {
            probe[j] = x[j] + s * h;
            let v = g(&probe);
            probe[j] = x[j];
            v
        };
        let (p2, p1, m1, m2) = (at(2.0), at(1.0), at(-1.0), at(-2.0));
        for i in 0..d {
            jac[(i, j)] = (-p2[i] + 8.0 * p1[i] - 8.0 * m1[i] + m2[i]) / (12.0 * h);
        }
    }
    (&jac + jac.transpose()) * 0.5
}

/// Third-derivative tensor from central differences of a Hessian field.
pub fn third_from_hessian<H>(hess: H, x: &[f64], cap: f64) -> Tensor3
where
    H: Fn(&[f64]) -> DMatrix<f64>,
{
    let d = x.len();
    let mut probe = x.to_vec();
    let mut t = Tensor3::zeros(d);
    for k in 0..d {
        let h = hessian_step(x[k]).min(cap);
        probe[k] = x[k] + h;
        let hp = hess(&probe);
        probe[k] = x[k] - h;
        let hm = hess(&probe);
        probe[k] = x[k];
        for i in 0..d {
            for j in 0..d {
                t.set(i, j, k, (hp[(i, j)] - hm[(i, j)]) / (2.0 * h));
            }
        }
    }
    t.symmetrized()
}

/// First, second and third derivatives of a scalar function at `x`.
pub fn scalar_derivatives<F>(f: F, x: f64) -> (f64, f64, f64)
where
    F: Fn(f64) -> f64,
{
    let h1 = gradient_step(x);
    let d1 = (f(x + h1) - f(x - h1)) / (2.0 * h1);
    let h2 = hessian_step(x);
    let d2 = (f(x + h2) - 2.0 * f(x) + f(x - h2)) / (h2 * h2);
    let h3 = x.abs().max(1.0) * f64::EPSILON.powf(0.2);
    let d3 = (f(x + 2.0 * h3) - 2.0 * f(x + h3) + 2.0 * f(x - h3) - f(x - 2.0 * h3))
        / (2.0 * h3 * h3 * h3);
    (d1, d2, d3)
}
