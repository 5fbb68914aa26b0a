//! Damped Newton method for smooth convex objectives, optionally under
//! affine equality constraints `A x = b` (feasible start).
//!
//! The objective reports `Err(Error::Domain)` outside its open domain; the
//! backtracking line search halves the step until the trial point is inside
//! and the Armijo condition holds.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

pub trait Objective {
    fn value(&self, x: &[f64]) -> Result<f64>;
    fn gradient(&self, x: &[f64]) -> Result<Vec<f64>>;
    fn hessian(&self, x: &[f64]) -> Result<DMatrix<f64>>;
}

#[derive(Debug, Clone, Copy)]
pub struct NewtonOptions {
    pub max_iter: usize,
    /// Sup-norm bound on the (projected) gradient.
    pub tol: f64,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        Self {
            max_iter: 200,
            tol: 1e-10,
        }
    }
}

#[derive(Debug, Clone)]
pub struct NewtonOutcome {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    /// Sup-norm of the projected gradient at `x`.
    pub residual: f64,
}

struct Projector {
    // I - Aᵀ(AAᵀ)⁻¹A, or None when unconstrained.
    p: Option<DMatrix<f64>>,
    a: Option<DMatrix<f64>>,
}

impl Projector {
    fn new(a: Option<&DMatrix<f64>>) -> Result<Self> {
        match a {
            None => Ok(Self { p: None, a: None }),
            Some(a) if a.nrows() == 0 => Ok(Self { p: None, a: None }),
            Some(a) => {
                let gram = a * a.transpose();
                let inv = gram.try_inverse().ok_or_else(|| {
                    Error::Infeasible("constraint matrix is rank deficient".into())
                })?;
                let p = DMatrix::identity(a.ncols(), a.ncols()) - a.transpose() * inv * a;
                Ok(Self {
                    p: Some(p),
                    a: Some(a.clone()),
                })
            }
        }
    }

    fn residual(&self, g: &[f64]) -> f64 {
        match &self.p {
            None => sup_norm(g),
            Some(p) => {
                let pg = p * DVector::from_column_slice(g);
                pg.amax()
            }
        }
    }
}

pub(crate) fn sup_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn newton_direction(proj: &Projector, g: &[f64], h: &DMatrix<f64>) -> DVector<f64> {
    let d = g.len();
    let gv = DVector::from_column_slice(g);
    match &proj.a {
        None => match h.clone().cholesky() {
            Some(ch) => -ch.solve(&gv),
            None => h
                .clone()
                .lu()
                .solve(&(-&gv))
                .unwrap_or_else(|| -gv.clone()),
        },
        Some(a) => {
            let c = a.nrows();
            let mut kkt = DMatrix::zeros(d + c, d + c);
            kkt.view_mut((0, 0), (d, d)).copy_from(h);
            kkt.view_mut((0, d), (d, c)).copy_from(&a.transpose());
            kkt.view_mut((d, 0), (c, d)).copy_from(a);
            let mut rhs = DVector::zeros(d + c);
            rhs.rows_mut(0, d).copy_from(&(-&gv));
            match kkt.lu().solve(&rhs) {
                Some(sol) => sol.rows(0, d).into_owned(),
                None => -(proj.p.as_ref().unwrap() * gv),
            }
        }
    }
}

/// Minimises `obj` from the feasible point `x0`. With `constraint = Some(A)`
/// every iterate keeps `A x = A x0`.
pub fn minimize<O: Objective + ?Sized>(
    obj: &O,
    x0: &[f64],
    constraint: Option<&DMatrix<f64>>,
    opts: NewtonOptions,
) -> Result<NewtonOutcome> {
    let proj = Projector::new(constraint)?;
    let mut x = x0.to_vec();
    let mut fx = obj.value(&x)?;
    let mut g = obj.gradient(&x)?;
    let mut res = proj.residual(&g);
    let mut polished = 0;

    for iter in 0..opts.max_iter {
        if res <= opts.tol {
            // A couple of extra full steps take quadratic convergence down to
            // round-off; they are kept only if they help.
            if polished >= 2 || res == 0.0 {
                return Ok(NewtonOutcome {
                    x,
                    value: fx,
                    iterations: iter,
                    residual: res,
                });
            }
            polished += 1;
        }
        let h = obj.hessian(&x)?;
        let dir = newton_direction(&proj, &g, &h);
        let slope: f64 = g.iter().zip(dir.iter()).map(|(a, b)| a * b).sum();
        let mut t = 1.0;
        let mut accepted = false;
        let mut hit_domain = false;
        for _ in 0..80 {
            let trial: Vec<f64> = x.iter().zip(dir.iter()).map(|(a, b)| a + t * b).collect();
            match obj.value(&trial) {
                Err(Error::Domain(_)) | Err(Error::Convergence(_)) => hit_domain = true,
                Err(e) => return Err(e),
                Ok(ft) if ft.is_finite() => {
                    let armijo = ft <= fx + 1e-4 * t * slope.min(0.0);
                    let flat = ft <= fx + 1e-13 * fx.abs().max(1.0);
                    if armijo || flat {
                        let gt = obj.gradient(&trial)?;
                        let rt = proj.residual(&gt);
                        if armijo || rt < res {
                            x = trial;
                            fx = ft;
                            g = gt;
                            res = rt;
                            accepted = true;
                            break;
                        }
                    }
                }
                Ok(_) => hit_domain = true,
            }
            t *= 0.5;
        }
        if !accepted {
            if res <= opts.tol {
                return Ok(NewtonOutcome {
                    x,
                    value: fx,
                    iterations: iter,
                    residual: res,
                });
            }
            return Err(if hit_domain {
                Error::Domain(format!(
                    "line search collapsed at the domain boundary (residual {res:.3e})"
                ))
            } else {
                Error::Convergence(format!(
                    "line search stalled with gradient residual {res:.3e}"
                ))
            });
        }
    }
    if res <= opts.tol {
        return Ok(NewtonOutcome {
            x,
            value: fx,
            iterations: opts.max_iter,
            residual: res,
        });
    }
    Err(Error::Convergence(format!(
        "{} Newton iterations, gradient residual {res:.3e}",
        opts.max_iter
    )))
}

#[cfg(test)]
mod tests {
    use super::*;

    struct LogSumExp1 {
        target: f64,
    }

    impl Objective for LogSumExp1 {
        fn value(&self, x: &[f64]) -> Result<f64> {
            Ok((1.0 + x[0].exp()).ln() - self.target * x[0])
        }
        fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
            Ok(vec![1.0 / (1.0 + (-x[0]).exp()) - self.target])
        }
        fn hessian(&self, x: &[f64]) -> Result<DMatrix<f64>> {
            let s = 1.0 / (1.0 + (-x[0]).exp());
            Ok(DMatrix::from_element(1, 1, s * (1.0 - s)))
        }
    }

    #[test]
    fn solves_softplus_inverse() {
        let out = minimize(&LogSumExp1 { target: 0.9 }, &[0.0], None, NewtonOptions::default())
            .unwrap();
        assert!((out.x[0] - (0.9f64 / 0.1).ln()).abs() < 1e-10);
    }

    struct Quad;
    impl Objective for Quad {
        fn value(&self, x: &[f64]) -> Result<f64> {
            Ok(x.iter().map(|v| v * v).sum::<f64>() * 0.5)
        }
        fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
            Ok(x.to_vec())
        }
        fn hessian(&self, x: &[f64]) -> Result<DMatrix<f64>> {
            Ok(DMatrix::identity(x.len(), x.len()))
        }
    }

    #[test]
    fn equality_constrained_quadratic() {
        // min ½|x|² s.t. x0 + x1 = 2 -> (1, 1)
        let a = DMatrix::from_row_slice(1, 2, &[1.0, 1.0]);
        let out = minimize(&Quad, &[2.0, 0.0], Some(&a), NewtonOptions::default()).unwrap();
        assert!((out.x[0] - 1.0).abs() < 1e-12 && (out.x[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn unbounded_objective_fails_to_converge() {
        let err = minimize(&LogSumExp1 { target: 1.5 }, &[0.0], None, NewtonOptions::default())
            .unwrap_err();
        assert!(matches!(err, Error::Convergence(_) | Error::Domain(_)));
    }
}
