//! Damped Newton solver for the Legendre transform of a convex potential on
//! the interior of a polytope.

use crate::error::{Error, Result};
use crate::polytope::DelzantPolytope;
use nalgebra::{DMatrix, DVector};

/// A strictly convex function on the interior of a polytope.
pub trait ConvexPotential: Sync {
    fn domain(&self) -> &DelzantPolytope;

    /// Value, gradient and Hessian at an interior point.
    fn evaluate(&self, x: &[f64]) -> Result<(f64, DVector<f64>, DMatrix<f64>)>;
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct NewtonConfig {
    /// Tolerance on `|grad u(x) - xi|`.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for NewtonConfig {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 50,
        }
    }
}

/// Maximiser `x*` of `<xi, x> - u(x)` and the dual value `psi(xi)`.
#[derive(Debug, Clone)]
pub struct LegendrePoint {
    pub x: Vec<f64>,
    pub psi: f64,
    /// Hessian of `u` at `x*`.
    pub hessian: DMatrix<f64>,
    pub residual: f64,
    pub iterations: usize,
}

/// Solve `grad u(x) = xi` starting from the interior point `start`.
pub fn solve_legendre<U: ConvexPotential + ?Sized>(
    u: &U,
    xi: &[f64],
    start: &[f64],
    cfg: &NewtonConfig,
) -> Result<LegendrePoint> {
    let poly = u.domain();
    let n = poly.dim();
    if xi.len() != n || start.len() != n {
        return Err(Error::InvalidArgument(format!(
            "dimension mismatch: xi {}, start {}, polytope {n}",
            xi.len(),
            start.len()
        )));
    }
    if !poly.contains_interior(start) {
        return Err(Error::PointOutside(start.to_vec()));
    }
    let xi_v = DVector::from_column_slice(xi);
    let objective = |val: f64, x: &DVector<f64>| val - xi_v.dot(x);

    let mut x = DVector::from_column_slice(start);
    let (mut val, grad, mut hess) = u.evaluate(x.as_slice())?;
    let mut r = &grad - &xi_v;
    let mut rnorm = r.norm();
    let mut iterations = 0;
    while rnorm > cfg.tol {
        if iterations == cfg.max_iter {
            return Err(Error::NewtonFailed {
                xi: xi.to_vec(),
                residual: rnorm,
                iterations,
            });
        }
        iterations += 1;
        let dir = match hess.clone().cholesky() {
            Some(ch) => -ch.solve(&r),
            None => -r.clone(),
        };

        // keep every l_i positive
        let mut s_max = f64::INFINITY;
        for f in poly.facets() {
            let nd: f64 = f
                .normal
                .iter()
                .zip(dir.iter())
                .map(|(&a, &d)| a as f64 * d)
                .sum();
            if nd < 0.0 {
                s_max = s_max.min(-f.eval(x.as_slice()) / nd);
            }
        }
        let mut s = if s_max.is_finite() {
            (0.99 * s_max).min(1.0)
        } else {
            1.0
        };

        let f0 = objective(val, &x);
        let slope = r.dot(&dir);
        // near round-off the objective cannot resolve progress; test the residual instead
        let by_residual = slope.abs() < 1e-12 * (1.0 + f0.abs());
        let mut accepted = None;
        while s > 1e-14 {
            let cand = &x + &dir * s;
            if poly.min_facet_distance(cand.as_slice()) > 0.0 {
                if let Ok((cv, cg, ch)) = u.evaluate(cand.as_slice()) {
                    let cr = &cg - &xi_v;
                    let ok = if by_residual {
                        cr.norm() < rnorm
                    } else {
                        objective(cv, &cand) <= f0 + 1e-4 * s * slope
                    };
                    if ok {
                        accepted = Some((cand, cv, ch, cr));
                        break;
                    }
                }
            }
            s *= 0.5;
        }
        match accepted {
            Some((cx, cv, ch, cr)) => {
                x = cx;
                val = cv;
                hess = ch;
                r = cr;
                rnorm = r.norm();
            }
            None => {
                return Err(Error::NewtonFailed {
                    xi: xi.to_vec(),
                    residual: rnorm,
                    iterations,
                })
            }
        }
    }
    Ok(LegendrePoint {
        psi: xi_v.dot(&x) - val,
        x: x.as_slice().to_vec(),
        hessian: hess,
        residual: rnorm,
        iterations,
    })
}
