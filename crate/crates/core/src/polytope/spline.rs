//! Tensor-product cubic B-spline quasi-interpolant of a lattice field.
//!
//! Coefficients are `c_j = (-f_{j-1} + 8 f_j - f_{j+1}) / 6` applied along
//! each axis in turn; the resulting spline is C^2 and reproduces cubic
//! polynomials exactly.

use super::PolytopeGrid;
use nalgebra::{DMatrix, DVector};

#[derive(Debug, Clone)]
pub struct SplineField {
    coeffs: Vec<f64>,
}

impl SplineField {
    /// `values` must be defined on the whole padded lattice.
    pub fn new(grid: &PolytopeGrid, values: &[f64]) -> Self {
        let mut coeffs = values.to_vec();
        let mut next = coeffs.clone();
        for axis in 0..grid.dim() {
            for idx in 0..coeffs.len() {
                next[idx] = match (grid.neighbor(idx, axis, -1), grid.neighbor(idx, axis, 1)) {
                    (Some(m), Some(p)) => (-coeffs[m] + 8.0 * coeffs[idx] - coeffs[p]) / 6.0,
                    _ => coeffs[idx],
                };
            }
            std::mem::swap(&mut coeffs, &mut next);
        }
        Self { coeffs }
    }

    /// Node weights `w_k = sum_q omega_q S[e_k](x_q)`, where `S[e_k]` is the
    /// spline of the ghost extension of the `k`-th interior unit vector and
    /// `(x_q, omega_q)` is a quadrature rule on `P`.
    pub fn integration_weights(
        grid: &PolytopeGrid,
        points: &[Vec<f64>],
        weights: &[f64],
    ) -> Vec<f64> {
        let n = grid.dim();
        let mut g = vec![0.0; grid.lattice_len()];
        let mut offs = vec![0usize; n];
        for (x, w) in points.iter().zip(weights) {
            let (base, b) = basis_values(grid, x);
            for combo in 0..4usize.pow(n as u32) {
                let mut rem = combo;
                let mut idx = 0;
                let mut prod = *w;
                for a in 0..n {
                    offs[a] = rem % 4;
                    rem /= 4;
                    idx += (base[a] + offs[a]) * grid_stride(grid, a);
                    prod *= b[a][offs[a]];
                }
                g[idx] += prod;
            }
        }
        // adjoint of the per-axis coefficient filter, axes in reverse order
        for axis in (0..n).rev() {
            let mut prev = vec![0.0; g.len()];
            for idx in 0..g.len() {
                match (grid.neighbor(idx, axis, -1), grid.neighbor(idx, axis, 1)) {
                    (Some(m), Some(p)) => {
                        prev[idx] += 8.0 / 6.0 * g[idx];
                        prev[m] -= g[idx] / 6.0;
                        prev[p] -= g[idx] / 6.0;
                    }
                    _ => prev[idx] += g[idx],
                }
            }
            g = prev;
        }
        grid.interior_fill().apply_adjoint(&mut g);
        grid.interior().iter().map(|&i| g[i]).collect()
    }

    /// Value, gradient and Hessian at `x`.
    pub fn eval(&self, grid: &PolytopeGrid, x: &[f64]) -> (f64, DVector<f64>, DMatrix<f64>) {
        let n = grid.dim();
        let h = grid.h();
        let shape = grid.shape();
        let origin = grid.origin();
        // per-axis: base index and basis values / first / second derivatives
        let mut base = vec![0usize; n];
        let mut b = vec![[0.0; 4]; n];
        let mut db = vec![[0.0; 4]; n];
        let mut ddb = vec![[0.0; 4]; n];
        for a in 0..n {
            let s = (x[a] - origin[a]) / h;
            let k = s.floor().clamp(1.0, (shape[a] - 3) as f64);
            let t = s - k;
            base[a] = k as usize - 1;
            let u = 1.0 - t;
            b[a] = [
                u * u * u / 6.0,
                (3.0 * t * t * t - 6.0 * t * t + 4.0) / 6.0,
                (-3.0 * t * t * t + 3.0 * t * t + 3.0 * t + 1.0) / 6.0,
                t * t * t / 6.0,
            ];
            db[a] = [
                -u * u / 2.0 / h,
                (3.0 * t * t - 4.0 * t) / 2.0 / h,
                (-3.0 * t * t + 2.0 * t + 1.0) / 2.0 / h,
                t * t / 2.0 / h,
            ];
            ddb[a] = [
                u / (h * h),
                (3.0 * t - 2.0) / (h * h),
                (1.0 - 3.0 * t) / (h * h),
                t / (h * h),
            ];
        }
        let mut strides = vec![1usize; n];
        for a in (0..n.saturating_sub(1)).rev() {
            strides[a] = strides[a + 1] * shape[a + 1];
        }

        let mut value = 0.0;
        let mut grad = DVector::zeros(n);
        let mut hess = DMatrix::zeros(n, n);
        let mut offs = vec![0usize; n];
        for combo in 0..4usize.pow(n as u32) {
            let mut rem = combo;
            let mut idx = 0;
            for a in 0..n {
                offs[a] = rem % 4;
                rem /= 4;
                idx += (base[a] + offs[a]) * strides[a];
            }
            let c = self.coeffs[idx];
            let prod: f64 = (0..n).map(|a| b[a][offs[a]]).product();
            value += c * prod;
            for a in 0..n {
                let mut g = db[a][offs[a]];
                for o in (0..n).filter(|&o| o != a) {
                    g *= b[o][offs[o]];
                }
                grad[a] += c * g;
                for bb in a..n {
                    let mut hv = if a == bb {
                        ddb[a][offs[a]]
                    } else {
                        db[a][offs[a]] * db[bb][offs[bb]]
                    };
                    for o in (0..n).filter(|&o| o != a && o != bb) {
                        hv *= b[o][offs[o]];
                    }
                    hess[(a, bb)] += c * hv;
                }
            }
        }
        for a in 0..n {
            for bb in 0..a {
                hess[(a, bb)] = hess[(bb, a)];
            }
        }
        (value, grad, hess)
    }
}

fn grid_stride(grid: &PolytopeGrid, axis: usize) -> usize {
    grid.shape()[axis + 1..].iter().product()
}

fn basis_values(grid: &PolytopeGrid, x: &[f64]) -> (Vec<usize>, Vec<[f64; 4]>) {
    let (h, shape, origin) = (grid.h(), grid.shape(), grid.origin());
    (0..grid.dim())
        .map(|a| {
            let s = (x[a] - origin[a]) / h;
            let k = s.floor().clamp(1.0, (shape[a] - 3) as f64);
            let t = s - k;
            let u = 1.0 - t;
            let b = [
                u * u * u / 6.0,
                (3.0 * t * t * t - 6.0 * t * t + 4.0) / 6.0,
                (-3.0 * t * t * t + 3.0 * t * t + 3.0 * t + 1.0) / 6.0,
                t * t * t / 6.0,
            ];
            (k as usize - 1, b)
        })
        .unzip()
}
