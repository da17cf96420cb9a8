//! Abreu's scalar curvature `R_u = -sum_ij d_i d_j W^{ij}`, `W = (D^2 u)^{-1}`.
//!
//! `W` is computed on every node of the closed polytope. On boundary nodes the
//! canonical Hessian is singular in the directions of the active normals and
//! `W` is the limit `Q (Q^T M Q)^{-1} Q^T`, where `Q` spans the tangent space
//! of the active face and `M` collects the finite part of the Hessian. It
//! vanishes at vertices. Outside the polytope `W` is ghost-extended, after
//! which centered second differences give `R` at interior nodes.

use crate::error::{Error, Result};
use crate::polytope::{MixedStencil, NodeClass, PolytopeGrid};
use crate::potential::SymplecticPotential;
use nalgebra::DMatrix;
use serde::Serialize;

const ACTIVE_TOL: f64 = 1e-12;

/// `W` on the padded lattice, `n*n` row-major components per node.
#[derive(Debug, Clone)]
pub struct InverseHessianField {
    dim: usize,
    values: Vec<f64>,
}

impl InverseHessianField {
    pub fn at(&self, idx: usize) -> DMatrix<f64> {
        let n = self.dim;
        DMatrix::from_row_slice(n, n, &self.values[idx * n * n..(idx + 1) * n * n])
    }

    fn component(&self, idx: usize, a: usize, b: usize) -> f64 {
        self.values[idx * self.dim * self.dim + a * self.dim + b]
    }
}

/// Scalar curvature and `W` at the interior nodes, indexed by slot.
#[derive(Debug, Clone)]
pub struct CurvatureField {
    pub scalar: Vec<f64>,
    pub inverse_hessian: Vec<DMatrix<f64>>,
    /// Largest spectral norm of `W` over interior nodes.
    pub max_w_norm: f64,
}

impl CurvatureField {
    /// `int_P R dmu / mu(P)` by grid quadrature.
    pub fn mean(&self, grid: &PolytopeGrid) -> f64 {
        dot(grid.weights(), &self.scalar) / grid.volume()
    }

    /// `int_P (Rbar - R)^2 dmu` with `Rbar` from the same quadrature.
    pub fn calabi_energy(&self, grid: &PolytopeGrid) -> f64 {
        let rbar = self.mean(grid);
        grid.weights()
            .iter()
            .zip(&self.scalar)
            .map(|(w, r)| w * (rbar - r).powi(2))
            .sum()
    }

    pub fn max_deviation(&self, target: f64) -> f64 {
        self.scalar
            .iter()
            .map(|r| (r - target).abs())
            .fold(0.0, f64::max)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn symmetrize(m: &mut DMatrix<f64>) {
    let t = m.transpose();
    *m += t;
    *m *= 0.5;
}

/// `W` at one node of the closed polytope.
fn node_inverse(
    normals: &[Vec<f64>],
    grid: &PolytopeGrid,
    lattice_f: &[f64],
    idx: usize,
) -> Result<DMatrix<f64>> {
    let n = grid.dim();
    let mut finite = grid
        .fd_hessian(lattice_f, idx)
        .ok_or_else(|| Error::StencilUnavailable {
            node: idx,
            reason: "node on the lattice edge".into(),
        })?;
    let ls = grid.facet_distances(idx);
    let mut active = Vec::new();
    for (i, &l) in ls.iter().enumerate() {
        if l <= ACTIVE_TOL {
            active.push(i);
        } else {
            let nv = &normals[i];
            for a in 0..n {
                for b in 0..n {
                    finite[(a, b)] += 0.5 * nv[a] * nv[b] / l;
                }
            }
        }
    }
    let not_convex = || Error::NotConvex {
        node: idx,
        point: grid.coords(idx),
    };
    let mut w = if active.is_empty() {
        finite.cholesky().ok_or_else(not_convex)?.inverse()
    } else {
        let na = DMatrix::from_fn(active.len(), n, |r, c| normals[active[r]][c]);
        let eig = (na.transpose() * &na).symmetric_eigen();
        let tangent: Vec<usize> = (0..n).filter(|&k| eig.eigenvalues[k] < 1e-9).collect();
        if tangent.is_empty() {
            DMatrix::zeros(n, n)
        } else {
            let q = DMatrix::from_fn(n, tangent.len(), |r, c| eig.eigenvectors[(r, tangent[c])]);
            let reduced = q.transpose() * &finite * &q;
            let inv = reduced.cholesky().ok_or_else(not_convex)?.inverse();
            &q * inv * q.transpose()
        }
    };
    symmetrize(&mut w);
    Ok(w)
}

/// `W = (D^2 u)^{-1}` over the closed polytope, ghost-extended outside.
pub fn inverse_hessian_field(sp: &SymplecticPotential) -> Result<InverseHessianField> {
    let grid = sp.grid();
    let poly = sp.polytope();
    let n = grid.dim();
    let normals: Vec<Vec<f64>> = poly.facets().iter().map(|f| f.normal_f64()).collect();
    let lattice_f = sp.lattice_smooth();
    let mut values = vec![0.0; grid.lattice_len() * n * n];
    for idx in 0..grid.lattice_len() {
        if grid.class(idx) == NodeClass::Outside {
            continue;
        }
        let w = node_inverse(&normals, grid, lattice_f, idx)?;
        for a in 0..n {
            for b in 0..n {
                values[idx * n * n + a * n + b] = w[(a, b)];
            }
        }
    }
    grid.closure_fill().apply_strided(&mut values, n * n);
    Ok(InverseHessianField { dim: n, values })
}

/// Abreu's operator by centered second differences of the `W` field.
pub fn scalar_curvature(sp: &SymplecticPotential) -> Result<CurvatureField> {
    let grid = sp.grid();
    let n = grid.dim();
    let field = inverse_hessian_field(sp)?;
    let h2 = grid.h() * grid.h();
    let nb = |idx: usize, a: usize, off: isize| {
        grid.neighbor(idx, a, off)
            .ok_or_else(|| Error::StencilUnavailable {
                node: idx,
                reason: format!("missing neighbour along axis {a}"),
            })
    };
    let mut scalar = Vec::with_capacity(grid.interior_len());
    let mut inverse_hessian = Vec::with_capacity(grid.interior_len());
    let mut max_w_norm = 0.0f64;
    for &idx in grid.interior() {
        let mut r = 0.0;
        for a in 0..n {
            let (p, m) = (nb(idx, a, 1)?, nb(idx, a, -1)?);
            r -= (field.component(p, a, a) - 2.0 * field.component(idx, a, a)
                + field.component(m, a, a))
                / h2;
            for b in (a + 1)..n {
                let pp = nb(p, b, 1)?;
                let pm = nb(p, b, -1)?;
                let mp = nb(m, b, 1)?;
                let mm = nb(m, b, -1)?;
                let c = |i: usize| field.component(i, a, b);
                let axes =
                    c(p) + c(m) + nb(idx, b, 1).map(c)? + nb(idx, b, -1).map(c)? - 4.0 * c(idx);
                let d = match grid.mixed_stencil(a, b) {
                    MixedStencil::Centered => (c(pp) - c(pm) - c(mp) + c(mm)) / 4.0,
                    MixedStencil::Plus => (c(pp) - 2.0 * c(idx) + c(mm) - axes) / 2.0,
                    MixedStencil::Minus => (axes - (c(pm) - 2.0 * c(idx) + c(mp))) / 2.0,
                };
                r -= 2.0 * d / h2;
            }
        }
        if !r.is_finite() {
            return Err(Error::NotConvex {
                node: idx,
                point: grid.coords(idx),
            });
        }
        let w = field.at(idx);
        let norm = if n == 1 {
            w[(0, 0)].abs()
        } else {
            w.symmetric_eigenvalues().amax()
        };
        max_w_norm = max_w_norm.max(norm);
        scalar.push(r);
        inverse_hessian.push(w);
    }
    Ok(CurvatureField {
        scalar,
        inverse_hessian,
        max_w_norm,
    })
}

/// Mean scalar curvature by quadrature (`quadrature`) and by the boundary
/// formula `2 sigma(dP) / mu(P)` (`boundary`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeanCurvature {
    pub quadrature: f64,
    pub boundary: f64,
}

impl MeanCurvature {
    pub fn relative_gap(&self) -> f64 {
        (self.quadrature - self.boundary).abs() / self.boundary.abs()
    }
}

pub fn mean_curvature(sp: &SymplecticPotential, field: &CurvatureField) -> Result<MeanCurvature> {
    let poly = sp.polytope();
    let sigma = poly.boundary_measure()?.total;
    let mu = poly.volume()?;
    if field.scalar.len() != sp.grid().interior_len() {
        return Err(Error::Misaligned(
            "curvature field does not match the grid".into(),
        ));
    }
    Ok(MeanCurvature {
        quadrature: field.mean(sp.grid()),
        boundary: 2.0 * sigma / mu,
    })
}

/// `int_P (Rbar - R_u)^2 dmu`.
pub fn calabi_energy(sp: &SymplecticPotential) -> Result<f64> {
    Ok(scalar_curvature(sp)?.calabi_energy(sp.grid()))
}
