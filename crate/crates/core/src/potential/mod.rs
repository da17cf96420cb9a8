//! Symplectic potentials `u = 1/2 sum_i l_i ln l_i + f`, their Legendre duals
//! and relative Kähler potentials.
//!
//! The singular canonical part is always evaluated in closed form. The smooth
//! part `f` is stored at interior lattice nodes; it is ghost-extended over the
//! padded lattice for finite differences and, for evaluation at arbitrary
//! points, modelled by a C^2 cubic spline quasi-interpolant.

mod legendre;
pub mod snapshot;

pub use legendre::{solve_legendre, ConvexPotential, LegendrePoint, NewtonConfig};

use crate::error::{Error, Result};
use crate::polytope::{DelzantPolytope, PolytopeGrid, SplineField};
use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::sync::{Arc, OnceLock};

fn checked_distances(p: &DelzantPolytope, x: &[f64]) -> Result<Vec<f64>> {
    let ls = p.facet_distances(x);
    if let Some((i, &l)) = ls.iter().enumerate().find(|(_, &l)| !(l > 0.0)) {
        return Err(Error::NonPositiveFacetDistance {
            facet: i,
            value: l,
            point: x.to_vec(),
        });
    }
    Ok(ls)
}

/// Value, gradient and Hessian of the canonical potential `1/2 sum_i l_i ln l_i`.
pub fn canonical_eval(p: &DelzantPolytope, x: &[f64]) -> Result<(f64, DVector<f64>, DMatrix<f64>)> {
    let n = p.dim();
    let ls = checked_distances(p, x)?;
    let mut v = 0.0;
    let mut g = DVector::zeros(n);
    let mut hm = DMatrix::zeros(n, n);
    for (f, &l) in p.facets().iter().zip(&ls) {
        let nv = f.normal_f64();
        v += 0.5 * l * l.ln();
        let gl = 0.5 * (l.ln() + 1.0);
        for a in 0..n {
            g[a] += gl * nv[a];
            for b in 0..n {
                hm[(a, b)] += 0.5 * nv[a] * nv[b] / l;
            }
        }
    }
    Ok((v, g, hm))
}

pub fn canonical_value(p: &DelzantPolytope, x: &[f64]) -> Result<f64> {
    Ok(canonical_eval(p, x)?.0)
}

pub fn canonical_hessian(p: &DelzantPolytope, x: &[f64]) -> Result<DMatrix<f64>> {
    Ok(canonical_eval(p, x)?.2)
}

/// Initial perturbations of the smooth part.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "profile", rename_all = "lowercase")]
pub enum Profile {
    None,
    /// `amplitude * prod_i l_i^2`, vanishing to second order on the boundary.
    Bump {
        amplitude: f64,
    },
    /// `amplitude / 2 * |x|^2`.
    Quadratic {
        amplitude: f64,
    },
}

impl Profile {
    pub const IDS: [&'static str; 3] = ["none", "bump", "quadratic"];

    pub fn from_id(id: &str, amplitude: f64) -> Result<Self> {
        if !amplitude.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "amplitude {amplitude} is not finite"
            )));
        }
        match id {
            "none" => Ok(Profile::None),
            "bump" => Ok(Profile::Bump { amplitude }),
            "quadratic" => Ok(Profile::Quadratic { amplitude }),
            other => Err(Error::InvalidArgument(format!(
                "unknown profile '{other}' (expected one of {:?})",
                Self::IDS
            ))),
        }
    }

    pub fn id(&self) -> &'static str {
        match self {
            Profile::None => "none",
            Profile::Bump { .. } => "bump",
            Profile::Quadratic { .. } => "quadratic",
        }
    }

    pub fn amplitude(&self) -> f64 {
        match *self {
            Profile::None => 0.0,
            Profile::Bump { amplitude } | Profile::Quadratic { amplitude } => amplitude,
        }
    }

    pub fn eval(&self, p: &DelzantPolytope, x: &[f64]) -> f64 {
        match *self {
            Profile::None => 0.0,
            Profile::Bump { amplitude } => {
                amplitude * p.facet_distances(x).iter().map(|l| l * l).product::<f64>()
            }
            Profile::Quadratic { amplitude } => {
                0.5 * amplitude * x.iter().map(|v| v * v).sum::<f64>()
            }
        }
    }
}

/// `u = 1/2 sum_i l_i ln l_i + f` with `f` sampled on the grid.
#[derive(Debug, Clone)]
pub struct SymplecticPotential {
    polytope: Arc<DelzantPolytope>,
    grid: Arc<PolytopeGrid>,
    smooth: Vec<f64>,
    lattice: Vec<f64>,
    canonical_only: bool,
    spline: OnceLock<SplineField>,
}

impl SymplecticPotential {
    pub fn canonical(polytope: Arc<DelzantPolytope>, grid: Arc<PolytopeGrid>) -> Result<Self> {
        let n = grid.interior_len();
        let mut sp = Self::with_smooth(polytope, grid, vec![0.0; n])?;
        sp.canonical_only = true;
        Ok(sp)
    }

    /// Potential whose smooth part takes the given values at interior nodes
    /// (indexed by interior slot).
    pub fn with_smooth(
        polytope: Arc<DelzantPolytope>,
        grid: Arc<PolytopeGrid>,
        smooth: Vec<f64>,
    ) -> Result<Self> {
        if polytope.dim() != grid.dim() {
            return Err(Error::Misaligned(format!(
                "polytope dimension {} vs grid dimension {}",
                polytope.dim(),
                grid.dim()
            )));
        }
        if smooth.len() != grid.interior_len() {
            return Err(Error::Misaligned(format!(
                "{} smooth values for {} interior nodes",
                smooth.len(),
                grid.interior_len()
            )));
        }
        if let Some(i) = smooth.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "smooth part is not finite at slot {i}"
            )));
        }
        let lattice = extend(&grid, &smooth);
        Ok(Self {
            polytope,
            grid,
            smooth,
            lattice,
            canonical_only: false,
            spline: OnceLock::new(),
        })
    }

    pub fn from_fn(
        polytope: Arc<DelzantPolytope>,
        grid: Arc<PolytopeGrid>,
        f: impl Fn(&[f64]) -> f64,
    ) -> Result<Self> {
        let smooth = grid
            .interior()
            .iter()
            .map(|&i| f(&grid.coords(i)))
            .collect();
        Self::with_smooth(polytope, grid, smooth)
    }

    pub fn from_profile(
        polytope: Arc<DelzantPolytope>,
        grid: Arc<PolytopeGrid>,
        profile: Profile,
    ) -> Result<Self> {
        if profile == Profile::None {
            return Self::canonical(polytope, grid);
        }
        let p = polytope.clone();
        Self::from_fn(polytope, grid, move |x| profile.eval(&p, x))
    }

    pub fn polytope(&self) -> &Arc<DelzantPolytope> {
        &self.polytope
    }

    pub fn grid(&self) -> &Arc<PolytopeGrid> {
        &self.grid
    }

    /// Smooth part at interior nodes, indexed by interior slot.
    pub fn smooth(&self) -> &[f64] {
        &self.smooth
    }

    /// Smooth part on the whole padded lattice (ghost-extended).
    pub fn lattice_smooth(&self) -> &[f64] {
        &self.lattice
    }

    pub fn is_canonical_only(&self) -> bool {
        self.canonical_only
    }

    /// Same polytope and grid with a new smooth part.
    pub fn with_new_smooth(&self, smooth: Vec<f64>) -> Result<Self> {
        Self::with_smooth(self.polytope.clone(), self.grid.clone(), smooth)
    }

    fn spline(&self) -> &SplineField {
        self.spline
            .get_or_init(|| SplineField::new(&self.grid, &self.lattice))
    }

    /// Value, gradient and Hessian at an arbitrary interior point.
    pub fn eval(&self, x: &[f64]) -> Result<(f64, DVector<f64>, DMatrix<f64>)> {
        let (mut v, mut g, mut hm) = canonical_eval(&self.polytope, x)?;
        if !self.canonical_only {
            let (sv, sg, sh) = self.spline().eval(&self.grid, x);
            v += sv;
            g += sg;
            hm += sh;
        }
        Ok((v, g, hm))
    }

    pub fn value(&self, x: &[f64]) -> Result<f64> {
        Ok(self.eval(x)?.0)
    }

    pub fn gradient(&self, x: &[f64]) -> Result<DVector<f64>> {
        Ok(self.eval(x)?.1)
    }

    /// `u` at a lattice node using the stored smooth value.
    pub fn node_value(&self, idx: usize) -> Result<f64> {
        Ok(canonical_value(&self.polytope, &self.grid.coords(idx))? + self.lattice[idx])
    }

    /// Discrete Hessian at a lattice node: analytic canonical part plus the
    /// centered finite-difference Hessian of `f`. Fails when the result is not
    /// positive definite.
    pub fn hessian(&self, idx: usize) -> Result<DMatrix<f64>> {
        let x = self.grid.coords(idx);
        let mut hm = canonical_hessian(&self.polytope, &x)?;
        let fd =
            self.grid
                .fd_hessian(&self.lattice, idx)
                .ok_or_else(|| Error::StencilUnavailable {
                    node: idx,
                    reason: "node on the lattice edge".into(),
                })?;
        hm += fd;
        if hm.clone().cholesky().is_none() {
            return Err(Error::NotConvex {
                node: idx,
                point: x,
            });
        }
        Ok(hm)
    }

    /// Smallest eigenvalue of the discrete Hessian over interior nodes, with
    /// the node where it occurs.
    pub fn min_hessian_eigenvalue(&self) -> Result<(f64, usize)> {
        let mut best = (f64::INFINITY, 0);
        for &idx in self.grid.interior() {
            let x = self.grid.coords(idx);
            let mut hm = canonical_hessian(&self.polytope, &x)?;
            hm += self.grid.fd_hessian(&self.lattice, idx).ok_or_else(|| {
                Error::StencilUnavailable {
                    node: idx,
                    reason: "node on the lattice edge".into(),
                }
            })?;
            let e = hm.symmetric_eigenvalues().min();
            if e < best.0 {
                best = (e, idx);
            }
        }
        Ok(best)
    }

    /// Fails with `NotConvex` at the first interior node whose Hessian is not
    /// positive definite.
    pub fn check_convex(&self) -> Result<()> {
        for &idx in self.grid.interior() {
            self.hessian(idx)?;
        }
        Ok(())
    }

    /// `u + <a, x> + b`; the Hessian is unchanged.
    pub fn plus_affine(&self, a: &[f64], b: f64) -> Result<Self> {
        if a.len() != self.grid.dim() {
            return Err(Error::InvalidArgument(
                "affine slope has wrong dimension".into(),
            ));
        }
        let aff = |x: &[f64]| b + a.iter().zip(x).map(|(p, q)| p * q).sum::<f64>();
        let smooth = self
            .grid
            .interior()
            .iter()
            .zip(&self.smooth)
            .map(|(&i, f)| f + aff(&self.grid.coords(i)))
            .collect();
        // affine functions are reproduced exactly by the ghost extension
        let lattice = (0..self.lattice.len())
            .map(|i| self.lattice[i] + aff(&self.grid.coords(i)))
            .collect();
        Ok(Self {
            polytope: self.polytope.clone(),
            grid: self.grid.clone(),
            smooth,
            lattice,
            canonical_only: false,
            spline: OnceLock::new(),
        })
    }

    /// `u - u(x0) - <grad u(x0), x - x0>`.
    pub fn normalize_at_point(&self, x0: &[f64]) -> Result<Self> {
        if !self.polytope.contains_interior(x0) {
            return Err(Error::PointOutside(x0.to_vec()));
        }
        let (v, g, _) = self.eval(x0)?;
        let a: Vec<f64> = g.iter().map(|c| -c).collect();
        let b = -v + g.iter().zip(x0).map(|(c, x)| c * x).sum::<f64>();
        self.plus_affine(&a, b)
    }
}

impl ConvexPotential for SymplecticPotential {
    fn domain(&self) -> &DelzantPolytope {
        &self.polytope
    }

    fn evaluate(&self, x: &[f64]) -> Result<(f64, DVector<f64>, DMatrix<f64>)> {
        self.eval(x)
    }
}

/// Interior values scattered onto the lattice and ghost-extended.
fn extend(grid: &PolytopeGrid, smooth: &[f64]) -> Vec<f64> {
    let mut lattice = vec![0.0; grid.lattice_len()];
    for (&idx, &v) in grid.interior().iter().zip(smooth) {
        lattice[idx] = v;
    }
    grid.interior_fill().apply(&mut lattice);
    lattice
}

/// Points of the dual space together with starting guesses for the Newton
/// solves and the polytope-side quadrature weights they carry.
#[derive(Debug, Clone)]
pub struct XiSet {
    points: Vec<Vec<f64>>,
    seeds: Vec<Vec<f64>>,
    weights: Vec<f64>,
}

impl XiSet {
    /// `xi_k = grad u0(x_k)` over the interior nodes of the reference grid.
    pub fn from_reference(sp0: &SymplecticPotential) -> Result<Self> {
        let grid = sp0.grid();
        let seeds = grid.interior_coords();
        let points = seeds
            .iter()
            .map(|x| Ok(sp0.gradient(x)?.as_slice().to_vec()))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            points,
            seeds,
            weights: grid.weights().to_vec(),
        })
    }

    /// Midpoint rule on a sub-lattice of spacing `h / refinement`, see
    /// [`DelzantPolytope::midpoint_rule`].
    pub fn quadrature(sp0: &SymplecticPotential, refinement: usize) -> Result<Self> {
        if refinement == 0 {
            return Err(Error::InvalidArgument(
                "quadrature refinement must be positive".into(),
            ));
        }
        let (seeds, weights) = sp0
            .polytope()
            .midpoint_rule(sp0.grid().h() / refinement as f64)?;
        let points = seeds
            .iter()
            .map(|x| Ok(sp0.gradient(x)?.as_slice().to_vec()))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            points,
            seeds,
            weights,
        })
    }

    /// Arbitrary points with a common starting guess and unit weights.
    pub fn from_points(points: Vec<Vec<f64>>, seed: Vec<f64>) -> Self {
        let n = points.len();
        Self {
            points,
            seeds: vec![seed; n],
            weights: vec![1.0; n],
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn seeds(&self) -> &[Vec<f64>] {
        &self.seeds
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
}

/// Samples of the Kähler potential `psi` over a xi-set.
#[derive(Debug, Clone)]
pub struct KahlerPotentialSamples {
    pub xi: Vec<Vec<f64>>,
    pub psi: Vec<f64>,
    /// Moment images `x(xi) = grad psi(xi)`.
    pub moment: Vec<Vec<f64>>,
    /// `D^2 u` at the moment images.
    pub hessian: Vec<DMatrix<f64>>,
    pub residual: Vec<f64>,
}

impl KahlerPotentialSamples {
    pub fn len(&self) -> usize {
        self.psi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.psi.is_empty()
    }

    pub fn max_residual(&self) -> f64 {
        self.residual.iter().copied().fold(0.0, f64::max)
    }

    /// Largest violation of `psi(xi_j) >= psi(xi_i) + <x_i, xi_j - xi_i>` over
    /// all ordered pairs; zero for a convex sample set.
    pub fn supporting_plane_defect(&self) -> f64 {
        (0..self.len())
            .into_par_iter()
            .map(|i| {
                let mut worst = 0.0f64;
                for j in 0..self.len() {
                    let lin: f64 = self.moment[i]
                        .iter()
                        .zip(self.xi[j].iter().zip(&self.xi[i]))
                        .map(|(x, (a, b))| x * (a - b))
                        .sum();
                    worst = worst.max(self.psi[i] + lin - self.psi[j]);
                }
                worst
            })
            .reduce(|| 0.0, f64::max)
    }
}

/// Legendre transform of `u` over a xi-set. Each solve starts from the xi-set
/// seed and falls back to the barycenter of the polytope.
pub fn legendre_to_complex<U: ConvexPotential + ?Sized>(
    u: &U,
    xi_set: &XiSet,
    cfg: &NewtonConfig,
) -> Result<KahlerPotentialSamples> {
    let bary = u.domain().barycenter()?;
    let points: Vec<LegendrePoint> = (0..xi_set.len())
        .into_par_iter()
        .map(|k| {
            let xi = &xi_set.points[k];
            let seed = &xi_set.seeds[k];
            let first = if u.domain().contains_interior(seed) {
                solve_legendre(u, xi, seed, cfg)
            } else {
                Err(Error::PointOutside(seed.clone()))
            };
            first.or_else(|_| solve_legendre(u, xi, &bary, cfg))
        })
        .collect::<Result<_>>()?;
    let mut out = KahlerPotentialSamples {
        xi: xi_set.points.clone(),
        psi: Vec::with_capacity(points.len()),
        moment: Vec::with_capacity(points.len()),
        hessian: Vec::with_capacity(points.len()),
        residual: Vec::with_capacity(points.len()),
    };
    for p in points {
        out.psi.push(p.psi);
        out.moment.push(p.x);
        out.hessian.push(p.hessian);
        out.residual.push(p.residual);
    }
    Ok(out)
}

/// `phi = psi - psi0` over a common xi-set.
#[derive(Debug, Clone)]
pub struct RelativePotentialSamples {
    pub phi: Vec<f64>,
    pub weights: Vec<f64>,
    pub reference: KahlerPotentialSamples,
    pub current: KahlerPotentialSamples,
}

impl RelativePotentialSamples {
    pub fn from_samples(
        reference: KahlerPotentialSamples,
        current: KahlerPotentialSamples,
        weights: Vec<f64>,
    ) -> Result<Self> {
        if reference.len() != current.len() || weights.len() != reference.len() {
            return Err(Error::Misaligned(format!(
                "reference {}, current {}, weights {}",
                reference.len(),
                current.len(),
                weights.len()
            )));
        }
        if reference.xi != current.xi {
            return Err(Error::Misaligned("xi points differ".into()));
        }
        let phi = current
            .psi
            .iter()
            .zip(&reference.psi)
            .map(|(a, b)| a - b)
            .collect();
        Ok(Self {
            phi,
            weights,
            reference,
            current,
        })
    }

    pub fn len(&self) -> usize {
        self.phi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phi.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.reference.xi.first().map_or(0, Vec::len)
    }

    pub fn max_phi(&self) -> f64 {
        self.phi.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min_phi(&self) -> f64 {
        self.phi.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

pub fn relative_potential(
    sp: &SymplecticPotential,
    sp0: &SymplecticPotential,
    xi_set: &XiSet,
    cfg: &NewtonConfig,
) -> Result<RelativePotentialSamples> {
    if !Arc::ptr_eq(sp.polytope(), sp0.polytope()) && sp.polytope() != sp0.polytope() {
        return Err(Error::Misaligned(
            "potentials live on different polytopes".into(),
        ));
    }
    let reference = legendre_to_complex(sp0, xi_set, cfg)?;
    relative_to_reference(sp, reference, xi_set, cfg)
}

/// As [`relative_potential`] with precomputed reference samples.
pub fn relative_to_reference(
    sp: &SymplecticPotential,
    reference: KahlerPotentialSamples,
    xi_set: &XiSet,
    cfg: &NewtonConfig,
) -> Result<RelativePotentialSamples> {
    let current = legendre_to_complex(sp, xi_set, cfg)?;
    RelativePotentialSamples::from_samples(reference, current, xi_set.weights().to_vec())
}

/// Legendre round trip over the interior nodes: `xi = grad u(x)` is solved
/// back from the barycenter and `<xi, x> - psi(xi)` compared with `u(x)`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct RoundTrip {
    pub max_value_error: f64,
    pub max_point_error: f64,
    pub max_residual: f64,
}

pub fn fenchel_round_trip(sp: &SymplecticPotential, cfg: &NewtonConfig) -> Result<RoundTrip> {
    let bary = sp.polytope().barycenter()?;
    let nodes = sp.grid().interior_coords();
    let errs = nodes
        .par_iter()
        .map(|x| {
            let (v, g, _) = sp.eval(x)?;
            let p = solve_legendre(sp, g.as_slice(), &bary, cfg)?;
            let recovered = g.iter().zip(x).map(|(a, b)| a * b).sum::<f64>() - p.psi;
            let dx =
                p.x.iter()
                    .zip(x)
                    .map(|(a, b)| (a - b).powi(2))
                    .sum::<f64>()
                    .sqrt();
            Ok(((recovered - v).abs(), dx, p.residual))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(errs.iter().fold(
        RoundTrip {
            max_value_error: 0.0,
            max_point_error: 0.0,
            max_residual: 0.0,
        },
        |acc, &(e, d, r)| RoundTrip {
            max_value_error: acc.max_value_error.max(e),
            max_point_error: acc.max_point_error.max(d),
            max_residual: acc.max_residual.max(r),
        },
    ))
}

#[cfg(test)]
mod tests;
