//! Aubin's functionals `I`, `J`, `D`, the entropy, weighted norms and the
//! toric distance.
//!
//! Integrals over `X` are pulled back to the polytope through the reference
//! moment map: sample `k` sits at `xi_k = grad u0(x_k)` and carries the
//! measure `kappa * w_k` for `omega^n` and `kappa * w_k * rho_k` for
//! `omega_phi^n`, where `rho_k = det D^2 u0(x_k) / det D^2 u(x*_k)`.
//!
//! The mixed terms `int i dphi ^ dbar phi ^ omega^i ^ omega_phi^(n-1-i)`
//! are evaluated exactly as mixed discriminants `D(v v^T, A^i, B^(n-1-i))`
//! of `v = grad_xi phi = x* - x`, `A = W0(x)` and `B = W(x*)`, read off from
//! the polynomial `v^T adj(s A + B) v`.

use crate::error::{Error, Result};
use crate::potential::{
    legendre_to_complex, relative_to_reference, KahlerPotentialSamples, NewtonConfig,
    RelativePotentialSamples, SymplecticPotential, XiSet,
};
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

/// Largest accepted `|kappa - 1|`.
pub const CALIBRATION_TOL: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Measure {
    /// `omega^n` of the reference metric.
    Reference,
    /// `omega_phi^n` of the current metric.
    Current,
    /// Lebesgue measure on the polytope.
    Lebesgue,
}

/// `int_X G(m) omega^n = kappa int_P G dmu` for the reference metric.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeasureConvention {
    pub kappa: f64,
    /// `|kappa - 1|`.
    pub residual: f64,
    /// `mu(P)`.
    pub polytope_volume: f64,
}

impl MeasureConvention {
    /// A convention with a prescribed `kappa`.
    pub fn fixed(kappa: f64, polytope_volume: f64) -> Self {
        Self {
            kappa,
            residual: (kappa - 1.0).abs(),
            polytope_volume,
        }
    }

    pub fn is_calibrated(&self) -> bool {
        self.residual <= CALIBRATION_TOL
    }

    /// `Vol_omega(X) = kappa mu(P)`.
    pub fn x_volume(&self) -> f64 {
        self.kappa * self.polytope_volume
    }
}

/// `kappa = int det D^2 psi0 dxi / mu(P)`, with the xi-integral taken over the
/// image of the interior nodes using a finite-difference Jacobian of
/// `x -> grad u0(x)`.
pub fn calibrate_kappa(sp0: &SymplecticPotential) -> Result<MeasureConvention> {
    let grid = sp0.grid();
    let n = grid.dim();
    let nodes = grid.interior_coords();
    let evals = nodes
        .iter()
        .map(|x| sp0.eval(x))
        .collect::<Result<Vec<_>>>()?;
    let rows = (0..n)
        .map(|a| grid.interior_gradients(&evals.iter().map(|(_, g, _)| g[a]).collect::<Vec<_>>()))
        .collect::<Result<Vec<_>>>()?;
    let mut integral = 0.0;
    for (slot, (_, _, hess)) in evals.iter().enumerate() {
        let det_h = hess.determinant();
        if !(det_h > 0.0) {
            return Err(Error::NotConvex {
                node: grid.interior()[slot],
                point: nodes[slot].clone(),
            });
        }
        let jac = DMatrix::from_fn(n, n, |a, b| rows[a][slot][b]);
        integral += grid.weights()[slot] * jac.determinant().abs() / det_h;
    }
    let volume = sp0.polytope().volume()?;
    let kappa = integral / volume;
    if !(kappa > 0.0 && kappa.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "calibrated kappa {kappa} is not positive"
        )));
    }
    Ok(MeasureConvention {
        kappa,
        residual: (kappa - 1.0).abs(),
        polytope_volume: volume,
    })
}

/// Sub-lattice refinement of the quadrature xi-set by dimension.
pub fn default_refinement(dim: usize) -> usize {
    match dim {
        1 => 8,
        2 => 4,
        _ => 2,
    }
}

/// Reference potential with its xi-sets, dual samples and calibration.
///
/// `xi_set` holds the images of the interior grid nodes and serves
/// node-based estimates; `quadrature` is a refined midpoint rule used for
/// every integral functional.
#[derive(Debug, Clone)]
pub struct ReferenceFrame {
    pub initial: SymplecticPotential,
    pub xi_set: XiSet,
    pub reference: KahlerPotentialSamples,
    pub quadrature: XiSet,
    pub quadrature_reference: KahlerPotentialSamples,
    pub convention: MeasureConvention,
    pub newton: NewtonConfig,
}

impl ReferenceFrame {
    pub fn new(initial: SymplecticPotential, newton: NewtonConfig) -> Result<Self> {
        let r = default_refinement(initial.grid().dim());
        Self::with_refinement(initial, newton, r)
    }

    pub fn with_refinement(
        initial: SymplecticPotential,
        newton: NewtonConfig,
        refinement: usize,
    ) -> Result<Self> {
        let xi_set = XiSet::from_reference(&initial)?;
        let reference = legendre_to_complex(&initial, &xi_set, &newton)?;
        let quadrature = XiSet::quadrature(&initial, refinement)?;
        let quadrature_reference = legendre_to_complex(&initial, &quadrature, &newton)?;
        let convention = calibrate_kappa(&initial)?;
        Ok(Self {
            initial,
            xi_set,
            reference,
            quadrature,
            quadrature_reference,
            convention,
            newton,
        })
    }

    /// `phi` of a potential relative to the reference at the node samples.
    pub fn relative(&self, sp: &SymplecticPotential) -> Result<RelativePotentialSamples> {
        relative_to_reference(sp, self.reference.clone(), &self.xi_set, &self.newton)
    }

    /// `phi` at the quadrature samples.
    pub fn relative_quadrature(
        &self,
        sp: &SymplecticPotential,
    ) -> Result<RelativePotentialSamples> {
        relative_to_reference(
            sp,
            self.quadrature_reference.clone(),
            &self.quadrature,
            &self.newton,
        )
    }
}

/// Per-sample geometry derived from a relative potential.
#[derive(Debug, Clone)]
pub struct SampleGeometry {
    /// `kappa * w_k`: the `omega^n` weight.
    pub base: Vec<f64>,
    /// `omega_phi^n / omega^n`.
    pub rho: Vec<f64>,
    /// `grad_xi phi = x* - x`.
    pub v: Vec<DVector<f64>>,
    /// `det D^2 u0(x)`.
    pub det_h0: Vec<f64>,
    /// `W0(x)`.
    pub w0: Vec<DMatrix<f64>>,
    /// `W(x*)`.
    pub w: Vec<DMatrix<f64>>,
    /// `D^2 u(x*)`.
    pub h: Vec<DMatrix<f64>>,
}

impl SampleGeometry {
    pub fn new(rel: &RelativePotentialSamples, conv: &MeasureConvention) -> Result<Self> {
        let m = rel.len();
        let mut g = SampleGeometry {
            base: Vec::with_capacity(m),
            rho: Vec::with_capacity(m),
            v: Vec::with_capacity(m),
            det_h0: Vec::with_capacity(m),
            w0: Vec::with_capacity(m),
            w: Vec::with_capacity(m),
            h: Vec::with_capacity(m),
        };
        for k in 0..m {
            let h0 = &rel.reference.hessian[k];
            let h = &rel.current.hessian[k];
            let not_convex = |pt: &Vec<f64>| Error::NotConvex {
                node: k,
                point: pt.clone(),
            };
            let w0 = h0
                .clone()
                .cholesky()
                .ok_or_else(|| not_convex(&rel.reference.moment[k]))?
                .inverse();
            let w = h
                .clone()
                .cholesky()
                .ok_or_else(|| not_convex(&rel.current.moment[k]))?
                .inverse();
            let d0 = h0.determinant();
            let d = h.determinant();
            g.base.push(conv.kappa * rel.weights[k]);
            g.rho.push(d0 / d);
            g.v.push(DVector::from_fn(h0.nrows(), |a, _| {
                rel.current.moment[k][a] - rel.reference.moment[k][a]
            }));
            g.det_h0.push(d0);
            g.w0.push(w0);
            g.w.push(w);
            g.h.push(h.clone());
        }
        Ok(g)
    }

    pub fn len(&self) -> usize {
        self.base.len()
    }

    pub fn is_empty(&self) -> bool {
        self.base.is_empty()
    }

    /// Quadrature weights of a measure on `X` (or on `P` for `Lebesgue`,
    /// where `kappa` is dropped).
    pub fn weights(&self, measure: Measure, kappa: f64) -> Vec<f64> {
        match measure {
            Measure::Reference => self.base.clone(),
            Measure::Current => self
                .base
                .iter()
                .zip(&self.rho)
                .map(|(b, r)| b * r)
                .collect(),
            Measure::Lebesgue => self.base.iter().map(|b| b / kappa).collect(),
        }
    }

    /// `int i dphi ^ dbar phi ^ omega^i ^ omega_phi^(n-1-i)` for `i = 0..n`.
    pub fn mixed_terms(&self) -> Vec<f64> {
        let n = self.v.first().map_or(0, |v| v.len());
        let mut terms = vec![0.0; n];
        for k in 0..self.len() {
            let d = mixed_discriminants(&self.v[k], &self.w0[k], &self.w[k]);
            for (t, di) in terms.iter_mut().zip(d) {
                *t += self.base[k] * self.det_h0[k] * di;
            }
        }
        terms
    }

    /// `|grad g|^2_phi` at each sample for a gradient given in xi coordinates.
    pub fn current_gradient_norm(&self, k: usize, grad_xi: &DVector<f64>) -> f64 {
        let n = grad_xi.len() as f64;
        grad_xi.dot(&(&self.h[k] * grad_xi)) / n
    }
}

/// `D(v v^T, A^i, B^(n-1-i))` for `i = 0..n`, normalised so that
/// `D(M, ..., M) = det M`.
pub fn mixed_discriminants(v: &DVector<f64>, a: &DMatrix<f64>, b: &DMatrix<f64>) -> Vec<f64> {
    let n = v.len();
    // g(s) = v^T adj(s A + B) v = sum_i c_i s^i = n sum_i C(n-1, i) D_i s^i
    let g = |s: f64| {
        let m = a * s + b;
        v.dot(&(adjugate(&m) * v))
    };
    let c: Vec<f64> = if n == 1 {
        vec![v[0] * v[0]]
    } else {
        let vander = DMatrix::from_fn(n, n, |r, col| (r as f64).powi(col as i32));
        let rhs = DVector::from_fn(n, |r, _| g(r as f64));
        let sol = vander
            .lu()
            .solve(&rhs)
            .expect("Vandermonde nodes are distinct");
        sol.iter().copied().collect()
    };
    (0..n)
        .map(|i| c[i] / (n as f64 * binomial(n - 1, i)))
        .collect()
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, j| acc * (n - j) as f64 / (j + 1) as f64)
}

/// Classical adjoint by cofactors.
pub fn adjugate(m: &DMatrix<f64>) -> DMatrix<f64> {
    let n = m.nrows();
    if n == 1 {
        return DMatrix::from_element(1, 1, 1.0);
    }
    DMatrix::from_fn(n, n, |r, c| {
        let minor = m.clone().remove_row(c).remove_column(r);
        let sign = if (r + c) % 2 == 0 { 1.0 } else { -1.0 };
        sign * minor.determinant()
    })
}

/// Both sides of `I(phi) = int phi (omega^n - omega_phi^n) = sum of mixed terms`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IValues {
    pub direct: f64,
    pub gradient: f64,
}

pub fn functional_i(rel: &RelativePotentialSamples, conv: &MeasureConvention) -> Result<IValues> {
    let geo = SampleGeometry::new(rel, conv)?;
    Ok(i_from(&geo, &rel.phi))
}

fn i_from(geo: &SampleGeometry, phi: &[f64]) -> IValues {
    let direct = (0..geo.len())
        .map(|k| geo.base[k] * phi[k] * (1.0 - geo.rho[k]))
        .sum();
    IValues {
        direct,
        gradient: geo.mixed_terms().iter().sum(),
    }
}

fn j_from(terms: &[f64]) -> f64 {
    let n = terms.len() as f64;
    terms
        .iter()
        .enumerate()
        .map(|(i, t)| (i as f64 + 1.0) / (n + 1.0) * t)
        .sum()
}

pub fn functional_j(rel: &RelativePotentialSamples, conv: &MeasureConvention) -> Result<f64> {
    Ok(j_from(&SampleGeometry::new(rel, conv)?.mixed_terms()))
}

/// `D(phi) = int phi omega^n - J(phi)`.
pub fn functional_d(rel: &RelativePotentialSamples, conv: &MeasureConvention) -> Result<f64> {
    let geo = SampleGeometry::new(rel, conv)?;
    Ok(integrate(&rel.phi, &geo.base) - j_from(&geo.mixed_terms()))
}

/// `int log(omega_phi^n / omega^n) omega_phi^n`.
pub fn entropy(rel: &RelativePotentialSamples, conv: &MeasureConvention) -> Result<f64> {
    let geo = SampleGeometry::new(rel, conv)?;
    entropy_from(&geo)
}

fn entropy_from(geo: &SampleGeometry) -> Result<f64> {
    if let Some(k) = geo.rho.iter().position(|r| !(*r > 0.0)) {
        return Err(Error::InvalidArgument(format!(
            "non-positive volume ratio at sample {k}"
        )));
    }
    // rho ln rho - rho + 1 integrates to the same value since both volume forms
    // have equal mass; the pointwise form is insensitive to the quadrature's mass defect
    Ok((0..geo.len())
        .map(|k| {
            let r = geo.rho[k];
            geo.base[k] * (r * r.ln() - r + 1.0)
        })
        .sum())
}

pub fn integrate(values: &[f64], weights: &[f64]) -> f64 {
    values.iter().zip(weights).map(|(v, w)| v * w).sum()
}

/// `(int |f|^p dm)^(1/p)`, optionally with the measure normalised to unit
/// mass; `p = inf` gives the max of `|f|`.
pub fn lp_norm(values: &[f64], weights: &[f64], p: f64, normalized: bool) -> Result<f64> {
    if !(p >= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "L^p norm needs p >= 1, got {p}"
        )));
    }
    if values.len() != weights.len() {
        return Err(Error::Misaligned(format!(
            "{} values, {} weights",
            values.len(),
            weights.len()
        )));
    }
    let max = values.iter().map(|v| v.abs()).fold(0.0, f64::max);
    if p.is_infinite() || max == 0.0 {
        return Ok(max);
    }
    let mass: f64 = if normalized {
        weights.iter().sum()
    } else {
        1.0
    };
    let s: f64 = values
        .iter()
        .zip(weights)
        .map(|(v, w)| w * (v.abs() / max).powf(p))
        .sum();
    Ok(max * (s / mass).powf(1.0 / p))
}

/// `sqrt(kappa) * ||u0 - u1||_{L^2(P, dmu)}`.
pub fn toric_distance(
    u0: &SymplecticPotential,
    u1: &SymplecticPotential,
    conv: &MeasureConvention,
) -> Result<f64> {
    if u0.smooth().len() != u1.smooth().len() || u0.grid().h() != u1.grid().h() {
        return Err(Error::Misaligned(
            "potentials live on different grids".into(),
        ));
    }
    let diff: Vec<f64> = u0
        .smooth()
        .iter()
        .zip(u1.smooth())
        .map(|(a, b)| a - b)
        .collect();
    Ok(conv.kappa.sqrt() * lp_norm(&diff, u0.grid().weights(), 2.0, false)?)
}

/// Monitored functionals of one snapshot.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FunctionalReport {
    pub t: f64,
    pub kappa: f64,
    pub i_direct: f64,
    pub i_gradient: f64,
    /// `int i dphi ^ dbar phi ^ omega^i ^ omega_phi^(n-1-i)`.
    pub mixed_terms: Vec<f64>,
    pub j: f64,
    pub d: f64,
    pub entropy: f64,
    pub calabi_energy: f64,
    pub rbar_quadrature: f64,
    pub rbar_boundary: f64,
    pub max_phi: f64,
    pub min_phi: f64,
    pub min_u: f64,
    pub l2_u: f64,
    pub l1_phi_omega: f64,
    pub l1_phi_omega_phi: f64,
    pub distance_to_initial: f64,
    /// `(p, ||phi||_{L^p(omega)}, ||phi||_{L^p(omega_phi)})`, unnormalised.
    pub lp_table: Vec<(f64, f64, f64)>,
}

/// Exponents reported in the `L^p` table.
pub const LP_EXPONENTS: [f64; 5] = [1.0, 2.0, 4.0, 8.0, f64::INFINITY];

impl FunctionalReport {
    /// Complex-side functionals of `sp` relative to the frame. Curvature
    /// quantities are supplied by the caller.
    pub fn compute(
        t: f64,
        frame: &ReferenceFrame,
        sp: &SymplecticPotential,
        rel: &RelativePotentialSamples,
        geo: &SampleGeometry,
        calabi_energy: f64,
        rbar: (f64, f64),
    ) -> Result<Self> {
        let conv = &frame.convention;
        let i = i_from(geo, &rel.phi);
        let terms = geo.mixed_terms();
        let j = j_from(&terms);
        let w_ref = geo.weights(Measure::Reference, conv.kappa);
        let w_cur = geo.weights(Measure::Current, conv.kappa);
        let grid = sp.grid();
        let u_nodes = grid
            .interior()
            .iter()
            .map(|&idx| sp.node_value(idx))
            .collect::<Result<Vec<f64>>>()?;
        let lp_table = LP_EXPONENTS
            .iter()
            .map(|&p| {
                Ok((
                    p,
                    lp_norm(&rel.phi, &w_ref, p, false)?,
                    lp_norm(&rel.phi, &w_cur, p, false)?,
                ))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            t,
            kappa: conv.kappa,
            i_direct: i.direct,
            i_gradient: i.gradient,
            mixed_terms: terms,
            j,
            d: integrate(&rel.phi, &w_ref) - j,
            entropy: entropy_from(geo)?,
            calabi_energy,
            rbar_quadrature: rbar.0,
            rbar_boundary: rbar.1,
            max_phi: rel.max_phi(),
            min_phi: rel.min_phi(),
            min_u: u_nodes.iter().copied().fold(f64::INFINITY, f64::min),
            l2_u: lp_norm(&u_nodes, grid.weights(), 2.0, false)?,
            l1_phi_omega: lp_norm(&rel.phi, &w_ref, 1.0, false)?,
            l1_phi_omega_phi: lp_norm(&rel.phi, &w_cur, 1.0, false)?,
            distance_to_initial: toric_distance(&frame.initial, sp, conv)?,
            lp_table,
        })
    }
}
