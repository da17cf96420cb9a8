//! Calabi flow on toric varieties, computed in symplectic coordinates.
//!
//! A toric Kähler metric is represented by a symplectic potential
//! `u = 1/2 sum_i l_i ln l_i + f` on its Delzant polytope. The flow
//! `du/dt = Rbar - R_u` is integrated on a lattice, with the scalar
//! curvature given by Abreu's operator `R_u = -sum_ij d_i d_j u^{ij}`. The
//! complex-side quantities (relative Kähler potentials, the I/J/D
//! functionals, entropy, norms) are reconstructed through the Legendre
//! transform, and a suite of audits checks the inequalities that control
//! the flow.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod abreu;
pub mod decay;
pub mod error;
pub mod estimates;
pub mod flow;
pub mod functionals;
pub mod polytope;
pub mod potential;
pub mod report;

pub use abreu::{calabi_energy, mean_curvature, scalar_curvature, CurvatureField, MeanCurvature};
pub use decay::{fit_decay, DecayFit};
pub use error::{Error, Result};
pub use estimates::{AuditOptions, AuditResult, SnapshotAudit};
pub use flow::{FlowConfig, FlowSnapshot, FlowState, RunOutcome, Trajectory};
pub use functionals::{FunctionalReport, Measure, MeasureConvention, ReferenceFrame};
pub use polytope::{DelzantPolytope, Facet, PolytopeGrid};
pub use potential::{
    KahlerPotentialSamples, Profile, RelativePotentialSamples, SymplecticPotential, XiSet,
};
