//! Fixtures shared by the benchmarks.

use std::sync::Arc;
use toric_calabi::{DelzantPolytope, PolytopeGrid, Profile, SymplecticPotential};

/// Bump-perturbed potential on a preset.
pub fn bump(preset: &str, h: f64, amplitude: f64) -> SymplecticPotential {
    let p = Arc::new(DelzantPolytope::preset(preset).expect("preset"));
    let g = Arc::new(PolytopeGrid::new(&p, h).expect("grid"));
    SymplecticPotential::from_profile(p, g, Profile::Bump { amplitude }).expect("potential")
}
