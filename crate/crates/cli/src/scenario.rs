//! Flat `key = value` scenario files.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use toric_calabi::{DelzantPolytope, FlowConfig, PolytopeGrid, Profile, SymplecticPotential};

pub const KEYS: [&str; 18] = [
    "name",
    "preset",
    "polytope_file",
    "profile",
    "amplitude",
    "h",
    "t_end",
    "snapshot_every",
    "cfl",
    "seed",
    "sobolev_bumps",
    "moser_p_max",
    "energy_tol",
    "max_halvings",
    "convexity_margin",
    "newton_tol",
    "newton_max_iter",
    "audits",
];

/// Snapshots per run when no cadence is given.
pub const DEFAULT_SNAPSHOTS: f64 = 10.0;

#[derive(Debug, Clone, PartialEq)]
pub enum PolytopeSource {
    Preset(String),
    File(PathBuf),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub polytope: PolytopeSource,
    pub profile: String,
    pub amplitude: f64,
    pub h: f64,
    /// `None` spreads [`DEFAULT_SNAPSHOTS`] over the run.
    pub snapshot_every: Option<f64>,
    pub flow: FlowConfig,
}

impl Default for Scenario {
    fn default() -> Self {
        Self {
            name: "run".into(),
            polytope: PolytopeSource::Preset("interval".into()),
            profile: "none".into(),
            amplitude: 0.0,
            h: 1.0 / 16.0,
            snapshot_every: None,
            flow: FlowConfig::default(),
        }
    }
}

fn number<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, String> {
    value
        .parse()
        .map_err(|_| format!("key `{key}`: `{value}` is not a valid number"))
}

/// Decimal or `p/q`.
fn real(key: &str, value: &str) -> Result<f64, String> {
    match value.split_once('/') {
        Some((p, q)) => {
            let (p, q): (f64, f64) = (number(key, p.trim())?, number(key, q.trim())?);
            Ok(p / q)
        }
        None => number(key, value),
    }
}

impl Scenario {
    /// Parse scenario text. Relative polytope paths resolve against `base`.
    pub fn parse(text: &str, base: &Path) -> Result<Self, String> {
        let mut s = Self::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                format!("line {}: expected `key = value`, got `{line}`", lineno + 1)
            })?;
            s.set(key.trim(), value.trim(), base)
                .map_err(|e| format!("line {}: {e}", lineno + 1))?;
        }
        Ok(s)
    }

    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read scenario {}: {e}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::parse(&text, base).map_err(|e| format!("{}: {e}", path.display()))
    }

    pub fn set(&mut self, key: &str, value: &str, base: &Path) -> Result<(), String> {
        match key {
            "name" => self.name = value.to_string(),
            "preset" => self.polytope = PolytopeSource::Preset(value.to_string()),
            "polytope_file" => self.polytope = PolytopeSource::File(base.join(value)),
            "profile" => self.profile = value.to_string(),
            "amplitude" => self.amplitude = real(key, value)?,
            "h" => self.h = real(key, value)?,
            "t_end" => self.flow.t_end = real(key, value)?,
            "snapshot_every" => self.snapshot_every = Some(real(key, value)?),
            "cfl" => self.flow.cfl = real(key, value)?,
            "seed" => self.flow.audit_options.sobolev_seed = number(key, value)?,
            "sobolev_bumps" => self.flow.audit_options.sobolev_bumps = number(key, value)?,
            "moser_p_max" => self.flow.audit_options.moser_p_max = real(key, value)?,
            "energy_tol" => self.flow.energy_tol = real(key, value)?,
            "max_halvings" => self.flow.max_halvings = number(key, value)?,
            "convexity_margin" => self.flow.convexity_margin = real(key, value)?,
            "newton_tol" => self.flow.newton.tol = real(key, value)?,
            "newton_max_iter" => self.flow.newton.max_iter = number(key, value)?,
            "audits" => {
                self.flow.audits = match value {
                    "true" | "on" | "yes" => true,
                    "false" | "off" | "no" => false,
                    _ => return Err(format!("key `audits`: `{value}` is not a boolean")),
                }
            }
            _ => {
                return Err(format!(
                    "unknown key `{key}` (expected one of {})",
                    KEYS.join(", ")
                ))
            }
        }
        Ok(())
    }

    /// Flow configuration with the snapshot cadence resolved.
    pub fn flow_config(&self) -> FlowConfig {
        let mut cfg = self.flow.clone();
        cfg.snapshot_every = self
            .snapshot_every
            .unwrap_or(self.flow.t_end / DEFAULT_SNAPSHOTS);
        cfg
    }

    pub fn polytope(&self) -> Result<DelzantPolytope, String> {
        match &self.polytope {
            PolytopeSource::Preset(name) => {
                DelzantPolytope::preset(name).map_err(|e| format!("key `preset`: {e}"))
            }
            PolytopeSource::File(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| {
                    format!("key `polytope_file`: cannot read {}: {e}", path.display())
                })?;
                DelzantPolytope::parse(&text)
                    .map_err(|e| format!("key `polytope_file`: {}: {e}", path.display()))
            }
        }
    }

    /// Validate every setting and build the initial potential, which must be
    /// strictly convex.
    pub fn initial_potential(&self) -> Result<SymplecticPotential, String> {
        let polytope = self.polytope()?;
        polytope
            .validate_delzant()
            .into_result()
            .map_err(|e| format!("polytope is not Delzant: {e}"))?;
        let profile = Profile::from_id(&self.profile, self.amplitude)
            .map_err(|e| format!("key `profile`: {e}"))?;
        if !(self.h > 0.0 && self.h.is_finite()) {
            return Err(format!("key `h`: {} must be positive", self.h));
        }
        if let Some(tau) = self.snapshot_every {
            if !(tau >= 0.0 && tau.is_finite()) {
                return Err(format!("key `snapshot_every`: {tau} is out of range"));
            }
        }
        self.flow_config().validate().map_err(|e| e.to_string())?;
        let polytope = Arc::new(polytope);
        let grid =
            Arc::new(PolytopeGrid::new(&polytope, self.h).map_err(|e| format!("key `h`: {e}"))?);
        let sp = SymplecticPotential::from_profile(polytope, grid, profile)
            .map_err(|e| e.to_string())?;
        sp.check_convex().map_err(|e| {
            format!("key `amplitude`: initial potential is not strictly convex ({e})")
        })?;
        Ok(sp)
    }

    /// Resolved scenario in the file format.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let cfg = self.flow_config();
        let _ = writeln!(out, "name = {}", self.name);
        match &self.polytope {
            PolytopeSource::Preset(p) => {
                let _ = writeln!(out, "preset = {p}");
            }
            PolytopeSource::File(f) => {
                let _ = writeln!(out, "polytope_file = {}", f.display());
            }
        }
        let _ = writeln!(out, "profile = {}", self.profile);
        let _ = writeln!(out, "amplitude = {:?}", self.amplitude);
        let _ = writeln!(out, "h = {:?}", self.h);
        let _ = writeln!(out, "t_end = {:?}", cfg.t_end);
        let _ = writeln!(out, "snapshot_every = {:?}", cfg.snapshot_every);
        let _ = writeln!(out, "cfl = {:?}", cfg.cfl);
        let _ = writeln!(out, "seed = {}", cfg.audit_options.sobolev_seed);
        let _ = writeln!(out, "sobolev_bumps = {}", cfg.audit_options.sobolev_bumps);
        let _ = writeln!(out, "moser_p_max = {:?}", cfg.audit_options.moser_p_max);
        let _ = writeln!(out, "energy_tol = {:?}", cfg.energy_tol);
        let _ = writeln!(out, "max_halvings = {}", cfg.max_halvings);
        let _ = writeln!(out, "convexity_margin = {:?}", cfg.convexity_margin);
        let _ = writeln!(out, "newton_tol = {:?}", cfg.newton.tol);
        let _ = writeln!(out, "newton_max_iter = {}", cfg.newton.max_iter);
        let _ = writeln!(out, "audits = {}", cfg.audits);
        out
    }
}
