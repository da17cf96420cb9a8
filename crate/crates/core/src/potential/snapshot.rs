//! Plain-text snapshot files.
//!
//! ```text
//! # toric-calabi snapshot v1
//! t=0.0005
//! h=0.03125
//! dim=1
//! facet=1 0
//! facet=-1 1
//! bbox_min=0
//! bbox_max=1
//! nodes=31
//! seed=7
//! newton_tol=0.0000000001
//! x0,f
//! 0.03125,0.0000088
//! ...
//! ```
//!
//! Header lines are `key=value`; `facet` repeats once per facet in the
//! polytope text format. The data block lists every interior node in slot
//! order with its coordinates and smooth-part value `f`.

use super::SymplecticPotential;
use crate::error::{Error, Result};
use crate::polytope::{DelzantPolytope, PolytopeGrid};
use std::io::{BufRead, Write};
use std::path::Path;
use std::sync::Arc;

pub const MAGIC: &str = "# toric-calabi snapshot v1";

#[derive(Debug, Clone)]
pub struct Snapshot {
    pub t: f64,
    pub seed: u64,
    pub newton_tol: f64,
    pub potential: SymplecticPotential,
}

impl Snapshot {
    pub fn write_to(&self, mut w: impl Write) -> Result<()> {
        let sp = &self.potential;
        let grid = sp.grid();
        let poly = sp.polytope();
        let (lo, hi) = poly.bounding_box();
        let join = |v: &[f64]| {
            v.iter()
                .map(|x| format!("{x}"))
                .collect::<Vec<_>>()
                .join(" ")
        };
        writeln!(w, "{MAGIC}")?;
        writeln!(w, "t={}", self.t)?;
        writeln!(w, "h={}", grid.h())?;
        writeln!(w, "dim={}", grid.dim())?;
        for f in poly.facets() {
            let n: Vec<String> = f.normal.iter().map(i64::to_string).collect();
            writeln!(w, "facet={} {}", n.join(" "), f.offset)?;
        }
        writeln!(w, "bbox_min={}", join(&lo))?;
        writeln!(w, "bbox_max={}", join(&hi))?;
        writeln!(w, "nodes={}", grid.interior_len())?;
        writeln!(w, "seed={}", self.seed)?;
        writeln!(w, "newton_tol={}", self.newton_tol)?;
        let cols: Vec<String> = (0..grid.dim()).map(|a| format!("x{a}")).collect();
        writeln!(w, "{},f", cols.join(","))?;
        for (x, f) in grid.interior_coords().iter().zip(sp.smooth()) {
            let xs: Vec<String> = x.iter().map(|v| format!("{v}")).collect();
            writeln!(w, "{},{f}", xs.join(","))?;
        }
        Ok(())
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let file = std::io::BufWriter::new(std::fs::File::create(path)?);
        self.write_to(file)
    }

    pub fn read_from(r: impl BufRead) -> Result<Self> {
        let mut lines = r.lines();
        let first = lines.next().transpose()?.unwrap_or_default();
        if first.trim() != MAGIC {
            return Err(Error::Parse("missing snapshot header line".into()));
        }
        let mut t = None;
        let mut h = None;
        let mut dim = None;
        let mut nodes = None;
        let mut seed = 0u64;
        let mut newton_tol = 1e-10;
        let mut facets = String::new();
        let num = |key: &str, v: &str| {
            v.trim()
                .parse::<f64>()
                .map_err(|_| Error::Parse(format!("bad value for '{key}': {v}")))
        };
        let mut header_done = false;
        for line in lines.by_ref() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                header_done = true;
                break;
            };
            match key.trim() {
                "t" => t = Some(num(key, value)?),
                "h" => h = Some(num(key, value)?),
                "dim" => dim = Some(num(key, value)? as usize),
                "nodes" => nodes = Some(num(key, value)? as usize),
                "seed" => {
                    seed = value
                        .trim()
                        .parse()
                        .map_err(|_| Error::Parse(format!("bad value for 'seed': {value}")))?
                }
                "newton_tol" => newton_tol = num(key, value)?,
                "facet" => {
                    facets.push_str(value);
                    facets.push('\n');
                }
                "bbox_min" | "bbox_max" => {}
                other => return Err(Error::Parse(format!("unknown snapshot key '{other}'"))),
            }
        }
        if !header_done {
            return Err(Error::Parse("snapshot has no data block".into()));
        }
        let missing = |k: &str| Error::Parse(format!("snapshot header lacks '{k}'"));
        let t = t.ok_or_else(|| missing("t"))?;
        let h = h.ok_or_else(|| missing("h"))?;
        let dim = dim.ok_or_else(|| missing("dim"))?;
        let nodes = nodes.ok_or_else(|| missing("nodes"))?;
        let polytope = Arc::new(DelzantPolytope::parse(&facets)?);
        if polytope.dim() != dim {
            return Err(Error::Parse(format!(
                "dim={dim} but facets have dimension {}",
                polytope.dim()
            )));
        }
        let grid = Arc::new(PolytopeGrid::new(&polytope, h)?);
        if grid.interior_len() != nodes {
            return Err(Error::Misaligned(format!(
                "snapshot lists {nodes} nodes, grid has {}",
                grid.interior_len()
            )));
        }
        let coords = grid.interior_coords();
        let mut smooth = Vec::with_capacity(nodes);
        for (row, line) in lines.enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let vals = line
                .split(',')
                .map(|v| num("data", v))
                .collect::<Result<Vec<f64>>>()?;
            if vals.len() != dim + 1 {
                return Err(Error::Parse(format!(
                    "data row {row} has {} columns",
                    vals.len()
                )));
            }
            let k = smooth.len();
            if k >= nodes {
                return Err(Error::Misaligned("more data rows than nodes".into()));
            }
            if vals[..dim]
                .iter()
                .zip(&coords[k])
                .any(|(a, b)| (a - b).abs() > 1e-9 * (1.0 + h))
            {
                return Err(Error::Misaligned(format!(
                    "data row {row} is not at node {:?}",
                    coords[k]
                )));
            }
            smooth.push(vals[dim]);
        }
        if smooth.len() != nodes {
            return Err(Error::Misaligned(format!(
                "{} data rows for {nodes} nodes",
                smooth.len()
            )));
        }
        let potential = SymplecticPotential::with_smooth(polytope, grid, smooth)?;
        Ok(Self {
            t,
            seed,
            newton_tol,
            potential,
        })
    }

    pub fn read(path: &Path) -> Result<Self> {
        let file = std::io::BufReader::new(std::fs::File::open(path)?);
        Self::read_from(file)
    }
}
