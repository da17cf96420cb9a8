//! Time-series CSV and JSON run reports.

use crate::decay::DecayFit;
use crate::error::{Error, Result};
use crate::estimates::AuditOptions;
use crate::estimates::AuditResult;
use crate::flow::{FlowConfig, FlowSnapshot, RunOutcome, Trajectory};
use crate::functionals::MeasureConvention;
use crate::polytope::{DelzantPolytope, Facet, PolytopeGrid};
use crate::potential::{NewtonConfig, SymplecticPotential};
use serde::{Deserialize, Serialize};
use std::io::{Read, Write};
use std::sync::Arc;

pub const SERIES_COLUMNS: [&str; 15] = [
    "t",
    "dt",
    "Ca",
    "Rbar_A",
    "Rbar_B",
    "D",
    "I",
    "J",
    "max_phi",
    "min_u",
    "L2_u",
    "L1_phi_omega",
    "L1_phi_omegaphi",
    "entropy",
    "audit_flags",
];

/// One CSV row. Complex-side columns are `NaN` when the snapshot carries
/// no functional report; `I` is the gradient form.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeriesRow {
    pub t: f64,
    pub dt: f64,
    pub ca: f64,
    pub rbar_a: f64,
    pub rbar_b: f64,
    pub d: f64,
    pub i: f64,
    pub j: f64,
    pub max_phi: f64,
    pub min_u: f64,
    pub l2_u: f64,
    pub l1_phi_omega: f64,
    pub l1_phi_omega_phi: f64,
    pub entropy: f64,
    pub audit_flags: String,
}

/// `ok`, `unaudited`, or the failing audit names joined by `|`.
pub fn audit_flags(snapshot: &FlowSnapshot) -> String {
    let Some(audit) = &snapshot.audit else {
        return "unaudited".into();
    };
    let mut names: Vec<&str> = audit.failures().map(|a| a.name.as_str()).collect();
    names.dedup();
    if names.is_empty() {
        "ok".into()
    } else {
        names.join("|")
    }
}

impl SeriesRow {
    pub fn from_snapshot(s: &FlowSnapshot) -> Self {
        let r = s.audit.as_ref().and_then(|a| a.report.as_ref());
        let get = |f: fn(&crate::functionals::FunctionalReport) -> f64| r.map_or(f64::NAN, f);
        Self {
            t: s.t,
            dt: s.dt,
            ca: s.calabi_energy,
            rbar_a: s.rbar_quadrature,
            rbar_b: s.rbar_boundary,
            d: get(|r| r.d),
            i: get(|r| r.i_gradient),
            j: get(|r| r.j),
            max_phi: get(|r| r.max_phi),
            min_u: get(|r| r.min_u),
            l2_u: get(|r| r.l2_u),
            l1_phi_omega: get(|r| r.l1_phi_omega),
            l1_phi_omega_phi: get(|r| r.l1_phi_omega_phi),
            entropy: get(|r| r.entropy),
            audit_flags: audit_flags(s),
        }
    }

    fn fields(&self) -> Vec<String> {
        let nums = [
            self.t,
            self.dt,
            self.ca,
            self.rbar_a,
            self.rbar_b,
            self.d,
            self.i,
            self.j,
            self.max_phi,
            self.min_u,
            self.l2_u,
            self.l1_phi_omega,
            self.l1_phi_omega_phi,
            self.entropy,
        ];
        let mut out: Vec<String> = nums.iter().map(|v| format!("{v:e}")).collect();
        out.push(self.audit_flags.clone());
        out
    }
}

pub fn write_series(w: impl Write, snapshots: &[FlowSnapshot]) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(SERIES_COLUMNS)?;
    for s in snapshots {
        wr.write_record(SeriesRow::from_snapshot(s).fields())?;
    }
    wr.flush()?;
    Ok(())
}

/// `(t, Ca)` pairs from a series CSV.
pub fn read_energy_series(r: impl Read) -> Result<Vec<(f64, f64)>> {
    let mut rd = csv::Reader::from_reader(r);
    let headers = rd.headers()?.clone();
    let column = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Parse(format!("series has no column {name}")))
    };
    let (ti, ci) = (column("t")?, column("Ca")?);
    let mut out = Vec::new();
    for (line, rec) in rd.records().enumerate() {
        let rec = rec?;
        let num = |i: usize| -> Result<f64> {
            let field = rec.get(i).unwrap_or("");
            field
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("row {}: {field:?} is not a number", line + 1)))
        };
        out.push((num(ti)?, num(ci)?));
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize)]
pub struct SnapshotSummary<'a> {
    pub t: f64,
    pub steps: usize,
    pub calabi_energy: f64,
    #[serde(flatten)]
    pub audit: Option<&'a crate::estimates::SnapshotAudit>,
}

/// Machine-readable summary of a run.
#[derive(Debug, Clone, Serialize)]
pub struct RunReport<'a> {
    pub config: &'a FlowConfig,
    pub outcome: &'a RunOutcome,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
    pub eps_mono: f64,
    pub max_energy_increase: f64,
    pub convention: Option<MeasureConvention>,
    pub all_audits_pass: bool,
    pub trajectory_audits: &'a [AuditResult],
    pub decay: Option<DecayFit>,
    pub snapshots: Vec<SnapshotSummary<'a>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_time_s: Option<f64>,
}

impl<'a> RunReport<'a> {
    pub fn new(config: &'a FlowConfig, traj: &'a Trajectory, decay: Option<DecayFit>) -> Self {
        Self {
            config,
            outcome: &traj.outcome,
            accepted_steps: traj.accepted_steps,
            rejected_steps: traj.rejected_steps,
            eps_mono: traj.eps_mono,
            max_energy_increase: traj.max_energy_increase,
            convention: traj.convention,
            all_audits_pass: traj.audits_pass(),
            trajectory_audits: &traj.trajectory_audits,
            decay,
            snapshots: traj
                .snapshots
                .iter()
                .map(|s| SnapshotSummary {
                    t: s.t,
                    steps: s.steps,
                    calabi_energy: s.calabi_energy,
                    audit: s.audit.as_ref(),
                })
                .collect(),
            wall_time_s: None,
        }
    }

    pub fn write(&self, w: impl Write) -> Result<()> {
        serde_json::to_writer_pretty(w, self)?;
        Ok(())
    }
}

/// Smooth part of a potential at interior nodes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PotentialData {
    pub canonical: bool,
    pub smooth: Vec<f64>,
}

impl PotentialData {
    pub fn of(sp: &SymplecticPotential) -> Self {
        Self {
            canonical: sp.is_canonical_only(),
            smooth: sp.smooth().to_vec(),
        }
    }

    fn build(
        &self,
        p: &Arc<DelzantPolytope>,
        g: &Arc<PolytopeGrid>,
    ) -> Result<SymplecticPotential> {
        if self.canonical {
            if self.smooth.iter().any(|&v| v != 0.0) {
                return Err(Error::Parse(
                    "canonical potential with a nonzero smooth part".into(),
                ));
            }
            SymplecticPotential::canonical(p.clone(), g.clone())
        } else {
            SymplecticPotential::with_smooth(p.clone(), g.clone(), self.smooth.clone())
        }
    }
}

/// Name and verdict of one in-run audit.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub name: String,
    pub pass: bool,
}

impl Verdict {
    pub fn list<'a>(audits: impl IntoIterator<Item = &'a AuditResult>) -> Vec<Self> {
        audits
            .into_iter()
            .map(|a| Self {
                name: a.name.clone(),
                pass: !a.is_failure(),
            })
            .collect()
    }
}

/// Self-contained snapshot: polytope, grid spacing, initial and current
/// potentials, and the settings needed to replay the audits offline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SnapshotFile {
    pub t: f64,
    pub steps: usize,
    pub h: f64,
    pub facets: Vec<Facet>,
    pub newton: NewtonConfig,
    pub audit_options: AuditOptions,
    pub calabi_energy: f64,
    pub initial: PotentialData,
    pub current: PotentialData,
    /// In-run audit verdicts; empty for unaudited runs.
    pub verdicts: Vec<Verdict>,
}

impl SnapshotFile {
    pub fn new(snapshot: &FlowSnapshot, initial: &SymplecticPotential, cfg: &FlowConfig) -> Self {
        Self {
            t: snapshot.t,
            steps: snapshot.steps,
            h: initial.grid().h(),
            facets: initial.polytope().facets().to_vec(),
            newton: cfg.newton,
            audit_options: cfg.audit_options,
            calabi_energy: snapshot.calabi_energy,
            initial: PotentialData::of(initial),
            current: PotentialData::of(&snapshot.potential),
            verdicts: snapshot
                .audit
                .as_ref()
                .map(|a| Verdict::list(&a.audits))
                .unwrap_or_default(),
        }
    }

    /// Whether two files share polytope, grid and initial potential.
    pub fn same_run(&self, other: &Self) -> bool {
        self.h == other.h && self.facets == other.facets && self.initial == other.initial
    }

    /// Initial and current potentials on a freshly built grid.
    pub fn potentials(&self) -> Result<(SymplecticPotential, SymplecticPotential)> {
        let p = Arc::new(DelzantPolytope::new(self.facets.clone())?);
        let g = Arc::new(PolytopeGrid::new(&p, self.h)?);
        let initial = self.initial.build(&p, &g)?;
        let current = self.current.build(&p, &g)?;
        Ok((initial, current))
    }

    /// Current potential on the grid of `like`, which must come from
    /// [`same_run`](Self::same_run) file.
    pub fn current_on(&self, like: &SymplecticPotential) -> Result<SymplecticPotential> {
        self.current.build(like.polytope(), like.grid())
    }

    pub fn write(&self, w: impl Write) -> Result<()> {
        serde_json::to_writer(w, self)?;
        Ok(())
    }

    pub fn read(r: impl Read) -> Result<Self> {
        Ok(serde_json::from_reader(r)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::run;
    use crate::polytope::{DelzantPolytope, PolytopeGrid};
    use crate::potential::SymplecticPotential;
    use std::sync::Arc;

    fn trajectory(audits: bool) -> (FlowConfig, Trajectory) {
        let p = Arc::new(DelzantPolytope::preset("interval").unwrap());
        let g = Arc::new(PolytopeGrid::new(&p, 1.0 / 16.0).unwrap());
        let sp =
            SymplecticPotential::from_fn(p, g, |x| 0.01 * (x[0] * (1.0 - x[0])).powi(2)).unwrap();
        let cfg = FlowConfig {
            t_end: 0.002,
            snapshot_every: 0.001,
            cfl: 0.5,
            audits,
            ..FlowConfig::default()
        };
        let traj = run(sp, &cfg).unwrap();
        (cfg, traj)
    }

    #[test]
    fn series_round_trip() {
        let (_, traj) = trajectory(true);
        let mut buf = Vec::new();
        write_series(&mut buf, &traj.snapshots).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert_eq!(text.lines().next().unwrap(), SERIES_COLUMNS.join(","));
        assert_eq!(text.lines().count(), 4);
        assert!(text.lines().skip(1).all(|l| l.ends_with(",ok")));
        let series = read_energy_series(buf.as_slice()).unwrap();
        let expect: Vec<(f64, f64)> = traj
            .snapshots
            .iter()
            .map(|s| (s.t, s.calabi_energy))
            .collect();
        assert_eq!(series, expect);
    }

    #[test]
    fn unaudited_rows_carry_nan() {
        let (_, traj) = trajectory(false);
        let row = SeriesRow::from_snapshot(&traj.snapshots[1]);
        assert!(row.d.is_nan());
        assert_eq!(row.audit_flags, "unaudited");
    }

    #[test]
    fn missing_column_is_reported() {
        let err = read_energy_series("t,x\n0,1\n".as_bytes()).unwrap_err();
        assert!(err.to_string().contains("Ca"));
        let err = read_energy_series("t,Ca\n0,abc\n".as_bytes()).unwrap_err();
        assert!(err.to_string().contains("row 1"));
    }

    #[test]
    fn json_report_is_deterministic() {
        let (cfg, a) = trajectory(true);
        let (_, b) = trajectory(true);
        let mut ja = Vec::new();
        let mut jb = Vec::new();
        RunReport::new(&cfg, &a, None).write(&mut ja).unwrap();
        RunReport::new(&cfg, &b, None).write(&mut jb).unwrap();
        assert_eq!(ja, jb);
        let v: serde_json::Value = serde_json::from_slice(&ja).unwrap();
        assert_eq!(v["outcome"]["status"], "completed");
        assert_eq!(v["snapshots"].as_array().unwrap().len(), 3);
    }

    #[test]
    fn snapshot_file_round_trip() {
        let (cfg, traj) = trajectory(true);
        let initial = &traj.snapshots[0].potential;
        let last = traj.snapshots.last().unwrap();
        let file = SnapshotFile::new(last, initial, &cfg);
        let mut buf = Vec::new();
        file.write(&mut buf).unwrap();
        let back = SnapshotFile::read(buf.as_slice()).unwrap();
        assert_eq!(back, file);
        assert!(back.same_run(&SnapshotFile::new(&traj.snapshots[0], initial, &cfg)));
        let (sp0, sp) = back.potentials().unwrap();
        assert_eq!(sp0.smooth(), initial.smooth());
        assert_eq!(sp.smooth(), last.potential.smooth());
        assert_eq!(
            back.verdicts.len(),
            last.audit.as_ref().unwrap().audits.len()
        );
    }

    #[test]
    fn snapshot_file_rejects_unknown_keys() {
        let err = SnapshotFile::read(br#"{"t": 0, "bogus": 1}"#.as_slice()).unwrap_err();
        assert!(err.to_string().contains("bogus"), "{err}");
    }
}
