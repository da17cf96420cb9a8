//! Calabi flow `du/dt = Rbar - R_u` on the polytope.
//!
//! The canonical part of `u` is time independent, so the flow acts on the
//! smooth part `f` at interior nodes. Steps are classical RK4 with
//! `dt = cfl h^4 / (1 + max |W|)^2`; a step is rejected when the Hessian
//! loses positive definiteness or the Calabi energy rises by more than
//! `eps_mono = energy_tol (1 + Ca(0))`, and retried with half the step.

use crate::abreu::{mean_curvature, scalar_curvature, CurvatureField};
use crate::error::{Error, Result};
use crate::estimates::{
    audit_d_conservation, audit_distance_monotone, AuditOptions, AuditResult, SnapshotAudit,
};
use crate::functionals::{FunctionalReport, MeasureConvention, ReferenceFrame};
use crate::potential::{NewtonConfig, SymplecticPotential};
use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FlowConfig {
    pub cfl: f64,
    pub t_end: f64,
    /// Snapshot cadence; `0` keeps only the initial and final states.
    pub snapshot_every: f64,
    pub newton: NewtonConfig,
    /// Required smallest Hessian eigenvalue after each step; `0` only
    /// requires positive definiteness.
    pub convexity_margin: f64,
    /// Relative energy tolerance behind `eps_mono`.
    pub energy_tol: f64,
    pub max_halvings: usize,
    /// Run the estimates suite at every snapshot.
    pub audits: bool,
    pub audit_options: AuditOptions,
}

impl Default for FlowConfig {
    fn default() -> Self {
        Self {
            cfl: 0.25,
            t_end: 0.0,
            snapshot_every: 0.0,
            newton: NewtonConfig::default(),
            convexity_margin: 0.0,
            energy_tol: 1e-10,
            max_halvings: 8,
            audits: true,
            audit_options: AuditOptions::default(),
        }
    }
}

impl FlowConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str, v: f64| {
            Err(Error::InvalidArgument(format!(
                "{what} = {v} is out of range"
            )))
        };
        if !(self.cfl > 0.0 && self.cfl.is_finite()) {
            return bad("cfl", self.cfl);
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return bad("t_end", self.t_end);
        }
        if !(self.snapshot_every >= 0.0 && self.snapshot_every.is_finite()) {
            return bad("snapshot_every", self.snapshot_every);
        }
        if !(self.newton.tol > 0.0) {
            return bad("newton_tol", self.newton.tol);
        }
        if !(self.convexity_margin >= 0.0) {
            return bad("convexity_margin", self.convexity_margin);
        }
        if !(self.energy_tol > 0.0) {
            return bad("energy_tol", self.energy_tol);
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct FlowState {
    pub t: f64,
    pub potential: SymplecticPotential,
    pub curvature: CurvatureField,
    pub calabi_energy: f64,
    pub steps: usize,
    pub dt_history: Vec<f64>,
}

impl FlowState {
    pub fn new(potential: SymplecticPotential) -> Result<Self> {
        let curvature = scalar_curvature(&potential)?;
        let calabi_energy = curvature.calabi_energy(potential.grid());
        Ok(Self {
            t: 0.0,
            potential,
            curvature,
            calabi_energy,
            steps: 0,
            dt_history: Vec::new(),
        })
    }
}

/// `cfl h^4 / (1 + max |W|)^2`, clamped to the time remaining before `t_end`.
pub fn select_dt(state: &FlowState, cfg: &FlowConfig) -> f64 {
    let h = state.potential.grid().h();
    let dt = cfg.cfl * h.powi(4) / (1.0 + state.curvature.max_w_norm).powi(2);
    dt.min((cfg.t_end - state.t).max(0.0))
}

/// Why a step was refused.
#[derive(Debug, Clone)]
pub enum StepRejection {
    ConvexityLoss(String),
    EnergyIncrease { before: f64, after: f64 },
    Failed(String),
}

impl std::fmt::Display for StepRejection {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            StepRejection::ConvexityLoss(m) => write!(f, "convexity loss: {m}"),
            StepRejection::EnergyIncrease { before, after } => {
                write!(f, "Calabi energy increased from {before:e} to {after:e}")
            }
            StepRejection::Failed(m) => write!(f, "{m}"),
        }
    }
}

fn classify(e: Error) -> StepRejection {
    match e {
        Error::NotConvex { .. } => StepRejection::ConvexityLoss(e.to_string()),
        other => StepRejection::Failed(other.to_string()),
    }
}

/// `Rbar - R` with `Rbar` the spline-weighted mean, so that the flow
/// conserves the integral of the spline model of `f`.
fn drift(sp: &SymplecticPotential, field: &CurvatureField) -> Vec<f64> {
    let grid = sp.grid();
    let rbar = field
        .scalar
        .iter()
        .zip(grid.spline_weights())
        .map(|(r, w)| r * w)
        .sum::<f64>()
        / grid.volume();
    field.scalar.iter().map(|r| rbar - r).collect()
}

/// One RK4 step of length `dt`. `eps_mono` bounds the admissible energy increase.
pub fn step(
    state: &FlowState,
    dt: f64,
    eps_mono: f64,
    cfg: &FlowConfig,
) -> std::result::Result<FlowState, StepRejection> {
    if dt == 0.0 {
        return Ok(state.clone());
    }
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(StepRejection::Failed(format!("invalid step {dt}")));
    }
    let sp = &state.potential;
    let f0 = sp.smooth();
    let eval = |f: Vec<f64>| -> std::result::Result<Vec<f64>, StepRejection> {
        let stage = sp.with_new_smooth(f).map_err(classify)?;
        let field = scalar_curvature(&stage).map_err(classify)?;
        Ok(drift(&stage, &field))
    };
    let axpy = |k: &[f64], s: f64| f0.iter().zip(k).map(|(f, k)| f + s * k).collect::<Vec<_>>();
    let k1 = drift(sp, &state.curvature);
    let k2 = eval(axpy(&k1, 0.5 * dt))?;
    let k3 = eval(axpy(&k2, 0.5 * dt))?;
    let k4 = eval(axpy(&k3, dt))?;
    let f1: Vec<f64> = (0..f0.len())
        .map(|i| f0[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
        .collect();
    let potential = sp.with_new_smooth(f1).map_err(classify)?;
    let curvature = scalar_curvature(&potential).map_err(classify)?;
    if cfg.convexity_margin > 0.0 {
        let (e, node) = potential.min_hessian_eigenvalue().map_err(classify)?;
        if e < cfg.convexity_margin {
            return Err(StepRejection::ConvexityLoss(format!(
                "smallest Hessian eigenvalue {e:e} at node {node} is below the margin"
            )));
        }
    }
    let calabi_energy = curvature.calabi_energy(potential.grid());
    if !calabi_energy.is_finite() || calabi_energy > state.calabi_energy + eps_mono {
        return Err(StepRejection::EnergyIncrease {
            before: state.calabi_energy,
            after: calabi_energy,
        });
    }
    let mut dt_history = state.dt_history.clone();
    dt_history.push(dt);
    Ok(FlowState {
        t: state.t + dt,
        potential,
        curvature,
        calabi_energy,
        steps: state.steps + 1,
        dt_history,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct FlowSnapshot {
    pub t: f64,
    /// Last accepted step before the snapshot (`0` initially).
    pub dt: f64,
    pub steps: usize,
    #[serde(skip)]
    pub potential: SymplecticPotential,
    pub calabi_energy: f64,
    pub rbar_quadrature: f64,
    pub rbar_boundary: f64,
    pub audit: Option<SnapshotAudit>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum RunOutcome {
    Completed,
    Aborted { t: f64, reason: String },
}

#[derive(Debug, Clone, Serialize)]
pub struct Trajectory {
    pub snapshots: Vec<FlowSnapshot>,
    /// `(t, Ca)` after every accepted step, starting at `t = 0`.
    pub energy_series: Vec<(f64, f64)>,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
    /// Largest `Ca(t_{k+1}) - Ca(t_k)` over accepted steps.
    pub max_energy_increase: f64,
    pub eps_mono: f64,
    pub convention: Option<MeasureConvention>,
    pub trajectory_audits: Vec<AuditResult>,
    pub outcome: RunOutcome,
}

impl Trajectory {
    pub fn completed(&self) -> bool {
        self.outcome == RunOutcome::Completed
    }

    /// Every enforced audit, per snapshot and over the trajectory.
    pub fn audits(&self) -> impl Iterator<Item = &AuditResult> {
        self.snapshots
            .iter()
            .filter_map(|s| s.audit.as_ref())
            .flat_map(|a| a.audits.iter())
            .chain(&self.trajectory_audits)
    }

    pub fn audits_pass(&self) -> bool {
        self.audits().all(|a| !a.is_failure())
    }
}

fn make_snapshot(
    state: &FlowState,
    frame: Option<&ReferenceFrame>,
    cfg: &FlowConfig,
) -> Result<FlowSnapshot> {
    let sp = &state.potential;
    let mean = mean_curvature(sp, &state.curvature)?;
    let audit = match frame {
        Some(fr) => Some(SnapshotAudit::compute(fr, state.t, sp, &cfg.audit_options)?),
        None => None,
    };
    Ok(FlowSnapshot {
        t: state.t,
        dt: state.dt_history.last().copied().unwrap_or(0.0),
        steps: state.steps,
        potential: sp.clone(),
        calabi_energy: state.calabi_energy,
        rbar_quadrature: mean.quadrature,
        rbar_boundary: mean.boundary,
        audit,
    })
}

/// D-conservation and distance-monotonicity audits over a snapshot series
/// `(t, u(t), report)`. Snapshots without a report are left out of the
/// D series.
pub fn snapshot_series_audits(
    series: &[(f64, &SymplecticPotential, Option<&FunctionalReport>)],
    convention: &MeasureConvention,
) -> Result<Vec<AuditResult>> {
    let d_series: Vec<(f64, f64, f64)> = series
        .iter()
        .filter_map(|&(t, _, r)| r.map(|r| (t, r.d, r.l1_phi_omega)))
        .collect();
    let mut out = audit_d_conservation(&d_series);
    let pairs: Vec<(f64, &SymplecticPotential)> =
        series.iter().map(|&(t, sp, _)| (t, sp)).collect();
    out.extend(audit_distance_monotone(&pairs, convention)?);
    Ok(out)
}

/// Integrate from `initial` to `cfg.t_end`, snapshotting at the cadence.
/// Step failures end the run with `RunOutcome::Aborted` and keep the last
/// accepted state as the final snapshot.
pub fn run(initial: SymplecticPotential, cfg: &FlowConfig) -> Result<Trajectory> {
    cfg.validate()?;
    let mut state = FlowState::new(initial.clone())?;
    let frame = if cfg.audits {
        Some(ReferenceFrame::new(initial, cfg.newton)?)
    } else {
        None
    };
    let eps_mono = cfg.energy_tol * (1.0 + state.calabi_energy);
    let mut snapshots = vec![make_snapshot(&state, frame.as_ref(), cfg)?];
    let mut energy_series = vec![(0.0, state.calabi_energy)];
    let mut rejected_steps = 0;
    let mut max_energy_increase = f64::NEG_INFINITY;
    let mut outcome = RunOutcome::Completed;
    let tau = cfg.snapshot_every;
    let target_at = |k: usize| {
        if tau > 0.0 {
            (k as f64 * tau).min(cfg.t_end)
        } else {
            cfg.t_end
        }
    };
    let mut next_k = 1;

    while state.t < cfg.t_end {
        let target = target_at(next_k);
        let mut dt = select_dt(&state, cfg).min(target - state.t);
        let clamped = dt == target - state.t;
        let mut accepted = None;
        let mut last_reason = String::new();
        for attempt in 0..=cfg.max_halvings {
            match step(&state, dt, eps_mono, cfg) {
                Ok(mut next) => {
                    if clamped && attempt == 0 {
                        next.t = target;
                    }
                    accepted = Some(next);
                    break;
                }
                Err(reason) => {
                    rejected_steps += 1;
                    last_reason = reason.to_string();
                    dt *= 0.5;
                }
            }
        }
        let Some(next) = accepted else {
            outcome = RunOutcome::Aborted {
                t: state.t,
                reason: format!(
                    "step rejected after {} halvings: {last_reason}",
                    cfg.max_halvings
                ),
            };
            break;
        };
        max_energy_increase = max_energy_increase.max(next.calabi_energy - state.calabi_energy);
        energy_series.push((next.t, next.calabi_energy));
        state = next;
        if state.t >= target {
            snapshots.push(make_snapshot(&state, frame.as_ref(), cfg)?);
            next_k += 1;
        }
    }
    if !matches!(outcome, RunOutcome::Completed) && snapshots.last().is_some_and(|s| s.t != state.t)
    {
        snapshots.push(make_snapshot(&state, frame.as_ref(), cfg)?);
    }

    let mut trajectory_audits = Vec::new();
    if state.steps > 0 {
        trajectory_audits.push(AuditResult::check(
            "energy_monotone",
            max_energy_increase,
            eps_mono,
            0.0,
        ));
    }
    if let Some(fr) = &frame {
        let series: Vec<_> = snapshots
            .iter()
            .map(|s| {
                (
                    s.t,
                    &s.potential,
                    s.audit.as_ref().and_then(|a| a.report.as_ref()),
                )
            })
            .collect();
        trajectory_audits.extend(snapshot_series_audits(&series, &fr.convention)?);
    }
    Ok(Trajectory {
        energy_series,
        accepted_steps: state.steps,
        rejected_steps,
        max_energy_increase: max_energy_increase.max(0.0),
        eps_mono,
        convention: frame.as_ref().map(|f| f.convention),
        trajectory_audits,
        outcome,
        snapshots,
    })
}
