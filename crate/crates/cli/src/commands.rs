//! `run`, `verify`, `fit-decay` and `presets`.

use crate::scenario::Scenario;
use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;
use toric_calabi::estimates::SnapshotAudit;
use toric_calabi::flow::{run, snapshot_series_audits};
use toric_calabi::polytope::PRESETS;
use toric_calabi::report::{read_energy_series, write_series, RunReport, SnapshotFile, Verdict};
use toric_calabi::{fit_decay, AuditResult, DelzantPolytope, ReferenceFrame, RunOutcome};

/// Process exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exit {
    Ok = 0,
    FlowAborted = 1,
    AuditFailed = 2,
    Config = 3,
}

/// Failure carrying its exit status.
#[derive(Debug)]
pub struct Failure {
    pub exit: Exit,
    pub message: String,
}

impl Failure {
    pub fn config(message: impl Into<String>) -> Self {
        Self {
            exit: Exit::Config,
            message: message.into(),
        }
    }

    fn flow(message: impl Into<String>) -> Self {
        Self {
            exit: Exit::FlowAborted,
            message: message.into(),
        }
    }
}

type Outcome = Result<Exit, Failure>;

fn create(path: &Path) -> Result<BufWriter<File>, Failure> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Failure::flow(format!("cannot write {}: {e}", path.display())))
}

fn io<T, E: std::fmt::Display>(r: Result<T, E>, what: &Path) -> Result<T, Failure> {
    r.map_err(|e| Failure::flow(format!("{}: {e}", what.display())))
}

pub struct RunOptions {
    pub out_dir: PathBuf,
    /// Omit wall-clock time so every artifact is byte-identical across runs.
    pub deterministic: bool,
}

/// Integrate a scenario and write its artifacts to `out_dir`:
/// `series.csv`, `energy.csv`, `report.json`, `scenario.txt`,
/// `snapshots/snapshot_NNNN.json` and `audits/audit_NNNN.json`.
pub fn run_command(scenario: &Scenario, opts: &RunOptions, out: &mut impl Write) -> Outcome {
    let initial = scenario.initial_potential().map_err(Failure::config)?;
    let cfg = scenario.flow_config();
    let dir = &opts.out_dir;
    io(fs::create_dir_all(dir.join("snapshots")), dir)?;
    if cfg.audits {
        io(fs::create_dir_all(dir.join("audits")), dir)?;
    }
    let start = Instant::now();
    let traj =
        run(initial.clone(), &cfg).map_err(|e| Failure::flow(format!("flow failed: {e}")))?;
    let wall = start.elapsed().as_secs_f64();

    let path = dir.join("scenario.txt");
    io(fs::write(&path, scenario.to_text()), &path)?;
    let path = dir.join("series.csv");
    io(write_series(create(&path)?, &traj.snapshots), &path)?;
    let path = dir.join("energy.csv");
    let mut w = create(&path)?;
    io(writeln!(w, "t,Ca"), &path)?;
    for (t, ca) in &traj.energy_series {
        io(writeln!(w, "{t:e},{ca:e}"), &path)?;
    }
    io(w.flush(), &path)?;
    for (k, snap) in traj.snapshots.iter().enumerate() {
        let path = dir.join("snapshots").join(format!("snapshot_{k:04}.json"));
        io(
            SnapshotFile::new(snap, &initial, &cfg).write(create(&path)?),
            &path,
        )?;
        if let Some(audit) = &snap.audit {
            let path = dir.join("audits").join(format!("audit_{k:04}.json"));
            io(serde_json::to_writer_pretty(create(&path)?, audit), &path)?;
        }
    }
    let series: Vec<(f64, f64)> = traj
        .snapshots
        .iter()
        .map(|s| (s.t, s.calabi_energy))
        .collect();
    let decay = fit_decay(&series).ok();
    let mut report = RunReport::new(&cfg, &traj, decay);
    if !opts.deterministic {
        report.wall_time_s = Some(wall);
    }
    let path = dir.join("report.json");
    io(report.write(create(&path)?), &path)?;

    let first = traj.energy_series.first().map_or(f64::NAN, |e| e.1);
    let last = traj.energy_series.last().map_or(f64::NAN, |e| e.1);
    let failures: Vec<&AuditResult> = traj.audits().filter(|a| a.is_failure()).collect();
    let enforced = traj.audits().filter(|a| a.enforced).count();
    let mut lines = vec![
        format!(
            "scenario {}: {} accepted, {} rejected steps to t = {:e}",
            scenario.name,
            traj.accepted_steps,
            traj.rejected_steps,
            traj.snapshots.last().map_or(0.0, |s| s.t)
        ),
        format!(
            "calabi energy {first:e} -> {last:e}; {} snapshots in {}",
            traj.snapshots.len(),
            dir.display()
        ),
    ];
    if let Some(fit) = &decay {
        lines.push(format!(
            "decay rate {:.6e} (R^2 = {:.4})",
            fit.rate, fit.r_squared
        ));
    }
    if cfg.audits {
        lines.push(format!(
            "audits: {} of {enforced} passed",
            enforced - failures.len()
        ));
    } else {
        lines.push("audits: disabled".into());
    }
    for a in &failures {
        lines.push(format!(
            "FAIL {} lhs = {:e} rhs = {:e}{}",
            a.name,
            a.lhs,
            a.rhs,
            a.note
                .as_ref()
                .map(|n| format!(" ({n})"))
                .unwrap_or_default()
        ));
    }
    let exit = match &traj.outcome {
        RunOutcome::Aborted { t, reason } => {
            lines.push(format!("flow aborted at t = {t:e}: {reason}"));
            Exit::FlowAborted
        }
        RunOutcome::Completed if !failures.is_empty() => Exit::AuditFailed,
        RunOutcome::Completed => Exit::Ok,
    };
    for l in lines {
        let _ = writeln!(out, "{l}");
    }
    Ok(exit)
}

/// Snapshot files named directly or found in the given directories.
fn snapshot_paths(args: &[PathBuf]) -> Result<Vec<PathBuf>, Failure> {
    let mut paths = Vec::new();
    for arg in args {
        if arg.is_dir() {
            let dir = if arg.join("snapshots").is_dir() {
                arg.join("snapshots")
            } else {
                arg.clone()
            };
            let mut found: Vec<PathBuf> = fs::read_dir(&dir)
                .map_err(|e| Failure::config(format!("{}: {e}", dir.display())))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.extension().is_some_and(|x| x == "json"))
                .collect();
            found.sort();
            paths.extend(found);
        } else {
            paths.push(arg.clone());
        }
    }
    if paths.is_empty() {
        return Err(Failure::config("verify: no snapshot files given"));
    }
    Ok(paths)
}

fn audit_line(out: &mut impl Write, t: f64, a: &AuditResult) {
    let verdict = if !a.enforced {
        "info"
    } else if a.pass {
        "PASS"
    } else {
        "FAIL"
    };
    let note = a
        .note
        .as_ref()
        .map(|n| format!("  {n}"))
        .unwrap_or_default();
    let _ = writeln!(
        out,
        "{t:<12.6e} {:<30} {:>13.6e} {:>13.6e} {verdict}{note}",
        a.name, a.lhs, a.rhs
    );
}

/// Replay the estimates suite on stored snapshots and print the audit table.
/// Snapshots of one run are also checked for D conservation and distance
/// monotonicity.
pub fn verify_command(args: &[PathBuf], out: &mut impl Write) -> Outcome {
    let paths = snapshot_paths(args)?;
    let mut files = Vec::with_capacity(paths.len());
    for p in &paths {
        let f = File::open(p).map_err(|e| Failure::config(format!("{}: {e}", p.display())))?;
        let snap = SnapshotFile::read(BufReader::new(f))
            .map_err(|e| Failure::config(format!("{}: {e}", p.display())))?;
        files.push((p.clone(), snap));
    }
    let mut groups: Vec<Vec<(PathBuf, SnapshotFile)>> = Vec::new();
    for (p, f) in files {
        match groups.iter_mut().find(|g| g[0].1.same_run(&f)) {
            Some(g) => g.push((p, f)),
            None => groups.push(vec![(p, f)]),
        }
    }
    let _ = writeln!(
        out,
        "{:<12} {:<30} {:>13} {:>13} verdict",
        "t", "audit", "lhs", "rhs"
    );
    let (mut total, mut failed, mut mismatched) = (0usize, 0usize, 0usize);
    for group in &mut groups {
        group.sort_by(|a, b| a.1.t.total_cmp(&b.1.t));
        let (initial, _) = group[0]
            .1
            .potentials()
            .map_err(|e| Failure::config(format!("{}: {e}", group[0].0.display())))?;
        let frame = ReferenceFrame::new(initial.clone(), group[0].1.newton)
            .map_err(|e| Failure::flow(format!("reference potential: {e}")))?;
        let mut audited = Vec::with_capacity(group.len());
        for (path, file) in group.iter() {
            let sp = file
                .current_on(&initial)
                .map_err(|e| Failure::config(format!("{}: {e}", path.display())))?;
            let audit = SnapshotAudit::compute(&frame, file.t, &sp, &file.audit_options)
                .map_err(|e| Failure::flow(format!("{}: {e}", path.display())))?;
            for a in &audit.audits {
                audit_line(out, file.t, a);
                total += a.enforced as usize;
                failed += a.is_failure() as usize;
            }
            if !file.verdicts.is_empty() && file.verdicts != Verdict::list(&audit.audits) {
                mismatched += 1;
                let _ = writeln!(
                    out,
                    "note: {} differs from its in-run verdicts",
                    path.display()
                );
            }
            audited.push((file.t, sp, audit));
        }
        let series: Vec<_> = audited
            .iter()
            .map(|(t, sp, a)| (*t, sp, a.report.as_ref()))
            .collect();
        match snapshot_series_audits(&series, &frame.convention) {
            Ok(audits) => {
                for a in &audits {
                    audit_line(out, series.last().map_or(0.0, |s| s.0), a);
                    total += a.enforced as usize;
                    failed += a.is_failure() as usize;
                }
            }
            Err(e) => {
                let _ = writeln!(out, "note: series audits skipped ({e})");
            }
        }
    }
    let _ = writeln!(
        out,
        "verified {} snapshots in {} run(s): {} of {total} audits passed; {mismatched} snapshot(s) differ from in-run verdicts",
        paths.len(),
        groups.len(),
        total - failed
    );
    Ok(if failed > 0 {
        Exit::AuditFailed
    } else {
        Exit::Ok
    })
}

/// Exponential fit of the `t`/`Ca` columns of a series or energy CSV.
pub fn fit_decay_command(path: &Path, out: &mut impl Write) -> Outcome {
    let f = File::open(path).map_err(|e| Failure::config(format!("{}: {e}", path.display())))?;
    let series = read_energy_series(BufReader::new(f))
        .map_err(|e| Failure::config(format!("{}: {e}", path.display())))?;
    let fit = fit_decay(&series).map_err(|e| Failure::flow(format!("fit failed: {e}")))?;
    let _ = writeln!(out, "rate = {:.9e}", fit.rate);
    let _ = writeln!(out, "intercept = {:.9e}", fit.intercept);
    let _ = writeln!(out, "r_squared = {:.9}", fit.r_squared);
    let _ = writeln!(out, "samples_used = {}", fit.samples_used);
    Ok(Exit::Ok)
}

/// Preset polytopes with dimension, volume and mean scalar curvature.
pub fn presets_command(out: &mut impl Write) -> Outcome {
    let _ = writeln!(
        out,
        "{:<10} {:>3} {:>7} {:>10} {:>10} {:>8}",
        "preset", "dim", "facets", "volume", "boundary", "Rbar"
    );
    for name in PRESETS {
        let p = DelzantPolytope::preset(name).map_err(|e| Failure::config(e.to_string()))?;
        let vol = p.volume().map_err(|e| Failure::config(e.to_string()))?;
        let sigma = p
            .boundary_measure()
            .map_err(|e| Failure::config(e.to_string()))?
            .total;
        let _ = writeln!(
            out,
            "{name:<10} {:>3} {:>7} {vol:>10.6} {sigma:>10.6} {:>8.4}",
            p.dim(),
            p.facets().len(),
            2.0 * sigma / vol
        );
        for f in p.to_text().lines() {
            let _ = writeln!(out, "    {f}");
        }
    }
    Ok(Exit::Ok)
}
