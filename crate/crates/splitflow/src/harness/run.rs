use std::fmt::Write as _;
use std::path::PathBuf;

use super::config::RunConfig;
use super::{csv_bytes, fmt_num, write_file, HarnessError};
use crate::analysis::energy_series;
use crate::discrete::{run, Algorithm, RunOutcome, RunReport};
use crate::objective::Objective;
use crate::schedule::{check_assumptions, threshold_index, AdmissibilityReport, Schedule, ScheduleKind};

/// Schedule whose energy applies to `alg`, when there is one.
pub fn energy_schedule(alg: &Algorithm, s: f64) -> Option<Schedule> {
    let (kind, alpha) = match alg {
        Algorithm::Generalized { schedule } => return Some(schedule.clone()),
        Algorithm::Agm2 { alpha, .. } | Algorithm::NagVelocity { alpha, .. } => (ScheduleKind::Agm2, *alpha),
        Algorithm::LtSe1 { alpha } => (ScheduleKind::LtSe1, *alpha),
        Algorithm::LtSv2 { alpha } => (ScheduleKind::LtSv2, *alpha),
        Algorithm::Ardm { alpha } => (ScheduleKind::Ardm, *alpha),
        Algorithm::LtSe3 { alpha } => (ScheduleKind::LtSe3, *alpha),
        Algorithm::IgahdType { alpha, beta, lagged_gradient: false } => (ScheduleKind::Igahd { beta: *beta }, *alpha),
        _ => return None,
    };
    Schedule::new(kind, s, alpha).ok()
}

/// Thresholds `N₁, N₂, N′, N` for a schedule, scanning far enough past `N′`.
pub fn thresholds_for(schedule: &Schedule, lipschitz: f64) -> Result<AdmissibilityReport, HarnessError> {
    let np = schedule
        .kind()
        .and_then(|k| threshold_index(k, schedule.s(), schedule.alpha(), lipschitz).ok())
        .map_or(0.0, |t| t.value);
    let end = np.max(0.0).ceil() as usize + 500;
    Ok(check_assumptions(schedule, lipschitz, end)?)
}

fn has_closed_form(schedule: &Schedule, lipschitz: f64) -> bool {
    schedule.kind().is_some_and(|k| threshold_index(k, schedule.s(), schedule.alpha(), lipschitz).is_ok())
}

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub objective: String,
    pub report: RunReport,
    pub s: f64,
    pub alpha: f64,
    pub epsilon: f64,
    pub thresholds: Option<AdmissibilityReport>,
    /// Files written by the run.
    pub files: Vec<PathBuf>,
}

impl RunSummary {
    /// `key: value` lines.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let r = &self.report;
        let _ = writeln!(out, "objective: {}", self.objective);
        let _ = writeln!(out, "algorithm: {}", r.algorithm);
        let _ = writeln!(out, "s: {}", self.s);
        let _ = writeln!(out, "alpha: {}", self.alpha);
        let _ = writeln!(out, "epsilon: {:e}", self.epsilon);
        let _ = writeln!(out, "termination: {}", r.termination);
        let _ = writeln!(out, "n_final: {}", r.n_final);
        let _ = writeln!(out, "error_final: {:e}", r.error_final);
        let _ = writeln!(out, "f_final: {}", fmt_num(r.f_final));
        let x: Vec<String> = r.x_final.iter().map(|v| fmt_num(*v)).collect();
        let _ = writeln!(out, "x_final: {}", x.join(","));
        if let Some(t) = &self.thresholds {
            let opt = |v: Option<f64>| v.map_or("none".to_string(), |v| format!("{v}"));
            let _ = writeln!(out, "N1: {}", t.n1);
            let _ = writeln!(out, "N2: {}", t.n2);
            let _ = writeln!(out, "N_prime: {}", opt(t.n_prime));
            let _ = writeln!(out, "N_prime_lipschitz: {}", opt(t.n_prime_lipschitz));
            let _ = writeln!(out, "N: {}", t.n);
            let _ = writeln!(out, "coupling_holds: {}", t.coupling_holds);
        }
        for f in &self.files {
            let _ = writeln!(out, "file: {}", f.display());
        }
        out
    }
}

#[derive(Debug, Clone)]
pub struct RunArtifacts {
    pub summary: RunSummary,
    pub outcome: RunOutcome,
    /// Trajectory CSV, one row per index `0 ..= n_final`.
    pub trajectory_csv: Vec<u8>,
}

/// Executes one run and, when `out_dir` is set, writes `trajectory.csv` and
/// `report.txt` there.
pub fn cmd_run(config: &RunConfig) -> Result<RunArtifacts, HarnessError> {
    let prep = config.prepare()?;
    let obj = &prep.objective;
    let schedule = energy_schedule(&prep.algorithm, config.s);
    // Thresholds are reported only for families with a closed-form `N′`.
    let thresholds = match &schedule {
        Some(sch) if has_closed_form(sch, obj.lipschitz()) => Some(thresholds_for(sch, obj.lipschitz())?),
        _ => None,
    };
    let mut stop = prep.stop;
    if config.require_threshold {
        let n = thresholds.as_ref().map(|t| t.n).filter(|n| n.is_finite()).ok_or_else(|| {
            HarnessError::Config(format!("no finite threshold N for algorithm {}", prep.algorithm.name()))
        })?;
        stop = stop.with_min_index(n);
    }
    let outcome = run(&prep.algorithm, obj, &config.x0, config.s, &stop)?;
    let trajectory_csv = trajectory_csv(obj, &outcome, schedule.as_ref(), config)?;

    let mut summary = RunSummary {
        objective: obj.name().to_string(),
        report: outcome.report.clone(),
        s: config.s,
        alpha: config.alpha,
        epsilon: config.epsilon,
        thresholds,
        files: Vec::new(),
    };
    if let Some(dir) = &config.out_dir {
        let csv_path = dir.join("trajectory.csv");
        let report_path = dir.join("report.txt");
        write_file(&csv_path, &trajectory_csv)?;
        summary.files = vec![csv_path, report_path.clone()];
        write_file(&report_path, summary.to_text().as_bytes())?;
    }
    Ok(RunArtifacts { summary, outcome, trajectory_csv })
}

fn trajectory_csv(
    obj: &Objective,
    outcome: &RunOutcome,
    schedule: Option<&Schedule>,
    config: &RunConfig,
) -> Result<Vec<u8>, HarnessError> {
    let traj = &outcome.trajectory;
    let d = obj.dim();
    let rec = config.record;

    let energy: Option<Vec<f64>> = match (rec.energy, schedule) {
        (true, Some(sch)) if traj.last_index() >= 1 => {
            let x_m = &traj.xs[traj.last_index()];
            let x_star = obj.minimizers().project(x_m).unwrap_or_else(|| x_m.clone());
            Some(energy_series(obj, traj, sch, &x_star)?.e)
        }
        _ => None,
    };

    let mut header: Vec<String> = vec!["n".into()];
    if rec.iterates {
        header.extend((1..=d).map(|i| format!("x{i}")));
    }
    header.extend(["f".into(), "fgap".into(), "gradnorm".into()]);
    if rec.velocity {
        header.extend((1..=d).map(|i| format!("v{i}")));
    }
    if rec.energy {
        header.push("E".into());
    }

    let mut rows = Vec::with_capacity(traj.len());
    for n in 0..traj.len() {
        let mut row = vec![n.to_string()];
        if rec.iterates {
            row.extend(traj.xs[n].iter().map(|v| fmt_num(*v)));
        }
        row.push(fmt_num(traj.f[n]));
        row.push(fmt_num(traj.gap[n]));
        row.push(fmt_num(traj.grad_norm(n)));
        if rec.velocity {
            row.extend(traj.velocity(n).iter().map(|v| fmt_num(*v)));
        }
        if rec.energy {
            let e = match (&energy, n) {
                (Some(e), n) if n >= 1 => e[n - 1],
                _ => f64::NAN,
            };
            row.push(fmt_num(e));
        }
        rows.push(row);
    }
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    csv_bytes(&header, &rows)
}
