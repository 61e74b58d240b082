use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::run::thresholds_for;
use super::{csv_bytes, fmt_num, HarnessError};
use crate::discrete::{run, Algorithm, StopKind, StoppingRule};
use crate::objective::{Objective, ObjectiveSpec};
use crate::schedule::{Schedule, ScheduleKind};

/// Cartesian grid over the parameters of one schedule family. `e24` and
/// `e26` use `(mu, a, b)`; `e25` uses `(beta, b, mu)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSpec {
    pub example: String,
    pub objective: ObjectiveSpec,
    pub mu: Vec<f64>,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub beta: Vec<f64>,
    pub s: f64,
    pub alpha: f64,
    pub x0: Vec<f64>,
    pub epsilon: f64,
    pub max_iter: usize,
    pub workers: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            example: "e24".into(),
            objective: ObjectiveSpec::F1,
            mu: vec![1e-2],
            a: vec![4.0],
            b: vec![10.0],
            beta: vec![0.1],
            s: 0.1,
            alpha: 3.0,
            x0: vec![1.0, -2.0],
            epsilon: 1e-10,
            max_iter: 100_000,
            workers: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepCell {
    pub index: usize,
    pub mu: f64,
    pub a: f64,
    pub b: f64,
    pub beta: f64,
    /// False when the schedule or the run could not be set up.
    pub admissible: bool,
    pub note: String,
    pub termination: String,
    pub n_final: usize,
    pub error: f64,
    pub n_prime: f64,
    pub n2: f64,
    pub n: f64,
}

impl GridSpec {
    fn kinds(&self) -> Result<Vec<(f64, f64, f64, f64)>, HarnessError> {
        let mut out = Vec::new();
        match self.example.to_ascii_lowercase().as_str() {
            "e24" | "e26" => {
                for &mu in &self.mu {
                    for &a in &self.a {
                        for &b in &self.b {
                            out.push((mu, a, b, f64::NAN));
                        }
                    }
                }
            }
            "e25" => {
                for &beta in &self.beta {
                    for &b in &self.b {
                        for &mu in &self.mu {
                            out.push((mu, f64::NAN, b, beta));
                        }
                    }
                }
            }
            other => return Err(HarnessError::Config(format!("sweep example must be e24, e25 or e26, got '{other}'"))),
        }
        Ok(out)
    }
}

fn run_cell(spec: &GridSpec, obj: &Objective, index: usize, p: (f64, f64, f64, f64)) -> SweepCell {
    let (mu, a, b, beta) = p;
    let mut cell = SweepCell {
        index,
        mu,
        a,
        b,
        beta,
        admissible: false,
        note: String::new(),
        termination: String::new(),
        n_final: 0,
        error: f64::NAN,
        n_prime: f64::NAN,
        n2: f64::NAN,
        n: f64::NAN,
    };
    let result = (|| -> Result<(), HarnessError> {
        let kind = ScheduleKind::from_label(&spec.example, mu, a, b, beta)?;
        let schedule = Schedule::new(kind, spec.s, spec.alpha)?;
        let th = thresholds_for(&schedule, obj.lipschitz())?;
        cell.n_prime = th.n_prime.unwrap_or(f64::NAN);
        cell.n2 = th.n2;
        cell.n = th.n;
        let mut stop = StoppingRule::new(StopKind::ConsecutiveF, spec.epsilon, spec.max_iter);
        if th.n.is_finite() {
            stop = stop.with_min_index(th.n);
        }
        let out = run(&Algorithm::Generalized { schedule }, obj, &spec.x0, spec.s, &stop)?;
        cell.termination = out.report.termination.to_string();
        cell.n_final = out.report.n_final;
        cell.error = out.report.error_final;
        Ok(())
    })();
    match result {
        Ok(()) => cell.admissible = true,
        Err(e) => cell.note = e.to_string(),
    }
    cell
}

/// Runs every grid cell, `workers` at a time. Cells come back in grid order
/// whatever the worker count; a cell that cannot run is flagged, not fatal.
pub fn cmd_sweep(spec: &GridSpec) -> Result<(Vec<SweepCell>, Vec<u8>), HarnessError> {
    let obj = spec.objective.build()?;
    let l = obj.lipschitz();
    if !(spec.s > 0.0 && spec.s * l < 1.0) {
        return Err(HarnessError::Config(format!("step size must satisfy 0 < s < 1/L = {}", 1.0 / l)));
    }
    if spec.x0.len() != obj.dim() {
        return Err(HarnessError::Config(format!("x0 must have {} entries", obj.dim())));
    }
    let params = spec.kinds()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(spec.workers.max(1))
        .build()
        .map_err(|e| HarnessError::Config(e.to_string()))?;
    let cells: Vec<SweepCell> =
        pool.install(|| params.par_iter().enumerate().map(|(i, p)| run_cell(spec, &obj, i, *p)).collect());
    let header =
        ["cell", "mu", "a", "b", "beta", "admissible", "termination", "n_final", "error", "N_prime", "N2", "N", "note"];
    let rows: Vec<Vec<String>> = cells
        .iter()
        .map(|c| {
            vec![
                c.index.to_string(),
                fmt_num(c.mu),
                fmt_num(c.a),
                fmt_num(c.b),
                fmt_num(c.beta),
                c.admissible.to_string(),
                c.termination.clone(),
                c.n_final.to_string(),
                fmt_num(c.error),
                fmt_num(c.n_prime),
                fmt_num(c.n2),
                fmt_num(c.n),
                c.note.clone(),
            ]
        })
        .collect();
    let bytes = csv_bytes(&header, &rows)?;
    Ok((cells, bytes))
}
