use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::discrete::{Algorithm, Clock, StopKind, StoppingRule};
use crate::objective::{Objective, ObjectiveSpec};
use crate::schedule::{Schedule, ScheduleKind};

/// Which per-iterate columns the trajectory CSV carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RecordFlags {
    pub iterates: bool,
    pub energy: bool,
    pub velocity: bool,
}

impl Default for RecordFlags {
    fn default() -> Self {
        Self { iterates: true, energy: true, velocity: true }
    }
}

/// One run, as read from JSON or assembled from flags.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub objective: ObjectiveSpec,
    pub algorithm: String,
    /// Coefficient schedule for `lt-s-igahd`; ignored by the other methods.
    pub schedule: Option<ScheduleKind>,
    /// Hessian damping weight for `igahd`, `igahd-lagged` and `polyak-igahd`.
    pub beta: f64,
    /// Friction for `pim`.
    pub friction: f64,
    pub clock: Clock,
    pub s: f64,
    pub alpha: f64,
    pub x0: Vec<f64>,
    pub epsilon: f64,
    pub stop_kind: StopKind,
    pub max_iter: usize,
    /// Also require `n > N` before the tolerance test may stop the run.
    pub require_threshold: bool,
    pub record: RecordFlags,
    pub seed: u64,
    pub out_dir: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            objective: ObjectiveSpec::F2,
            algorithm: "agm2".into(),
            schedule: None,
            beta: 0.0,
            friction: 0.0,
            clock: Clock::Natural,
            s: 0.025,
            alpha: 3.0,
            x0: vec![1.0, -2.0],
            epsilon: 1e-10,
            stop_kind: StopKind::ConsecutiveF,
            max_iter: 100_000,
            require_threshold: false,
            record: RecordFlags::default(),
            seed: 0,
            out_dir: None,
        }
    }
}

/// A config whose pieces have been built and checked.
#[derive(Debug, Clone)]
pub(crate) struct Prepared {
    pub objective: Objective,
    pub algorithm: Algorithm,
    pub stop: StoppingRule,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, HarnessError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn from_file(path: &Path) -> Result<Self, HarnessError> {
        let text =
            std::fs::read_to_string(path).map_err(|source| HarnessError::Io { path: path.to_path_buf(), source })?;
        Self::from_json(&text)
    }

    pub fn build_objective(&self) -> Result<Objective, HarnessError> {
        Ok(self.objective.build()?)
    }

    pub fn build_algorithm(&self) -> Result<Algorithm, HarnessError> {
        let alpha = self.alpha;
        let alg = match self.algorithm.to_ascii_lowercase().as_str() {
            "agm2" => Algorithm::Agm2 { alpha, clock: self.clock },
            "nag" => Algorithm::NagVelocity { alpha, clock: self.clock },
            "lt-s-igahd" | "generalized" => {
                let kind = self
                    .schedule
                    .ok_or_else(|| HarnessError::Config("algorithm lt-s-igahd needs a schedule".into()))?;
                Algorithm::Generalized { schedule: Schedule::new(kind, self.s, alpha)? }
            }
            "lt-se1" => Algorithm::LtSe1 { alpha },
            "lt-sv2" => Algorithm::LtSv2 { alpha },
            "ardm" => Algorithm::Ardm { alpha },
            "lt-se3" => Algorithm::LtSe3 { alpha },
            "igahd" | "igahd-lagged" => Algorithm::IgahdType {
                alpha,
                beta: self.beta,
                lagged_gradient: self.algorithm.eq_ignore_ascii_case("igahd-lagged"),
            },
            "pim" => Algorithm::Pim { friction: self.friction },
            "polyak-igahd" => Algorithm::PolyakIgahd { alpha, beta: self.beta },
            other => return Err(HarnessError::UnknownAlgorithm(other.to_string())),
        };
        Ok(alg)
    }

    /// Builds everything and checks `0 < s < 1/L`, the starting point and the
    /// stopping settings.
    pub(crate) fn prepare(&self) -> Result<Prepared, HarnessError> {
        let objective = self.build_objective()?;
        if self.x0.len() != objective.dim() {
            return Err(HarnessError::Config(format!(
                "x0 has {} entries, objective {} has dimension {}",
                self.x0.len(),
                objective.name(),
                objective.dim()
            )));
        }
        if self.x0.iter().any(|v| !v.is_finite()) {
            return Err(HarnessError::Config("x0 must be finite".into()));
        }
        let l = objective.lipschitz();
        if !(self.s > 0.0 && self.s.is_finite() && self.s * l < 1.0) {
            return Err(HarnessError::Config(format!(
                "step size must satisfy 0 < s < 1/L = {}, got {}",
                1.0 / l,
                self.s
            )));
        }
        if !(self.alpha.is_finite() && self.alpha > 1.0) {
            return Err(HarnessError::Config(format!("alpha must exceed 1, got {}", self.alpha)));
        }
        if !(self.epsilon.is_finite() && self.epsilon >= 0.0) {
            return Err(HarnessError::Config(format!("epsilon must be finite and nonnegative, got {}", self.epsilon)));
        }
        if self.max_iter == 0 {
            return Err(HarnessError::Config("max_iter must be at least 1".into()));
        }
        let algorithm = self.build_algorithm()?;
        let stop = StoppingRule::new(self.stop_kind, self.epsilon, self.max_iter);
        Ok(Prepared { objective, algorithm, stop })
    }
}

/// Parses `"1,-2"` into a point.
pub fn parse_point(text: &str) -> Result<Vec<f64>, HarnessError> {
    text.split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|e| HarnessError::Config(format!("bad coordinate '{p}': {e}"))))
        .collect()
}

/// Parses `label[:key=value,...]`, for instance `e24:mu=0.01,a=4,b=10`.
/// Missing parameters default to 0.
pub fn parse_schedule(text: &str) -> Result<ScheduleKind, HarnessError> {
    let (label, params) = match text.split_once(':') {
        Some((l, p)) => (l.trim(), p),
        None => (text.trim(), ""),
    };
    let (mut mu, mut a, mut b, mut beta) = (0.0, 0.0, 0.0, 0.0);
    for item in params.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (k, v) = item
            .split_once('=')
            .ok_or_else(|| HarnessError::Config(format!("schedule parameter '{item}' is not key=value")))?;
        let v: f64 = v.trim().parse().map_err(|e| HarnessError::Config(format!("schedule parameter '{item}': {e}")))?;
        match k.trim() {
            "mu" => mu = v,
            "a" => a = v,
            "b" => b = v,
            "beta" => beta = v,
            other => return Err(HarnessError::Config(format!("unknown schedule parameter '{other}'"))),
        }
    }
    Ok(ScheduleKind::from_label(label, mu, a, b, beta)?)
}
