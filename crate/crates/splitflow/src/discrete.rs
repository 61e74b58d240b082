//! Inertial gradient iterations.
//!
//! Every method advances an [`IterState`] holding the two most recent iterates
//! and their gradients. With `h = √s` and `αₙ = (n − α)/n`, the generalized
//! method reads
//!
//! ```text
//! yₙ    = xₙ + αₙ(xₙ − xₙ₋₁) − λₙ(∇f(xₙ) − ∇f(xₙ₋₁)) − ωₙ∇f(xₙ)
//! xₙ₊₁ = yₙ − s∇f(yₙ) + γₙ∇f(xₙ)
//! ```
//!
//! and the named methods are fixed coefficient choices or close relatives.
//! Each step evaluates the gradient at two new points: the extrapolated point
//! and the new iterate.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::objective::{Objective, ObjectiveError};
use crate::schedule::{theta_inverse_n, Schedule, ScheduleError};
use crate::vector::{all_finite, norm};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DiscreteError {
    #[error(transparent)]
    Objective(#[from] ObjectiveError),
    #[error(transparent)]
    Schedule(#[from] ScheduleError),
    #[error("invalid run setting: {0}")]
    InvalidSetting(String),
    #[error("stopping on the distance to the minimum needs a known minimum value")]
    UnknownMinimum,
}

/// Time grid convention linking the momentum coefficient to `tₙ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Clock {
    /// `tₙ = nh`, momentum `(n − α)/n`.
    #[default]
    Natural,
    /// `tₙ = h(n + α)`, momentum `n/(n + α)`.
    Shifted,
}

impl Clock {
    pub fn time(self, n: usize, h: f64, alpha: f64) -> f64 {
        match self {
            Clock::Natural => n as f64 * h,
            Clock::Shifted => h * (n as f64 + alpha),
        }
    }

    pub fn momentum(self, n: usize, alpha: f64) -> f64 {
        let nf = n as f64;
        match self {
            Clock::Natural => (nf - alpha) / nf,
            Clock::Shifted => nf / (nf + alpha),
        }
    }
}

/// Two consecutive iterates with cached gradients.
#[derive(Debug, Clone, PartialEq)]
pub struct IterState {
    /// Index of `x_curr`.
    pub n: usize,
    pub x_prev: Vec<f64>,
    pub x_curr: Vec<f64>,
    pub grad_prev: Vec<f64>,
    pub grad_curr: Vec<f64>,
    /// Extrapolated point of the last step.
    pub y_last: Option<Vec<f64>>,
    /// Auxiliary velocity-type sequence, for methods that carry one.
    pub aux: Option<Vec<f64>>,
}

/// The iterative methods.
#[derive(Debug, Clone)]
pub enum Algorithm {
    /// Nesterov's accelerated gradient in two-sequence form.
    Agm2 { alpha: f64, clock: Clock },
    /// The generalized Hessian-damped method driven by a coefficient schedule.
    Generalized { schedule: Schedule },
    /// `(λ, ω, γ) = (0, sαₙ, s)`.
    LtSe1 { alpha: f64 },
    /// `(λ, ω, γ) = (0, sαₙ/2, s/2)`.
    LtSv2 { alpha: f64 },
    /// `(λ, ω, γ) = (0, s(1+αₙ), 0)`.
    Ardm { alpha: f64 },
    /// `(λ, ω, γ) = (0, sαₙθₙ₋₁, sθₙ)` with `θₙ = 1/n`.
    LtSe3 { alpha: f64 },
    /// `λ = βh`, `ω = βh/n`, `γ = 0`. `lagged_gradient` uses `∇f(xₙ₋₁)` in the
    /// `βh/n` term, as in the original inertial Hessian-damped scheme.
    IgahdType { alpha: f64, beta: f64, lagged_gradient: bool },
    /// Heavy ball with constant friction `γ`: momentum `1 − hγ`, gradient at `xₙ`.
    Pim { friction: f64 },
    /// Hessian-damped heavy ball: same extrapolation as `IgahdType`, gradient at `xₙ`.
    PolyakIgahd { alpha: f64, beta: f64 },
    /// Nesterov's method in position/velocity form.
    NagVelocity { alpha: f64, clock: Clock },
}

impl Algorithm {
    pub fn name(&self) -> String {
        match self {
            Algorithm::Agm2 { .. } => "agm2".into(),
            Algorithm::Generalized { schedule } => format!("lt-s-igahd[{}]", schedule.label()),
            Algorithm::LtSe1 { .. } => "lt-se1".into(),
            Algorithm::LtSv2 { .. } => "lt-sv2".into(),
            Algorithm::Ardm { .. } => "ardm".into(),
            Algorithm::LtSe3 { .. } => "lt-se3".into(),
            Algorithm::IgahdType { lagged_gradient: false, .. } => "igahd".into(),
            Algorithm::IgahdType { lagged_gradient: true, .. } => "igahd-lagged".into(),
            Algorithm::Pim { .. } => "pim".into(),
            Algorithm::PolyakIgahd { .. } => "polyak-igahd".into(),
            Algorithm::NagVelocity { .. } => "nag".into(),
        }
    }

    /// Initial state: `x₁ = x₀ − s∇f(x₀)` at index 1.
    pub fn init(&self, obj: &Objective, x0: &[f64], s: f64) -> Result<IterState, DiscreteError> {
        if !(s.is_finite() && s > 0.0) {
            return Err(DiscreteError::InvalidSetting(format!("step size must be positive, got {s}")));
        }
        let g0 = obj.grad(x0)?;
        let x1: Vec<f64> = x0.iter().zip(&g0).map(|(x, g)| x - s * g).collect();
        let g1 = obj.grad(&x1)?;
        let aux = match self {
            Algorithm::NagVelocity { alpha, clock } => {
                let h = s.sqrt();
                let c = clock.time(0, h, *alpha) / (h * (alpha - 1.0));
                Some(x0.iter().zip(&x1).map(|(a, b)| a + c * (b - a)).collect())
            }
            _ => None,
        };
        Ok(IterState {
            n: 1,
            x_prev: x0.to_vec(),
            x_curr: x1,
            grad_prev: g0,
            grad_curr: g1,
            y_last: Some(x0.to_vec()),
            aux,
        })
    }

    /// One step from index `n` to `n + 1`.
    pub fn step(&self, obj: &Objective, s: f64, st: &IterState) -> Result<IterState, DiscreteError> {
        let n = st.n;
        let nf = n as f64;
        let h = s.sqrt();
        let x = &st.x_curr;
        let xp = &st.x_prev;
        let g = &st.grad_curr;
        let gp = &st.grad_prev;
        let d = x.len();

        // Extrapolated point and the correction added after the gradient step.
        let (y, correction): (Vec<f64>, Option<(f64, &Vec<f64>)>) = match self {
            Algorithm::Agm2 { alpha, clock } => {
                let an = clock.momentum(n, *alpha);
                ((0..d).map(|i| x[i] + an * (x[i] - xp[i])).collect(), None)
            }
            Algorithm::Generalized { schedule } => {
                let c = schedule.coefficients(n)?;
                let y = (0..d)
                    .map(|i| x[i] + c.alpha_n * (x[i] - xp[i]) - c.lambda_n * (g[i] - gp[i]) - c.omega_n * g[i])
                    .collect();
                (y, Some((c.gamma_n, g)))
            }
            Algorithm::LtSe1 { alpha } => {
                let an = (nf - alpha) / nf;
                let y = (0..d).map(|i| x[i] + an * (x[i] - xp[i]) - s * an * g[i]).collect();
                (y, Some((s, g)))
            }
            Algorithm::LtSv2 { alpha } => {
                let an = (nf - alpha) / nf;
                let y = (0..d).map(|i| x[i] + an * (x[i] - xp[i]) - 0.5 * s * an * g[i]).collect();
                (y, Some((0.5 * s, g)))
            }
            Algorithm::Ardm { alpha } => {
                let an = (nf - alpha) / nf;
                let y = (0..d).map(|i| x[i] + an * (x[i] - xp[i]) - s * (1.0 + an) * g[i]).collect();
                (y, None)
            }
            Algorithm::LtSe3 { alpha } => {
                let an = (nf - alpha) / nf;
                let w = s * an * theta_inverse_n(n - 1);
                let y = (0..d).map(|i| x[i] + an * (x[i] - xp[i]) - w * g[i]).collect();
                (y, Some((s * theta_inverse_n(n), g)))
            }
            Algorithm::IgahdType { alpha, beta, lagged_gradient } => {
                let an = (nf - alpha) / nf;
                let bh = beta * h;
                let last = if *lagged_gradient { gp } else { g };
                let y = (0..d).map(|i| x[i] + an * (x[i] - xp[i]) - bh * (g[i] - gp[i]) - bh / nf * last[i]).collect();
                (y, None)
            }
            Algorithm::Pim { friction } => {
                let m = 1.0 - h * friction;
                let y: Vec<f64> = (0..d).map(|i| x[i] + m * (x[i] - xp[i])).collect();
                return Ok(self.finish_at_current(obj, s, st, y));
            }
            Algorithm::PolyakIgahd { alpha, beta } => {
                let an = (nf - alpha) / nf;
                let bh = beta * h;
                let y: Vec<f64> =
                    (0..d).map(|i| x[i] + an * (x[i] - xp[i]) - bh * (g[i] - gp[i]) - bh / nf * g[i]).collect();
                return Ok(self.finish_at_current(obj, s, st, y));
            }
            Algorithm::NagVelocity { alpha, clock } => {
                let v =
                    st.aux.as_ref().ok_or_else(|| DiscreteError::InvalidSetting("velocity sequence missing".into()))?;
                let t = clock.time(n, h, *alpha);
                let c = h * (alpha - 1.0) / t;
                let y: Vec<f64> = (0..d).map(|i| x[i] + c * (v[i] - x[i])).collect();
                let gy = obj.gradient(&y);
                let xn: Vec<f64> = (0..d).map(|i| y[i] - s * gy[i]).collect();
                let k = h * t / (alpha - 1.0);
                let vn = (0..d).map(|i| v[i] - k * gy[i]).collect();
                let gn = obj.gradient(&xn);
                return Ok(IterState {
                    n: n + 1,
                    x_prev: x.clone(),
                    x_curr: xn,
                    grad_prev: g.clone(),
                    grad_curr: gn,
                    y_last: Some(y),
                    aux: Some(vn),
                });
            }
        };

        let gy = obj.gradient(&y);
        let xn: Vec<f64> = match correction {
            Some((c, gc)) => (0..d).map(|i| y[i] - s * gy[i] + c * gc[i]).collect(),
            None => (0..d).map(|i| y[i] - s * gy[i]).collect(),
        };
        let gn = obj.gradient(&xn);
        Ok(IterState {
            n: n + 1,
            x_prev: x.clone(),
            x_curr: xn,
            grad_prev: g.clone(),
            grad_curr: gn,
            y_last: Some(y),
            aux: None,
        })
    }

    /// Gradient step from `y` using the cached gradient at the current iterate.
    fn finish_at_current(&self, obj: &Objective, s: f64, st: &IterState, y: Vec<f64>) -> IterState {
        let g = &st.grad_curr;
        let xn: Vec<f64> = y.iter().zip(g).map(|(yi, gi)| yi - s * gi).collect();
        let gn = obj.gradient(&xn);
        IterState {
            n: st.n + 1,
            x_prev: st.x_curr.clone(),
            x_curr: xn,
            grad_prev: g.clone(),
            grad_curr: gn,
            y_last: Some(y),
            aux: None,
        }
    }
}

/// Quantity compared against the tolerance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StopKind {
    /// `|f(xₙ) − f(xₙ₋₁)| ≤ ε`.
    ConsecutiveF,
    /// `f(xₙ) − min f ≤ ε`.
    KnownMinF,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StoppingRule {
    pub kind: StopKind,
    pub epsilon: f64,
    /// Largest index that may be produced.
    pub max_iter: usize,
    /// Extra requirement `n > min_index`.
    pub min_index: Option<f64>,
}

impl StoppingRule {
    pub fn new(kind: StopKind, epsilon: f64, max_iter: usize) -> Self {
        Self { kind, epsilon, max_iter, min_index: None }
    }

    pub fn fixed(max_iter: usize) -> Self {
        Self { kind: StopKind::ConsecutiveF, epsilon: -1.0, max_iter, min_index: None }
    }

    pub fn with_min_index(mut self, n: f64) -> Self {
        self.min_index = Some(n);
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Termination {
    ToleranceMet,
    MaxIter,
    Diverged,
}

impl std::fmt::Display for Termination {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Termination::ToleranceMet => "tolerance-met",
            Termination::MaxIter => "max-iter",
            Termination::Diverged => "diverged",
        })
    }
}

/// Iterates `x₀ … x_M` with values and gradients.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub s: f64,
    pub xs: Vec<Vec<f64>>,
    pub grads: Vec<Vec<f64>>,
    pub f: Vec<f64>,
    /// `f(xₙ) − min f`, NaN when the minimum is unknown.
    pub gap: Vec<f64>,
    /// Auxiliary sequence, when the method carries one (index-aligned from 1).
    pub aux: Vec<Vec<f64>>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.xs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }

    pub fn last_index(&self) -> usize {
        self.xs.len() - 1
    }

    /// `(xₙ − xₙ₋₁)/√s`, zero at `n = 0`.
    pub fn velocity(&self, n: usize) -> Vec<f64> {
        if n == 0 {
            return vec![0.0; self.xs[0].len()];
        }
        let h = self.s.sqrt();
        self.xs[n].iter().zip(&self.xs[n - 1]).map(|(a, b)| (a - b) / h).collect()
    }

    pub fn grad_norm(&self, n: usize) -> f64 {
        norm(&self.grads[n])
    }

    fn push(&mut self, obj: &Objective, x: &[f64], g: &[f64], aux: Option<&Vec<f64>>) {
        self.f.push(obj.value(x));
        self.gap.push(obj.gap(x).unwrap_or(f64::NAN));
        self.xs.push(x.to_vec());
        self.grads.push(g.to_vec());
        if let Some(a) = aux {
            self.aux.push(a.clone());
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub algorithm: String,
    pub termination: Termination,
    pub n_final: usize,
    /// Last value compared against the tolerance.
    pub error_final: f64,
    pub f_final: f64,
    pub x_final: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub trajectory: Trajectory,
    pub report: RunReport,
}

/// Runs `alg` from `x0` until the stopping rule fires, the iteration cap is
/// reached, or a non-finite value appears.
pub fn run(
    alg: &Algorithm,
    obj: &Objective,
    x0: &[f64],
    s: f64,
    stop: &StoppingRule,
) -> Result<RunOutcome, DiscreteError> {
    if stop.max_iter == 0 {
        return Err(DiscreteError::InvalidSetting("max_iter must be at least 1".into()));
    }
    if stop.kind == StopKind::KnownMinF && obj.min_value().is_none() && stop.epsilon >= 0.0 {
        return Err(DiscreteError::UnknownMinimum);
    }
    let mut traj = Trajectory { s, xs: Vec::new(), grads: Vec::new(), f: Vec::new(), gap: Vec::new(), aux: Vec::new() };
    let mut st = alg.init(obj, x0, s)?;
    traj.push(obj, &st.x_prev, &st.grad_prev, None);

    let mut termination = Termination::MaxIter;
    let mut error = f64::NAN;
    loop {
        let fx = obj.value(&st.x_curr);
        if !(all_finite(&st.x_curr) && all_finite(&st.grad_curr) && fx.is_finite()) {
            termination = Termination::Diverged;
            break;
        }
        traj.push(obj, &st.x_curr, &st.grad_curr, st.aux.as_ref());
        let n = st.n;
        error = match stop.kind {
            StopKind::ConsecutiveF => (traj.f[n] - traj.f[n - 1]).abs(),
            StopKind::KnownMinF => traj.gap[n].abs(),
        };
        let past_index = stop.min_index.is_none_or(|m| n as f64 > m);
        if error <= stop.epsilon && past_index {
            termination = Termination::ToleranceMet;
            break;
        }
        if n >= stop.max_iter {
            break;
        }
        st = alg.step(obj, s, &st)?;
    }
    let n_final = traj.last_index();
    let report = RunReport {
        algorithm: alg.name(),
        termination,
        n_final,
        error_final: error,
        f_final: traj.f[n_final],
        x_final: traj.xs[n_final].clone(),
    };
    Ok(RunOutcome { trajectory: traj, report })
}

/// Iterates `x₀ … x_{n_steps}` without stopping tests.
pub fn iterate(
    alg: &Algorithm,
    obj: &Objective,
    x0: &[f64],
    s: f64,
    n_steps: usize,
) -> Result<Vec<Vec<f64>>, DiscreteError> {
    let mut st = alg.init(obj, x0, s)?;
    let mut out = vec![st.x_prev.clone(), st.x_curr.clone()];
    while st.n < n_steps {
        st = alg.step(obj, s, &st)?;
        out.push(st.x_curr.clone());
    }
    out.truncate(n_steps + 1);
    Ok(out)
}
