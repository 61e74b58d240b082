//! Continuous-time systems, splitting compositions and reference integrators.
//!
//! A [`SplitSystem`] is a list of sub-fields on the phase space `(x, v)`, each
//! paired with the one-step [`Rule`] that discretizes it. A Lie–Trotter step
//! applies the parts in list order, the first element acting first. All parts
//! of one step see the same time `tₙ`.
//!
//! [`Construction`] assembles the splittings whose Lie–Trotter steps reproduce
//! the discrete methods of [`crate::discrete`] up to rounding.

use std::sync::Arc;

use thiserror::Error;

use crate::objective::{GradientFn, Objective, ObjectiveError, ValueFn};
use crate::schedule::{theta_inverse_n, Coefficients, Schedule, ScheduleError};
use crate::vector::{axpy, sub};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ContinuousError {
    #[error("rule `{0}` needs a separable sub-field")]
    NotSeparable(&'static str),
    #[error(transparent)]
    Objective(#[from] ObjectiveError),
    #[error(transparent)]
    Schedule(#[from] ScheduleError),
    #[error("invalid setting: {0}")]
    InvalidSetting(String),
}

/// Point `(x, v)` in phase space.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseState {
    pub x: Vec<f64>,
    pub v: Vec<f64>,
}

impl PhaseState {
    pub fn new(x: Vec<f64>, v: Vec<f64>) -> Self {
        Self { x, v }
    }
}

/// `(t, state) ↦ (ẋ, v̇)`.
pub type FieldFn = Arc<dyn Fn(f64, &PhaseState) -> PhaseState + Send + Sync>;
/// One argument half of a separable field.
pub type PartialFn = Arc<dyn Fn(f64, &[f64]) -> Vec<f64> + Send + Sync>;
/// Exact flow `(t, h, state) ↦ state`.
pub type FlowFn = Arc<dyn Fn(f64, f64, &PhaseState) -> PhaseState + Send + Sync>;

#[derive(Clone)]
pub enum SubField {
    General(FieldFn),
    /// `ẋ = drift(t, v)`, `v̇ = force(t, x)`.
    Separable {
        drift: PartialFn,
        force: PartialFn,
    },
}

impl SubField {
    pub fn eval(&self, t: f64, st: &PhaseState) -> PhaseState {
        match self {
            SubField::General(f) => f(t, st),
            SubField::Separable { drift, force } => PhaseState::new(drift(t, &st.v), force(t, &st.x)),
        }
    }
}

#[derive(Clone)]
pub enum Rule {
    ForwardEuler,
    /// Position first, then velocity at the new position.
    SymplecticEuler1,
    /// Velocity first, then position with the new velocity.
    SymplecticEuler2,
    /// Position half steps around a full velocity step.
    Verlet1,
    /// Velocity half steps around a full position step.
    Verlet2,
    Exact(FlowFn),
}

impl Rule {
    pub fn name(&self) -> &'static str {
        match self {
            Rule::ForwardEuler => "forward-euler",
            Rule::SymplecticEuler1 => "symplectic-euler-1",
            Rule::SymplecticEuler2 => "symplectic-euler-2",
            Rule::Verlet1 => "verlet-1",
            Rule::Verlet2 => "verlet-2",
            Rule::Exact(_) => "exact",
        }
    }
}

#[derive(Clone)]
pub struct SplitPart {
    pub field: SubField,
    pub rule: Rule,
}

impl SplitPart {
    pub fn new(field: SubField, rule: Rule) -> Self {
        Self { field, rule }
    }

    /// Advances `st` by `h` with this part's rule, fields evaluated at `t`.
    pub fn advance(&self, t: f64, h: f64, st: &PhaseState) -> Result<PhaseState, ContinuousError> {
        match (&self.rule, &self.field) {
            (Rule::Exact(flow), _) => Ok(flow(t, h, st)),
            (Rule::ForwardEuler, f) => {
                let d = f.eval(t, st);
                Ok(PhaseState::new(axpy(&st.x, h, &d.x), axpy(&st.v, h, &d.v)))
            }
            (rule, SubField::Separable { drift, force }) => Ok(match rule {
                Rule::SymplecticEuler1 => {
                    let x = axpy(&st.x, h, &drift(t, &st.v));
                    let v = axpy(&st.v, h, &force(t, &x));
                    PhaseState::new(x, v)
                }
                Rule::SymplecticEuler2 => {
                    let v = axpy(&st.v, h, &force(t, &st.x));
                    let x = axpy(&st.x, h, &drift(t, &v));
                    PhaseState::new(x, v)
                }
                Rule::Verlet1 => {
                    let xm = axpy(&st.x, 0.5 * h, &drift(t, &st.v));
                    let v = axpy(&st.v, h, &force(t, &xm));
                    let x = axpy(&xm, 0.5 * h, &drift(t, &v));
                    PhaseState::new(x, v)
                }
                Rule::Verlet2 => {
                    let vm = axpy(&st.v, 0.5 * h, &force(t, &st.x));
                    let x = axpy(&st.x, h, &drift(t, &vm));
                    let v = axpy(&vm, 0.5 * h, &force(t, &x));
                    PhaseState::new(x, v)
                }
                Rule::ForwardEuler | Rule::Exact(_) => unreachable!(),
            }),
            (rule, SubField::General(_)) => Err(ContinuousError::NotSeparable(rule.name())),
        }
    }
}

/// Ordered list of split parts.
#[derive(Clone, Default)]
pub struct SplitSystem {
    pub parts: Vec<SplitPart>,
}

impl SplitSystem {
    pub fn new(parts: Vec<SplitPart>) -> Self {
        Self { parts }
    }

    /// Sum of the sub-fields.
    pub fn full_field(&self, t: f64, st: &PhaseState) -> PhaseState {
        let mut out = PhaseState::new(vec![0.0; st.x.len()], vec![0.0; st.v.len()]);
        for p in &self.parts {
            let d = p.field.eval(t, st);
            out.x = crate::vector::add(&out.x, &d.x);
            out.v = crate::vector::add(&out.v, &d.v);
        }
        out
    }

    /// Lie–Trotter composition: each part once, in order.
    pub fn lie_trotter_step(&self, t: f64, h: f64, st: &PhaseState) -> Result<PhaseState, ContinuousError> {
        let mut cur = st.clone();
        for p in &self.parts {
            cur = p.advance(t, h, &cur)?;
        }
        Ok(cur)
    }

    /// Strang composition: half steps of all but the last part, a full step of
    /// the last part, then the half steps in reverse.
    pub fn strang_step(&self, t: f64, h: f64, st: &PhaseState) -> Result<PhaseState, ContinuousError> {
        let Some((last, rest)) = self.parts.split_last() else {
            return Ok(st.clone());
        };
        let mut cur = st.clone();
        for p in rest {
            cur = p.advance(t, 0.5 * h, &cur)?;
        }
        cur = last.advance(t, h, &cur)?;
        for p in rest.iter().rev() {
            cur = p.advance(t, 0.5 * h, &cur)?;
        }
        Ok(cur)
    }
}

/// Separable Hamiltonian `H(x, v) = T(v) + U(x)`.
#[derive(Clone)]
pub struct Hamiltonian {
    pub kinetic: ValueFn,
    pub grad_kinetic: GradientFn,
    pub potential: ValueFn,
    pub grad_potential: GradientFn,
}

impl Hamiltonian {
    /// `T = ½‖v‖²`, `U = f`.
    pub fn from_objective(obj: &Objective) -> Self {
        let a = obj.clone();
        let b = obj.clone();
        Self {
            kinetic: Arc::new(|v| 0.5 * crate::vector::dot(v, v)),
            grad_kinetic: Arc::new(|v| v.to_vec()),
            potential: Arc::new(move |x| a.value(x)),
            grad_potential: Arc::new(move |x| b.gradient(x)),
        }
    }

    /// Unit harmonic oscillator `½v² + ½x²`.
    pub fn oscillator() -> Self {
        Self {
            kinetic: Arc::new(|v| 0.5 * crate::vector::dot(v, v)),
            grad_kinetic: Arc::new(|v| v.to_vec()),
            potential: Arc::new(|x| 0.5 * crate::vector::dot(x, x)),
            grad_potential: Arc::new(|x| x.to_vec()),
        }
    }

    pub fn energy(&self, st: &PhaseState) -> f64 {
        (self.kinetic)(&st.v) + (self.potential)(&st.x)
    }

    /// Hamiltonian vector field as a separable sub-field.
    pub fn field(&self) -> SubField {
        let gk = self.grad_kinetic.clone();
        let gp = self.grad_potential.clone();
        SubField::Separable {
            drift: Arc::new(move |_, v| gk(v)),
            force: Arc::new(move |_, x| gp(x).into_iter().map(|g| -g).collect()),
        }
    }

    pub fn step(&self, rule: Rule, h: f64, st: &PhaseState) -> Result<PhaseState, ContinuousError> {
        SplitPart::new(self.field(), rule).advance(0.0, h, st)
    }
}

/// Time-stepping trajectory of a phase-space ODE.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseTrajectory {
    pub t: Vec<f64>,
    pub x: Vec<Vec<f64>>,
    pub v: Vec<Vec<f64>>,
}

/// One classical Runge–Kutta step for `y' = f(t, y)`.
pub fn rk4_step<F>(f: &F, t: f64, y: &[f64], dt: f64) -> Vec<f64>
where
    F: Fn(f64, &[f64]) -> Vec<f64>,
{
    let k1 = f(t, y);
    let k2 = f(t + 0.5 * dt, &axpy(y, 0.5 * dt, &k1));
    let k3 = f(t + 0.5 * dt, &axpy(y, 0.5 * dt, &k2));
    let k4 = f(t + dt, &axpy(y, dt, &k3));
    (0..y.len()).map(|i| y[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])).collect()
}

fn step_count(t0: f64, t1: f64, dt: f64) -> Result<usize, ContinuousError> {
    if !(dt > 0.0 && t1 > t0 && t0.is_finite() && t1.is_finite()) {
        return Err(ContinuousError::InvalidSetting(format!(
            "need t1 > t0 and dt > 0 (t0 = {t0}, t1 = {t1}, dt = {dt})"
        )));
    }
    let n = ((t1 - t0) / dt).round();
    if ((t1 - t0) / dt - n).abs() > 1e-9 * n.max(1.0) {
        return Err(ContinuousError::InvalidSetting(format!("dt = {dt} does not divide [{t0}, {t1}]")));
    }
    Ok(n as usize)
}

fn integrate_phase<F>(
    field: F,
    dim: usize,
    x0: &[f64],
    v0: &[f64],
    t0: f64,
    t1: f64,
    dt: f64,
) -> Result<PhaseTrajectory, ContinuousError>
where
    F: Fn(f64, &[f64]) -> Vec<f64>,
{
    let steps = step_count(t0, t1, dt)?;
    let mut y: Vec<f64> = x0.iter().chain(v0).copied().collect();
    let mut out = PhaseTrajectory { t: vec![t0], x: vec![x0.to_vec()], v: vec![v0.to_vec()] };
    for k in 0..steps {
        let t = t0 + k as f64 * dt;
        y = rk4_step(&field, t, &y, dt);
        out.t.push(t0 + (k + 1) as f64 * dt);
        out.x.push(y[..dim].to_vec());
        out.v.push(y[dim..].to_vec());
    }
    Ok(out)
}

fn check_dims(obj: &Objective, a: &[f64], b: &[f64]) -> Result<(), ContinuousError> {
    obj.grad(a)?;
    if b.len() != obj.dim() {
        return Err(ObjectiveError::DimensionMismatch { expected: obj.dim(), got: b.len() }.into());
    }
    Ok(())
}

/// RK4 on the first-order system
/// `ẋ = ((α−1)/t)(v − x) − β∇f(x)`, `v̇ = −(t/(α−1))∇f(x)`.
#[allow(clippy::too_many_arguments)]
pub fn integrate_first_order(
    obj: &Objective,
    x0: &[f64],
    v0: &[f64],
    alpha: f64,
    beta: f64,
    t0: f64,
    t1: f64,
    dt: f64,
) -> Result<PhaseTrajectory, ContinuousError> {
    check_dims(obj, x0, v0)?;
    if t0 <= 0.0 || alpha <= 1.0 {
        return Err(ContinuousError::InvalidSetting("need t0 > 0 and alpha > 1".into()));
    }
    let d = obj.dim();
    let field = |t: f64, y: &[f64]| {
        let (x, v) = y.split_at(d);
        let g = obj.gradient(x);
        let c = (alpha - 1.0) / t;
        let k = t / (alpha - 1.0);
        let mut out = Vec::with_capacity(2 * d);
        out.extend((0..d).map(|i| c * (v[i] - x[i]) - beta * g[i]));
        out.extend((0..d).map(|i| -k * g[i]));
        out
    };
    integrate_phase(field, d, x0, v0, t0, t1, dt)
}

/// RK4 on `ẍ + (α/t)ẋ + β∇²f(x)ẋ + (1 + β/t)∇f(x) = 0`; the returned
/// velocity component is `ẋ`.
#[allow(clippy::too_many_arguments)]
pub fn integrate_hessian_damped(
    obj: &Objective,
    x0: &[f64],
    xdot0: &[f64],
    alpha: f64,
    beta: f64,
    t0: f64,
    t1: f64,
    dt: f64,
) -> Result<PhaseTrajectory, ContinuousError> {
    check_dims(obj, x0, xdot0)?;
    obj.hessian_vec(x0, xdot0)?;
    if t0 <= 0.0 {
        return Err(ContinuousError::InvalidSetting("need t0 > 0".into()));
    }
    let d = obj.dim();
    let field = |t: f64, y: &[f64]| {
        let (x, xd) = y.split_at(d);
        let g = obj.gradient(x);
        let hv = obj.hessian_vec(x, xd).unwrap_or_else(|_| vec![f64::NAN; d]);
        let mut out = Vec::with_capacity(2 * d);
        out.extend_from_slice(xd);
        out.extend((0..d).map(|i| -(alpha / t) * xd[i] - beta * hv[i] - (1.0 + beta / t) * g[i]));
        out
    };
    integrate_phase(field, d, x0, xdot0, t0, t1, dt)
}

/// `v = x + (t/(α−1))(ẋ + β∇f(x))`, mapping second-order data to the first-order system.
pub fn first_order_velocity(obj: &Objective, t: f64, x: &[f64], xdot: &[f64], alpha: f64, beta: f64) -> Vec<f64> {
    let g = obj.gradient(x);
    let k = t / (alpha - 1.0);
    (0..x.len()).map(|i| x[i] + k * (xdot[i] + beta * g[i])).collect()
}

/// RK4 on the first-order form of `ẍ + αẋ + β∇²f(x)ẋ + ∇f(x) = 0` (constant damping):
/// `ẋ = −β∇f(x) − (α − 1/β)x − v/β`, `v̇ = −(α − 1/β)x − v/β`.
#[allow(clippy::too_many_arguments)]
pub fn integrate_constant_damping_first_order(
    obj: &Objective,
    x0: &[f64],
    v0: &[f64],
    alpha: f64,
    beta: f64,
    t0: f64,
    t1: f64,
    dt: f64,
) -> Result<PhaseTrajectory, ContinuousError> {
    check_dims(obj, x0, v0)?;
    if beta <= 0.0 {
        return Err(ContinuousError::InvalidSetting("beta must be positive".into()));
    }
    let d = obj.dim();
    let c = alpha - 1.0 / beta;
    let field = |_: f64, y: &[f64]| {
        let (x, v) = y.split_at(d);
        let g = obj.gradient(x);
        let mut out = Vec::with_capacity(2 * d);
        out.extend((0..d).map(|i| -beta * g[i] - c * x[i] - v[i] / beta));
        out.extend((0..d).map(|i| -c * x[i] - v[i] / beta));
        out
    };
    integrate_phase(field, d, x0, v0, t0, t1, dt)
}

/// RK4 on `ẍ + αẋ + β∇²f(x)ẋ + ∇f(x) = 0`.
#[allow(clippy::too_many_arguments)]
pub fn integrate_constant_damping(
    obj: &Objective,
    x0: &[f64],
    xdot0: &[f64],
    alpha: f64,
    beta: f64,
    t0: f64,
    t1: f64,
    dt: f64,
) -> Result<PhaseTrajectory, ContinuousError> {
    check_dims(obj, x0, xdot0)?;
    obj.hessian_vec(x0, xdot0)?;
    let d = obj.dim();
    let field = |_: f64, y: &[f64]| {
        let (x, xd) = y.split_at(d);
        let g = obj.gradient(x);
        let hv = obj.hessian_vec(x, xd).unwrap_or_else(|_| vec![f64::NAN; d]);
        let mut out = Vec::with_capacity(2 * d);
        out.extend_from_slice(xd);
        out.extend((0..d).map(|i| -alpha * xd[i] - beta * hv[i] - g[i]));
        out
    };
    integrate_phase(field, d, x0, xdot0, t0, t1, dt)
}

/// Splittings that reproduce the discrete methods.
#[derive(Debug, Clone)]
pub enum Construction {
    /// Three-way forward-Euler split of the first-order system; matches Nesterov's method.
    Nesterov,
    /// Hessian-damped split; matches the inertial Hessian-damped method.
    Igahd {
        beta: f64,
    },
    /// General split; matches the generalized method for any schedule.
    Generalized {
        schedule: Schedule,
    },
    /// Friction then symplectic Euler; matches the heavy-ball method.
    Pim {
        friction: f64,
    },
    Ardm,
    LtSe1,
    LtSv2,
    LtSe3,
}

fn neg(g: Vec<f64>) -> Vec<f64> {
    g.into_iter().map(|v| -v).collect()
}

/// Index of the time `t` on the grid `tₙ = nh`.
fn grid_index(t: f64, h: f64) -> usize {
    (t / h).round().max(0.0) as usize
}

/// `∇²f(x) v` approximated by `(∇f(x) − ∇f(x − hv))/h`.
fn hessian_backward(obj: &Objective, x: &[f64], v: &[f64], h: f64) -> Vec<f64> {
    let g = obj.gradient(x);
    let gb = obj.gradient(&axpy(x, -h, v));
    g.iter().zip(&gb).map(|(a, b)| (a - b) / h).collect()
}

impl Construction {
    pub fn name(&self) -> String {
        match self {
            Construction::Nesterov => "nesterov-split".into(),
            Construction::Igahd { .. } => "igahd-split".into(),
            Construction::Generalized { schedule } => format!("lt-s-igahd-split[{}]", schedule.label()),
            Construction::Pim { .. } => "pim-split".into(),
            Construction::Ardm => "ardm-split".into(),
            Construction::LtSe1 => "lt-se1-split".into(),
            Construction::LtSv2 => "lt-sv2-split".into(),
            Construction::LtSe3 => "lt-se3-split".into(),
        }
    }

    /// Split system for step `h` and inertial parameter `alpha`.
    /// `n_final` bounds the indices at which schedule coefficients are needed.
    pub fn system(&self, obj: &Objective, h: f64, alpha: f64, n_final: usize) -> Result<SplitSystem, ContinuousError> {
        let o = obj.clone();
        let conservative = |rule: Rule| {
            let o = obj.clone();
            SplitPart::new(
                SubField::Separable {
                    drift: Arc::new(|_, v| v.to_vec()),
                    force: Arc::new(move |_, x| neg(o.gradient(x))),
                },
                rule,
            )
        };
        let general = |f: FieldFn| SplitPart::new(SubField::General(f), Rule::ForwardEuler);
        let zeros = |n: usize| vec![0.0; n];

        Ok(match self {
            Construction::Nesterov => {
                let o2 = obj.clone();
                let beta = h;
                SplitSystem::new(vec![
                    general(Arc::new(move |t, st| {
                        let c = (alpha - 1.0) / t;
                        PhaseState::new((0..st.x.len()).map(|i| c * (st.v[i] - st.x[i])).collect(), zeros(st.v.len()))
                    })),
                    general(Arc::new(move |t, st| {
                        let k = t / (alpha - 1.0);
                        let g = o.gradient(&st.x);
                        PhaseState::new(zeros(st.x.len()), g.iter().map(|gi| -k * gi).collect())
                    })),
                    general(Arc::new(move |_, st| {
                        let g = o2.gradient(&st.x);
                        PhaseState::new(g.iter().map(|gi| -beta * gi).collect(), zeros(st.v.len()))
                    })),
                ])
            }
            Construction::Igahd { beta } => {
                let beta = *beta;
                SplitSystem::new(vec![
                    general(Arc::new(move |t, st| {
                        let (x, v) = (&st.x, &st.v);
                        let g = o.gradient(x);
                        let hv = hessian_backward(&o, x, v, h);
                        let m = 1.0 - alpha * h / t;
                        let a: Vec<f64> = (0..x.len())
                            .map(|i| x[i] + h * m * v[i] - beta * h * h * hv[i] - beta * h * h / t * g[i])
                            .collect();
                        let ga = o.gradient(&a);
                        let dv = (0..x.len())
                            .map(|i| -(alpha / t) * v[i] - beta * hv[i] - beta / t * g[i] - ga[i] + g[i])
                            .collect();
                        PhaseState::new(zeros(x.len()), dv)
                    })),
                    conservative(Rule::SymplecticEuler2),
                ])
            }
            Construction::Generalized { schedule } => {
                let table: Vec<Coefficients> =
                    (0..=n_final.max(1)).map(|n| schedule.coefficients(n.max(1))).collect::<Result<_, _>>()?;
                let table = Arc::new(table);
                let s = h * h;
                SplitSystem::new(vec![
                    general(Arc::new(move |t, st| {
                        let c = table[grid_index(t, h).min(table.len() - 1)];
                        let (x, v) = (&st.x, &st.v);
                        let g = o.gradient(x);
                        let hv = hessian_backward(&o, x, v, h);
                        let m = 1.0 - alpha * h / t;
                        let a: Vec<f64> = (0..x.len())
                            .map(|i| x[i] + h * m * v[i] - h * c.lambda_n * hv[i] - c.omega_n * g[i])
                            .collect();
                        let ga = o.gradient(&a);
                        let dv = (0..x.len())
                            .map(|i| {
                                -(alpha / t) * v[i] - c.lambda_n / h * hv[i] - c.omega_n / s * g[i]
                                    + c.gamma_n / s * g[i]
                                    - ga[i]
                                    + g[i]
                            })
                            .collect();
                        PhaseState::new(zeros(x.len()), dv)
                    })),
                    conservative(Rule::SymplecticEuler2),
                ])
            }
            Construction::Pim { friction } => {
                let friction = *friction;
                SplitSystem::new(vec![
                    general(Arc::new(move |_, st| {
                        PhaseState::new(zeros(st.x.len()), st.v.iter().map(|v| -friction * v).collect())
                    })),
                    conservative(Rule::SymplecticEuler2),
                ])
            }
            Construction::Ardm => SplitSystem::new(vec![
                general(Arc::new(move |t, st| {
                    let (x, v) = (&st.x, &st.v);
                    let g = o.gradient(x);
                    let m = 1.0 - alpha * h / t;
                    let w = 2.0 - alpha * h / t;
                    let a: Vec<f64> = (0..x.len()).map(|i| x[i] + h * m * v[i] - h * h * w * g[i]).collect();
                    let ga = o.gradient(&a);
                    let dv = (0..x.len()).map(|i| -(alpha / t) * v[i] + g[i] - ga[i] - w * g[i]).collect();
                    PhaseState::new(zeros(x.len()), dv)
                })),
                conservative(Rule::SymplecticEuler2),
            ]),
            Construction::LtSe1 | Construction::LtSv2 => {
                let rule = if matches!(self, Construction::LtSe1) { Rule::SymplecticEuler1 } else { Rule::Verlet2 };
                SplitSystem::new(vec![
                    general(Arc::new(move |t, st| {
                        let (x, v) = (&st.x, &st.v);
                        let g = o.gradient(x);
                        let ga = o.gradient(&axpy(x, h - alpha * h * h / t, v));
                        let dv = (0..x.len()).map(|i| -(alpha / t) * v[i] + g[i] - ga[i]).collect();
                        PhaseState::new(zeros(x.len()), dv)
                    })),
                    conservative(rule),
                ])
            }
            Construction::LtSe3 => {
                let o2 = obj.clone();
                SplitSystem::new(vec![
                    general(Arc::new(move |t, st| {
                        let (x, v) = (&st.x, &st.v);
                        let th = theta_inverse_n(grid_index(t, h));
                        let g = o.gradient(x);
                        let ga = o.gradient(&axpy(x, h - alpha * h * h / t, v));
                        let dv = (0..x.len()).map(|i| -(alpha / t) * v[i] + th * g[i] - ga[i]).collect();
                        PhaseState::new(zeros(x.len()), dv)
                    })),
                    SplitPart::new(
                        SubField::Separable {
                            drift: Arc::new(|_, v| v.to_vec()),
                            force: Arc::new(move |t, x| {
                                let th = theta_inverse_n(grid_index(t, h));
                                o2.gradient(x).into_iter().map(|g| -th * g).collect()
                            }),
                        },
                        Rule::SymplecticEuler1,
                    ),
                ])
            }
        })
    }

    /// Phase-space state at index 1 matching the discrete start `x₀`, `x₁ = x₀ − s∇f(x₀)`.
    pub fn initial_state(&self, obj: &Objective, x0: &[f64], x1: &[f64], h: f64) -> PhaseState {
        let diff: Vec<f64> = sub(x1, x0).into_iter().map(|d| d / h).collect();
        let v = match self {
            Construction::Nesterov => x0.to_vec(),
            Construction::LtSe1 => axpy(&diff, -h, &obj.gradient(x1)),
            Construction::LtSv2 => axpy(&diff, -0.5 * h, &obj.gradient(x1)),
            Construction::LtSe3 => axpy(&diff, -h * theta_inverse_n(0), &obj.gradient(x1)),
            _ => diff,
        };
        PhaseState::new(x1.to_vec(), v)
    }

    /// Positions `x₀ … x_{n_final}` produced by Lie–Trotter steps on the grid `tₙ = nh`.
    pub fn iterate(
        &self,
        obj: &Objective,
        x0: &[f64],
        s: f64,
        alpha: f64,
        n_final: usize,
    ) -> Result<Vec<Vec<f64>>, ContinuousError> {
        if !(s.is_finite() && s > 0.0) {
            return Err(ContinuousError::InvalidSetting(format!("step size must be positive, got {s}")));
        }
        let h = s.sqrt();
        let g0 = obj.grad(x0)?;
        let x1 = axpy(x0, -s, &g0);
        let sys = self.system(obj, h, alpha, n_final)?;
        let mut st = self.initial_state(obj, x0, &x1, h);
        let mut out = vec![x0.to_vec(), x1];
        for n in 1..n_final {
            st = sys.lie_trotter_step(n as f64 * h, h, &st)?;
            out.push(st.x.clone());
        }
        out.truncate(n_final + 1);
        Ok(out)
    }
}
