//! Energy functionals, rate fits and numeric checks of the descent and
//! quadratic-inequality lemmas.
//!
//! The discrete energy along a run with step `s` and schedule `λ` is
//!
//! ```text
//! Eₙ = tₙ² (f(xₙ) − f(x*)) + ‖zₙ‖² / (2s)
//! zₙ = (xₙ₋₁ − x*) + tₙ (xₙ − xₙ₋₁) + λₙ tₙ₊₁ ∇f(xₙ₋₁)
//! ```
//!
//! with `tₙ = (n − 1)/(α − 1)`.

use serde::Serialize;
use thiserror::Error;

use crate::discrete::Trajectory;
use crate::objective::{Objective, ObjectiveError};
use crate::schedule::{Schedule, ScheduleError};
use crate::vector::{dot, norm, sub};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalysisError {
    #[error(transparent)]
    Objective(#[from] ObjectiveError),
    #[error(transparent)]
    Schedule(#[from] ScheduleError),
    #[error("index {n} outside the trajectory (last index {last})")]
    IndexOutOfRange { n: usize, last: usize },
    #[error("energy is defined from n = 1")]
    ZeroIndex,
    #[error("step size {s} outside (0, 1/L] with L = {lipschitz}")]
    StepOutOfRange { s: f64, lipschitz: f64 },
    #[error("lemma hypothesis not satisfied")]
    HypothesisNotSatisfied,
    #[error("too few usable points for a fit ({0})")]
    TooFewPoints(usize),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

/// `tₙ = (n − 1)/(α − 1)`.
pub fn energy_time(n: usize, alpha: f64) -> f64 {
    (n as f64 - 1.0) / (alpha - 1.0)
}

fn excess(obj: &Objective, x: &[f64], x_star: &[f64]) -> f64 {
    match (obj.gap(x), obj.gap(x_star)) {
        (Some(a), Some(b)) => a - b,
        _ => obj.value(x) - obj.value(x_star),
    }
}

/// `zₙ` and `Eₙ` at index `n`.
pub fn energy_terms(
    obj: &Objective,
    traj: &Trajectory,
    n: usize,
    schedule: &Schedule,
    x_star: &[f64],
) -> Result<(Vec<f64>, f64), AnalysisError> {
    if n == 0 {
        return Err(AnalysisError::ZeroIndex);
    }
    let last = traj.last_index();
    if n > last {
        return Err(AnalysisError::IndexOutOfRange { n, last });
    }
    let alpha = schedule.alpha();
    let s = schedule.s();
    let tn = energy_time(n, alpha);
    let tn1 = energy_time(n + 1, alpha);
    let lam = schedule.lambda(n)?;
    let xp = &traj.xs[n - 1];
    let x = &traj.xs[n];
    let gp = &traj.grads[n - 1];
    let z: Vec<f64> = (0..x.len()).map(|i| (xp[i] - x_star[i]) + tn * (x[i] - xp[i]) + lam * tn1 * gp[i]).collect();
    let e = tn * tn * excess(obj, x, x_star) + dot(&z, &z) / (2.0 * s);
    Ok((z, e))
}

/// `Eₙ` for a reference minimizer `x_star`.
pub fn energy(
    obj: &Objective,
    traj: &Trajectory,
    n: usize,
    schedule: &Schedule,
    x_star: &[f64],
) -> Result<f64, AnalysisError> {
    Ok(energy_terms(obj, traj, n, schedule, x_star)?.1)
}

/// `Eₙ` with the final iterate standing in for the minimizer.
pub fn energy_final_iterate(
    obj: &Objective,
    traj: &Trajectory,
    n: usize,
    schedule: &Schedule,
) -> Result<f64, AnalysisError> {
    let xm = traj.xs[traj.last_index()].clone();
    energy(obj, traj, n, schedule, &xm)
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnergySeries {
    /// `tₙ` for `n = 1 ..= M`.
    pub t: Vec<f64>,
    /// `Eₙ` for `n = 1 ..= M`; index 0 holds `E₁`.
    pub e: Vec<f64>,
    pub z: Vec<Vec<f64>>,
    pub x_star: Vec<f64>,
}

impl EnergySeries {
    /// `Eₙ` by iteration index.
    pub fn at(&self, n: usize) -> f64 {
        self.e[n - 1]
    }

    pub fn last_index(&self) -> usize {
        self.e.len()
    }

    pub fn max(&self) -> f64 {
        self.e.iter().fold(0.0_f64, |m, v| m.max(*v))
    }
}

/// Energy at every index `1 ..= M` of a trajectory.
pub fn energy_series(
    obj: &Objective,
    traj: &Trajectory,
    schedule: &Schedule,
    x_star: &[f64],
) -> Result<EnergySeries, AnalysisError> {
    let mut out = EnergySeries { t: Vec::new(), e: Vec::new(), z: Vec::new(), x_star: x_star.to_vec() };
    for n in 1..=traj.last_index() {
        let (z, e) = energy_terms(obj, traj, n, schedule, x_star)?;
        out.t.push(energy_time(n, schedule.alpha()));
        out.e.push(e);
        out.z.push(z);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonotoneReport {
    pub first_violation: Option<usize>,
    pub violations: usize,
    pub checked: usize,
    /// Largest `E_{n+1} − E_n` over the checked range.
    pub max_increase: f64,
}

/// Checks `E_{n+1} ≤ Eₙ + tol` for every `n ≥ from_n` with `n + 1` in the series.
pub fn check_monotone(series: &EnergySeries, from_n: usize, tol: f64) -> MonotoneReport {
    let mut rep = MonotoneReport { first_violation: None, violations: 0, checked: 0, max_increase: f64::NEG_INFINITY };
    let start = from_n.max(1);
    for n in start..series.last_index() {
        let inc = series.at(n + 1) - series.at(n);
        rep.checked += 1;
        rep.max_increase = rep.max_increase.max(inc);
        if inc > tol {
            rep.violations += 1;
            rep.first_violation.get_or_insert(n);
        }
    }
    rep
}

/// Indices `n > threshold` where `gap(n) > E_N (α−1)²/(n−1)²`, with `N` the
/// smallest index above the threshold.
pub fn rate_bound_violations(gap: &[f64], series: &EnergySeries, alpha: f64, threshold: f64) -> Vec<usize> {
    let n0 = (threshold.floor() as i64 + 1).max(2) as usize;
    if n0 > series.last_index() {
        return Vec::new();
    }
    let en = series.at(n0);
    let c = en * (alpha - 1.0).powi(2);
    (n0 + 1..gap.len().min(series.last_index() + 1))
        .filter(|&n| {
            let bound = c / ((n as f64 - 1.0).powi(2));
            gap[n] > bound * (1.0 + 1e-12) + f64::MIN_POSITIVE
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateFit {
    /// Fitted exponent `p` in `gap ≈ C n^p`.
    pub exponent: f64,
    pub constant: f64,
    pub points: usize,
}

/// Least-squares fit of `log gap` against `log n` over `n_lo ..= n_hi`,
/// skipping entries `≤ floor`. `values[n]` is the value at index `n`.
pub fn fit_rate(values: &[f64], n_lo: usize, n_hi: usize, floor: f64) -> Result<RateFit, AnalysisError> {
    if n_lo == 0 || n_hi < n_lo {
        return Err(AnalysisError::InvalidArgument(format!("bad window [{n_lo}, {n_hi}]")));
    }
    let pts: Vec<(f64, f64)> = (n_lo..=n_hi.min(values.len().saturating_sub(1)))
        .filter(|&n| values[n].is_finite() && values[n] > floor)
        .map(|n| ((n as f64).ln(), values[n].ln()))
        .collect();
    if pts.len() < 2 {
        return Err(AnalysisError::TooFewPoints(pts.len()));
    }
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let p = sxy / sxx;
    Ok(RateFit { exponent: p, constant: (my - p * mx).exp(), points: pts.len() })
}

/// Which descent inequality to test.
#[derive(Debug, Clone, PartialEq)]
pub enum DescentVariant {
    /// `f(y) ≤ f(x) + ⟨∇f(x), y−x⟩ + (L/2)‖y−x‖²`.
    Standard,
    /// `f(y − s∇f(y)) ≤ f(x) + ⟨∇f(y), y−x⟩ − (s/2)‖∇f(y)‖² − (s/2)‖∇f(x) − ∇f(y)‖²`.
    Extended,
    /// The extended form for `y − s∇f(y) + γ∇f(z)`.
    ExtendedShifted { gamma: f64, z: Vec<f64> },
}

/// Right side minus left side of a descent inequality, with the magnitude
/// of the terms for rounding tolerances.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DescentCheck {
    pub residual: f64,
    pub scale: f64,
}

impl DescentCheck {
    /// Holds up to 8 units of rounding in the term magnitude.
    pub fn holds(&self) -> bool {
        self.residual >= -8.0 * f64::EPSILON * self.scale
    }
}

pub fn check_descent_lemma(
    obj: &Objective,
    x: &[f64],
    y: &[f64],
    s: f64,
    variant: &DescentVariant,
) -> Result<DescentCheck, AnalysisError> {
    obj.grad(x)?;
    obj.grad(y)?;
    let l = obj.lipschitz();
    let fx = obj.value(x);
    let gx = obj.gradient(x);
    let gy = obj.gradient(y);
    let dyx = sub(y, x);
    match variant {
        DescentVariant::Standard => {
            let lhs = obj.value(y);
            let lin = dot(&gx, &dyx);
            let quad = 0.5 * l * dot(&dyx, &dyx);
            Ok(DescentCheck { residual: fx + lin + quad - lhs, scale: fx.abs() + lin.abs() + quad.abs() + lhs.abs() })
        }
        DescentVariant::Extended | DescentVariant::ExtendedShifted { .. } => {
            if !(s > 0.0 && s * l <= 1.0) {
                return Err(AnalysisError::StepOutOfRange { s, lipschitz: l });
            }
            let (gamma, gz) = match variant {
                DescentVariant::ExtendedShifted { gamma, z } => (*gamma, obj.grad(z)?),
                _ => (0.0, vec![0.0; x.len()]),
            };
            let w: Vec<f64> = (0..x.len()).map(|i| y[i] - s * gy[i] + gamma * gz[i]).collect();
            let lhs = obj.value(&w);
            let a1 = s;
            let a2 = -s;
            let a3 = -gamma * (1.0 - l * s);
            let a4 = s / 2.0;
            let a5 = -gamma * gamma / (2.0 * s);
            let terms = [
                fx,
                dot(&gy, &dyx),
                -a1 * dot(&gy, &gy),
                -a2 * dot(&gy, &gx),
                -a3 * dot(&gy, &gz),
                -a4 * dot(&gx, &gx),
                -a5 * dot(&gz, &gz),
            ];
            let rhs: f64 = terms.iter().sum();
            let scale = terms.iter().map(|t| t.abs()).sum::<f64>() + lhs.abs();
            Ok(DescentCheck { residual: rhs - lhs, scale })
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuadraticLemma {
    /// `a > 0` and `b² − 4ac ≤ 0`.
    NonPositiveDiscriminant,
    /// `a > 0`, `b² − 4ac ≥ 0` and `x` outside the open interval between the roots.
    OutsideRoots,
}

/// Verifies the lemma's hypothesis, then whether `ax² + bx + c ≥ 0` up to rounding.
pub fn check_quadratic_lemma(a: f64, b: f64, c: f64, x: f64, lemma: QuadraticLemma) -> Result<bool, AnalysisError> {
    let disc = b * b - 4.0 * a * c;
    let ok = match lemma {
        QuadraticLemma::NonPositiveDiscriminant => a > 0.0 && disc <= 0.0,
        QuadraticLemma::OutsideRoots => {
            if a > 0.0 && disc >= 0.0 {
                let r = disc.sqrt();
                let lo = (-b - r) / (2.0 * a);
                let hi = (-b + r) / (2.0 * a);
                x <= lo || x >= hi
            } else {
                false
            }
        }
    };
    if !ok {
        return Err(AnalysisError::HypothesisNotSatisfied);
    }
    let terms = [a * x * x, b * x, c];
    let v: f64 = terms.iter().sum();
    let scale: f64 = terms.iter().map(|t| t.abs()).sum::<f64>() + b * b / a.abs();
    Ok(v >= -16.0 * f64::EPSILON * scale)
}

/// Stationarity equations whose solutions need not minimize `f`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SpuriousEquation {
    /// `∇f(x) + (s/ω)∇f(x − ω∇f(x)) = 0` for a limiting weight `ω`.
    General { omega: f64 },
    /// `ω = 2s`.
    DoubleStep,
    /// `ω = s`.
    SingleStep,
}

/// Norm of the left side of a spurious-root equation at `x`.
pub fn spurious_root_residual(obj: &Objective, x: &[f64], s: f64, eq: SpuriousEquation) -> Result<f64, AnalysisError> {
    let g = obj.grad(x)?;
    let (omega, weight) = match eq {
        SpuriousEquation::General { omega } => {
            if omega == 0.0 || !omega.is_finite() {
                return Err(AnalysisError::InvalidArgument("omega must be nonzero".into()));
            }
            (omega, s / omega)
        }
        SpuriousEquation::DoubleStep => (2.0 * s, 0.5),
        SpuriousEquation::SingleStep => (s, 1.0),
    };
    let shifted: Vec<f64> = x.iter().zip(&g).map(|(xi, gi)| xi - omega * gi).collect();
    let gs = obj.grad(&shifted)?;
    let r: Vec<f64> = g.iter().zip(&gs).map(|(a, b)| a + weight * b).collect();
    Ok(norm(&r))
}

/// Roots of the one-dimensional signed residual `f'(x) + (s/ω) f'(x − ω f'(x))`
/// on a uniform grid over `[lo, hi]`, refined by bisection.
pub fn scan_spurious_roots_1d(
    obj: &Objective,
    s: f64,
    omega: f64,
    lo: f64,
    hi: f64,
    cells: usize,
) -> Result<Vec<f64>, AnalysisError> {
    if obj.dim() != 1 || cells == 0 || hi <= lo || hi.is_nan() || lo.is_nan() || omega == 0.0 {
        return Err(AnalysisError::InvalidArgument("needs a 1-D objective, a nonempty interval and ω ≠ 0".into()));
    }
    let r = |x: f64| {
        let g = obj.gradient(&[x])[0];
        g + s / omega * obj.gradient(&[x - omega * g])[0]
    };
    let mut roots = Vec::new();
    let step = (hi - lo) / cells as f64;
    let mut a = lo;
    let mut ra = r(a);
    for k in 1..=cells {
        let b = lo + k as f64 * step;
        let rb = r(b);
        if ra == 0.0 {
            roots.push(a);
        } else if ra * rb < 0.0 {
            let (mut u, mut w, mut ru) = (a, b, ra);
            for _ in 0..200 {
                let m = 0.5 * (u + w);
                let rm = r(m);
                if rm == 0.0 || (w - u) < 1e-15 * (1.0 + m.abs()) {
                    u = m;
                    w = m;
                    break;
                }
                if ru * rm < 0.0 {
                    w = m;
                } else {
                    u = m;
                    ru = rm;
                }
            }
            roots.push(0.5 * (u + w));
        }
        a = b;
        ra = rb;
    }
    if ra == 0.0 {
        roots.push(a);
    }
    roots.dedup_by(|x, y| (*x - *y).abs() < 1e-12);
    Ok(roots)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discrete::{run, Algorithm, StoppingRule};
    use crate::schedule::ScheduleKind;

    #[test]
    fn fit_recovers_exponent() {
        let v: Vec<f64> = (0..=500).map(|n| if n == 0 { 0.0 } else { 3.0 / (n as f64).powi(2) }).collect();
        let f = fit_rate(&v, 10, 500, 0.0).unwrap();
        assert!((f.exponent + 2.0).abs() < 1e-6);
        assert!((f.constant - 3.0).abs() < 1e-6);
        let c = vec![5.0; 100];
        assert!(fit_rate(&c, 1, 99, 0.0).unwrap().exponent.abs() < 1e-12);
        assert!(matches!(fit_rate(&c, 1, 99, 10.0), Err(AnalysisError::TooFewPoints(0))));
    }

    #[test]
    fn energy_vanishes_at_minimizer() {
        let f = Objective::f2();
        let sch = Schedule::new(ScheduleKind::Agm2, 0.1, 3.0).unwrap();
        let out = run(&Algorithm::Generalized { schedule: sch.clone() }, &f, &[0.0, 0.0], 0.1, &StoppingRule::fixed(3))
            .unwrap();
        assert_eq!(energy(&f, &out.trajectory, 2, &sch, &[0.0, 0.0]).unwrap(), 0.0);
        assert_eq!(energy(&f, &out.trajectory, 0, &sch, &[0.0, 0.0]), Err(AnalysisError::ZeroIndex));
    }

    #[test]
    fn energy_hand_evaluation() {
        // n = 2 on f2 from a three-iterate prefix, x* = 0, α = 3, s = 0.1.
        let f = Objective::f2();
        let s = 0.1;
        let sch = Schedule::new(ScheduleKind::E25 { beta: 0.2, mu: 0.0, b: 1.0 }, s, 3.0).unwrap();
        let out = run(&Algorithm::Generalized { schedule: sch.clone() }, &f, &[1.0, -2.0], s, &StoppingRule::fixed(2))
            .unwrap();
        let t = &out.trajectory;
        let lam = 0.2 * s.sqrt();
        let (t2, t3) = (0.5, 1.0);
        let g1 = [t.xs[1][0] / (1.0 + t.xs[1][0].powi(2)).sqrt(), t.xs[1][1] / (1.0 + t.xs[1][1].powi(2)).sqrt()];
        let z: Vec<f64> = (0..2).map(|i| t.xs[1][i] + t2 * (t.xs[2][i] - t.xs[1][i]) + lam * t3 * g1[i]).collect();
        let fx = (1.0 + t.xs[2][0].powi(2)).sqrt() + (1.0 + t.xs[2][1].powi(2)).sqrt() - 2.0;
        let expect = t2 * t2 * fx + (z[0] * z[0] + z[1] * z[1]) / (2.0 * s);
        let got = energy(&f, t, 2, &sch, &[0.0, 0.0]).unwrap();
        assert!((got - expect).abs() < 1e-13 * expect, "{got} {expect}");
    }

    #[test]
    fn final_iterate_energy_has_no_gap_term() {
        let f = Objective::f1();
        let sch = Schedule::new(ScheduleKind::Agm2, 0.1, 3.0).unwrap();
        let out =
            run(&Algorithm::Generalized { schedule: sch.clone() }, &f, &[1.0, -2.0], 0.1, &StoppingRule::fixed(20))
                .unwrap();
        let t = &out.trajectory;
        let (z, _) = energy_terms(&f, t, 20, &sch, &t.xs[20].clone()).unwrap();
        let e = energy_final_iterate(&f, t, 20, &sch).unwrap();
        assert!((e - dot(&z, &z) / 0.2).abs() <= 1e-15 * e.max(1.0));
    }

    #[test]
    fn monotone_zero_series() {
        let s = EnergySeries { t: vec![0.0; 5], e: vec![0.0; 5], z: vec![vec![]; 5], x_star: vec![] };
        let r = check_monotone(&s, 1, 0.0);
        assert_eq!(r.first_violation, None);
        assert_eq!(r.checked, 4);
    }

    #[test]
    fn quadratic_lemma_examples() {
        assert!(check_quadratic_lemma(1.0, 0.0, 1.0, 3.7, QuadraticLemma::NonPositiveDiscriminant).unwrap());
        assert!(check_quadratic_lemma(1.0, 0.0, -1.0, 2.0, QuadraticLemma::OutsideRoots).unwrap());
        assert_eq!(
            check_quadratic_lemma(1.0, 0.0, -1.0, 0.5, QuadraticLemma::OutsideRoots),
            Err(AnalysisError::HypothesisNotSatisfied)
        );
    }

    #[test]
    fn spurious_residuals() {
        let f = Objective::f2();
        for eq in [SpuriousEquation::General { omega: 0.3 }, SpuriousEquation::DoubleStep, SpuriousEquation::SingleStep]
        {
            assert_eq!(spurious_root_residual(&f, &[0.0, 0.0], 0.01, eq).unwrap(), 0.0);
        }
        assert!(spurious_root_residual(&f, &[1.0, 0.0], 0.01, SpuriousEquation::SingleStep).unwrap() > 0.0);
        assert!(spurious_root_residual(&f, &[1.0, 0.0], 0.01, SpuriousEquation::General { omega: 0.0 }).is_err());
    }

    #[test]
    fn no_spurious_roots_for_square() {
        let q = Objective::quadratic(vec![vec![2.0]], vec![0.0]).unwrap();
        let s = 0.2;
        let roots = scan_spurious_roots_1d(&q, s, 2.0 * s, -10.0, 10.0, 2001).unwrap();
        assert_eq!(roots.len(), 1);
        assert!(roots[0].abs() < 1e-12);
    }
}
