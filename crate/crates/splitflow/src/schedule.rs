//! Coefficient schedules `(αₙ, λₙ, ωₙ, γₙ)` for the generalized inertial method
//! and the thresholds past which its energy is non-increasing.
//!
//! With step `s = h²` and inertial parameter `α`, every schedule uses
//! `αₙ = (n − α)/n`. The parametric families are
//!
//! * `E24 { mu, a, b }`: `γₙ = s√((α−1)/(n+a))`, quadratic-rate family with positive `γ`;
//! * `E25 { beta, mu, b }`: `γₙ = 0`, constant Hessian weight `β√s`;
//! * `E26 { mu, a, b }`: `γₙ = −s/(n+a)`.
//!
//! `λ` values are stored with an index shift: the family formulas define
//! `λ_{n+1}` in terms of `n`, and [`Schedule::coefficients`] evaluates that
//! formula at `n − 1`. This gives `λ₁ = 0` for `E24`/`E26` and `λ₁ = β√s + μ/b`
//! for `E25`.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScheduleError {
    #[error("invalid schedule parameter: {0}")]
    InvalidParameter(String),
    #[error("coefficient at n = {n} divides by zero (n + b − 1 = {denominator})")]
    DivisionByZero { n: usize, denominator: f64 },
    #[error("iteration index must be at least 1")]
    ZeroIndex,
    #[error("no closed-form threshold for schedule `{0}`")]
    NoClosedForm(String),
    #[error("unknown schedule `{0}`")]
    Unknown(String),
}

/// Coefficients at one iteration index.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Coefficients {
    pub alpha_n: f64,
    pub lambda_n: f64,
    pub omega_n: f64,
    pub gamma_n: f64,
}

/// Built-in schedule families. The last five are the fixed coefficient
/// choices under which the generalized method reduces to a named algorithm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "label", rename_all = "kebab-case")]
pub enum ScheduleKind {
    E24 {
        mu: f64,
        a: f64,
        b: f64,
    },
    E25 {
        beta: f64,
        mu: f64,
        b: f64,
    },
    E26 {
        mu: f64,
        a: f64,
        b: f64,
    },
    /// `λ = β√s`, `ω = β√s/n`, `γ = 0`.
    Igahd {
        beta: f64,
    },
    /// All Hessian coefficients zero.
    Agm2,
    /// `(0, sαₙ, s)`.
    LtSe1,
    /// `(0, sαₙ/2, s/2)`.
    LtSv2,
    /// `(0, s(1+αₙ), 0)`.
    Ardm,
    /// `(0, sαₙθ_{n−1}, sθₙ)` with `θₙ = 1/max(n, 1)`.
    LtSe3,
}

impl ScheduleKind {
    pub fn label(&self) -> &'static str {
        match self {
            ScheduleKind::E24 { .. } => "e24",
            ScheduleKind::E25 { .. } => "e25",
            ScheduleKind::E26 { .. } => "e26",
            ScheduleKind::Igahd { .. } => "igahd",
            ScheduleKind::Agm2 => "agm2",
            ScheduleKind::LtSe1 => "lt-se1",
            ScheduleKind::LtSv2 => "lt-sv2",
            ScheduleKind::Ardm => "ardm",
            ScheduleKind::LtSe3 => "lt-se3",
        }
    }

    /// Builds a kind from a label and named parameters (missing ones default to 0).
    pub fn from_label(label: &str, mu: f64, a: f64, b: f64, beta: f64) -> Result<Self, ScheduleError> {
        Ok(match label.to_ascii_lowercase().as_str() {
            "e24" => ScheduleKind::E24 { mu, a, b },
            "e25" => ScheduleKind::E25 { beta, mu, b },
            "e26" => ScheduleKind::E26 { mu, a, b },
            "igahd" => ScheduleKind::Igahd { beta },
            "agm2" => ScheduleKind::Agm2,
            "lt-se1" => ScheduleKind::LtSe1,
            "lt-sv2" => ScheduleKind::LtSv2,
            "ardm" => ScheduleKind::Ardm,
            "lt-se3" => ScheduleKind::LtSe3,
            other => return Err(ScheduleError::Unknown(other.to_string())),
        })
    }
}

/// `θₙ` sequence used by the third-order-style variant.
pub fn theta_inverse_n(n: usize) -> f64 {
    1.0 / n.max(1) as f64
}

/// User-supplied `(λₙ, ωₙ, γₙ)` as a function of `(n, s)`.
pub type CustomCoefficients = Arc<dyn Fn(usize, f64) -> (f64, f64, f64) + Send + Sync>;

#[derive(Clone)]
enum Rule {
    Builtin(ScheduleKind),
    Custom { label: String, f: CustomCoefficients },
}

/// A schedule bound to a step size `s` and inertial parameter `α`.
#[derive(Clone)]
pub struct Schedule {
    alpha: f64,
    s: f64,
    rule: Rule,
}

impl fmt::Debug for Schedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rule = match &self.rule {
            Rule::Builtin(k) => format!("{k:?}"),
            Rule::Custom { label, .. } => format!("Custom({label})"),
        };
        f.debug_struct("Schedule").field("alpha", &self.alpha).field("s", &self.s).field("rule", &rule).finish()
    }
}

fn positive_finite(name: &str, v: f64) -> Result<(), ScheduleError> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(ScheduleError::InvalidParameter(format!("{name} must be positive, got {v}")))
    }
}

fn nonnegative_finite(name: &str, v: f64) -> Result<(), ScheduleError> {
    if v.is_finite() && v >= 0.0 {
        Ok(())
    } else {
        Err(ScheduleError::InvalidParameter(format!("{name} must be non-negative, got {v}")))
    }
}

impl Schedule {
    pub fn new(kind: ScheduleKind, s: f64, alpha: f64) -> Result<Self, ScheduleError> {
        positive_finite("s", s)?;
        if !(alpha.is_finite() && alpha > 1.0) {
            return Err(ScheduleError::InvalidParameter(format!("alpha must exceed 1, got {alpha}")));
        }
        match kind {
            ScheduleKind::E24 { mu, a, b } | ScheduleKind::E26 { mu, a, b } => {
                nonnegative_finite("mu", mu)?;
                nonnegative_finite("a", a)?;
                nonnegative_finite("b", b)?;
            }
            ScheduleKind::E25 { beta, mu, b } => {
                nonnegative_finite("mu", mu)?;
                positive_finite("b", b)?;
                if !(beta > 0.0 && beta < 2.0 * s.sqrt()) {
                    return Err(ScheduleError::InvalidParameter(format!(
                        "beta must lie in (0, 2√s) = (0, {}), got {beta}",
                        2.0 * s.sqrt()
                    )));
                }
            }
            ScheduleKind::Igahd { beta } => nonnegative_finite("beta", beta)?,
            _ => {}
        }
        Ok(Self { alpha, s, rule: Rule::Builtin(kind) })
    }

    /// Schedule from arbitrary coefficient closures.
    pub fn custom<F>(label: impl Into<String>, s: f64, alpha: f64, f: F) -> Result<Self, ScheduleError>
    where
        F: Fn(usize, f64) -> (f64, f64, f64) + Send + Sync + 'static,
    {
        positive_finite("s", s)?;
        if !(alpha.is_finite() && alpha > 1.0) {
            return Err(ScheduleError::InvalidParameter(format!("alpha must exceed 1, got {alpha}")));
        }
        Ok(Self { alpha, s, rule: Rule::Custom { label: label.into(), f: Arc::new(f) } })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn kind(&self) -> Option<ScheduleKind> {
        match &self.rule {
            Rule::Builtin(k) => Some(*k),
            Rule::Custom { .. } => None,
        }
    }

    pub fn label(&self) -> String {
        match &self.rule {
            Rule::Builtin(k) => k.label().to_string(),
            Rule::Custom { label, .. } => label.clone(),
        }
    }

    /// `αₙ = (n − α)/n`.
    pub fn alpha_n(&self, n: usize) -> f64 {
        (n as f64 - self.alpha) / n as f64
    }

    /// `λₙ` alone.
    pub fn lambda(&self, n: usize) -> Result<f64, ScheduleError> {
        Ok(self.coefficients(n)?.lambda_n)
    }

    pub fn coefficients(&self, n: usize) -> Result<Coefficients, ScheduleError> {
        if n == 0 {
            return Err(ScheduleError::ZeroIndex);
        }
        let s = self.s;
        let alpha_n = self.alpha_n(n);
        let nf = n as f64;
        let (lambda_n, omega_n, gamma_n) = match &self.rule {
            Rule::Custom { f, .. } => f(n, s),
            Rule::Builtin(kind) => match *kind {
                ScheduleKind::E24 { mu, a, b } => {
                    let gamma = s * ((self.alpha - 1.0) / (nf + a)).sqrt();
                    let (lam, tail) = shifted_lambda_and_tail(n, s, mu, b)?;
                    (lam, gamma + s / nf + tail, gamma)
                }
                ScheduleKind::E26 { mu, a, b } => {
                    let gamma = -s / (nf + a);
                    let (lam, tail) = shifted_lambda_and_tail(n, s, mu, b)?;
                    (lam, gamma + s / nf + tail, gamma)
                }
                ScheduleKind::E25 { beta, mu, b } => {
                    let base = beta * s.sqrt();
                    let (lam, tail) = if mu == 0.0 {
                        (base, 0.0)
                    } else {
                        let d = nf + b - 1.0;
                        if d <= 0.0 {
                            return Err(ScheduleError::DivisionByZero { n, denominator: d });
                        }
                        (base + mu / d, mu * ((nf + 1.0) / (nf * (nf + b)) - 1.0 / d))
                    };
                    (lam, base / nf + tail, 0.0)
                }
                ScheduleKind::Igahd { beta } => {
                    let bh = beta * s.sqrt();
                    (bh, bh / nf, 0.0)
                }
                ScheduleKind::Agm2 => (0.0, 0.0, 0.0),
                ScheduleKind::LtSe1 => (0.0, s * alpha_n, s),
                ScheduleKind::LtSv2 => (0.0, s * alpha_n / 2.0, s / 2.0),
                ScheduleKind::Ardm => (0.0, s * (1.0 + alpha_n), 0.0),
                ScheduleKind::LtSe3 => (0.0, s * alpha_n * theta_inverse_n(n - 1), s * theta_inverse_n(n)),
            },
        };
        Ok(Coefficients { alpha_n, lambda_n, omega_n, gamma_n })
    }

    /// Residual of the coupling `γₙ = (λₙ + ωₙ) − ((n+1)/n) λ_{n+1}`.
    pub fn coupling_residual(&self, n: usize) -> Result<f64, ScheduleError> {
        let c = self.coefficients(n)?;
        let next = self.lambda(n + 1)?;
        let nf = n as f64;
        Ok(c.gamma_n - ((c.lambda_n + c.omega_n) - (nf + 1.0) / nf * next))
    }

    /// Magnitude against which [`Self::coupling_residual`] is compared.
    pub fn coupling_scale(&self, n: usize) -> Result<f64, ScheduleError> {
        let c = self.coefficients(n)?;
        let next = self.lambda(n + 1)?;
        let nf = n as f64;
        Ok(c.gamma_n.abs() + c.lambda_n.abs() + c.omega_n.abs() + (nf + 1.0) / nf * next.abs())
    }

    /// Margin of the strict bound `[s(1 − γₙL) − ((n+1)/n) λ_{n+1}]² < s² − γₙ²`;
    /// positive when it holds.
    pub fn bound_margin(&self, n: usize, lipschitz: f64) -> Result<f64, ScheduleError> {
        let c = self.coefficients(n)?;
        let next = self.lambda(n + 1)?;
        let nf = n as f64;
        let lhs = self.s * (1.0 - c.gamma_n * lipschitz) - (nf + 1.0) / nf * next;
        Ok(self.s * self.s - c.gamma_n * c.gamma_n - lhs * lhs)
    }
}

/// Shifted `λₙ` and the `μ`-dependent tail of `ωₙ` shared by the `E24` and `E26` families.
fn shifted_lambda_and_tail(n: usize, s: f64, mu: f64, b: f64) -> Result<(f64, f64), ScheduleError> {
    let nf = n as f64;
    let m = nf - 1.0;
    let base = s * m / nf;
    if mu == 0.0 {
        return Ok((base, 0.0));
    }
    let d = nf + b - 1.0;
    if d <= 0.0 {
        return Err(ScheduleError::DivisionByZero { n, denominator: d });
    }
    let lam = base + mu * m / (nf * d);
    let tail = mu * (1.0 / (nf + b) - m / (nf * d));
    Ok((lam, tail))
}

/// Closed-form threshold `N′` past which the strict bound holds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThresholdIndex {
    /// Value used for admissibility.
    pub value: f64,
    /// Sharper Lipschitz-dependent variant, reported where one exists.
    pub lipschitz_variant: Option<f64>,
}

/// Closed-form `N′` for the parametric families.
pub fn threshold_index(
    kind: ScheduleKind,
    s: f64,
    alpha: f64,
    lipschitz: f64,
) -> Result<ThresholdIndex, ScheduleError> {
    match kind {
        ScheduleKind::E24 { mu, a, b } => {
            let am1 = alpha - 1.0;
            let base =
                am1 * (s * s * lipschitz * lipschitz + 1.0) + 2.0 * mu * lipschitz * am1.sqrt() + (mu / s).powi(2) - a;
            let value =
                if b - a > 0.25 { base } else { base.max((1.0 - 2.0 * b + (4.0 * (a - b) + 1.0).sqrt()) / 2.0) };
            Ok(ThresholdIndex { value, lipschitz_variant: None })
        }
        ScheduleKind::E25 { beta, mu, b } => {
            Ok(ThresholdIndex { value: e25_threshold(beta, mu, b, s), lipschitz_variant: None })
        }
        ScheduleKind::Igahd { beta } => {
            Ok(ThresholdIndex { value: e25_threshold(beta, 0.0, 1.0, s), lipschitz_variant: None })
        }
        ScheduleKind::E26 { mu, a, b } => {
            let shift = a.min(b);
            let r = (mu / s).powi(2);
            Ok(ThresholdIndex {
                value: (3.0 + r).sqrt() - shift,
                lipschitz_variant: Some(((s * lipschitz).powi(2) + 1.0 + r).sqrt() - shift),
            })
        }
        other => Err(ScheduleError::NoClosedForm(other.label().to_string())),
    }
}

fn e25_threshold(beta: f64, mu: f64, b: f64, s: f64) -> f64 {
    let rs = s.sqrt();
    let q = mu / rs;
    let lead = 2.0 * rs - beta;
    let lin = beta * (b + 1.0) + q - 2.0 * rs * b;
    let delta = lin * lin + 4.0 * lead * (beta * b + q);
    (lin + delta.sqrt()) / (2.0 * lead)
}

/// Coefficients `(G, H, I)` of the quadratic `G t² − H t − I` in `t = t_{n+1}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadraticCoefficients {
    pub g: f64,
    pub h: f64,
    pub i: f64,
}

/// `G`, `H`, `I` from `s`, `L`, `γₙ` and `λₙ + ωₙ`.
pub fn quadratic_coefficients(s: f64, lipschitz: f64, gamma: f64, lambda_plus_omega: f64) -> QuadraticCoefficients {
    let a2 = -s;
    let a3 = -gamma * (1.0 - lipschitz * s);
    let a4 = s / 2.0;
    let a5 = -gamma * gamma / (2.0 * s);
    let lo = lambda_plus_omega;
    let g = -(a2 + a3).powi(2) + 2.0 * s * (a4 + a5) - lo * lo - 2.0 * lo * (a2 + a3);
    let h = -2.0 * a2 * a2 - 2.0 * a2 * a3 - 2.0 * lo * a2 + 2.0 * s * a4;
    QuadraticCoefficients { g, h, i: s * s }
}

/// Index past which `G t² − H t − I ≥ 0`: `(α−1)(H + √(H² + 4GI))/(2G)`.
/// Infinite when `G ≤ 0`.
pub fn root_index(alpha: f64, q: QuadraticCoefficients) -> f64 {
    if q.g <= 0.0 {
        return f64::INFINITY;
    }
    (alpha - 1.0) * (q.h + (q.h * q.h + 4.0 * q.g * q.i).sqrt()) / (2.0 * q.g)
}

/// Summary of the admissibility thresholds over `1 ..= n_max`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdmissibilityReport {
    pub n1: f64,
    /// Supremum of the per-index root threshold over the scanned range.
    pub n2: f64,
    pub n_prime: Option<f64>,
    pub n_prime_lipschitz: Option<f64>,
    /// `max(n1, n2, n_prime)`.
    pub n: f64,
    /// First index from which the strict bound held through `n_max`.
    pub bound_holds_from: Option<usize>,
    /// First index `> max(n1, n_prime)` in the scan where `G ≤ 0`, if any.
    pub g_nonpositive_at: Option<usize>,
    /// Largest coupling residual relative to its scale.
    pub max_coupling_residual: f64,
    pub coupling_holds: bool,
    pub n_max: usize,
}

/// Scans `n = 1 ..= n_max` and evaluates both assumptions and the thresholds.
pub fn check_assumptions(
    schedule: &Schedule,
    lipschitz: f64,
    n_max: usize,
) -> Result<AdmissibilityReport, ScheduleError> {
    if n_max == 0 {
        return Err(ScheduleError::ZeroIndex);
    }
    let alpha = schedule.alpha();
    let s = schedule.s();
    let n1 = alpha - 1.0;
    let closed = schedule.kind().and_then(|k| threshold_index(k, s, alpha, lipschitz).ok());
    let n_prime = closed.map(|t| t.value);
    let start = n1.max(n_prime.unwrap_or(f64::NEG_INFINITY));

    let mut n2 = f64::NEG_INFINITY;
    let mut bound_holds_from = None;
    let mut g_nonpositive_at = None;
    let mut max_coupling = 0.0_f64;
    let mut coupling_ok = true;
    for n in 1..=n_max {
        let c = schedule.coefficients(n)?;
        let r = schedule.coupling_residual(n)?;
        let scale = schedule.coupling_scale(n)?.max(s);
        let rel = r.abs() / scale;
        max_coupling = max_coupling.max(rel);
        if rel > 16.0 * f64::EPSILON {
            coupling_ok = false;
        }
        if schedule.bound_margin(n, lipschitz)? > 0.0 {
            bound_holds_from.get_or_insert(n);
        } else {
            bound_holds_from = None;
        }
        if (n as f64) > start {
            let q = quadratic_coefficients(s, lipschitz, c.gamma_n, c.lambda_n + c.omega_n);
            if q.g <= 0.0 {
                g_nonpositive_at.get_or_insert(n);
                n2 = f64::INFINITY;
            } else {
                n2 = n2.max(root_index(alpha, q));
            }
        }
    }
    if n2 == f64::NEG_INFINITY {
        n2 = f64::INFINITY;
    }
    let n = n1.max(n2).max(n_prime.unwrap_or(f64::NEG_INFINITY));
    Ok(AdmissibilityReport {
        n1,
        n2,
        n_prime,
        n_prime_lipschitz: closed.and_then(|t| t.lipschitz_variant),
        n,
        bound_holds_from,
        g_nonpositive_at,
        max_coupling_residual: max_coupling,
        coupling_holds: coupling_ok,
        n_max,
    })
}

/// `γₙ² < s²(1 − (α−1)/n)`: the sharpened bound on `γ` that follows once the
/// energy inequality is active.
pub fn sharpened_gamma_bound_holds(gamma: f64, s: f64, alpha: f64, n: usize) -> bool {
    gamma * gamma < s * s * (1.0 - (alpha - 1.0) / n as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + b.abs())
    }

    #[test]
    fn e24_first_index() {
        let sch = Schedule::new(ScheduleKind::E24 { mu: 0.0, a: 0.0, b: 0.0 }, 0.01, 3.0).unwrap();
        let c = sch.coefficients(1).unwrap();
        assert_eq!(c.alpha_n, -2.0);
        assert_eq!(c.lambda_n, 0.0);
        assert!(close(c.gamma_n, 0.01 * 2f64.sqrt(), 1e-15));
        assert!(close(c.omega_n, 0.01 * 2f64.sqrt() + 0.01, 1e-15));
        assert!(close(sch.lambda(2).unwrap(), 0.005, 1e-15));
    }

    #[test]
    fn e25_values() {
        let sch = Schedule::new(ScheduleKind::E25 { beta: 0.1, mu: 0.0, b: 1.0 }, 0.04, 3.0).unwrap();
        assert!(close(sch.lambda(3).unwrap(), 0.02, 1e-15));
        assert!(close(sch.coefficients(2).unwrap().omega_n, 0.01, 1e-15));
        let t = threshold_index(ScheduleKind::E25 { beta: 0.1, mu: 0.0, b: 1.0 }, 0.04, 3.0, 1.0).unwrap();
        assert!(close(t.value, 1.0 / 3.0, 1e-14));
        let sch = Schedule::new(ScheduleKind::E25 { beta: 0.1, mu: 0.3, b: 2.0 }, 0.04, 3.0).unwrap();
        assert!(close(sch.lambda(1).unwrap(), 0.02 + 0.15, 1e-15));
    }

    #[test]
    fn e25_rejects_large_beta() {
        let r = Schedule::new(ScheduleKind::E25 { beta: 0.5, mu: 0.0, b: 1.0 }, 0.04, 3.0);
        assert!(matches!(r, Err(ScheduleError::InvalidParameter(_))));
    }

    #[test]
    fn division_by_zero_is_reported() {
        let sch = Schedule::new(ScheduleKind::E24 { mu: 0.5, a: 1.0, b: 0.0 }, 0.01, 3.0).unwrap();
        assert!(matches!(sch.coefficients(1), Err(ScheduleError::DivisionByZero { n: 1, .. })));
        assert!(sch.coefficients(2).is_ok());
        assert_eq!(sch.coefficients(0), Err(ScheduleError::ZeroIndex));
    }

    #[test]
    fn e26_thresholds() {
        // Lipschitz-dependent variant at s = 0.1 on f1 (L = 4).
        let t = threshold_index(ScheduleKind::E26 { mu: 2.0, a: 21.0, b: 24.0 }, 0.1, 3.0, 4.0).unwrap();
        assert!(close(t.lipschitz_variant.unwrap(), (0.16f64 + 1.0 + 400.0).sqrt() - 21.0, 1e-14));
        assert!(close(t.value, (403.0f64).sqrt() - 21.0, 1e-14));
        let t = threshold_index(ScheduleKind::E26 { mu: 0.0, a: 3.5, b: 0.25 }, 0.1, 3.0, 4.0).unwrap();
        assert!(close(t.value, 3f64.sqrt() - 0.25, 1e-14));
    }

    #[test]
    fn e24_threshold_branches() {
        let t = threshold_index(ScheduleKind::E24 { mu: 1e-2, a: 10.0, b: 4.0 }, 0.1, 3.0, 4.0).unwrap();
        assert!(close(t.value, -1.0, 1e-14));
        let t = threshold_index(ScheduleKind::E24 { mu: 1e-5, a: 3.0, b: 0.1 }, 0.1, 3.0, 4.0).unwrap();
        assert!(close(t.value, (0.8 + 12.6f64.sqrt()) / 2.0, 1e-14));
        let t = threshold_index(ScheduleKind::E24 { mu: 1e-2, a: 4.0, b: 10.0 }, 0.1, 3.0, 4.0).unwrap();
        let expect = 2.0 * (0.16 + 1.0) + 2.0 * 0.01 * 4.0 * 2f64.sqrt() + 0.01 - 4.0;
        assert!(close(t.value, expect, 1e-14));
        assert!(threshold_index(ScheduleKind::Agm2, 0.1, 3.0, 4.0).is_err());
    }

    #[test]
    fn quadratic_coefficients_example() {
        let q = quadratic_coefficients(0.1, 1.0, 0.0, 0.1);
        assert!(close(q.g, 0.01, 1e-14));
        assert!(close(q.h, 0.01, 1e-14));
        assert!(close(q.i, 0.01, 1e-14));
        assert!(close(root_index(3.0, q), 1.0 + 5f64.sqrt(), 1e-14));
    }

    #[test]
    fn plain_accelerated_fails_strict_bound() {
        let sch = Schedule::new(ScheduleKind::Agm2, 0.1, 3.0).unwrap();
        let r = check_assumptions(&sch, 1.0, 50).unwrap();
        assert!(r.coupling_holds);
        assert_eq!(r.bound_holds_from, None);
        assert!(r.n2.is_infinite());
    }

    #[test]
    fn reductions_match_named_coefficients() {
        let s = 0.01;
        for n in 1..20 {
            let an = (n as f64 - 3.0) / n as f64;
            let c = Schedule::new(ScheduleKind::LtSe1, s, 3.0).unwrap().coefficients(n).unwrap();
            assert_eq!((c.lambda_n, c.omega_n, c.gamma_n), (0.0, s * an, s));
            let c = Schedule::new(ScheduleKind::LtSv2, s, 3.0).unwrap().coefficients(n).unwrap();
            assert_eq!((c.lambda_n, c.omega_n, c.gamma_n), (0.0, s * an / 2.0, s / 2.0));
            let c = Schedule::new(ScheduleKind::Ardm, s, 3.0).unwrap().coefficients(n).unwrap();
            assert_eq!((c.lambda_n, c.omega_n, c.gamma_n), (0.0, s * (1.0 + an), 0.0));
        }
    }
}
