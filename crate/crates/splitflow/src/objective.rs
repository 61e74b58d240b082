//! Smooth convex objectives.
//!
//! An [`Objective`] bundles a value, a gradient, an optional Hessian-vector
//! action and a Lipschitz constant for the gradient. The two standard test
//! functions are
//!
//! * `f1(x) = (x₁ + x₂)²`, minimized on the whole line `x₁ = −x₂`;
//! * `f2(x) = √(1 + x₁²) + √(1 + x₂²)`, minimized only at the origin with value 2.
//!
//! Objectives are cheap to clone: the closures are reference counted.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::vector::{dot, norm, sub};

pub type ValueFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;
pub type GradientFn = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;
pub type HessianActionFn = Arc<dyn Fn(&[f64], &[f64]) -> Vec<f64> + Send + Sync>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ObjectiveError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("input contains a non-finite entry")]
    NonFiniteInput,
    #[error("objective `{0}` has no Hessian action")]
    HessianUnavailable(String),
    #[error("invalid objective: {0}")]
    Invalid(String),
    #[error("unknown objective `{0}`")]
    Unknown(String),
}

/// What is known about the set of minimizers.
#[derive(Debug, Clone, PartialEq)]
pub enum Minimizers {
    /// A single minimizer.
    Point(Vec<f64>),
    /// `point + span(directions)`, with orthonormal directions.
    Affine { point: Vec<f64>, directions: Vec<Vec<f64>> },
    /// Bounded below but no minimizer is known, or unbounded.
    Unknown,
}

impl Minimizers {
    /// Nearest minimizer to `x`, when the set is known.
    pub fn project(&self, x: &[f64]) -> Option<Vec<f64>> {
        match self {
            Minimizers::Point(p) => Some(p.clone()),
            Minimizers::Affine { point, directions } => {
                let d = sub(x, point);
                let mut out = point.clone();
                for u in directions {
                    let c = dot(&d, u);
                    for (o, ui) in out.iter_mut().zip(u) {
                        *o += c * ui;
                    }
                }
                Some(out)
            }
            Minimizers::Unknown => None,
        }
    }

    pub fn is_unique(&self) -> bool {
        matches!(self, Minimizers::Point(_))
    }
}

/// Named objective as written in configuration files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "lowercase")]
pub enum ObjectiveSpec {
    F1,
    F2,
    Quadratic { a: Vec<Vec<f64>>, b: Vec<f64> },
}

impl ObjectiveSpec {
    pub fn parse_name(name: &str) -> Result<Self, ObjectiveError> {
        match name.to_ascii_lowercase().as_str() {
            "f1" => Ok(ObjectiveSpec::F1),
            "f2" => Ok(ObjectiveSpec::F2),
            other => Err(ObjectiveError::Unknown(other.to_string())),
        }
    }

    pub fn build(&self) -> Result<Objective, ObjectiveError> {
        match self {
            ObjectiveSpec::F1 => Ok(Objective::f1()),
            ObjectiveSpec::F2 => Ok(Objective::f2()),
            ObjectiveSpec::Quadratic { a, b } => Objective::quadratic(a.clone(), b.clone()),
        }
    }
}

#[derive(Clone)]
pub struct Objective {
    name: String,
    dim: usize,
    lipschitz: f64,
    value: ValueFn,
    gradient: GradientFn,
    hessian_action: Option<HessianActionFn>,
    excess: Option<ValueFn>,
    min_value: Option<f64>,
    minimizers: Minimizers,
}

impl fmt::Debug for Objective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Objective")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .field("lipschitz", &self.lipschitz)
            .field("min_value", &self.min_value)
            .field("minimizers", &self.minimizers)
            .finish()
    }
}

impl Objective {
    /// Objective from user closures. `lipschitz` must be a valid Lipschitz
    /// constant of the gradient.
    pub fn custom<V, G>(
        name: impl Into<String>,
        dim: usize,
        lipschitz: f64,
        value: V,
        gradient: G,
    ) -> Result<Self, ObjectiveError>
    where
        V: Fn(&[f64]) -> f64 + Send + Sync + 'static,
        G: Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    {
        if dim == 0 {
            return Err(ObjectiveError::Invalid("dimension must be positive".into()));
        }
        if !(lipschitz.is_finite() && lipschitz > 0.0) {
            return Err(ObjectiveError::Invalid(format!(
                "Lipschitz constant must be positive and finite, got {lipschitz}"
            )));
        }
        Ok(Self {
            name: name.into(),
            dim,
            lipschitz,
            value: Arc::new(value),
            gradient: Arc::new(gradient),
            hessian_action: None,
            excess: None,
            min_value: None,
            minimizers: Minimizers::Unknown,
        })
    }

    pub fn with_hessian_action<H>(mut self, h: H) -> Self
    where
        H: Fn(&[f64], &[f64]) -> Vec<f64> + Send + Sync + 'static,
    {
        self.hessian_action = Some(Arc::new(h));
        self
    }

    /// Records the minimum value and the minimizer set.
    pub fn with_minimum(mut self, min_value: f64, minimizers: Minimizers) -> Self {
        self.min_value = Some(min_value);
        self.minimizers = minimizers;
        self
    }

    /// Cancellation-free evaluation of `f(x) − min f`.
    pub fn with_excess<E>(mut self, e: E) -> Self
    where
        E: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        self.excess = Some(Arc::new(e));
        self
    }

    pub fn f1() -> Self {
        Self::custom(
            "f1",
            2,
            4.0,
            |x| (x[0] + x[1]).powi(2),
            |x| {
                let g = 2.0 * (x[0] + x[1]);
                vec![g, g]
            },
        )
        .expect("f1 is well formed")
        .with_hessian_action(|_, v| {
            let h = 2.0 * (v[0] + v[1]);
            vec![h, h]
        })
        .with_minimum(
            0.0,
            Minimizers::Affine {
                point: vec![0.0, 0.0],
                directions: vec![vec![std::f64::consts::FRAC_1_SQRT_2, -std::f64::consts::FRAC_1_SQRT_2]],
            },
        )
        .with_excess(|x| (x[0] + x[1]).powi(2))
    }

    pub fn f2() -> Self {
        Self::custom(
            "f2",
            2,
            std::f64::consts::SQRT_2,
            |x| (1.0 + x[0] * x[0]).sqrt() + (1.0 + x[1] * x[1]).sqrt(),
            |x| x.iter().map(|xi| xi / (1.0 + xi * xi).sqrt()).collect(),
        )
        .expect("f2 is well formed")
        .with_hessian_action(|x, v| x.iter().zip(v).map(|(xi, vi)| vi * (1.0 + xi * xi).powf(-1.5)).collect())
        .with_minimum(2.0, Minimizers::Point(vec![0.0, 0.0]))
        .with_excess(|x| x.iter().map(|xi| xi * xi / (1.0 + (1.0 + xi * xi).sqrt())).sum())
    }

    /// `½ xᵀAx + bᵀx` for symmetric positive semidefinite `A`.
    pub fn quadratic(a: Vec<Vec<f64>>, b: Vec<f64>) -> Result<Self, ObjectiveError> {
        let n = b.len();
        if n == 0 || a.len() != n || a.iter().any(|r| r.len() != n) {
            return Err(ObjectiveError::Invalid("matrix must be square and match b".into()));
        }
        if a.iter().flatten().chain(&b).any(|v| !v.is_finite()) {
            return Err(ObjectiveError::NonFiniteInput);
        }
        let m = DMatrix::from_fn(n, n, |i, j| a[i][j]);
        let scale = m.amax().max(f64::MIN_POSITIVE);
        if (&m - m.transpose()).amax() > 1e-12 * scale {
            return Err(ObjectiveError::Invalid("matrix must be symmetric".into()));
        }
        let eig = SymmetricEigen::new(m.clone());
        let lmax = eig.eigenvalues.max();
        let lmin = eig.eigenvalues.min();
        let tol = 1e-12 * lmax.abs().max(f64::MIN_POSITIVE);
        if lmin < -tol {
            return Err(ObjectiveError::Invalid(format!(
                "matrix must be positive semidefinite, smallest eigenvalue {lmin}"
            )));
        }
        if lmax <= 0.0 {
            return Err(ObjectiveError::Invalid("zero matrix has no positive Lipschitz constant".into()));
        }

        let bv = DVector::from_vec(b.clone());
        let mut point = DVector::zeros(n);
        let mut kernel = Vec::new();
        for k in 0..n {
            let q = eig.eigenvectors.column(k);
            let lam = eig.eigenvalues[k];
            if lam > tol {
                point -= q * (q.dot(&bv) / lam);
            } else {
                kernel.push(q.iter().copied().collect::<Vec<_>>());
            }
        }
        let residual = (&m * &point + &bv).amax();
        let rows = a.clone();
        let value = {
            let rows = rows.clone();
            let b = b.clone();
            move |x: &[f64]| {
                let mut s = 0.0;
                for (i, r) in rows.iter().enumerate() {
                    s += 0.5 * x[i] * dot(r, x) + b[i] * x[i];
                }
                s
            }
        };
        let gradient = {
            let rows = rows.clone();
            let b = b.clone();
            move |x: &[f64]| rows.iter().zip(&b).map(|(r, bi)| dot(r, x) + bi).collect()
        };
        let hv = {
            let rows = rows.clone();
            move |_: &[f64], v: &[f64]| rows.iter().map(|r| dot(r, v)).collect()
        };
        let mut obj = Self::custom("quadratic", n, lmax, value, gradient)?.with_hessian_action(hv);
        if residual <= 1e-10 * (1.0 + bv.amax()) {
            let p: Vec<f64> = point.iter().copied().collect();
            let fmin = {
                let mut s = 0.0;
                for (i, r) in rows.iter().enumerate() {
                    s += 0.5 * p[i] * dot(r, &p) + b[i] * p[i];
                }
                s
            };
            let minimizers = if kernel.is_empty() {
                Minimizers::Point(p.clone())
            } else {
                Minimizers::Affine { point: p.clone(), directions: kernel }
            };
            obj = obj.with_minimum(fmin, minimizers).with_excess(move |x| {
                let d = sub(x, &p);
                let mut s = 0.0;
                for (i, r) in rows.iter().enumerate() {
                    s += 0.5 * d[i] * dot(r, &d);
                }
                s
            });
        }
        Ok(obj)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn lipschitz(&self) -> f64 {
        self.lipschitz
    }

    pub fn min_value(&self) -> Option<f64> {
        self.min_value
    }

    pub fn minimizers(&self) -> &Minimizers {
        &self.minimizers
    }

    pub fn has_hessian_action(&self) -> bool {
        self.hessian_action.is_some()
    }

    fn check(&self, x: &[f64]) -> Result<(), ObjectiveError> {
        if x.len() != self.dim {
            return Err(ObjectiveError::DimensionMismatch { expected: self.dim, got: x.len() });
        }
        if !x.iter().all(|v| v.is_finite()) {
            return Err(ObjectiveError::NonFiniteInput);
        }
        Ok(())
    }

    /// Checked evaluation.
    pub fn eval(&self, x: &[f64]) -> Result<f64, ObjectiveError> {
        self.check(x)?;
        Ok((self.value)(x))
    }

    /// Checked gradient.
    pub fn grad(&self, x: &[f64]) -> Result<Vec<f64>, ObjectiveError> {
        self.check(x)?;
        Ok((self.gradient)(x))
    }

    /// Checked Hessian-vector product `∇²f(x) v`.
    pub fn hessian_vec(&self, x: &[f64], v: &[f64]) -> Result<Vec<f64>, ObjectiveError> {
        self.check(x)?;
        if v.len() != self.dim {
            return Err(ObjectiveError::DimensionMismatch { expected: self.dim, got: v.len() });
        }
        let h = self.hessian_action.as_ref().ok_or_else(|| ObjectiveError::HessianUnavailable(self.name.clone()))?;
        Ok(h(x, v))
    }

    /// Unchecked value, for inner loops whose inputs were validated once.
    #[inline]
    pub fn value(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.dim);
        (self.value)(x)
    }

    /// Unchecked gradient.
    #[inline]
    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.dim);
        (self.gradient)(x)
    }

    /// `f(x) − min f`, when the minimum value is known.
    pub fn gap(&self, x: &[f64]) -> Option<f64> {
        match (&self.excess, self.min_value) {
            (Some(e), _) => Some(e(x)),
            (None, Some(m)) => Some((self.value)(x) - m),
            _ => None,
        }
    }
}

/// Central-difference step for gradients: `ε^{1/3} (1 + ‖x‖)`.
pub fn fd_step(x: &[f64]) -> f64 {
    f64::EPSILON.cbrt() * (1.0 + norm(x))
}

/// Central-difference gradient.
pub fn fd_gradient(obj: &Objective, x: &[f64]) -> Vec<f64> {
    let h = fd_step(x);
    let mut xp = x.to_vec();
    (0..x.len())
        .map(|i| {
            xp[i] = x[i] + h;
            let fp = obj.value(&xp);
            xp[i] = x[i] - h;
            let fm = obj.value(&xp);
            xp[i] = x[i];
            (fp - fm) / (2.0 * h)
        })
        .collect()
}

/// Central-difference Hessian action from gradient differences.
pub fn fd_hessian_vec(obj: &Objective, x: &[f64], v: &[f64]) -> Vec<f64> {
    let nv = norm(v);
    if nv == 0.0 {
        return vec![0.0; x.len()];
    }
    let h = fd_step(x);
    let step: Vec<f64> = v.iter().map(|vi| h * vi / nv).collect();
    let gp = obj.gradient(&crate::vector::add(x, &step));
    let gm = obj.gradient(&sub(x, &step));
    gp.iter().zip(&gm).map(|(a, b)| (a - b) / (2.0 * h) * nv).collect()
}

fn sample_point<R: Rng + ?Sized>(rng: &mut R, dim: usize, half_width: f64) -> Vec<f64> {
    (0..dim).map(|_| rng.gen_range(-half_width..=half_width)).collect()
}

/// Largest observed `‖∇f(x) − ∇f(y)‖ / ‖x − y‖` over random pairs in a box.
pub fn sampled_lipschitz_ratio<R: Rng + ?Sized>(obj: &Objective, rng: &mut R, pairs: usize, half_width: f64) -> f64 {
    let mut worst = 0.0_f64;
    for _ in 0..pairs {
        let x = sample_point(rng, obj.dim(), half_width);
        let y = sample_point(rng, obj.dim(), half_width);
        let d = crate::vector::dist(&x, &y);
        if d == 0.0 {
            continue;
        }
        let r = crate::vector::dist(&obj.gradient(&x), &obj.gradient(&y)) / d;
        worst = worst.max(r);
    }
    worst
}

/// Smallest observed first-order convexity residual
/// `f(y) − f(x) − ⟨∇f(x), y − x⟩`, relative to the magnitudes involved.
pub fn sampled_convexity_residual<R: Rng + ?Sized>(obj: &Objective, rng: &mut R, pairs: usize, half_width: f64) -> f64 {
    let mut worst = f64::INFINITY;
    for _ in 0..pairs {
        let x = sample_point(rng, obj.dim(), half_width);
        let y = sample_point(rng, obj.dim(), half_width);
        let fx = obj.value(&x);
        let fy = obj.value(&y);
        let lin = dot(&obj.gradient(&x), &sub(&y, &x));
        let scale = 1.0 + fx.abs() + fy.abs() + lin.abs();
        worst = worst.min((fy - fx - lin) / scale);
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn f1_values() {
        let f = Objective::f1();
        assert_eq!(f.eval(&[1.0, -2.0]).unwrap(), 1.0);
        assert_eq!(f.grad(&[1.0, -2.0]).unwrap(), vec![-2.0, -2.0]);
        assert_eq!(f.eval(&[3.0, -3.0]).unwrap(), 0.0);
        assert_eq!(f.grad(&[3.0, -3.0]).unwrap(), vec![0.0, 0.0]);
        assert_eq!(f.lipschitz(), 4.0);
        assert_eq!(f.hessian_vec(&[0.3, 0.1], &[1.0, 0.0]).unwrap(), vec![2.0, 2.0]);
        assert!(!f.minimizers().is_unique());
    }

    #[test]
    fn f2_values() {
        let f = Objective::f2();
        assert_eq!(f.eval(&[0.0, 0.0]).unwrap(), 2.0);
        assert_eq!(f.grad(&[0.0, 0.0]).unwrap(), vec![0.0, 0.0]);
        let x = [1.0, -2.0];
        let expected = 2f64.sqrt() + 5f64.sqrt();
        assert!((f.eval(&x).unwrap() - expected).abs() <= 4.0 * f64::EPSILON * expected);
        let g = f.grad(&x).unwrap();
        assert!((g[0] - 1.0 / 2f64.sqrt()).abs() < 1e-15);
        assert!((g[1] + 2.0 / 5f64.sqrt()).abs() < 1e-15);
        assert_eq!(f.lipschitz(), 2f64.sqrt());
        assert_eq!(f.minimizers(), &Minimizers::Point(vec![0.0, 0.0]));
    }

    #[test]
    fn f2_excess_matches_difference() {
        let f = Objective::f2();
        let x = [1.0, -2.0];
        let naive = f.value(&x) - 2.0;
        assert!((f.gap(&x).unwrap() - naive).abs() < 1e-14);
        let tiny = [1e-9, 0.0];
        assert!((f.gap(&tiny).unwrap() - 0.5e-18).abs() < 1e-30);
    }

    #[test]
    fn errors() {
        let f = Objective::f1();
        assert_eq!(f.eval(&[1.0, 2.0, 3.0]), Err(ObjectiveError::DimensionMismatch { expected: 2, got: 3 }));
        assert_eq!(f.grad(&[f64::NAN, 0.0]), Err(ObjectiveError::NonFiniteInput));
        let c = Objective::custom("flat", 1, 1.0, |_| 3.0, |_| vec![0.0]).unwrap();
        assert!(matches!(c.hessian_vec(&[0.0], &[1.0]), Err(ObjectiveError::HessianUnavailable(_))));
        assert!(Objective::custom("bad", 1, 0.0, |_| 0.0, |_| vec![0.0]).is_err());
        assert!(Objective::quadratic(vec![vec![1.0, 2.0], vec![0.0, 1.0]], vec![0.0, 0.0]).is_err());
        assert!(Objective::quadratic(vec![vec![-1.0]], vec![0.0]).is_err());
    }

    #[test]
    fn quadratic_minimizer_and_constant() {
        let q = Objective::quadratic(vec![vec![2.0, 0.0], vec![0.0, 8.0]], vec![-2.0, 8.0]).unwrap();
        assert!((q.lipschitz() - 8.0).abs() < 1e-12);
        match q.minimizers() {
            Minimizers::Point(p) => {
                assert!((p[0] - 1.0).abs() < 1e-12 && (p[1] + 1.0).abs() < 1e-12);
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!((q.min_value().unwrap() + 5.0).abs() < 1e-12);

        let s = Objective::quadratic(vec![vec![2.0, 2.0], vec![2.0, 2.0]], vec![0.0, 0.0]).unwrap();
        let p = s.minimizers().project(&[1.0, 3.0]).unwrap();
        assert!((p[0] + 1.0).abs() < 1e-12 && (p[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn finite_differences_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for f in [Objective::f1(), Objective::f2()] {
            for _ in 0..200 {
                let x = sample_point(&mut rng, 2, 5.0);
                let v = sample_point(&mut rng, 2, 1.0);
                let g = f.gradient(&x);
                let fd = fd_gradient(&f, &x);
                for (a, b) in g.iter().zip(&fd) {
                    assert!((a - b).abs() <= 1e-6 * (1.0 + a.abs()), "{} {a} {b}", f.name());
                }
                let h = f.hessian_vec(&x, &v).unwrap();
                let fh = fd_hessian_vec(&f, &x, &v);
                for (a, b) in h.iter().zip(&fh) {
                    assert!((a - b).abs() <= 1e-6 * (1.0 + a.abs()), "{} {a} {b}", f.name());
                }
            }
        }
    }

    #[test]
    fn sampled_lipschitz_and_convexity() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for f in [Objective::f1(), Objective::f2()] {
            assert!(sampled_lipschitz_ratio(&f, &mut rng, 200, 5.0) <= f.lipschitz() * (1.0 + 1e-12));
            assert!(sampled_convexity_residual(&f, &mut rng, 200, 5.0) >= -1e-14);
        }
    }
}
