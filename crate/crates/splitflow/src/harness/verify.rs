use std::fmt::Write as _;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::ode::{cmd_ode_compare, OdeCompareConfig};
use super::table::{builtin_rows, cmd_table, TableSettings};
use super::HarnessError;
use crate::analysis::{
    check_descent_lemma, check_monotone, check_quadratic_lemma, energy_series, fit_rate, rate_bound_violations,
    spurious_root_residual, DescentVariant, QuadraticLemma, SpuriousEquation,
};
use crate::continuous::{Construction, Hamiltonian, PhaseState, Rule};
use crate::discrete::{iterate, run, Algorithm, Clock, StoppingRule, Termination};
use crate::objective::Objective;
use crate::schedule::{check_assumptions, threshold_index, Schedule, ScheduleKind};
use crate::vector::rel_gap;

/// Suite names accepted by [`cmd_verify`].
pub const SUITES: &[&str] = &[
    "constructions",
    "ode",
    "energy",
    "rate",
    "coupling",
    "thresholds",
    "lemmas",
    "spurious",
    "tables",
    "symplectic",
    "all",
];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub suite: String,
    pub name: String,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub checks: Vec<Check>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            let status = if c.passed { "pass" } else { "FAIL" };
            let _ = writeln!(out, "{}/{}: {status} ({:.3}s) {}", c.suite, c.name, c.seconds, c.detail);
        }
        let failed = self.checks.iter().filter(|c| !c.passed).count();
        let _ = writeln!(out, "checks: {}", self.checks.len());
        let _ = writeln!(out, "failed: {failed}");
        out
    }
}

type Outcome = Result<(bool, String), HarnessError>;

fn timed(suite: &str, name: &str, f: impl FnOnce() -> Outcome) -> Check {
    let start = Instant::now();
    let (passed, detail) = match f() {
        Ok(v) => v,
        Err(e) => (false, format!("error: {e}")),
    };
    Check { suite: suite.into(), name: name.into(), passed, detail, seconds: start.elapsed().as_secs_f64() }
}

/// Runs one named suite, or every suite for `all`.
pub fn cmd_verify(suite: &str, seed: u64) -> Result<VerifyReport, HarnessError> {
    let suite = suite.trim();
    if suite.is_empty() {
        return Err(HarnessError::EmptySuite);
    }
    let names: Vec<&str> = match suite {
        "all" => SUITES.iter().copied().filter(|s| *s != "all").collect(),
        s if SUITES.contains(&s) => vec![s],
        other => return Err(HarnessError::UnknownSuite(other.to_string())),
    };
    let mut checks = Vec::new();
    for name in names {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        checks.extend(match name {
            "constructions" => constructions(),
            "ode" => ode(),
            "energy" => energy(),
            "rate" => rate(),
            "coupling" => coupling(&mut rng),
            "thresholds" => thresholds(&mut rng),
            "lemmas" => lemmas(&mut rng),
            "spurious" => spurious(),
            "tables" => tables(),
            "symplectic" => symplectic(),
            _ => unreachable!("suite list and dispatch agree"),
        });
    }
    Ok(VerifyReport { checks })
}

const ALPHA: f64 = 3.0;
const X0: [f64; 2] = [1.0, -2.0];

fn max_gap(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    a.iter().zip(b).map(|(x, y)| rel_gap(x, y)).fold(0.0, f64::max)
}

fn constructions() -> Vec<Check> {
    let s = 0.025;
    let steps = 1000;
    let mut out = Vec::new();
    for obj in [Objective::f1(), Objective::f2()] {
        let e25 = match Schedule::new(ScheduleKind::E25 { beta: 0.1, mu: 0.1, b: 1.0 }, s, ALPHA) {
            Ok(v) => v,
            Err(e) => {
                out.push(timed("constructions", "e25 schedule", || Err(e.into())));
                continue;
            }
        };
        let pairs = vec![
            (Algorithm::Agm2 { alpha: ALPHA, clock: Clock::Natural }, Construction::Nesterov),
            (
                Algorithm::IgahdType { alpha: ALPHA, beta: 0.1, lagged_gradient: false },
                Construction::Igahd { beta: 0.1 },
            ),
            (Algorithm::Generalized { schedule: e25.clone() }, Construction::Generalized { schedule: e25 }),
            (Algorithm::Pim { friction: 0.5 }, Construction::Pim { friction: 0.5 }),
            (Algorithm::Ardm { alpha: ALPHA }, Construction::Ardm),
            (Algorithm::LtSe1 { alpha: ALPHA }, Construction::LtSe1),
            (Algorithm::LtSv2 { alpha: ALPHA }, Construction::LtSv2),
            (Algorithm::LtSe3 { alpha: ALPHA }, Construction::LtSe3),
        ];
        for (alg, con) in pairs {
            let name = format!("{} {} vs {}", obj.name(), alg.name(), con.name());
            out.push(timed("constructions", &name, || {
                let a = iterate(&alg, &obj, &X0, s, steps)?;
                let b = con.iterate(&obj, &X0, s, ALPHA, steps)?;
                let g = max_gap(&a, &b);
                Ok((g <= 1e-12, format!("max relative gap {g:.3e}")))
            }));
        }
    }
    out
}

fn ode() -> Vec<Check> {
    vec![timed("ode", "first-order vs hessian-damped", || {
        let (rep, _) = cmd_ode_compare(&OdeCompareConfig::default())?;
        let order = rep.min_order().unwrap_or(f64::NAN);
        let gaps: Vec<String> = rep.levels.iter().map(|l| format!("{:.3e}", l.sup_gap)).collect();
        Ok((order >= 3.5, format!("sup gaps [{}], min order {order:.3}", gaps.join(", "))))
    })]
}

fn energy_kinds(s: f64) -> [ScheduleKind; 3] {
    [
        ScheduleKind::E24 { mu: 1e-2, a: 4.0, b: 10.0 },
        ScheduleKind::E25 { beta: 0.1 * 2.0 * s.sqrt(), b: 1.0, mu: 0.1 },
        ScheduleKind::E26 { mu: 1e-3, a: 1.25, b: 5.5 },
    ]
}

fn energy() -> Vec<Check> {
    let obj = Objective::f2();
    let s = 0.5 / obj.lipschitz();
    energy_kinds(s)
        .into_iter()
        .map(|kind| {
            timed("energy", kind.label(), || {
                let sch = Schedule::new(kind, s, ALPHA)?;
                let rep = check_assumptions(&sch, obj.lipschitz(), 2000)?;
                let out =
                    run(&Algorithm::Generalized { schedule: sch.clone() }, &obj, &X0, s, &StoppingRule::fixed(2000))?;
                let series = energy_series(&obj, &out.trajectory, &sch, &[0.0, 0.0])?;
                let m = check_monotone(&series, rep.n.floor() as usize + 1, 1e-12 * series.max());
                Ok((
                    rep.n.is_finite() && m.violations == 0,
                    format!("N = {:.3}, checked {}, violations {}", rep.n, m.checked, m.violations),
                ))
            })
        })
        .collect()
}

fn rate() -> Vec<Check> {
    let obj = Objective::f2();
    let s = 0.025;
    let floor = 1e2 * f64::EPSILON * obj.min_value().unwrap_or(1.0).abs();
    let mut out = Vec::new();
    out.push(timed("rate", "agm2 slope", || {
        let run_out =
            run(&Algorithm::Agm2 { alpha: ALPHA, clock: Clock::Natural }, &obj, &X0, s, &StoppingRule::fixed(2000))?;
        let fit = fit_rate(&run_out.trajectory.gap, 50, 2000, floor)?;
        Ok((fit.exponent <= -1.8, format!("slope {:.3} over {} points", fit.exponent, fit.points)))
    }));
    out.push(timed("rate", "e25 slope and bound", || {
        let kind = ScheduleKind::E25 { beta: 0.1 * 2.0 * s.sqrt(), b: 1.0, mu: 0.1 };
        let sch = Schedule::new(kind, s, ALPHA)?;
        let rep = check_assumptions(&sch, obj.lipschitz(), 2000)?;
        let run_out = run(&Algorithm::Generalized { schedule: sch.clone() }, &obj, &X0, s, &StoppingRule::fixed(2000))?;
        let fit = fit_rate(&run_out.trajectory.gap, 50, 2000, floor)?;
        let series = energy_series(&obj, &run_out.trajectory, &sch, &[0.0, 0.0])?;
        let v = rate_bound_violations(&run_out.trajectory.gap, &series, ALPHA, rep.n);
        Ok((
            fit.exponent <= -1.8 && v.is_empty(),
            format!("slope {:.3}, N = {:.3}, bound violations {}", fit.exponent, rep.n, v.len()),
        ))
    }));
    out
}

/// Objective, admissible step and parameters for one schedule family.
/// Ranges keep `N′` moderate so scans stay short.
fn draw(rng: &mut ChaCha8Rng, family: usize) -> (Objective, f64, ScheduleKind) {
    let obj = if rng.gen_bool(0.5) { Objective::f1() } else { Objective::f2() };
    let s = rng.gen_range(0.05..0.95) / obj.lipschitz();
    let kind = match family {
        0 => {
            ScheduleKind::E24 { mu: rng.gen_range(0.0..1.0), a: rng.gen_range(0.0..50.0), b: rng.gen_range(0.01..50.0) }
        }
        1 => ScheduleKind::E25 {
            beta: rng.gen_range(0.01..0.99) * 2.0 * s.sqrt(),
            mu: rng.gen_range(0.0..1.0),
            b: rng.gen_range(0.01..50.0),
        },
        _ => {
            ScheduleKind::E26 { mu: rng.gen_range(0.0..1.0), a: rng.gen_range(0.0..50.0), b: rng.gen_range(0.01..50.0) }
        }
    };
    (obj, s, kind)
}

fn coupling(rng: &mut ChaCha8Rng) -> Vec<Check> {
    (0..3)
        .map(|family| {
            let draws: Vec<_> = (0..20).map(|_| draw(rng, family)).collect();
            let label = draws[0].2.label();
            timed("coupling", label, || {
                let mut worst = 0.0_f64;
                for (_, s, kind) in &draws {
                    let sch = Schedule::new(*kind, *s, ALPHA)?;
                    for n in 1..=10_000 {
                        let r = sch.coupling_residual(n)?.abs() / sch.coupling_scale(n)?.max(*s);
                        worst = worst.max(r / f64::EPSILON);
                    }
                }
                Ok((worst <= 16.0, format!("worst residual {worst:.2} ulp of scale over 20 draws")))
            })
        })
        .collect()
}

fn thresholds(rng: &mut ChaCha8Rng) -> Vec<Check> {
    (0..3)
        .map(|family| {
            let draws: Vec<_> = (0..20).map(|_| draw(rng, family)).collect();
            let label = draws[0].2.label();
            timed("thresholds", label, || {
                let mut bad = Vec::new();
                for (obj, s, kind) in &draws {
                    let l = obj.lipschitz();
                    let sch = Schedule::new(*kind, *s, ALPHA)?;
                    let np = threshold_index(*kind, *s, ALPHA, l)?.value;
                    let from = (np.floor() as i64 + 1).max(1) as usize;
                    let end = 10 * np.max(0.0).ceil() as usize + 100;
                    for n in from..=end {
                        if sch.bound_margin(n, l)? <= 0.0 {
                            bad.push(format!("{kind:?} s={s} at n={n}"));
                            break;
                        }
                    }
                }
                Ok((bad.is_empty(), if bad.is_empty() { "no violation past N′".into() } else { bad.join("; ") }))
            })
        })
        .collect()
}

fn random_psd(rng: &mut ChaCha8Rng, dim: usize) -> Vec<Vec<f64>> {
    let m: Vec<Vec<f64>> = (0..dim).map(|_| (0..dim).map(|_| rng.gen_range(-2.0..2.0)).collect()).collect();
    (0..dim)
        .map(|i| {
            (0..dim)
                .map(|j| (0..dim).map(|k| m[k][i] * m[k][j]).sum::<f64>() + if i == j { 1e-3 } else { 0.0 })
                .collect()
        })
        .collect()
}

fn random_point(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    (0..dim).map(|_| rng.gen_range(-5.0..5.0)).collect()
}

fn lemmas(rng: &mut ChaCha8Rng) -> Vec<Check> {
    let mut out = Vec::new();
    out.push(timed("lemmas", "descent inequalities", || {
        let mut violations = [0usize; 3];
        for _ in 0..10_000 {
            let q = Objective::quadratic(random_psd(rng, 3), random_point(rng, 3))?;
            let (x, y, z) = (random_point(rng, 3), random_point(rng, 3), random_point(rng, 3));
            let s = rng.gen_range(0.01..=1.0) / q.lipschitz();
            let gamma = rng.gen_range(0.0..2.0) * s;
            let variants =
                [DescentVariant::Standard, DescentVariant::Extended, DescentVariant::ExtendedShifted { gamma, z }];
            for (k, v) in variants.iter().enumerate() {
                if !check_descent_lemma(&q, &x, &y, s, v)?.holds() {
                    violations[k] += 1;
                }
            }
        }
        Ok((
            violations == [0; 3],
            format!("violations standard {}, extended {}, shifted {}", violations[0], violations[1], violations[2]),
        ))
    }));
    out.push(timed("lemmas", "quadratic sign lemmas", || {
        let mut violations = [0usize; 2];
        for _ in 0..100_000 {
            let a = rng.gen_range(0.01..10.0);
            let b = rng.gen_range(-10.0..10.0);
            let x = rng.gen_range(-10.0..10.0);
            let c = b * b / (4.0 * a) + rng.gen_range(0.0..10.0);
            if !check_quadratic_lemma(a, b, c, x, QuadraticLemma::NonPositiveDiscriminant)? {
                violations[0] += 1;
            }
            let c = b * b / (4.0 * a) - rng.gen_range(0.0..10.0);
            let r = (b * b - 4.0 * a * c).sqrt();
            let x = if rng.gen_bool(0.5) {
                (-b + r) / (2.0 * a) + rng.gen_range(0.0..10.0)
            } else {
                (-b - r) / (2.0 * a) - rng.gen_range(0.0..10.0)
            };
            match check_quadratic_lemma(a, b, c, x, QuadraticLemma::OutsideRoots) {
                Ok(true) => {}
                Ok(false) => violations[1] += 1,
                // Rounding can put a sample a hair inside the roots.
                Err(_) => {}
            }
        }
        Ok((violations == [0; 2], format!("violations {} and {}", violations[0], violations[1])))
    }));
    out
}

fn spurious() -> Vec<Check> {
    let s = 0.025;
    let eqs = [
        ("general", SpuriousEquation::General { omega: 0.5 * s }),
        ("double-step", SpuriousEquation::DoubleStep),
        ("single-step", SpuriousEquation::SingleStep),
    ];
    let mut out = Vec::new();
    for (name, eq) in eqs {
        out.push(timed("spurious", &format!("{name} at minimizers"), || {
            let r1 = spurious_root_residual(&Objective::f1(), &[0.7, -0.7], s, eq)?;
            let r2 = spurious_root_residual(&Objective::f2(), &[0.0, 0.0], s, eq)?;
            let r = r1.max(r2);
            Ok((r <= 1e-14, format!("residual {r:.3e}")))
        }));
        out.push(timed("spurious", &format!("{name} off the minimizer"), || {
            let r = spurious_root_residual(&Objective::f2(), &[1.0, 0.0], s, eq)?;
            Ok((r > 0.0, format!("residual {r:.3e}")))
        }));
    }
    out
}

fn tables() -> Vec<Check> {
    let settings = TableSettings::default();
    let mut out = Vec::new();
    let records = match cmd_table(&builtin_rows(), &settings) {
        Ok((r, _)) => r,
        Err(e) => return vec![timed("tables", "rows", || Err(e))],
    };
    out.push(timed("tables", "rows terminate", || {
        let bad: Vec<String> = records
            .iter()
            .filter(|r| !(r.termination == Termination::ToleranceMet && r.error <= settings.epsilon) && !r.sentinel)
            .map(|r| format!("table {} {}", r.row.table, r.row.case))
            .collect();
        Ok((bad.is_empty(), if bad.is_empty() { format!("{} rows", records.len()) } else { bad.join(", ") }))
    }));
    out.push(timed("tables", "threshold pattern", || {
        let mut bad = Vec::new();
        for r in &records {
            let ok = match r.row.case.chars().next() {
                Some('A') => r.n_prime < 3.0,
                Some('B') => r.n_prime > 5.0,
                Some('D') => r.n_prime < 2.0,
                Some('E') => r.n_prime <= 0.0,
                _ => true,
            };
            if !ok {
                bad.push(format!("table {} {} N′ = {:.3}", r.row.table, r.row.case, r.n_prime));
            }
        }
        Ok((bad.is_empty(), if bad.is_empty() { "A/D small, B large, E nonpositive".into() } else { bad.join(", ") }))
    }));
    out
}

fn symplectic() -> Vec<Check> {
    vec![timed("symplectic", "oscillator energy", || {
        let ham = Hamiltonian::oscillator();
        let h = 0.01;
        let steps = 100_000;
        let start = PhaseState::new(vec![1.0], vec![0.0]);
        let e0 = ham.energy(&start);
        let (mut se, mut fe) = (start.clone(), start);
        let mut drift = 0.0_f64;
        for _ in 0..steps {
            se = ham.step(Rule::SymplecticEuler2, h, &se)?;
            fe = ham.step(Rule::ForwardEuler, h, &fe)?;
            drift = drift.max((ham.energy(&se) - e0).abs() / e0);
        }
        let growth = ham.energy(&fe) / e0;
        Ok((
            drift <= 10.0 * h && growth >= 100.0,
            format!("symplectic drift {drift:.3e}, forward Euler growth {growth:.3e}"),
        ))
    })]
}
