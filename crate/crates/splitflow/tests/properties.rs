use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;

use proptest::prelude::*;
use splitflow::analysis::{
    check_descent_lemma, check_monotone, check_quadratic_lemma, energy_series, energy_time, DescentVariant,
    QuadraticLemma,
};
use splitflow::continuous::{Construction, Hamiltonian, PhaseState, Rule};
use splitflow::discrete::{iterate, run, Algorithm, Clock, StoppingRule};
use splitflow::objective::Objective;
use splitflow::schedule::{
    check_assumptions, quadratic_coefficients, sharpened_gamma_bound_holds, threshold_index, Schedule, ScheduleKind,
};
use splitflow::vector::max_abs;

const ALPHA: f64 = 3.0;

fn objectives() -> impl Strategy<Value = Objective> {
    prop_oneof![Just(Objective::f1()), Just(Objective::f2())]
}

fn kinds(s: f64) -> impl Strategy<Value = ScheduleKind> {
    let rs = s.sqrt();
    prop_oneof![
        (0.0..2.0f64, 0.0..50.0f64, 0.01..50.0f64).prop_map(|(mu, a, b)| ScheduleKind::E24 { mu, a, b }),
        (0.01..0.99f64, 0.0..2.0f64, 0.01..50.0f64).prop_map(move |(f, mu, b)| ScheduleKind::E25 {
            beta: f * 2.0 * rs,
            mu,
            b
        }),
        (0.0..2.0f64, 0.0..50.0f64, 0.01..50.0f64).prop_map(|(mu, a, b)| ScheduleKind::E26 { mu, a, b }),
    ]
}

/// Objective, admissible step and a parametric schedule.
fn setups() -> impl Strategy<Value = (Objective, f64, ScheduleKind)> {
    (objectives(), 0.01..0.99f64).prop_flat_map(|(obj, frac)| {
        let s = frac / obj.lipschitz();
        (Just(obj), Just(s), kinds(s))
    })
}

fn matrix(dim: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    prop::collection::vec(prop::collection::vec(-2.0..2.0f64, dim), dim).prop_map(move |m| {
        (0..dim)
            .map(|i| {
                (0..dim)
                    .map(|j| (0..dim).map(|k| m[k][i] * m[k][j]).sum::<f64>() + if i == j { 1e-3 } else { 0.0 })
                    .collect()
            })
            .collect()
    })
}

fn point(dim: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-5.0..5.0f64, dim)
}

/// Scan length reaching well past the closed-form threshold.
fn scan_end(kind: ScheduleKind, s: f64, obj: &Objective) -> usize {
    let np = threshold_index(kind, s, ALPHA, obj.lipschitz()).unwrap().value;
    np.max(0.0).ceil() as usize + 500
}

/// Ulp-scale comparison against the magnitude of both iterates.
fn within_ulps(a: &[f64], b: &[f64], ulps: f64) -> bool {
    let scale = max_abs(a).max(max_abs(b)).max(f64::MIN_POSITIVE);
    a.iter().zip(b).all(|(x, y)| (x - y).abs() <= ulps * f64::EPSILON * scale)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn coupling_is_exact((obj, s, kind) in setups()) {
        let sch = Schedule::new(kind, s, ALPHA).unwrap();
        prop_assert!(obj.lipschitz() * s < 1.0);
        for n in 1..=2000 {
            let r = sch.coupling_residual(n).unwrap();
            let scale = sch.coupling_scale(n).unwrap().max(s);
            prop_assert!(r.abs() <= 16.0 * f64::EPSILON * scale, "n = {n}: {r}");
        }
    }

    #[test]
    fn strict_bound_holds_past_threshold((obj, s, kind) in setups()) {
        let sch = Schedule::new(kind, s, ALPHA).unwrap();
        let np = threshold_index(kind, s, ALPHA, obj.lipschitz()).unwrap().value;
        let start = (np.max(ALPHA - 1.0).floor() as usize) + 1;
        let end = 10 * (np.max(0.0).ceil() as usize) + 100;
        for n in start..=end.max(start) {
            prop_assert!(sch.bound_margin(n, obj.lipschitz()).unwrap() > 0.0, "n = {n}, N' = {np}");
        }
    }

    #[test]
    fn quadratic_leading_coefficient_positive_past_threshold((obj, s, kind) in setups()) {
        let sch = Schedule::new(kind, s, ALPHA).unwrap();
        let rep = check_assumptions(&sch, obj.lipschitz(), scan_end(kind, s, &obj)).unwrap();
        prop_assert_eq!(rep.g_nonpositive_at, None);
        prop_assert!(rep.n2.is_finite() && rep.n2 > 0.0);
    }

    #[test]
    fn sharpened_gamma_bound_past_full_threshold((obj, s, kind) in setups()) {
        let sch = Schedule::new(kind, s, ALPHA).unwrap();
        let end = scan_end(kind, s, &obj);
        let rep = check_assumptions(&sch, obj.lipschitz(), end).unwrap();
        for n in (rep.n.floor() as usize + 1)..=end {
            let c = sch.coefficients(n).unwrap();
            prop_assert!(sharpened_gamma_bound_holds(c.gamma_n, s, ALPHA, n), "n = {}", n);
        }
    }

    #[test]
    fn g_factored_form((s, lip, gamma, lo) in (0.001..1.0f64, 0.1..10.0f64, -1.0..1.0f64, -1.0..1.0f64)) {
        let q = quadratic_coefficients(s, lip, gamma, lo);
        let factored = -((gamma * gamma - s * s) + ((s + gamma * (1.0 - lip * s)) - lo).powi(2));
        prop_assert!((q.g - factored).abs() <= 1e-13 * (1.0 + factored.abs()));
    }

    #[test]
    fn energy_time_relation(n in 1usize..10_000, alpha in 3.0..10.0f64) {
        let an = (n as f64 - alpha) / n as f64;
        let lhs = energy_time(n, alpha) - 1.0;
        let rhs = an * energy_time(n + 1, alpha);
        prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + lhs.abs()));
    }

    #[test]
    fn reductions_agree_to_a_few_ulps(obj in objectives(), frac in 0.05..0.95f64, x0 in point(2)) {
        let s = frac / obj.lipschitz();
        let pairs = [
            (Algorithm::LtSe1 { alpha: ALPHA }, ScheduleKind::LtSe1),
            (Algorithm::LtSv2 { alpha: ALPHA }, ScheduleKind::LtSv2),
            (Algorithm::Ardm { alpha: ALPHA }, ScheduleKind::Ardm),
            (Algorithm::LtSe3 { alpha: ALPHA }, ScheduleKind::LtSe3),
            (Algorithm::IgahdType { alpha: ALPHA, beta: 0.3, lagged_gradient: false }, ScheduleKind::Igahd { beta: 0.3 }),
            (Algorithm::Agm2 { alpha: ALPHA, clock: Clock::Natural }, ScheduleKind::Agm2),
        ];
        for (alg, kind) in pairs {
            let gen = Algorithm::Generalized { schedule: Schedule::new(kind, s, ALPHA).unwrap() };
            let mut a = alg.init(&obj, &x0, s).unwrap();
            for _ in 0..30 {
                // One step from a shared state, so differences do not accumulate.
                let na = alg.step(&obj, s, &a).unwrap();
                let nb = gen.step(&obj, s, &a).unwrap();
                prop_assert!(within_ulps(&na.x_curr, &nb.x_curr, 4.0), "{}: {:?} vs {:?}", alg.name(), na.x_curr, nb.x_curr);
                a = na;
            }
        }
    }

    #[test]
    fn velocity_form_matches_two_sequence_form(obj in objectives(), frac in 0.05..0.95f64, x0 in point(2)) {
        let s = frac / obj.lipschitz();
        for clock in [Clock::Natural, Clock::Shifted] {
            let a = iterate(&Algorithm::Agm2 { alpha: ALPHA, clock }, &obj, &x0, s, 200).unwrap();
            let b = iterate(&Algorithm::NagVelocity { alpha: ALPHA, clock }, &obj, &x0, s, 200).unwrap();
            let scale = a.iter().map(|x| max_abs(x)).fold(0.0, f64::max);
            for (p, q) in a.iter().zip(&b) {
                for (u, v) in p.iter().zip(q) {
                    prop_assert!((u - v).abs() <= 1e-11 * scale);
                }
            }
        }
    }

    #[test]
    fn cached_gradients_are_current(obj in objectives(), x0 in point(2), kind in kinds(0.1)) {
        let alg = Algorithm::Generalized { schedule: Schedule::new(kind, 0.1, ALPHA).unwrap() };
        let mut st = alg.init(&obj, &x0, 0.1).unwrap();
        for _ in 0..20 {
            prop_assert_eq!(&st.grad_curr, &obj.gradient(&st.x_curr));
            prop_assert_eq!(&st.grad_prev, &obj.gradient(&st.x_prev));
            st = alg.step(&obj, 0.1, &st).unwrap();
        }
    }

    #[test]
    fn split_constructions_track_their_methods(obj in objectives(), frac in 0.05..0.95f64, x0 in point(2)) {
        let s = frac / obj.lipschitz();
        let sch = Schedule::new(ScheduleKind::E25 { beta: 0.5 * s.sqrt(), mu: 0.1, b: 1.0 }, s, ALPHA).unwrap();
        let cases = [
            (Algorithm::Agm2 { alpha: ALPHA, clock: Clock::Natural }, Construction::Nesterov),
            (Algorithm::IgahdType { alpha: ALPHA, beta: 0.2, lagged_gradient: false }, Construction::Igahd { beta: 0.2 }),
            (Algorithm::Generalized { schedule: sch.clone() }, Construction::Generalized { schedule: sch }),
            (Algorithm::Pim { friction: 0.7 }, Construction::Pim { friction: 0.7 }),
            (Algorithm::Ardm { alpha: ALPHA }, Construction::Ardm),
            (Algorithm::LtSe1 { alpha: ALPHA }, Construction::LtSe1),
            (Algorithm::LtSv2 { alpha: ALPHA }, Construction::LtSv2),
            (Algorithm::LtSe3 { alpha: ALPHA }, Construction::LtSe3),
        ];
        for (alg, con) in cases {
            let a = iterate(&alg, &obj, &x0, s, 100).unwrap();
            let b = con.iterate(&obj, &x0, s, ALPHA, 100).unwrap();
            let scale = a.iter().map(|x| max_abs(x)).fold(0.0, f64::max);
            for (p, q) in a.iter().zip(&b) {
                for (u, v) in p.iter().zip(q) {
                    prop_assert!((u - v).abs() <= 1e-11 * scale, "{}: {} vs {}", alg.name(), u, v);
                }
            }
        }
    }

    #[test]
    fn descent_lemmas_on_random_quadratics(
        a in matrix(3), b in point(3), x in point(3), y in point(3), z in point(3),
        frac in 0.01..=1.0f64, gamma in 0.0..2.0f64,
    ) {
        let q = Objective::quadratic(a, b).unwrap();
        let s = frac / q.lipschitz();
        let g = gamma * s;
        prop_assert!(check_descent_lemma(&q, &x, &y, s, &DescentVariant::Standard).unwrap().holds());
        prop_assert!(check_descent_lemma(&q, &x, &y, s, &DescentVariant::Extended).unwrap().holds());
        let c = check_descent_lemma(&q, &x, &y, s, &DescentVariant::ExtendedShifted { gamma: g, z }).unwrap();
        prop_assert!(c.holds(), "{c:?}");
    }

    #[test]
    fn quadratic_lemmas((a, b, c, x) in (0.01..10.0f64, -10.0..10.0f64, -10.0..10.0f64, -10.0..10.0f64)) {
        if let Ok(v) = check_quadratic_lemma(a, b, c, x, QuadraticLemma::NonPositiveDiscriminant) {
            prop_assert!(v);
        }
        if let Ok(v) = check_quadratic_lemma(a, b, c, x, QuadraticLemma::OutsideRoots) {
            prop_assert!(v);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn energy_non_increasing_past_threshold((obj, s, kind) in setups(), x0 in point(2)) {
        let sch = Schedule::new(kind, s, ALPHA).unwrap();
        let rep = check_assumptions(&sch, obj.lipschitz(), 1500).unwrap();
        let out = run(&Algorithm::Generalized { schedule: sch.clone() }, &obj, &x0, s, &StoppingRule::fixed(1500)).unwrap();
        let t = &out.trajectory;
        let x_star = obj.minimizers().project(&t.xs[t.last_index()]).unwrap();
        let series = energy_series(&obj, t, &sch, &x_star).unwrap();
        prop_assert!(series.e.iter().all(|e| *e >= 0.0));
        let m = check_monotone(&series, rep.n.floor() as usize + 1, 1e-12 * series.max());
        prop_assert_eq!(m.first_violation, None, "{:?} {:?}", rep, m);
    }
}

#[test]
fn two_gradient_evaluations_per_step() {
    let count = Arc::new(AtomicUsize::new(0));
    let c = count.clone();
    let obj = Objective::custom(
        "counted",
        2,
        4.0,
        |x| (x[0] + x[1]).powi(2),
        move |x| {
            c.fetch_add(1, Ordering::Relaxed);
            let g = 2.0 * (x[0] + x[1]);
            vec![g, g]
        },
    )
    .unwrap();
    let alg = Algorithm::Agm2 { alpha: ALPHA, clock: Clock::Natural };
    let st = alg.init(&obj, &[1.0, -2.0], 0.1).unwrap();
    let before = count.load(Ordering::Relaxed);
    let mut st = st;
    for _ in 0..100 {
        st = alg.step(&obj, 0.1, &st).unwrap();
    }
    assert_eq!(count.load(Ordering::Relaxed) - before, 200);
}

#[test]
fn velocity_settles() {
    let obj = Objective::f2();
    let s = 0.1;
    let sch = Schedule::new(ScheduleKind::E26 { mu: 1e-3, a: 1.25, b: 5.5 }, s, ALPHA).unwrap();
    let out =
        run(&Algorithm::Generalized { schedule: sch }, &obj, &[1.0, -2.0], s, &StoppingRule::fixed(1000)).unwrap();
    let t = &out.trajectory;
    let peak = |r: std::ops::Range<usize>| r.map(|n| max_abs(&t.velocity(n))).fold(0.0, f64::max);
    assert!(peak(900..1001) <= peak(1..101));
}

#[test]
fn symplectic_map_preserves_area() {
    let h = Hamiltonian::oscillator();
    for rule in [Rule::SymplecticEuler1, Rule::SymplecticEuler2, Rule::Verlet1, Rule::Verlet2] {
        let e = 1e-6;
        let base = h.step(rule.clone(), 0.3, &PhaseState::new(vec![0.4], vec![-0.2])).unwrap();
        let dx = h.step(rule.clone(), 0.3, &PhaseState::new(vec![0.4 + e], vec![-0.2])).unwrap();
        let dv = h.step(rule.clone(), 0.3, &PhaseState::new(vec![0.4], vec![-0.2 + e])).unwrap();
        let j = [
            [(dx.x[0] - base.x[0]) / e, (dv.x[0] - base.x[0]) / e],
            [(dx.v[0] - base.v[0]) / e, (dv.v[0] - base.v[0]) / e],
        ];
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        assert!((det - 1.0).abs() < 1e-8, "{} {det}", rule.name());
    }
}

#[test]
fn constructions_reject_bad_step() {
    assert!(Construction::Nesterov.iterate(&Objective::f1(), &[1.0, -2.0], -0.1, ALPHA, 10).is_err());
}
