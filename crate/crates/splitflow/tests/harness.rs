use splitflow::discrete::{StopKind, Termination};
use splitflow::harness::{
    builtin_rows, cmd_ode_compare, cmd_run, cmd_sweep, cmd_table, cmd_verify, GridSpec, HarnessError, OdeCompareConfig,
    RunConfig, TableSettings,
};
use splitflow::objective::ObjectiveSpec;
use splitflow::schedule::ScheduleKind;

fn csv_rows(bytes: &[u8]) -> Vec<csv::StringRecord> {
    csv::Reader::from_reader(bytes).records().map(Result::unwrap).collect()
}

#[test]
fn agm2_on_f2_meets_tolerance() {
    let art = cmd_run(&RunConfig::default()).unwrap();
    let r = &art.summary.report;
    assert_eq!(r.termination, Termination::ToleranceMet);
    assert!(r.error_final <= 1e-10);
    assert_eq!(csv_rows(&art.trajectory_csv).len(), r.n_final + 1);
}

#[test]
fn row_count_matches_final_index_for_every_method() {
    for alg in ["agm2", "nag", "lt-se1", "lt-sv2", "ardm", "lt-se3", "igahd", "igahd-lagged", "pim", "polyak-igahd"] {
        let cfg = RunConfig { algorithm: alg.into(), beta: 0.1, friction: 0.5, max_iter: 300, ..RunConfig::default() };
        let art = cmd_run(&cfg).unwrap();
        let rows = csv_rows(&art.trajectory_csv);
        assert_eq!(rows.len(), art.summary.report.n_final + 1, "{alg}");
        assert_eq!(&rows[0][0], "0");
    }
}

#[test]
fn trajectory_columns_and_round_trip_precision() {
    let art = cmd_run(&RunConfig { max_iter: 10, epsilon: 0.0, ..RunConfig::default() }).unwrap();
    let mut rdr = csv::Reader::from_reader(art.trajectory_csv.as_slice());
    let header: Vec<String> = rdr.headers().unwrap().iter().map(String::from).collect();
    assert_eq!(header, ["n", "x1", "x2", "f", "fgap", "gradnorm", "v1", "v2", "E"]);
    let traj = &art.outcome.trajectory;
    for (n, rec) in rdr.records().enumerate() {
        let rec = rec.unwrap();
        let x1: f64 = rec[1].parse().unwrap();
        assert_eq!(x1.to_bits(), traj.xs[n][0].to_bits());
    }
}

#[test]
fn starting_at_the_minimizer_stops_at_once() {
    let art = cmd_run(&RunConfig { x0: vec![0.0, 0.0], ..RunConfig::default() }).unwrap();
    assert_eq!(art.summary.report.termination, Termination::ToleranceMet);
    assert_eq!(art.summary.report.n_final, 1);
    assert_eq!(art.summary.report.error_final, 0.0);
}

#[test]
fn known_minimum_stopping() {
    let cfg = RunConfig { stop_kind: StopKind::KnownMinF, ..RunConfig::default() };
    let art = cmd_run(&cfg).unwrap();
    let r = &art.summary.report;
    assert_eq!(r.termination, Termination::ToleranceMet);
    assert!(r.f_final - 2.0 <= 1e-10);
}

#[test]
fn rejects_bad_configs() {
    let s = 0.025_f64;
    let wide = RunConfig {
        algorithm: "lt-s-igahd".into(),
        schedule: Some(ScheduleKind::E25 { beta: 2.0 * s.sqrt(), mu: 0.1, b: 1.0 }),
        ..RunConfig::default()
    };
    assert!(matches!(cmd_run(&wide), Err(HarnessError::Schedule(_))));

    let at_limit = RunConfig { s: 1.0 / 2f64.sqrt(), ..RunConfig::default() };
    assert!(matches!(cmd_run(&at_limit), Err(HarnessError::Config(_))));
    let negative = RunConfig { s: -0.1, ..RunConfig::default() };
    assert!(matches!(cmd_run(&negative), Err(HarnessError::Config(_))));

    let unknown = RunConfig { algorithm: "adam".into(), ..RunConfig::default() };
    assert!(matches!(cmd_run(&unknown), Err(HarnessError::UnknownAlgorithm(_))));

    let missing = RunConfig { algorithm: "lt-s-igahd".into(), ..RunConfig::default() };
    assert!(matches!(cmd_run(&missing), Err(HarnessError::Config(_))));

    let dim = RunConfig { x0: vec![1.0], ..RunConfig::default() };
    assert!(matches!(cmd_run(&dim), Err(HarnessError::Config(_))));

    assert!(RunConfig::from_json(r#"{"objective": {"name": "f7"}}"#).is_err());
}

#[test]
fn writes_report_and_trajectory() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = RunConfig {
        objective: ObjectiveSpec::F1,
        algorithm: "lt-s-igahd".into(),
        schedule: Some(ScheduleKind::E24 { mu: 1e-2, a: 4.0, b: 10.0 }),
        s: 0.1,
        require_threshold: true,
        out_dir: Some(dir.path().to_path_buf()),
        ..RunConfig::default()
    };
    let art = cmd_run(&cfg).unwrap();
    assert_eq!(art.summary.files.len(), 2);
    let report = std::fs::read_to_string(dir.path().join("report.txt")).unwrap();
    for key in ["termination:", "n_final:", "error_final:", "N1:", "N2:", "N_prime:", "N:", "file:"] {
        assert!(report.contains(key), "{key} missing from\n{report}");
    }
    let n = art.summary.thresholds.as_ref().unwrap().n;
    assert!(art.summary.report.n_final as f64 > n);
    let on_disk = std::fs::read(dir.path().join("trajectory.csv")).unwrap();
    assert_eq!(on_disk, art.trajectory_csv);
}

#[test]
fn runs_are_bit_identical() {
    let cfg = RunConfig {
        algorithm: "lt-s-igahd".into(),
        schedule: Some(ScheduleKind::E26 { mu: 1e-3, a: 1.25, b: 5.5 }),
        ..RunConfig::default()
    };
    assert_eq!(cmd_run(&cfg).unwrap().trajectory_csv, cmd_run(&cfg).unwrap().trajectory_csv);
}

fn e24_grid(workers: usize) -> GridSpec {
    GridSpec {
        example: "e24".into(),
        mu: vec![1e-2, 1.0, 2.0],
        a: vec![0.5, 4.0, 100.0],
        b: vec![1.75, 10.0, 102.0],
        workers,
        ..GridSpec::default()
    }
}

#[test]
fn sweep_order_independent_of_workers() {
    let (cells1, csv1) = cmd_sweep(&e24_grid(1)).unwrap();
    let (_, csv4) = cmd_sweep(&e24_grid(4)).unwrap();
    assert_eq!(cells1.len(), 27);
    assert_eq!(csv1, csv4);
    assert!(cells1.iter().enumerate().all(|(i, c)| c.index == i));
}

#[test]
fn sweep_separates_small_and_large_thresholds() {
    // Small μ with b − a > 1/4 against large μ relative to the step.
    let (cells, _) = cmd_sweep(&e24_grid(2)).unwrap();
    for c in &cells {
        assert!(c.admissible, "{c:?}");
        if c.mu == 1e-2 && c.b - c.a > 0.25 {
            assert!(c.n_prime < 3.0, "{c:?}");
        }
        if c.mu >= 1.0 && c.a < 50.0 {
            assert!(c.n_prime > 10.0, "{c:?}");
        }
    }
}

#[test]
fn sweep_flags_inadmissible_cells_and_continues() {
    let s = 0.1_f64;
    let spec = GridSpec {
        example: "e25".into(),
        beta: vec![0.5 * 2.0 * s.sqrt(), 3.0 * s.sqrt()],
        b: vec![1.0],
        mu: vec![0.1],
        s,
        ..GridSpec::default()
    };
    let (cells, _) = cmd_sweep(&spec).unwrap();
    assert_eq!(cells.len(), 2);
    assert!(cells[0].admissible);
    assert!(!cells[1].admissible);
    assert!(!cells[1].note.is_empty());
}

#[test]
fn single_cell_sweep_matches_run() {
    let spec = GridSpec { mu: vec![1e-2], a: vec![4.0], b: vec![10.0], ..GridSpec::default() };
    let (cells, _) = cmd_sweep(&spec).unwrap();
    let cfg = RunConfig {
        objective: ObjectiveSpec::F1,
        algorithm: "lt-s-igahd".into(),
        schedule: Some(ScheduleKind::E24 { mu: 1e-2, a: 4.0, b: 10.0 }),
        s: 0.1,
        require_threshold: true,
        ..RunConfig::default()
    };
    let art = cmd_run(&cfg).unwrap();
    assert_eq!(cells[0].n_final, art.summary.report.n_final);
    assert_eq!(cells[0].error.to_bits(), art.summary.report.error_final.to_bits());
}

#[test]
fn table_rows_all_finish() {
    let (records, bytes) = cmd_table(&builtin_rows(), &TableSettings::default()).unwrap();
    assert_eq!(records.len(), 28);
    assert_eq!(csv_rows(&bytes).len(), 28);
    let header = csv::Reader::from_reader(bytes.as_slice()).headers().unwrap().clone();
    let lead: Vec<&str> = header.iter().take(9).collect();
    assert_eq!(lead, ["Cases", "error", "epsilon", "mu", "a", "b", "N2", "N_prime", "N"]);
    for r in &records {
        assert_ne!(r.termination, Termination::Diverged);
        assert!(r.error <= 1e-10 || r.sentinel, "{r:?}");
    }
}

#[test]
fn table_lipschitz_variant_matches_published_second_family() {
    let (records, _) = cmd_table(&builtin_rows(), &TableSettings::default()).unwrap();
    for r in records.iter().filter(|r| r.row.table >= 3) {
        let v = r.n_prime_lipschitz.unwrap();
        assert!((v - r.row.published_n_prime).abs() < 0.01, "{} {}: {v}", r.row.table, r.row.case);
    }
}

#[test]
fn step_inference_reports_a_step_per_row() {
    let rows = &builtin_rows()[..2];
    let settings = TableSettings { infer_s: true, infer_points: 40, ..TableSettings::default() };
    let (records, _) = cmd_table(rows, &settings).unwrap();
    for r in records {
        let s = r.inferred_s.unwrap();
        assert!(s > 0.0 && s < 0.25);
        assert!(r.inferred_n2.unwrap().is_finite());
    }
}

#[test]
fn verify_suite_names() {
    assert!(matches!(cmd_verify("", 0), Err(HarnessError::EmptySuite)));
    assert!(matches!(cmd_verify("everything", 0), Err(HarnessError::UnknownSuite(_))));
    let rep = cmd_verify("constructions", 0).unwrap();
    assert_eq!(rep.checks.len(), 16);
    assert!(rep.passed(), "{}", rep.to_text());
}

#[test]
fn verify_is_deterministic_for_a_seed() {
    let a = cmd_verify("coupling", 7).unwrap();
    let b = cmd_verify("coupling", 7).unwrap();
    let strip = |r: &splitflow::harness::VerifyReport| r.checks.iter().map(|c| c.detail.clone()).collect::<Vec<_>>();
    assert_eq!(strip(&a), strip(&b));
}

#[test]
fn ode_compare_observes_fourth_order() {
    let (rep, bytes) = cmd_ode_compare(&OdeCompareConfig::default()).unwrap();
    assert_eq!(rep.levels.len(), 3);
    assert!(rep.min_order().unwrap() >= 3.5, "{rep:?}");
    assert_eq!(csv_rows(&bytes).len(), 3);
}

#[test]
fn ode_compare_without_hessian_damping_is_close() {
    let cfg = OdeCompareConfig { beta: 0.0, ..OdeCompareConfig::default() };
    let (rep, _) = cmd_ode_compare(&cfg).unwrap();
    assert!(rep.levels.iter().all(|l| l.sup_gap < 1e-8), "{rep:?}");
}
