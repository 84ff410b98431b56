use std::process::{Command, Output};

fn cdt(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cdt"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    assert!(
        out.status.success(),
        "exit {:?}: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout.clone()).expect("utf-8 output")
}

/// Header line followed by data rows, metadata stripped.
fn table(text: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    let header = lines.next().unwrap().split(',').map(str::to_string).collect();
    let rows = lines
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect();
    (header, rows)
}

fn num(s: &str) -> f64 {
    s.parse().unwrap_or_else(|_| panic!("not a number: {s}"))
}

#[test]
fn predict_lists_first_root_points() {
    let text = stdout(&cdt(&["predict", "--n", "10", "--max-root", "1"]));
    let (header, rows) = table(&text);
    assert_eq!(header, ["i", "root_index", "g1_over_omega", "expected_pairs", "validity_ratio"]);
    let expected = [(0, 0.267203, 1), (1, 0.343547, 2), (2, 0.480965, 3)];
    for ((i, x, pairs), row) in expected.iter().zip(&rows) {
        assert_eq!(row[0], i.to_string());
        assert_eq!(row[1], "1");
        assert!((num(&row[2]) - x).abs() < 5e-7, "{row:?}");
        assert_eq!(row[3], pairs.to_string());
    }
    assert!(text.contains("# omega = 40\n"));
}

#[test]
fn static_spectrum_is_integer_ladder() {
    let text = stdout(&cdt(&["spectrum", "--n", "10", "--grid-min", "0", "--grid-steps", "1"]));
    let (header, rows) = table(&text);
    assert_eq!(header, ["g1_over_omega", "band_index", "quasienergy", "parity"]);
    assert_eq!(rows.len(), 11);
    let mut energies: Vec<f64> = rows.iter().map(|r| num(&r[2])).collect();
    energies.sort_by(f64::total_cmp);
    for (e, want) in energies.iter().zip(-5..=5) {
        assert!((e - want as f64).abs() < 1e-9, "{e} vs {want}");
    }
    assert!(rows.iter().all(|r| r[3] == "1" || r[3] == "-1"));
}

#[test]
fn spectrum_parities_are_signs_along_a_grid() {
    let text = stdout(&cdt(&[
        "spectrum", "--n", "4", "--grid-min", "0.2", "--grid-max", "0.4", "--grid-steps", "3",
    ]));
    let (_, rows) = table(&text);
    assert_eq!(rows.len(), 15);
    for r in &rows {
        assert!(r[3] == "1" || r[3] == "-1");
        assert!(num(&r[2]).abs() <= 20.0);
    }
}

#[test]
fn zero_duration_dynamics_is_single_row() {
    let text = stdout(&cdt(&["dynamics", "--g1", "0", "--t-max", "0"]));
    let (header, rows) = table(&text);
    assert_eq!(header, ["t", "S"]);
    assert_eq!(rows, vec![vec!["0".to_string(), "1".to_string()]]);
}

#[test]
fn undriven_single_particle_oscillates_as_cosine() {
    let text = stdout(&cdt(&[
        "dynamics", "--n", "1", "--g1", "0", "--omega", "40", "--t-max", "10", "--sample-dt", "0.5",
    ]));
    let (_, rows) = table(&text);
    assert_eq!(rows.len(), 21);
    for r in rows {
        let (t, s) = (num(&r[0]), num(&r[1]));
        assert!((s - t.cos()).abs() < 1e-6, "t = {t}: {s}");
    }
}

#[test]
fn dynamics_records_requested_and_used_drive() {
    let text = stdout(&cdt(&["dynamics", "--n", "4", "--g1-over-omega", "0.3", "--t-max", "1"]));
    assert!(text.contains("# g1_over_omega_requested = 0.3\n"));
    assert!(text.contains("# g1_over_omega = 0.3\n"));
    assert!(text.contains("# refined = false\n"));
}

#[test]
fn refined_dynamics_moves_to_the_degeneracy() {
    let text = stdout(&cdt(&[
        "dynamics", "--n", "4", "--omega", "40", "--refine-degeneracy", "--bracket", "0.78", "0.82",
        "--t-max", "0",
    ]));
    let used = text
        .lines()
        .find_map(|l| l.strip_prefix("# g1_over_omega = "))
        .map(num)
        .unwrap();
    assert!((used - 0.8016).abs() < 0.002, "{used}");
}

#[test]
fn scan_and_oddeven_tables() {
    let text = stdout(&cdt(&[
        "scan", "--n", "2", "--grid-min", "0.1", "--grid-max", "0.3", "--grid-steps", "3",
        "--t-total", "50", "--g0-over-omega", "0",
    ]));
    let (header, rows) = table(&text);
    assert_eq!(header, ["g1_over_omega", "s_avg"]);
    assert_eq!(rows.len(), 3);
    assert!(rows.iter().all(|r| num(&r[1]).abs() <= 1.0));

    let text = stdout(&cdt(&["oddeven", "--n-base", "2", "--delta", "2,1", "--t-total", "50"]));
    let (header, rows) = table(&text);
    assert_eq!(header, ["delta", "g1_over_omega_used", "s_avg", "s_min"]);
    assert_eq!(rows.iter().map(|r| r[0].as_str()).collect::<Vec<_>>(), ["1", "2"]);
}

#[test]
fn argument_errors_exit_with_two() {
    for args in [
        &["oddeven", "--delta", "3"][..],
        &["dynamics", "--g1", "1", "--g1-over-omega", "0.1"],
        &["dynamics", "--n", "0"],
        &["spectrum", "--omega", "0"],
        &["spectrum", "--grid-steps", "0"],
        &["predict", "--max-root", "31"],
        &["scan", "--threads", "0"],
        &["bogus"],
    ] {
        let out = cdt(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(out.stdout.is_empty(), "{args:?}");
    }
}

#[test]
fn repeated_runs_are_byte_identical() {
    let args = [
        "spectrum", "--n", "5", "--grid-min", "0.1", "--grid-max", "0.5", "--grid-steps", "5",
        "--threads", "2",
    ];
    let a = cdt(&args);
    let b = cdt(&args);
    assert_eq!(stdout(&a), stdout(&b));
    assert!(!a.stdout.contains(&b'\r'));
}

#[test]
fn output_flag_writes_file() {
    let dir = std::env::temp_dir().join(format!("cdt-cli-test-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("predict.csv");
    let out = cdt(&["predict", "--output", path.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("# cdt "));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn unwritable_output_exits_with_one() {
    let out = cdt(&["predict", "--output", "/nonexistent-dir/x.csv"]);
    assert_eq!(out.status.code(), Some(1));
}
