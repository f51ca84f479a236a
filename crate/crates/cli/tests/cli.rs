use std::fs;
use std::process::{Command, Output};

fn qcavity(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qcavity"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn data_rows(csv: &str) -> Vec<Vec<String>> {
    csv.lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn simulate_default_first_row() {
    let out = qcavity(&["simulate", "--steps", "3", "--q", "1"]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let csv = stdout(&out);
    assert!(csv.starts_with("# qcavity "));
    assert!(csv.contains("# cutoff=41\n"));
    let rows = data_rows(&csv);
    let header = &rows[0];
    assert_eq!(header.len(), 22);
    let col = |name: &str| header.iter().position(|h| h == name).unwrap();
    let first = &rows[1];
    assert_eq!(first[col("lambda_t")], "0");
    let value = |name: &str| first[col(name)].parse::<f64>().unwrap();
    assert!((value("abs_s") - 1.0).abs() < 1e-9);
    assert!(value("entanglement").abs() < 1e-9);
    assert_eq!(rows.len(), 4);
}

#[test]
fn figure_preset_groups_and_q0_note() {
    let out = qcavity(&["simulate", "--fig", "1a", "--steps", "4"]);
    assert!(out.status.success());
    let csv = stdout(&out);
    assert!(csv.contains("# note: q -> 1 is the undeformed limit"));
    let rows = data_rows(&csv);
    let groups: std::collections::BTreeSet<&str> =
        rows[1..].iter().map(|r| r[0].as_str()).collect();
    assert_eq!(
        groups.into_iter().collect::<Vec<_>>(),
        vec!["0", "0.5", "0.9"]
    );
}

#[test]
fn both_engines_report_small_deviation() {
    let out = qcavity(&[
        "simulate", "--engine", "both", "--q", "0.9", "--m", "2", "--steps", "6",
    ]);
    assert!(out.status.success());
    let rows = data_rows(&stdout(&out));
    assert_eq!(rows[0].last().unwrap(), "max_deviation");
    for r in &rows[1..] {
        let dev: f64 = r.last().unwrap().parse().unwrap();
        assert!(dev < 1e-6, "{dev}");
    }
}

#[test]
fn closed_engine_rejects_detuning_and_names_the_exact_engine() {
    let out = qcavity(&["simulate", "--detuning", "-0.5", "--steps", "3"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("exact engine"));
    let ok = qcavity(&[
        "simulate",
        "--detuning",
        "-0.5",
        "--steps",
        "3",
        "--engine",
        "exact",
    ]);
    assert!(ok.status.success());
}

#[test]
fn teleport_fig3a_rows() {
    let out = qcavity(&["teleport", "--fig", "3a", "--steps", "3"]);
    assert!(out.status.success());
    let csv = stdout(&out);
    assert!(csv.contains("# self-test bell channel f_overlap=1\n"));
    let rows = data_rows(&csv);
    assert_eq!(
        rows[0].join(","),
        "lambda_t,q,branch,probability,f_paper,f_overlap,f_average,f_paper_normalized"
    );
    assert_eq!(rows.len(), 1 + 2 * 3 * 4);
    assert_eq!(&rows[1][..3], &["0", "0.5", "ee"]);
    assert_eq!(rows[1][4], "0.25");
}

#[test]
fn figure_must_match_subcommand() {
    let out = qcavity(&["simulate", "--fig", "3a"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("teleport"));
}

#[test]
fn config_file_is_overridden_by_flags_and_output_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, "q = 0.5\nm = 2\nsteps = 5\natoms = 0.6,0,0,0.8\n").unwrap();
    let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    for path in [&a, &b] {
        let out = qcavity(&[
            "simulate",
            "--config",
            cfg.to_str().unwrap(),
            "--steps",
            "7",
            "--out",
            path.to_str().unwrap(),
        ]);
        assert!(
            out.status.success(),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
    }
    let text = fs::read_to_string(&a).unwrap();
    assert_eq!(text.as_bytes(), fs::read(&b).unwrap().as_slice());
    assert!(text.contains("m=2 "));
    assert!(text.contains("steps=7 "));
    assert!(text.contains("# atoms=0.6+0i,0+0i,0+0i,0.8+0i\n"));
    assert_eq!(data_rows(&text).len(), 8);
}

#[test]
fn amplitudes_are_renormalized_or_rejected() {
    let out = qcavity(&["simulate", "--steps", "2", "--atoms", "1.0000001,0,0,0"]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("renormalized"));

    let out = qcavity(&["simulate", "--steps", "2", "--atoms", "1,1,0,0"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn bad_arguments_fail() {
    assert!(!qcavity(&["simulate", "--steps", "1"]).status.success());
    assert!(!qcavity(&["simulate", "--q", "1.5"]).status.success());
    assert!(!qcavity(&["simulate", "--engine", "fast"]).status.success());
}

#[test]
fn validate_passes() {
    let out = qcavity(&["validate"]);
    let text = stdout(&out);
    assert!(out.status.success(), "{text}");
    assert!(text.lines().filter(|l| l.starts_with("[PASS]")).count() >= 8);
}
