use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bin(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_biset-sndp"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn gen_solve_audit_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let gen = bin(
        &["gen", "--family", "triangulation", "--n", "14", "--demands", "3", "--kmax", "2", "--kind", "ELEM", "--seed", "4", "--out", "i.json"],
        d,
    );
    assert!(gen.status.success(), "{gen:?}");
    let solve = bin(&["solve", "--in", "i.json", "--out", "r.json", "--trace", "t.jsonl"], d);
    assert_eq!(solve.status.code(), Some(0), "{solve:?}");
    let line = stdout(&solve);
    assert!(line.starts_with("weight=") && line.contains(" dual_lb=") && line.contains(" ratio_vs_dual="));
    assert!(d.join("r.json").exists());
    let trace = fs::read_to_string(d.join("t.jsonl")).unwrap();
    assert!(trace.lines().all(|l| l.starts_with("{\"iter\":")));

    let audit = bin(&["audit", "--in", "i.json", "--report", "r.json", "--counting", "--out", "a.jsonl"], d);
    assert_eq!(audit.status.code(), Some(0), "{audit:?}");
    assert!(stdout(&audit).contains("failed=0"));
    assert!(!fs::read_to_string(d.join("a.jsonl")).unwrap().is_empty());

    let dot = bin(&["export-dot", "--in", "i.json", "--solution", "r.json", "--out", "g.dot"], d);
    assert!(dot.status.success());
    assert!(fs::read_to_string(d.join("g.dot")).unwrap().starts_with("graph"));
}

#[test]
fn disconnected_demand_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(
        d.join("i.json"),
        r#"{"n":3,"weights":[0,1,0],"reliable":[true,true,true],"edges":[[0,1]],"demands":[[0,2,1]],"kind":"EC"}"#,
    )
    .unwrap();
    let out = bin(&["solve", "--in", "i.json", "--out", "r.json"], d);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("certificate"));
    assert!(!d.join("r.json").exists());
}

#[test]
fn tampered_report_fails_audit() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    // square 0-1-2-3-0, r(0,2)=2 needs both 1 and 3
    fs::write(
        d.join("i.json"),
        r#"{"n":4,"weights":[0,1,0,1],"reliable":[true,true,true,true],"edges":[[0,1],[1,2],[2,3],[0,3]],"demands":[[0,2,2]],"kind":"EC"}"#,
    )
    .unwrap();
    assert!(bin(&["solve", "--in", "i.json", "--out", "r.json"], d).status.success());
    let report = fs::read_to_string(d.join("r.json")).unwrap();
    let tampered = report.replacen("\"solution\": [\n    0,\n    1,\n    2,\n    3\n  ]", "\"solution\": [\n    0,\n    1,\n    2\n  ]", 1);
    assert_ne!(report, tampered);
    fs::write(d.join("r.json"), tampered).unwrap();
    let audit = bin(&["audit", "--in", "i.json", "--report", "r.json"], d);
    assert_eq!(audit.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&audit.stderr).contains("FAIL feasible_input_ids"));
}

#[test]
fn bench_writes_one_row_per_seed_deterministically() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let args = ["bench", "--seeds", "1..6", "--family", "grid", "--kind", "EC", "--n", "12", "--exact"];
    let a = bin(&[&args[..], &["--out", "a.csv"]].concat(), d);
    let b = bin(&[&args[..], &["--out", "b.csv"]].concat(), d);
    assert!(a.status.success() && b.status.success(), "{a:?}");
    let csv = fs::read_to_string(d.join("a.csv")).unwrap();
    assert_eq!(csv, fs::read_to_string(d.join("b.csv")).unwrap());
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 7);
    assert!(lines[0].starts_with("seed,family,n,m,kind,k,alg_weight,exact_weight"));
    for row in &lines[1..] {
        let cols: Vec<&str> = row.split(',').collect();
        let k: f64 = cols[5].parse().unwrap();
        let ratio: f64 = cols[9].parse().unwrap();
        assert!(ratio <= 10.0 * k);
        assert_eq!(cols[13], "true");
    }
}

#[test]
fn bad_arguments_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin(&["bench", "--seeds", "5..1", "--family", "grid", "--out", "x.csv"], dir.path());
    assert!(!out.status.success());
    let out = bin(&["gen", "--family", "torus", "--n", "4", "--out", "x.json"], dir.path());
    assert!(!out.status.success());
}
