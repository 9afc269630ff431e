use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn data(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../core/data")
        .join(rel)
}

fn iotsec(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_iotsec"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

#[test]
fn score_prints_value_and_band() {
    let o = iotsec(&["score", "AV:N/AC:L/PR:N/UI:N/S:U/C:H/I:H/A:H"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o), "9.8 Critical\n");
    let o = iotsec(&["score", "CVSS:3.1/AV:P/AC:H/PR:N/UI:N/S:C/C:H/I:H/A:H"]);
    assert_eq!(stdout(&o), "7.1 High\n");
    let o = iotsec(&["score", "AV:A/AC:L/PR:N/UI:N/S:C/C:H/I:H/A:H"]);
    assert_eq!(stdout(&o), "9.6 Critical\n");
}

#[test]
fn score_warns_on_metric_order() {
    let o = iotsec(&["score", "AC:L/AV:N/PR:N/UI:N/S:U/C:H/I:H/A:H"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o), "9.8 Critical\n");
    assert!(stderr(&o).contains("canonical form is AV:N/AC:L"));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(iotsec(&["score", "AV:Q/AC:L"]).status.code(), Some(2));
    assert_eq!(iotsec(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(iotsec(&[]).status.code(), Some(2));
    assert_eq!(iotsec(&["rank", "--format", "xml"]).status.code(), Some(2));
    assert_eq!(iotsec(&["ingest", "x.toml"]).status.code(), Some(2));
}

#[test]
fn rank_first_line() {
    let o = iotsec(&["rank", "--format", "machine"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("# iotsec machine v1 rank"));
    assert!(lines.next().unwrap().starts_with("bp\toccurrence\taverage"));
    assert!(lines.next().unwrap().starts_with("BP-DSP-02\t7\t6.5\t"));

    let table = stdout(&iotsec(&["rank"]));
    let first = table.lines().find(|l| l.starts_with("BP-")).unwrap();
    assert!(first.starts_with("BP-DSP-02"), "{first}");
    assert!(first.contains(" 7 ") && first.contains("6.5"), "{first}");
}

#[test]
fn rank_by_scenario() {
    let o = iotsec(&["rank", "--scenario", "7", "--format", "machine"]);
    assert!(stdout(&o).contains("BP-LOG-03\t2\t3.1"));
    assert_eq!(iotsec(&["rank", "--scenario", "9"]).status.code(), Some(1));
}

#[test]
fn machine_output_is_deterministic() {
    for args in [
        vec!["rank", "--format", "machine"],
        vec!["report", "--format", "machine"],
    ] {
        let a = stdout(&iotsec(&args));
        let b = stdout(&iotsec(&args));
        assert_eq!(a, b);
        assert!(a.starts_with("# iotsec machine v1 "));
        for line in a.lines().skip(1) {
            assert!(!line.contains("  "), "{line}");
        }
    }
}

#[test]
fn graph_formats() {
    let profile = data("profiles/networking.toml");
    let p = profile.to_str().unwrap();
    let tree = iotsec(&["graph", "--profile", p]);
    assert!(tree.status.success(), "{}", stderr(&tree));
    let tree = stdout(&tree);
    assert!(tree.contains("BP-SIOH-01"));
    assert!(tree.contains("BP-CRYPTO-01"));

    let machine = stdout(&iotsec(&["graph", "--profile", p, "--format", "machine"]));
    assert!(machine.starts_with("# iotsec machine v1 graph"));
    let scenarios: Vec<&str> = machine
        .lines()
        .skip(2)
        .map(|l| l.split('\t').next().unwrap_or(""))
        .collect();
    for s in ["2", "4", "5", "7"] {
        assert!(scenarios.contains(&s), "{machine}");
    }

    let dot = stdout(&iotsec(&[
        "graph",
        "--profile",
        p,
        "--format",
        "dot-like-text",
    ]));
    assert!(dot.starts_with("graph {"));
    assert!(dot.trim_end().ends_with('}'));
}

#[test]
fn graph_rejects_bad_profile() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("bad.toml");
    fs::write(
        &p,
        "schema_version = 1\n[capabilities]\nhas_wireless_onboarding = true\n",
    )
    .unwrap();
    let o = iotsec(&["graph", "--profile", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("network interface"));
}

#[test]
fn assess_writes_findings() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("dlink.toml");
    let model = data("devices/dlink-dcs8010lh.toml");
    let o = iotsec(&[
        "assess",
        "--model",
        model.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("6 findings written"));
    let written = fs::read_to_string(&out).unwrap();
    assert_eq!(written.matches("[[findings]]").count(), 6);

    let v = iotsec(&["validate", "--ledger", out.to_str().unwrap()]);
    assert!(v.status.success(), "{}", stderr(&v));
    assert!(stdout(&v).contains("(6 findings)"));
}

#[test]
fn assess_attacker_subset_and_machine_format() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o.toml");
    let model = data("devices/dlink-dcs8010lh.toml");
    let o = iotsec(&[
        "assess",
        "--model",
        model.to_str().unwrap(),
        "--attackers",
        "pa",
        "--out",
        out.to_str().unwrap(),
        "--format",
        "machine",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.starts_with("# iotsec machine v1 outcomes"));
    assert_eq!(
        fs::read_to_string(&out)
            .unwrap()
            .matches("[[findings]]")
            .count(),
        2
    );
    let bad = iotsec(&[
        "assess",
        "--model",
        model.to_str().unwrap(),
        "--attackers",
        "martian",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn ingest_builds_a_workspace() {
    let dir = tempfile::tempdir().unwrap();
    let ws = dir.path().join("ws");
    let model = data("devices/tplink-tapo-c100.toml");
    let findings = dir.path().join("tplink.toml");
    let o = iotsec(&[
        "assess",
        "--model",
        model.to_str().unwrap(),
        "--out",
        findings.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));

    let w = ws.to_str().unwrap();
    let o = iotsec(&["--workspace", w, "ingest", findings.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(stdout(&o), "stored findings/tplink.toml\n");
    assert!(ws.join("workspace.toml").exists());

    // Same file twice is refused.
    let again = iotsec(&["--workspace", w, "ingest", findings.to_str().unwrap()]);
    assert_eq!(again.status.code(), Some(1));

    let rank = stdout(&iotsec(&["--workspace", w, "rank", "--format", "machine"]));
    assert!(rank.contains("BP-SIOH-01\t1\t9.6"), "{rank}");

    let report = stdout(&iotsec(&[
        "--workspace",
        w,
        "report",
        "--device",
        "tplink-tapo-c100",
    ]));
    assert!(report.contains("## Findings"));
    assert!(report.contains("Critical"));
}

#[test]
fn ingest_rejects_invalid_findings() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    fs::write(
        &bad,
        r#"schema_version = 1
[[devices]]
id = "cam"
display_name = "Cam"
[[findings]]
id = "f"
device = "cam"
title = "t"
cvss = "AV:P/AC:H/PR:N/UI:N/S:C/C:H/I:H/A:H"
score = 7.0
best_practices = ["BP-HW-04"]
"#,
    )
    .unwrap();
    let ws = dir.path().join("ws");
    let o = iotsec(&[
        "--workspace",
        ws.to_str().unwrap(),
        "ingest",
        bad.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(
        stderr(&o).contains("recomputed score 7.1"),
        "{}",
        stderr(&o)
    );
    assert!(!ws.join("findings/bad.toml").exists());
}

#[test]
fn validate_bundled_and_documents() {
    let o = iotsec(&["validate"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("70 best practices"));
    assert!(stderr(&o).contains("TC-TIM-01"));

    let o = iotsec(&[
        "validate",
        "--catalog",
        data("catalog.toml").to_str().unwrap(),
        "--ledger",
        data("ledger.toml").to_str().unwrap(),
        "--model",
        data("devices/bosch-360.toml").to_str().unwrap(),
        "--profile",
        data("profiles/camera.toml").to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(
        stdout(&o).lines().filter(|l| l.starts_with("ok ")).count(),
        4
    );

    let dir = tempfile::tempdir().unwrap();
    let broken = dir.path().join("model.toml");
    fs::write(&broken, "schema_version = 1\n").unwrap();
    let o = iotsec(&["validate", "--model", broken.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn report_for_device_and_unknown_device() {
    let o = iotsec(&["report", "--device", "dlink-dcs8010lh"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("## Findings"));
    assert!(text.contains("## Severity summary"));
    assert!(!text.contains("Tesvor"));

    let o = iotsec(&["report", "--device", "nope"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("unknown device"));

    let full = stdout(&iotsec(&["report"]));
    assert!(full.contains("## Best practice ranking"));
}

#[test]
fn missing_workspace_is_a_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = iotsec(&["--workspace", dir.path().to_str().unwrap(), "rank"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("workspace.toml"));
}
