use std::process::{Command, Output};

use sifa_cli::{exit_code, load_circuit, verify, VerdictReport, VerifyOptions};

fn sifa(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sifa"))
        .args(args)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn list_numbers_every_site() {
    let out = sifa(&["list", "--builtin", "chi3"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 39);
    assert_eq!(
        lines[0].split_whitespace().collect::<Vec<_>>(),
        ["0", "input:a0"]
    );
    assert!(lines[38].ends_with("gate:s1"));

    let gates_only = stdout(&sifa(&[
        "list",
        "--builtin",
        "chi3",
        "--fault-inputs",
        "off",
    ]));
    assert_eq!(gates_only.lines().count(), 31);
}

#[test]
fn fig2_lists_the_input_fault_location() {
    let text = stdout(&sifa(&["list", "--builtin", "fig2_toy"]));
    assert!(text.lines().any(|l| l.ends_with("input:a0")));
}

#[test]
fn list_of_gateless_circuit_has_only_inputs() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("wires.net");
    std::fs::write(
        &path,
        "input m mask\ninput s0 share s 0\ninput s1 share s 1\noutput s0\n",
    )
    .unwrap();
    let out = sifa(&["list", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out).lines().count(), 3);
}

#[test]
fn verify_exit_codes() {
    assert_eq!(
        sifa(&["verify", "--builtin", "chi3", "--jobs", "2"])
            .status
            .code(),
        Some(0)
    );
    assert_eq!(
        sifa(&["verify", "--builtin", "chi3_reuse_c0"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(
        sifa(&["verify", "--builtin", "nope"]).status.code(),
        Some(2)
    );
    assert_eq!(sifa(&["verify"]).status.code(), Some(2));
    assert_eq!(
        sifa(&["verify", "/nonexistent/x.net"]).status.code(),
        Some(2)
    );
}

#[test]
fn unknown_sites_print_first() {
    let text = stdout(&sifa(&["verify", "--builtin", "chi3_reuse_a0"]));
    assert!(text.starts_with("unknown"), "{text}");
    assert!(text.lines().next().unwrap().contains("gate:v0"));
    assert!(text.lines().last().unwrap().contains("1 unknown"));
}

#[test]
fn exhausted_budget_exits_3() {
    let out = sifa(&[
        "verify",
        "--builtin",
        "chi3",
        "--budget",
        "0",
        "--jobs",
        "1",
    ]);
    assert_eq!(out.status.code(), Some(3));
    assert!(stdout(&out).contains("incomplete"));
}

#[test]
fn unknown_takes_precedence_over_incomplete() {
    let c = load_circuit(None, Some("fig2_toy")).unwrap();
    let mut outcomes = verify(&c, &VerifyOptions::default()).unwrap();
    let mut starved = VerifyOptions::default();
    starved.checker.budget = sifa_core::SolverBudget::decisions(0);
    outcomes.extend(verify(&c, &starved).unwrap());
    assert_eq!(exit_code(&outcomes), 1);
}

#[test]
fn parse_errors_exit_2_with_line_number() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.net");
    std::fs::write(
        &path,
        "input a0 share a 0\ninput a1 share a 1\ngate g = and a0\noutput g\n",
    )
    .unwrap();
    let out = sifa(&["verify", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 3"), "{err}");
}

#[test]
fn explain_reports_steps_and_oracle() {
    let out = sifa(&[
        "explain",
        "--builtin",
        "fig2_toy",
        "--site",
        "input:a0",
        "--oracle",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("complete secrets = {b}"));
    assert!(text.contains("offending combination {delta[0], delta[1]}"));
    assert!(text.contains("secret b: DEPENDENT"));
    assert!(text.contains("secret a: independent"));
}

#[test]
fn explain_of_missing_site_exits_2() {
    assert_eq!(
        sifa(&["explain", "--builtin", "chi3", "--site", "gate:zz"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        sifa(&["explain", "--builtin", "chi3", "--site", "wire:a0"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn json_report_schema() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.json");
    let out = sifa(&[
        "verify",
        "--builtin",
        "chi3_reuse_b0",
        "--oracle",
        "--json",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    let raw: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    for key in ["circuit", "tool_version", "sites", "summary"] {
        assert!(raw.get(key).is_some(), "missing {key}");
    }
    for key in ["site", "verdict", "witness", "subset", "millis"] {
        assert!(raw["sites"][0].get(key).is_some(), "missing {key}");
    }
    let report: VerdictReport = serde_json::from_value(raw).unwrap();
    assert_eq!(report.circuit, "chi3_reuse_b0");
    assert_eq!(report.sites.len(), 40);
    assert_eq!(report.summary.unknown, 1);
    assert_eq!(report.summary.secure, 39);
    let v0 = report.sites.iter().find(|s| s.site == "gate:v0").unwrap();
    assert_eq!(v0.verdict, "confirmed_leak");
    assert_eq!(v0.witness, "dependent:c");
    assert_eq!(v0.subset, Some(vec![0]));
}

#[test]
fn witnesses_do_not_depend_on_job_count() {
    let c = load_circuit(None, Some("chi3_reuse_c0")).unwrap();
    let one = verify(&c, &VerifyOptions::default()).unwrap();
    let four = verify(
        &c,
        &VerifyOptions {
            jobs: 4,
            ..VerifyOptions::default()
        },
    )
    .unwrap();
    let strip = |o: &[sifa_cli::SiteOutcome]| {
        let mut r = VerdictReport::new("x", o, 0);
        r.sites.iter_mut().for_each(|s| s.millis = 0);
        r
    };
    assert_eq!(strip(&one), strip(&four));
}
