use std::path::Path;
use std::process::Command as Process;

use cknlab_cli::commands::{cmd_constants, cmd_minimize, cmd_quotient};
use cknlab_cli::config::{Command, RunConfig, Settings};
use cknlab_cli::{Envelope, SharpConstantReport};
use proptest::prelude::*;

fn settings(pairs: &[(&str, String)]) -> Settings {
    pairs.iter().map(|(k, v)| (k.to_string(), v.clone())).collect()
}

fn cknlab(args: &[&str], env_config: Option<&Path>) -> (i32, String, String) {
    let mut cmd = Process::new(env!("CARGO_BIN_EXE_cknlab"));
    cmd.args(args).env_remove("CKNLAB_CONFIG");
    if let Some(p) = env_config {
        cmd.env("CKNLAB_CONFIG", p);
    }
    let out = cmd.output().expect("binary runs");
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

fn round_trip(cfg: &RunConfig, r: SharpConstantReport) {
    let env = Envelope {
        config: cfg.clone(),
        report: r,
    };
    let text = serde_json::to_string_pretty(&env).unwrap();
    let back: Envelope<SharpConstantReport> = serde_json::from_str(&text).unwrap();
    assert_eq!(back, env);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn quotient_reports_round_trip(n in 5u32..12, a in 0.2f64..3.0, b in 0.2f64..4.0, k in 0u32..3) {
        let cfg = RunConfig::from_settings(
            Command::Quotient,
            &settings(&[
                ("n", n.to_string()),
                ("family", "thm1.2-2".into()),
                ("a", a.to_string()),
                ("b", b.to_string()),
                ("k", k.to_string()),
            ]),
        )
        .unwrap();
        round_trip(&cfg, cmd_quotient(&cfg).unwrap());
    }

    #[test]
    fn constants_reports_round_trip(n in 1u32..30, t in 0.0f64..1.0) {
        let alpha = if n == 1 { 3.0 * t - 0.9 } else { -0.9 + (n as f64 / 5.0 - 0.1) * t };
        let cfg = RunConfig::from_settings(
            Command::Constants,
            &settings(&[("n", n.to_string()), ("alpha", alpha.to_string())]),
        )
        .unwrap();
        let r = cmd_constants(&cfg).unwrap();
        prop_assert!(r.has_value());
        prop_assert!(!r.discrepancy, "{:?}", r.diagnostics);
        round_trip(&cfg, r);
    }
}

#[test]
fn minimize_report_round_trips() {
    let cfg = RunConfig::from_settings(
        Command::Minimize,
        &settings(&[("n", "3".into()), ("k", "1".into()), ("basis", "4,8".into())]),
    )
    .unwrap();
    let (r, _) = cmd_minimize(&cfg).unwrap();
    round_trip(&cfg, r);
}

#[test]
fn csv_is_byte_identical_across_runs() {
    let args = ["minimize", "--n", "3", "--k", "1", "--basis", "4,8,12", "--format", "csv", "--seed", "7"];
    let (c1, a, _) = cknlab(&args, None);
    let (c2, b, _) = cknlab(&args, None);
    assert_eq!((c1, c2), (0, 0));
    assert_eq!(a, b);
    assert!(a.starts_with("k,value,formula,argmin,tail_verified\n"));
}

#[test]
fn exit_codes() {
    assert_eq!(cknlab(&["constants", "--n", "3", "--alpha", "1"], None).0, 2);
    assert_eq!(cknlab(&["probe-conjecture", "--n", "5"], None).0, 2);
    assert_eq!(cknlab(&["quotient", "--n", "5"], None).0, 2);
    assert_eq!(cknlab(&["minimize", "--n", "5", "--basis", "8,4"], None).0, 2);
    assert_eq!(cknlab(&["constants", "--n", "5"], None).0, 0);
}

#[test]
fn flags_override_the_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "n = 5\nformat = csv\n").unwrap();
    let (code, out, err) = cknlab(&["constants", "--config", cfg.to_str().unwrap()], None);
    assert_eq!(code, 0, "{err}");
    assert!(out.contains("9.0000000000000000e0,closed-form"), "{out}");
    let (_, out, _) = cknlab(&["constants", "--n", "7"], Some(&cfg));
    assert!(out.contains("1.6000000000000000e1,closed-form"), "{out}");
}

#[test]
fn output_goes_to_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("scan.dat");
    let (code, stdout, _) = cknlab(
        &["mode-scan", "--n", "3", "--kmax", "6", "--format", "plot-data", "--out", out.to_str().unwrap()],
        None,
    );
    assert_eq!(code, 0);
    assert!(stdout.is_empty());
    let text = std::fs::read_to_string(&out).unwrap();
    let points: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(points.len(), 7);
    assert!(points.iter().all(|l| l.split_whitespace().count() == 2));
}

#[test]
fn json_output_parses_back() {
    let (code, out, _) = cknlab(&["quotient", "--test-function", "--n", "3"], None);
    assert_eq!(code, 0);
    let env: Envelope<SharpConstantReport> = serde_json::from_str(&out).unwrap();
    assert!((env.report.closed_form.unwrap() - 3.36).abs() < 1e-12);
    assert_eq!(env.config.seed, 42);
}
