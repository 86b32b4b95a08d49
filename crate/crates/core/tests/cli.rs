mod common;

use common::{data_files, exit_matrix, run_cli, run_exit_case};
use pmelab::cli::{load_config, parse_config, serialize_config};

#[test]
fn no_arguments_prints_usage_and_exits_2() {
    let (code, text) = run_cli(&[]);
    assert_eq!(code, 2);
    assert!(text.contains("Usage"));
}

#[test]
fn help_lists_config_defaults() {
    let (code, text) = run_cli(&["converge", "--help"]);
    assert_eq!(code, 0);
    assert!(text.contains("scenario.front_threshold = 0.001"));
}

#[test]
fn exit_codes_follow_contract() {
    let dir = tempfile::tempdir().unwrap();
    for c in exit_matrix().iter().filter(|c| c.subcommand != "converge" || c.label != "pass") {
        assert_eq!(run_exit_case(c, dir.path()), c.expected, "{} {}", c.subcommand, c.label);
    }
}

#[test]
fn reruns_are_byte_identical_and_config_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("s.cfg");
    std::fs::write(&cfg, "[scenario]\nm = 2\nend_time = 0.5\nsnapshots = 3\n[output]\nsnapshots_csv = true\n").unwrap();
    let runs: Vec<_> = ["a", "b"]
        .iter()
        .map(|name| {
            let out = dir.path().join(name);
            let (code, _) = run_cli(&["solve", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
            assert_eq!(code, 0);
            out
        })
        .collect();
    let (a, b) = (data_files(&runs[0]), data_files(&runs[1]));
    assert!(a.len() >= 6);
    assert_eq!(a, b);

    let written = load_config(&runs[0].join("config.ini")).unwrap();
    assert_eq!(written, parse_config(&std::fs::read_to_string(&cfg).unwrap()).unwrap());
    assert_eq!(parse_config(&serialize_config(&written)).unwrap(), written);

    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(runs[0].join("manifest.json")).unwrap()).unwrap();
    let listed: Vec<String> =
        manifest["artifacts"].as_array().unwrap().iter().map(|v| v.as_str().unwrap().to_string()).collect();
    for (path, _) in &a {
        assert!(listed.contains(path), "{path} missing from manifest");
    }
    assert_eq!(manifest["overall"], "PASS");
}

#[test]
fn out_dir_defaults_to_environment() {
    let dir = tempfile::tempdir().unwrap();
    let out = std::process::Command::new(env!("CARGO_BIN_EXE_pmelab"))
        .args(["barrier-check", "--m", "1.5", "--a", "0.1"])
        .env("PMELAB_OUT", dir.path().join("env_out"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(dir.path().join("env_out/report.json").exists());
}
