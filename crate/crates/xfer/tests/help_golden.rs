//! `--help` output against the files in tests/golden. Set XFER_BLESS=1 to rewrite them.

use std::path::PathBuf;
use std::process::Command;

const SUBCOMMANDS: [&str; 12] = [
    "validate",
    "distances",
    "correlate",
    "screen",
    "train",
    "evaluate",
    "importance",
    "ablate",
    "compare",
    "rank",
    "rules",
    "replay",
];

fn help(args: &[&str]) -> String {
    let out = Command::new(env!("CARGO_BIN_EXE_xfer")).args(args).arg("--help").output().unwrap();
    assert!(out.status.success(), "{args:?}");
    String::from_utf8(out.stdout).unwrap()
}

fn check(name: &str, got: &str) -> Option<String> {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(format!("{name}.txt"));
    if std::env::var_os("XFER_BLESS").is_some() {
        std::fs::write(&path, got).unwrap();
        return None;
    }
    let want = std::fs::read_to_string(&path).unwrap_or_default();
    (want != got).then(|| format!("{name}: help differs from {}\n{got}", path.display()))
}

#[test]
fn top_level_help() {
    if let Some(diff) = check("xfer", &help(&[])) {
        panic!("{diff}");
    }
}

#[test]
fn subcommand_help() {
    let diffs: Vec<String> = SUBCOMMANDS.iter().filter_map(|s| check(s, &help(&[s]))).collect();
    assert!(diffs.is_empty(), "{}", diffs.join("\n"));
}

#[test]
fn every_subcommand_has_a_golden_file() {
    let top = help(&[]);
    for s in SUBCOMMANDS {
        assert!(top.contains(&format!("  {s} ")), "{s} missing from top-level help");
    }
}
