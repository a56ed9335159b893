//! Acceptance gate. Each criterion is one verification suite run inside a
//! wall-clock budget; the last one repeats real binary invocations and
//! compares the emitted CSVs byte for byte. One PASS/FAIL line per criterion.

use std::process::Command;
use std::time::Instant;

use dunkl_core::verify;

/// Suite name and wall-clock budget in seconds, in criterion order. The
/// budgets are part of the contract, not estimates.
const BUDGETS: [(&str, f64); 10] = [
    ("operator", 1.0),
    ("heat", 30.0),
    ("green", 60.0),
    ("means", 120.0),
    ("excessivity", 60.0),
    ("minprinciple", 30.0),
    ("dirichlet", 600.0),
    ("support", 300.0),
    ("greensym", 300.0),
    ("bridge", 120.0),
];

#[test]
fn acceptance() {
    let mut lines = Vec::new();
    let mut all_ok = true;

    for (suite, budget) in BUDGETS {
        let start = Instant::now();
        let results = verify::run_suite(suite).expect("suite runs");
        let elapsed = start.elapsed().as_secs_f64();
        let ok = results.iter().all(|r| r.passed) && elapsed <= budget;
        all_ok &= ok;
        lines.push(format!(
            "{} {suite} ({elapsed:.1}s of {budget:.0}s)",
            if ok { "PASS" } else { "FAIL" }
        ));
        for r in &results {
            if !r.passed {
                lines.push(format!("  {}", r.line()));
            }
        }
    }

    all_ok &= determinism_criterion(&mut lines);

    for line in &lines {
        println!("{line}");
    }
    assert!(all_ok, "acceptance failures:\n{}", lines.join("\n"));
}

/// In-process bit replay plus two real binary runs per command, compared
/// byte for byte on their CSV output.
fn determinism_criterion(lines: &mut Vec<String>) -> bool {
    let start = Instant::now();
    let results = verify::run_suite("determinism").expect("suite runs");
    let mut ok = results.iter().all(|r| r.passed);
    for r in &results {
        if !r.passed {
            lines.push(format!("  {}", r.line()));
        }
    }

    let dir = tempfile::tempdir().unwrap();
    let replay = |args: &[&str], name_a: &str, name_b: &str| -> bool {
        let mut payloads = Vec::new();
        for name in [name_a, name_b] {
            let path = dir.path().join(name);
            let out = Command::new(env!("CARGO_BIN_EXE_dunklpot"))
                .args(args)
                .args(["--out", path.to_str().unwrap()])
                .output()
                .expect("binary runs");
            if out.status.code() != Some(0) {
                return false;
            }
            payloads.push(std::fs::read(&path).unwrap());
        }
        !payloads[0].is_empty() && payloads[0] == payloads[1]
    };

    ok &= replay(
        &["verify", "--suite", "determinism"],
        "verify_a.csv",
        "verify_b.csv",
    );
    ok &= replay(
        &[
            "exits",
            "--domain",
            "interval:0.5,1.5",
            "--x",
            "1.0",
            "--paths",
            "2000",
            "--seed",
            "3",
        ],
        "exits_a.csv",
        "exits_b.csv",
    );

    let elapsed = start.elapsed().as_secs_f64();
    lines.push(format!(
        "{} determinism ({elapsed:.1}s, repeated runs byte-identical)",
        if ok { "PASS" } else { "FAIL" }
    ));
    ok
}
