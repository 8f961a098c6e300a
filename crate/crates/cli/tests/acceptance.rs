//! Acceptance gate: every criterion at its stated tolerance and time budget,
//! one PASS/FAIL line each.

use std::process::Command;
use std::time::{Duration, Instant};

use rdsim_cli::report::deterministic_part;
use rdsim_cli::verify::{run_criterion, VerifyContext, CRITERIA};

const SEED: u64 = 42;

/// Wall-clock budget per criterion, in seconds.
fn budget(id: u8) -> f64 {
    match id {
        1 | 2 => 1.0,
        3 => 60.0,
        4 | 6 => 5.0,
        5 | 8 | 9 => 120.0,
        7 => 30.0,
        10 => 10.0,
        _ => f64::INFINITY,
    }
}

fn line(pass: bool, id: u8, name: &str, elapsed: Duration, extra: &str) -> String {
    format!(
        "{} criterion {id:>2}: {name} ({:.2}s){extra}",
        if pass { "PASS" } else { "FAIL" },
        elapsed.as_secs_f64()
    )
}

fn verify_all(workers: usize) -> String {
    let out = Command::new(env!("CARGO_BIN_EXE_rdsim"))
        .args(["verify-all", "--seed", &SEED.to_string(), "--workers", &workers.to_string()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

#[test]
fn acceptance_criteria() {
    let ctx = VerifyContext::new(SEED, 2);
    let mut all_pass = true;
    for &(id, name) in &CRITERIA {
        let start = Instant::now();
        let result = run_criterion(id, &ctx);
        let elapsed = start.elapsed();
        let in_time = elapsed.as_secs_f64() < budget(id);
        let (pass, extra) = match &result {
            Ok(c) => {
                let failed: Vec<String> = c
                    .checks
                    .iter()
                    .filter(|x| !x.pass)
                    .map(|x| format!("{} ({:?} > {:?}; {})", x.name, x.measured, x.limit, x.detail))
                    .collect();
                let mut extra = String::new();
                if !failed.is_empty() {
                    extra = format!(" failed: {}", failed.join(", "));
                }
                if !in_time {
                    extra += &format!(" over budget {}s", budget(id));
                }
                (c.pass && in_time, extra)
            }
            Err(e) => (false, format!(" error: {e}")),
        };
        all_pass &= pass;
        println!("{}", line(pass, id, name, elapsed, &extra));
    }

    // reproducibility: repeated runs and different worker counts
    let start = Instant::now();
    let reference = verify_all(1);
    let runs = [verify_all(1), verify_all(3)];
    let same: Vec<bool> = runs.iter().map(|r| deterministic_part(r) == deterministic_part(&reference)).collect();
    let pass = same.iter().all(|&s| s) && deterministic_part(&reference).len() < reference.len();
    all_pass &= pass;
    let extra = if pass { String::new() } else { format!(" identical to the first run: {same:?}") };
    println!("{}", line(pass, 11, "reproducibility", start.elapsed(), &extra));

    assert!(all_pass, "acceptance failures above");
}
