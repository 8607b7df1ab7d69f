//! Acceptance suite: one PASS/FAIL line per criterion, with its wall-clock
//! budget enforced on top of the numerical tolerance.

use std::io::Write;
use std::time::{Duration, Instant};

use gelfree::validation::{run_criterion, Status, ValidationSettings, CRITERIA};

fn budget(id: u32) -> Option<Duration> {
    match id {
        1 => Some(Duration::from_secs(10)),
        2 => Some(Duration::from_secs(5)),
        7 => Some(Duration::from_secs(10)),
        8 => Some(Duration::from_secs(300)),
        9 => Some(Duration::from_secs(600)),
        _ => None,
    }
}

#[test]
fn acceptance_criteria() {
    let settings = ValidationSettings::default();
    let mut failed = Vec::new();
    for id in 1..=CRITERIA {
        let started = Instant::now();
        let result = run_criterion(id, &settings);
        let elapsed = started.elapsed();
        let over = budget(id).is_some_and(|b| elapsed > b);
        let ok = result.status == Status::Pass && !over;
        let limit = budget(id).map_or("none".to_string(), |b| format!("{}s", b.as_secs()));
        // straight to the stderr handle so the lines survive output capture
        let _ = writeln!(
            std::io::stderr(),
            "{} criterion {:>2} {:<24} measured={:.6e} tol={:.6e} runtime={:.2}s budget={limit} | {}",
            if ok { "PASS" } else { "FAIL" },
            id,
            result.name,
            result.measured,
            result.tolerance,
            elapsed.as_secs_f64(),
            result.detail
        );
        if !ok {
            failed.push(id);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
