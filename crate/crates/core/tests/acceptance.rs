//! Acceptance criteria 1-9, one pass/fail line each. Run with
//! `cargo test --release --test acceptance -- --nocapture` to see the tables.

use std::time::Instant;

use exeuler::suites::{run_suite, SuiteReport};

struct Criterion {
    id: usize,
    title: &'static str,
    suites: &'static [&'static str],
    budget_s: f64,
}

const CRITERIA: [Criterion; 9] = [
    Criterion { id: 1, title: "conformal suite", suites: &["conformal"], budget_s: 5.0 },
    Criterion { id: 2, title: "Green's function suite", suites: &["green"], budget_s: 60.0 },
    Criterion { id: 3, title: "image-system orbit", suites: &["orbit"], budget_s: 30.0 },
    Criterion { id: 4, title: "added mass", suites: &["added_mass"], budget_s: 10.0 },
    Criterion { id: 5, title: "conservation and RK4 order", suites: &["conservation"], budget_s: 300.0 },
    Criterion { id: 6, title: "boundary corrector", suites: &["corrector"], budget_s: 5.0 },
    Criterion { id: 7, title: "estimate measurements", suites: &["poisson", "bkm"], budget_s: 120.0 },
    Criterion { id: 8, title: "envelope regression", suites: &["envelope"], budget_s: 300.0 },
    Criterion { id: 9, title: "determinism", suites: &["determinism"], budget_s: f64::INFINITY },
];

#[test]
fn acceptance_criteria() {
    let mut lines = vec![];
    let mut all = true;
    for c in &CRITERIA {
        let start = Instant::now();
        let reports: Vec<Result<SuiteReport, String>> =
            c.suites.iter().map(|s| run_suite(s).map_err(|e| format!("{s}: {e}"))).collect();
        let secs = start.elapsed().as_secs_f64();
        let mut ok = secs <= c.budget_s;
        let mut failed = vec![];
        for r in &reports {
            match r {
                Ok(rep) => {
                    println!("{}", rep.table());
                    for chk in rep.checks.iter().filter(|k| !k.pass) {
                        failed.push(format!("{} = {:e}", chk.name, chk.value));
                    }
                    ok &= rep.passed();
                }
                Err(e) => {
                    failed.push(e.clone());
                    ok = false;
                }
            }
        }
        if secs > c.budget_s {
            failed.push(format!("runtime {secs:.1} s over budget {} s", c.budget_s));
        }
        all &= ok;
        let line = format!(
            "criterion {} ({}): {} [{secs:.1} s]{}",
            c.id,
            c.title,
            if ok { "PASS" } else { "FAIL" },
            if failed.is_empty() { String::new() } else { format!(" failed: {}", failed.join("; ")) }
        );
        println!("{line}");
        lines.push(line);
    }
    println!("\n{}", lines.join("\n"));
    assert!(all, "acceptance failures:\n{}", lines.join("\n"));
}
