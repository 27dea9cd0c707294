//! Acceptance run: one PASS/FAIL line per criterion, non-zero exit on any failure.

use inclusion_logic::suite::{self, SuiteReport};
use std::time::Duration;

const SEED: u64 = 2024;

struct Criterion {
    id: usize,
    title: &'static str,
    limit: Duration,
    run: fn() -> (SuiteReport, Option<String>),
}

fn plain(r: SuiteReport) -> (SuiteReport, Option<String>) {
    (r, None)
}

fn at_least(r: SuiteReport, n: usize, what: &str) -> (SuiteReport, Option<String>) {
    let short = (r.checked < n).then(|| format!("only {} {} checked, need {}", r.checked, what, n));
    (r, short)
}

fn corpus_criterion() -> (SuiteReport, Option<String>) {
    let r = suite::corpus_and_mutants();
    let scripts = suite::corpus_len();
    let mutants = r.checked - scripts;
    let problem = if scripts < 15 {
        Some(format!("only {} scripts", scripts))
    } else if mutants < 100 {
        Some(format!("only {} mutants", mutants))
    } else {
        None
    };
    (r, problem)
}

fn main() {
    let criteria = [
        Criterion {
            id: 1,
            title: "fast evaluator agrees with brute force",
            limit: Duration::from_secs(60),
            run: || at_least(suite::oracle_equivalence(SEED, 10_000), 10_000, "instances"),
        },
        Criterion {
            id: 2,
            title: "locality, union closure, flatness, downward closure, empty team",
            limit: Duration::from_secs(120),
            run: || at_least(suite::team_properties(SEED, 10_000), 50_000, "property instances"),
        },
        Criterion {
            id: 3,
            title: "normal form preserves truth",
            limit: Duration::from_secs(120),
            run: || at_least(suite::normal_form_preservation(SEED, 1_000, 3), 3_000, "formula/model pairs"),
        },
        Criterion {
            id: 4,
            title: "well-foundedness sentence detects cycles",
            limit: Duration::from_secs(30),
            run: || at_least(suite::well_foundedness(3), 16 + 512, "graphs"),
        },
        Criterion {
            id: 5,
            title: "approximations of true sentences hold and are monotone",
            limit: Duration::from_secs(300),
            // Two checks per true sentence: direction and monotonicity.
            run: || at_least(suite::approximation_direction(SEED, 200, 2), 400, "checks"),
        },
        Criterion {
            id: 6,
            title: "proof corpus accepted, mutants rejected",
            limit: Duration::from_secs(60),
            run: corpus_criterion,
        },
        Criterion {
            id: 7,
            title: "corpus conclusions have no small countermodels",
            limit: Duration::from_secs(300),
            run: || plain(suite::corpus_soundness(2, 4)),
        },
        Criterion {
            id: 8,
            title: "inclusion implication examples",
            limit: Duration::from_secs(10),
            run: || plain(suite::ind_examples()),
        },
        Criterion {
            id: 9,
            title: "anonymity atom matches its direct reading",
            limit: Duration::from_secs(30),
            run: || at_least(suite::anonymity(SEED, 1_000), 1_000, "teams"),
        },
    ];

    let mut failed = 0;
    for c in &criteria {
        let (r, problem) = (c.run)();
        let slow = r.elapsed > c.limit;
        let ok = r.passed() && problem.is_none() && !slow;
        let mut line = format!(
            "{} [{}] {}: {} checked, {} skipped, {} violations, {:.2}s (limit {}s)",
            if ok { "PASS" } else { "FAIL" },
            c.id,
            c.title,
            r.checked,
            r.skipped,
            r.violations,
            r.elapsed.as_secs_f64(),
            c.limit.as_secs()
        );
        if let Some(p) = problem {
            line.push_str(&format!("; {}", p));
        }
        if slow {
            line.push_str("; over time limit");
        }
        for e in &r.examples {
            line.push_str(&format!("\n    {}", e));
        }
        println!("{}", line);
        if !ok {
            failed += 1;
        }
    }
    if failed > 0 {
        println!("{} of {} criteria failed", failed, criteria.len());
        std::process::exit(1);
    }
    println!("all {} criteria passed", criteria.len());
}
