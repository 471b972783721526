//! A small runner for numbered acceptance criteria.
//!
//! Each criterion records named checks. The runner prints one `PASS` or
//! `FAIL` line per criterion, followed by indented lines for failed checks
//! and notes, and reports whether every criterion passed.

use std::fmt::Display;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

#[derive(Debug, Clone)]
struct Check {
    label: String,
    ok: bool,
    detail: String,
}

/// Checks collected while a criterion runs.
#[derive(Debug, Default)]
pub struct Ledger {
    checks: Vec<Check>,
    notes: Vec<String>,
}

impl Ledger {
    pub fn check(&mut self, label: impl Into<String>, ok: bool, detail: impl Display) -> bool {
        self.checks.push(Check {
            label: label.into(),
            ok,
            detail: detail.to_string(),
        });
        ok
    }

    /// `|value - target| ≤ tol`.
    pub fn close(&mut self, label: impl Into<String>, value: f64, target: f64, tol: f64) -> bool {
        let err = (value - target).abs();
        self.check(
            label,
            err <= tol,
            format!("got {value:.12}, want {target} ± {tol:e} (off by {err:.3e})"),
        )
    }

    pub fn note(&mut self, text: impl Into<String>) {
        self.notes.push(text.into());
    }

    fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.ok)
    }
}

pub struct Criterion {
    pub id: u32,
    pub title: &'static str,
    pub budget: Duration,
    pub run: fn(&mut Ledger),
}

#[derive(Debug)]
pub struct Outcome {
    pub id: u32,
    pub passed: bool,
    pub elapsed: Duration,
}

fn panic_text(payload: Box<dyn std::any::Any + Send>) -> String {
    if let Some(s) = payload.downcast_ref::<&str>() {
        s.to_string()
    } else if let Some(s) = payload.downcast_ref::<String>() {
        s.clone()
    } else {
        "non-string panic".into()
    }
}

/// Run one criterion, print its line, and return the outcome.
pub fn evaluate(c: &Criterion) -> Outcome {
    let mut ledger = Ledger::default();
    let start = Instant::now();
    let result = catch_unwind(AssertUnwindSafe(|| (c.run)(&mut ledger)));
    let elapsed = start.elapsed();
    if let Err(payload) = result {
        ledger.check("completes", false, format!("panicked: {}", panic_text(payload)));
    }
    ledger.check(
        "runtime",
        elapsed <= c.budget,
        format!(
            "{:.2} s over budget {:.0} s",
            elapsed.as_secs_f64(),
            c.budget.as_secs_f64()
        ),
    );
    let failed: Vec<&Check> = ledger.failures().collect();
    let passed = failed.is_empty();
    println!(
        "{} criterion {:>2}: {} [{} checks, {:.2} s / {:.0} s]",
        if passed { "PASS" } else { "FAIL" },
        c.id,
        c.title,
        ledger.checks.len(),
        elapsed.as_secs_f64(),
        c.budget.as_secs_f64()
    );
    for f in failed {
        println!("      failed {}: {}", f.label, f.detail);
    }
    for n in &ledger.notes {
        println!("      note: {n}");
    }
    Outcome {
        id: c.id,
        passed,
        elapsed,
    }
}

/// Run every criterion in order and print a summary; true when all pass.
pub fn run_all(criteria: &[Criterion]) -> bool {
    let outcomes: Vec<Outcome> = criteria.iter().map(evaluate).collect();
    let failed: Vec<String> = outcomes
        .iter()
        .filter(|o| !o.passed)
        .map(|o| o.id.to_string())
        .collect();
    let total: f64 = outcomes.iter().map(|o| o.elapsed.as_secs_f64()).sum();
    println!(
        "acceptance: {} passed, {} failed{} in {total:.1} s",
        outcomes.len() - failed.len(),
        failed.len(),
        if failed.is_empty() {
            String::new()
        } else {
            format!(" ({})", failed.join(", "))
        }
    );
    failed.is_empty()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn close_reports_tolerance() {
        let mut l = Ledger::default();
        assert!(l.close("a", 1.0, 1.0 + 1e-13, 1e-12));
        assert!(!l.close("b", 1.0, 1.1, 1e-3));
        assert_eq!(l.failures().count(), 1);
    }

    #[test]
    fn panics_become_failures() {
        let c = Criterion {
            id: 99,
            title: "panics",
            budget: Duration::from_secs(1),
            run: |_| panic!("boom"),
        };
        assert!(!evaluate(&c).passed);
    }
}
