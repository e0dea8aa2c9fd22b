//! Bookkeeping for the acceptance suite: each criterion produces a
//! [`Verdict`] and the runner prints one line per criterion.

use std::fmt;
use std::time::{Duration, Instant};

#[derive(Debug, Clone)]
pub struct Verdict {
    pub id: u8,
    pub title: &'static str,
    pub pass: bool,
    /// Measured quantities, one `key=value` fragment each.
    pub details: Vec<String>,
    pub elapsed: Duration,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = if self.pass { "PASS" } else { "FAIL" };
        write!(f, "[{tag}] C{:<2} {} ({:.2} s)", self.id, self.title, self.elapsed.as_secs_f64())?;
        if !self.details.is_empty() {
            write!(f, ": {}", self.details.join("; "))?;
        }
        Ok(())
    }
}

/// Accumulates checks for one criterion. A criterion passes only if every
/// check does.
#[derive(Debug)]
pub struct Criterion {
    id: u8,
    title: &'static str,
    started: Instant,
    pass: bool,
    details: Vec<String>,
}

impl Criterion {
    pub fn start(id: u8, title: &'static str) -> Self {
        Criterion { id, title, started: Instant::now(), pass: true, details: Vec::new() }
    }

    /// Records a check; failing ones are marked with `!` in the detail.
    pub fn check(&mut self, ok: bool, detail: impl Into<String>) {
        let detail = detail.into();
        self.pass &= ok;
        self.details.push(if ok { detail } else { format!("!{detail}") });
    }

    /// Records an informational value that does not affect the verdict.
    pub fn note(&mut self, detail: impl Into<String>) {
        self.details.push(detail.into());
    }

    /// Fails the criterion outright, for instance when a computation errors.
    pub fn fail(&mut self, detail: impl Into<String>) {
        self.check(false, detail);
    }

    pub fn elapsed(&self) -> Duration {
        self.started.elapsed()
    }

    /// Adds the runtime budget check, if any, and closes the criterion.
    pub fn finish(mut self, budget: Option<Duration>) -> Verdict {
        let elapsed = self.started.elapsed();
        if let Some(b) = budget {
            self.check(elapsed < b, format!("runtime {:.3} s < {} s", elapsed.as_secs_f64(), b.as_secs_f64()));
        }
        Verdict { id: self.id, title: self.title, pass: self.pass, details: self.details, elapsed }
    }
}

/// Prints the verdicts and a summary line, returning how many failed.
pub fn report(verdicts: &[Verdict]) -> usize {
    for v in verdicts {
        println!("{v}");
    }
    let failed = verdicts.iter().filter(|v| !v.pass).count();
    println!("acceptance: {} passed, {failed} failed", verdicts.len() - failed);
    failed
}
