//! Pass/fail bookkeeping for the acceptance run.

use std::time::{Duration, Instant};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    Info,
}

impl Status {
    fn tag(self) -> &'static str {
        match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Info => "INFO",
        }
    }
}

/// Outcome of one criterion body: whether the checks held, plus the numbers behind it.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub ok: bool,
    pub detail: String,
}

impl Outcome {
    pub fn new(ok: bool, detail: impl Into<String>) -> Self {
        Outcome { ok, detail: detail.into() }
    }
}

#[derive(Debug, Clone)]
pub struct Line {
    pub name: String,
    pub status: Status,
    pub elapsed: Duration,
    pub budget: Option<Duration>,
    pub detail: String,
}

impl Line {
    pub fn render(&self) -> String {
        let timing = match self.budget {
            Some(b) => format!("{:.2} s of {} s", self.elapsed.as_secs_f64(), b.as_secs()),
            None => format!("{:.2} s", self.elapsed.as_secs_f64()),
        };
        format!("{} {} [{}] {}", self.status.tag(), self.name, timing, self.detail)
    }
}

#[derive(Debug, Default)]
pub struct Report {
    lines: Vec<Line>,
}

impl Report {
    pub fn new() -> Self {
        Report::default()
    }

    /// Runs `body`, fails it if it panics, errors or overruns `budget`, and prints the line.
    pub fn check<F>(&mut self, name: &str, budget: Option<Duration>, body: F)
    where
        F: FnOnce() -> Result<Outcome, String> + std::panic::UnwindSafe,
    {
        let start = Instant::now();
        let result = std::panic::catch_unwind(body);
        let elapsed = start.elapsed();
        let (mut ok, mut detail) = match result {
            Ok(Ok(o)) => (o.ok, o.detail),
            Ok(Err(e)) => (false, format!("error: {e}")),
            Err(p) => {
                let msg = p
                    .downcast_ref::<String>()
                    .cloned()
                    .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                    .unwrap_or_default();
                (false, format!("panicked: {msg}"))
            }
        };
        if let Some(b) = budget {
            if elapsed > b {
                ok = false;
                detail.push_str("; over the runtime budget");
            }
        }
        self.push(Line {
            name: name.to_string(),
            status: if ok { Status::Pass } else { Status::Fail },
            elapsed,
            budget,
            detail,
        });
    }

    pub fn info(&mut self, name: &str, detail: &str) {
        self.push(Line {
            name: name.to_string(),
            status: Status::Info,
            elapsed: Duration::ZERO,
            budget: None,
            detail: detail.to_string(),
        });
    }

    fn push(&mut self, line: Line) {
        println!("{}", line.render());
        self.lines.push(line);
    }

    pub fn lines(&self) -> &[Line] {
        &self.lines
    }

    pub fn failures(&self) -> usize {
        self.lines.iter().filter(|l| l.status == Status::Fail).count()
    }

    pub fn summary(&self) -> String {
        let passed = self.lines.iter().filter(|l| l.status == Status::Pass).count();
        format!("acceptance: {passed} passed, {} failed", self.failures())
    }
}
