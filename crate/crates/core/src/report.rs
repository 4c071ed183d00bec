use serde::Serialize;

const MAX_WITNESSES: usize = 8;

/// Outcome of one named axiom check.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub max_deviation: f64,
    pub witnesses: Vec<String>,
}

/// Axiom-by-axiom validation result. Failures are entries, not errors.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct ValidationReport {
    pub subject: String,
    pub checks: Vec<CheckResult>,
}

impl ValidationReport {
    pub fn new(subject: impl Into<String>) -> Self {
        ValidationReport { subject: subject.into(), checks: Vec::new() }
    }

    pub fn is_valid(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckResult> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.name == name)
    }

    /// Starts a check; record violations on the returned builder.
    pub fn begin(&mut self, name: &str) -> &mut CheckResult {
        self.checks.push(CheckResult {
            name: name.to_string(),
            passed: true,
            max_deviation: 0.0,
            witnesses: Vec::new(),
        });
        self.checks.last_mut().unwrap()
    }

    pub fn summary(&self) -> String {
        let mut s = format!("{}: {}\n", self.subject, if self.is_valid() { "valid" } else { "INVALID" });
        for c in &self.checks {
            s.push_str(&format!(
                "  [{}] {} (max deviation {:.3e})\n",
                if c.passed { "ok" } else { "FAIL" },
                c.name,
                c.max_deviation
            ));
            for w in &c.witnesses {
                s.push_str(&format!("        {w}\n"));
            }
        }
        s
    }
}

impl CheckResult {
    /// Records `deviation`; fails the check with `witness` when it exceeds `threshold`.
    pub fn observe(&mut self, deviation: f64, threshold: f64, witness: impl FnOnce() -> String) {
        let deviation = if deviation.is_nan() { f64::INFINITY } else { deviation };
        if deviation > self.max_deviation {
            self.max_deviation = deviation;
        }
        if deviation > threshold {
            self.fail(witness());
        }
    }

    pub fn fail(&mut self, witness: String) {
        self.passed = false;
        if self.witnesses.len() < MAX_WITNESSES {
            self.witnesses.push(witness);
        }
    }
}
