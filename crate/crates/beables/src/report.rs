use std::time::Instant;

use serde::{Deserialize, Serialize};

/// One verification performed on the emitted files.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub residual: f64,
    pub tolerance: f64,
    pub passed: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl Check {
    pub fn new(name: &str, residual: f64, tolerance: f64) -> Self {
        // NaN residuals fail.
        let passed = residual <= tolerance;
        Self { name: name.to_owned(), residual, tolerance, passed, note: None }
    }

    /// A check that does not apply to this configuration.
    pub fn skipped(name: &str, tolerance: f64, why: &str) -> Self {
        Self { name: name.to_owned(), residual: 0.0, tolerance, passed: true, note: Some(format!("skipped: {why}")) }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }
}

/// What Nature chose in this run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum Outcome {
    NatureChoice { branch: String, born_probability: f64 },
    FinalConfiguration { scope: String, sites: Vec<usize>, born_probability: f64, sampled: bool },
    OracleSweep { scenarios: usize, impossible: usize },
}

/// Deterministic summary of a run: identical bytes for identical inputs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub schema: u32,
    pub kind: String,
    pub seed: u64,
    /// The physics sections of the configuration, after overrides.
    pub scenario: serde_json::Value,
    pub outcome: Outcome,
    pub checks: Vec<Check>,
    /// File names (without directory) written alongside the report.
    pub outputs: Vec<String>,
    pub passed: bool,
}

/// Wall-clock time per phase, kept out of the report so the report stays
/// reproducible.
#[derive(Debug, Default, Serialize, Deserialize)]
pub struct Timing {
    pub threads: usize,
    pub phases: Vec<Phase>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct Phase {
    pub name: String,
    pub seconds: f64,
}

impl Timing {
    pub fn time<T>(&mut self, name: &str, f: impl FnOnce() -> T) -> T {
        let start = Instant::now();
        let out = f();
        self.phases.push(Phase { name: name.to_owned(), seconds: start.elapsed().as_secs_f64() });
        out
    }
}
