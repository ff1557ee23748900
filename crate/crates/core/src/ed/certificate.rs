use serde::{Deserialize, Serialize};

/// Outcome of a numerical inequality check: the smallest slack found, where
/// it was found, and the tolerance against which it is judged.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InequalityCertificate {
    pub name: String,
    pub min_slack: f64,
    pub tolerance: f64,
    pub witness: String,
    pub passed: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl InequalityCertificate {
    pub fn new(name: impl Into<String>, min_slack: f64, tolerance: f64, witness: impl Into<String>) -> Self {
        InequalityCertificate {
            name: name.into(),
            min_slack,
            tolerance,
            witness: witness.into(),
            passed: min_slack >= -tolerance,
            note: None,
        }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }

    /// Combines several checks of the same inequality into one, keeping the
    /// worst slack and its witness.
    pub fn merge(name: impl Into<String>, parts: &[InequalityCertificate]) -> Self {
        let name = name.into();
        let Some(worst) = parts.iter().min_by(|a, b| a.min_slack.total_cmp(&b.min_slack)) else {
            return InequalityCertificate::new(name, f64::INFINITY, 0.0, "empty");
        };
        let mut out = InequalityCertificate::new(name, worst.min_slack, worst.tolerance, worst.witness.clone());
        out.passed = parts.iter().all(|p| p.passed);
        out
    }
}
