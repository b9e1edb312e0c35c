use std::fmt;

use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Info,
    Warn,
    Error,
}

/// A machine-readable note attached to a numerical result.
///
/// Rendered as a single `key=value` line so the CLI can stream them to
/// standard error.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Diagnostic {
    pub severity: Severity,
    pub code: &'static str,
    pub op: &'static str,
    pub value: f64,
    pub threshold: f64,
}

impl Diagnostic {
    pub fn warn(code: &'static str, op: &'static str, value: f64, threshold: f64) -> Self {
        Self { severity: Severity::Warn, code, op, value, threshold }
    }

    /// Warns with code `tail_mass` when `tail` exceeds [`crate::TAIL_WARN`].
    pub fn tail_mass(op: &'static str, tail: f64) -> Option<Self> {
        (tail > crate::TAIL_WARN).then(|| Self::warn("tail_mass", op, tail, crate::TAIL_WARN))
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let level = match self.severity {
            Severity::Info => "info",
            Severity::Warn => "warn",
            Severity::Error => "error",
        };
        write!(
            f,
            "level={level} code={} op={} value={:.6e} threshold={:.1e}",
            self.code, self.op, self.value, self.threshold
        )
    }
}
