//! Structured warnings attached to views and verdicts.

use std::fmt;

use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum WarningCode {
    DimensionMismatch,
    MeasureMismatch,
    OverrideRequired,
    OverrideApplied,
    UnsupportedRelationship,
    EmptyJoin,
    EmptyOperand,
    DivideByZero,
    DegenerateFit,
    UnmatchedModelRows,
    EvaluationFailed,
}

impl WarningCode {
    /// The snake_case name used in JSON.
    pub fn name(self) -> &'static str {
        match self {
            WarningCode::DimensionMismatch => "dimension_mismatch",
            WarningCode::MeasureMismatch => "measure_mismatch",
            WarningCode::OverrideRequired => "override_required",
            WarningCode::OverrideApplied => "override_applied",
            WarningCode::UnsupportedRelationship => "unsupported_relationship",
            WarningCode::EmptyJoin => "empty_join",
            WarningCode::EmptyOperand => "empty_operand",
            WarningCode::DivideByZero => "divide_by_zero",
            WarningCode::DegenerateFit => "degenerate_fit",
            WarningCode::UnmatchedModelRows => "unmatched_model_rows",
            WarningCode::EvaluationFailed => "evaluation_failed",
        }
    }
}

impl fmt::Display for WarningCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Warning {
    pub code: WarningCode,
    pub message: String,
}

impl Warning {
    pub fn new(code: WarningCode, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
        }
    }
}

impl fmt::Display for Warning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.code, self.message)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn display_matches_json() {
        for code in [
            WarningCode::OverrideApplied,
            WarningCode::DegenerateFit,
            WarningCode::EmptyJoin,
        ] {
            assert_eq!(serde_json::to_value(code).unwrap(), code.to_string());
        }
    }
}
