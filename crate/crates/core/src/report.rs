//! Check records and the versioned JSON report.

use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: &str = "report/v1";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Skipped,
    Vacuous,
}

impl Status {
    pub fn from_bool(ok: bool) -> Status {
        if ok {
            Status::Pass
        } else {
            Status::Fail
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Skipped => "skipped",
            Status::Vacuous => "vacuous",
        }
    }
}

impl std::fmt::Display for Status {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.pad(self.as_str())
    }
}

/// Outcome of one check. `worst_margin` is the smallest value of the quantity
/// that must stay positive; `worst_residual` the largest value of the quantity
/// that must stay small. Either may be absent.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CheckResult {
    pub name: String,
    pub paper_ref: String,
    pub status: Status,
    pub worst_margin: Option<f64>,
    pub worst_residual: Option<f64>,
    pub witness_point: Option<Vec<f64>>,
    pub grid_used: String,
    #[serde(default)]
    pub notes: Vec<String>,
}

impl CheckResult {
    pub fn new(name: &str, paper_ref: &str, grid_used: impl Into<String>) -> CheckResult {
        CheckResult {
            name: name.to_string(),
            paper_ref: paper_ref.to_string(),
            status: Status::Pass,
            worst_margin: None,
            worst_residual: None,
            witness_point: None,
            grid_used: grid_used.into(),
            notes: Vec::new(),
        }
    }

    pub fn margin(mut self, m: f64) -> Self {
        self.worst_margin = Some(m);
        self
    }

    pub fn residual(mut self, r: f64) -> Self {
        self.worst_residual = Some(r);
        self
    }

    pub fn witness(mut self, w: Option<Vec<f64>>) -> Self {
        self.witness_point = w;
        self
    }

    pub fn status(mut self, s: Status) -> Self {
        self.status = s;
        self
    }

    pub fn pass_if(mut self, ok: bool) -> Self {
        self.status = Status::from_bool(ok);
        self
    }

    pub fn note(mut self, n: impl Into<String>) -> Self {
        self.notes.push(n.into());
        self
    }

    pub fn passed(&self) -> bool {
        matches!(self.status, Status::Pass | Status::Vacuous)
    }

    /// A failing record carrying an error message.
    pub fn from_error(name: &str, paper_ref: &str, grid_used: impl Into<String>, err: &crate::Error) -> Self {
        CheckResult::new(name, paper_ref, grid_used).status(Status::Fail).note(err.to_string())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Environment {
    pub tool_version: String,
    pub threads: usize,
    pub os: String,
    pub arch: String,
}

impl Environment {
    pub fn current() -> Environment {
        Environment {
            tool_version: TOOL_VERSION.to_string(),
            threads: rayon::current_num_threads(),
            os: std::env::consts::OS.to_string(),
            arch: std::env::consts::ARCH.to_string(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct VerificationReport {
    pub schema_version: String,
    pub tool_version: String,
    pub config_hash: String,
    pub triple: [i64; 3],
    pub overall: Status,
    pub checks: Vec<CheckResult>,
    pub environment: Environment,
}

impl VerificationReport {
    pub fn new(triple: [i64; 3], config_hash: String, checks: Vec<CheckResult>) -> VerificationReport {
        let overall = overall_status(&checks);
        VerificationReport {
            schema_version: SCHEMA_VERSION.to_string(),
            tool_version: TOOL_VERSION.to_string(),
            config_hash,
            triple,
            overall,
            checks,
            environment: Environment::current(),
        }
    }

    pub fn passed(&self) -> bool {
        self.overall == Status::Pass
    }

    pub fn check(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// Pass iff no check failed (skipped and vacuous records do not count against).
pub fn overall_status(checks: &[CheckResult]) -> Status {
    if checks.iter().any(|c| c.status == Status::Fail) {
        Status::Fail
    } else {
        Status::Pass
    }
}

/// JSON schema (draft 2020-12) for [`VerificationReport`].
pub fn report_schema() -> serde_json::Value {
    let num_or_null = serde_json::json!({ "type": ["number", "null"] });
    serde_json::json!({
        "$schema": "https://json-schema.org/draft/2020-12/schema",
        "$id": "urn:foliation-forge:report:v1",
        "title": "VerificationReport",
        "version": SCHEMA_VERSION,
        "type": "object",
        "required": ["schemaVersion", "toolVersion", "configHash", "triple", "overall", "checks", "environment"],
        "additionalProperties": false,
        "properties": {
            "schemaVersion": { "const": SCHEMA_VERSION },
            "toolVersion": { "type": "string", "minLength": 1 },
            "configHash": { "type": "string", "pattern": "^[0-9a-f]{64}$" },
            "triple": { "type": "array", "items": { "type": "integer" }, "minItems": 3, "maxItems": 3 },
            "overall": { "$ref": "#/$defs/status" },
            "checks": { "type": "array", "items": { "$ref": "#/$defs/check" } },
            "environment": {
                "type": "object",
                "required": ["toolVersion", "threads", "os", "arch"],
                "properties": {
                    "toolVersion": { "type": "string" },
                    "threads": { "type": "integer", "minimum": 1 },
                    "os": { "type": "string" },
                    "arch": { "type": "string" }
                }
            }
        },
        "$defs": {
            "status": { "enum": ["pass", "fail", "skipped", "vacuous"] },
            "check": {
                "type": "object",
                "required": ["name", "paperRef", "status", "worstMargin", "worstResidual", "witnessPoint", "gridUsed"],
                "additionalProperties": false,
                "properties": {
                    "name": { "type": "string", "minLength": 1 },
                    "paperRef": { "type": "string", "minLength": 1 },
                    "status": { "$ref": "#/$defs/status" },
                    "worstMargin": num_or_null,
                    "worstResidual": num_or_null,
                    "witnessPoint": { "type": ["array", "null"], "items": { "type": "number" } },
                    "gridUsed": { "type": "string" },
                    "notes": { "type": "array", "items": { "type": "string" } }
                }
            }
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overall_ignores_skipped_and_vacuous() {
        let a = CheckResult::new("a", "r", "-").status(Status::Skipped);
        let b = CheckResult::new("b", "r", "-").status(Status::Vacuous);
        assert_eq!(overall_status(&[a.clone(), b.clone()]), Status::Pass);
        let c = CheckResult::new("c", "r", "-").pass_if(false);
        assert_eq!(overall_status(&[a, b, c]), Status::Fail);
    }

    #[test]
    fn status_serializes_lowercase() {
        assert_eq!(serde_json::to_string(&Status::Vacuous).unwrap(), "\"vacuous\"");
    }
}
