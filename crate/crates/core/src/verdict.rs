//! Outcome of a property check.

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;
use serde_json::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Holds,
    Fails,
    Inconclusive,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Holds => "holds",
            Status::Fails => "fails",
            Status::Inconclusive => "inconclusive",
        })
    }
}

/// A point at which a criterion was violated, with the offending values.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Witness {
    pub point: String,
    pub values: BTreeMap<String, Value>,
}

impl Witness {
    pub fn at(point: impl Into<String>) -> Self {
        Witness { point: point.into(), values: BTreeMap::new() }
    }

    pub fn with(mut self, name: &str, v: f64) -> Self {
        self.values.insert(name.to_string(), number(v));
        self
    }
}

/// JSON number, with `"inf"`/`"-inf"` for infinities.
pub fn number(v: f64) -> Value {
    if v.is_infinite() {
        Value::String(if v > 0.0 { "inf" } else { "-inf" }.to_string())
    } else {
        serde_json::json!(v)
    }
}

/// `{status, witness?, constant?, details}`.
///
/// A `fails` verdict always carries a witness; a `holds` verdict for a
/// criterion of the form "for some `c ∈ (0,∞)`" carries the constant found.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdict {
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub constant: Option<f64>,
    pub details: String,
}

impl Verdict {
    pub fn holds(details: impl Into<String>) -> Self {
        Verdict { status: Status::Holds, witness: None, constant: None, details: details.into() }
    }

    pub fn holds_with(constant: f64, details: impl Into<String>) -> Self {
        Verdict { status: Status::Holds, witness: None, constant: Some(constant), details: details.into() }
    }

    pub fn fails(witness: Witness, details: impl Into<String>) -> Self {
        Verdict { status: Status::Fails, witness: Some(witness), constant: None, details: details.into() }
    }

    pub fn inconclusive(details: impl Into<String>) -> Self {
        Verdict { status: Status::Inconclusive, witness: None, constant: None, details: details.into() }
    }

    pub fn holds_p(&self) -> bool {
        self.status == Status::Holds
    }

    pub fn fails_p(&self) -> bool {
        self.status == Status::Fails
    }

    pub fn to_json(&self) -> Value {
        serde_json::to_value(self).expect("verdict serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn serialization_shape() {
        let v = Verdict::fails(Witness::at("1").with("ratio", f64::INFINITY), "h = 0 on supp w");
        let j = v.to_json();
        assert_eq!(j["status"], "fails");
        assert_eq!(j["witness"]["point"], "1");
        assert_eq!(j["witness"]["values"]["ratio"], "inf");
        assert!(j.get("constant").is_none());
        let v = Verdict::holds_with(2.5, "");
        assert_eq!(v.to_json()["constant"], 2.5);
    }
}
