//! Machine-readable verification reports.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub check_id: String,
    pub pass: bool,
    pub measured: BTreeMap<String, f64>,
    pub tolerances: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
    pub fingerprint: String,
}

impl VerificationReport {
    pub fn new(check_id: &str, pass: bool) -> Self {
        Self {
            check_id: check_id.to_string(),
            pass,
            measured: BTreeMap::new(),
            tolerances: BTreeMap::new(),
            notes: Vec::new(),
            fingerprint: String::new(),
        }
    }

    pub fn measure(mut self, key: &str, v: f64) -> Self {
        self.measured.insert(key.to_string(), v);
        self
    }

    pub fn tolerance(mut self, key: &str, v: f64) -> Self {
        self.tolerances.insert(key.to_string(), v);
        self
    }

    pub fn note(mut self, s: impl Into<String>) -> Self {
        self.notes.push(s.into());
        self
    }

    pub fn with_pass(mut self, pass: bool) -> Self {
        self.pass = pass;
        self
    }

    /// Hash of the debug rendering of the inputs.
    pub fn fingerprint_of<I: std::fmt::Debug>(mut self, inputs: &I) -> Self {
        self.fingerprint = fingerprint(inputs);
        self
    }

    pub fn get(&self, key: &str) -> f64 {
        self.measured.get(key).copied().unwrap_or(f64::NAN)
    }
}

pub fn fingerprint<I: std::fmt::Debug>(inputs: &I) -> String {
    let digest = Sha256::digest(format!("{inputs:?}").as_bytes());
    hex::encode(&digest[..8])
}
