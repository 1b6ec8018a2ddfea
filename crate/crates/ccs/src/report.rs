use serde::Serialize;
use sha2::{Digest, Sha256};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// What every command prints on stdout.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunReport {
    pub command: String,
    /// SHA-256 of the input file, lowercase hex.
    pub input_digest: String,
    pub result: serde_json::Value,
    pub tool_version: String,
}

impl RunReport {
    pub fn new(command: &str, input: &[u8], result: serde_json::Value) -> Self {
        RunReport {
            command: command.to_string(),
            input_digest: sha256_hex(input),
            result,
            tool_version: TOOL_VERSION.to_string(),
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}
