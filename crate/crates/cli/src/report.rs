//! Machine-readable command reports and the exit-code protocol.

use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use lclgrid::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_INCONCLUSIVE: i32 = 3;
pub const EXIT_BACKEND: i32 = 4;

/// A failed command: exit code plus message, optionally tagged with a stage.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    pub fn new(code: i32, message: impl Into<String>) -> Self {
        Self { code, message: message.into() }
    }

    pub fn staged(self, stage: &str) -> Self {
        Self { code: self.code, message: format!("{stage}: {}", self.message) }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Backend { .. } | Error::UnknownBackend(_) => EXIT_BACKEND,
            Error::MissingTile(_) | Error::InvalidAnchors(_) => EXIT_FAILED,
            _ => EXIT_INPUT,
        };
        Self::new(code, e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Self::new(EXIT_INPUT, e.to_string())
    }
}

pub type CmdResult<T> = std::result::Result<T, Failure>;

/// Inputs that determine a command's result: resolved flags and the bytes
/// of every file read.
#[derive(Default)]
pub struct Inputs {
    entries: Vec<(String, String)>,
}

impl Inputs {
    pub fn add(&mut self, key: &str, value: impl ToString) {
        self.entries.push((key.to_string(), value.to_string()));
    }

    pub fn digest(&self, command: &str) -> String {
        let mut h = Sha256::new();
        h.update(command.as_bytes());
        for (k, v) in &self.entries {
            h.update([0]);
            h.update(k.as_bytes());
            h.update([0]);
            h.update((v.len() as u64).to_le_bytes());
            h.update(v.as_bytes());
        }
        hex::encode(h.finalize())
    }
}

#[derive(Serialize)]
pub struct Report {
    pub command: String,
    pub inputs_digest: String,
    pub exit_code: i32,
    pub outputs: Value,
    pub timings: Value,
}

/// What a command produced: human-readable text, structured outputs, and
/// wall-clock timings kept apart so reports stay reproducible.
pub struct Outcome {
    pub code: i32,
    pub text: String,
    pub outputs: Value,
    pub timings: Value,
}

impl Outcome {
    pub fn new(code: i32, text: String, outputs: Value) -> Self {
        Self { code, text, outputs, timings: json!({}) }
    }

    pub fn with_timings(mut self, timings: Value) -> Self {
        self.timings = timings;
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digest_depends_on_every_input() {
        let mut a = Inputs::default();
        a.add("n", 16);
        a.add("problem", "{}");
        let mut b = Inputs::default();
        b.add("n", 16);
        b.add("problem", "{}");
        assert_eq!(a.digest("oracle"), b.digest("oracle"));
        assert_ne!(a.digest("oracle"), a.digest("verify"));
        b.add("seed", 0);
        assert_ne!(a.digest("oracle"), b.digest("oracle"));
        let mut c = Inputs::default();
        c.add("n", "16p");
        c.add("roblem", "{}");
        assert_ne!(a.digest("oracle"), c.digest("oracle"));
    }

    #[test]
    fn error_exit_codes() {
        assert_eq!(Failure::from(Error::Malformed("x".into())).code, EXIT_INPUT);
        assert_eq!(Failure::from(Error::UnknownBackend("x".into())).code, EXIT_BACKEND);
        assert_eq!(Failure::from(Error::MissingTile("0".into())).code, EXIT_FAILED);
    }
}
