//! Line-oriented `key=value` run manifest.

use std::path::Path;

use sha2::{Digest, Sha256};

use crate::error::CliResult;
use crate::output::write_bytes;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Ordered key/value pairs; keys may repeat.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Manifest {
    entries: Vec<(String, String)>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

impl Manifest {
    pub fn new(command: &str, config_text: &str) -> Self {
        let mut m = Self::default();
        m.push("command", command);
        m.push("version", VERSION);
        m.push("config_sha256", sha256_hex(config_text.as_bytes()));
        m
    }

    pub fn push(&mut self, key: &str, value: impl ToString) {
        let value = value.to_string().replace(['\n', '\r'], " ");
        self.entries.push((key.to_string(), value));
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn get_all<'a>(&'a self, key: &'a str) -> impl Iterator<Item = &'a str> + 'a {
        self.entries
            .iter()
            .filter(move |(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn render(&self) -> String {
        self.entries
            .iter()
            .map(|(k, v)| format!("{k}={v}\n"))
            .collect()
    }

    pub fn parse(text: &str) -> Self {
        let entries = text
            .lines()
            .filter_map(|l| l.split_once('='))
            .map(|(k, v)| (k.to_string(), v.to_string()))
            .collect();
        Self { entries }
    }

    pub fn write(&self, path: &Path) -> CliResult<()> {
        write_bytes(path, self.render().as_bytes())
    }
}
