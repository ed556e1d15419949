use std::fmt::{Display, Write as _};
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use chrono::{SecondsFormat, Utc};

use crate::failure::{Failure, Outcome};

/// Provenance written at the top of every output file.
#[derive(Clone, Debug)]
pub struct RunManifest {
    command: &'static str,
    flags: Vec<(&'static str, String)>,
    notes: Vec<String>,
    timestamp: String,
}

impl RunManifest {
    pub fn new(command: &'static str) -> Self {
        RunManifest {
            command,
            flags: Vec::new(),
            notes: Vec::new(),
            timestamp: Utc::now().to_rfc3339_opts(SecondsFormat::Secs, true),
        }
    }

    pub fn flag(mut self, name: &'static str, value: impl Display) -> Self {
        self.flags.push((name, value.to_string()));
        self
    }

    pub fn path_flag(self, name: &'static str, value: &Option<PathBuf>) -> Self {
        let shown = value.as_ref().map_or_else(|| "-".to_string(), |p| p.display().to_string());
        self.flag(name, shown)
    }

    pub fn note(&mut self, line: impl Into<String>) {
        self.notes.push(line.into());
    }

    /// `#`-prefixed header lines; only the timestamp line varies between
    /// identical runs.
    pub fn header(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# witness-sampler {}", env!("CARGO_PKG_VERSION"));
        let _ = writeln!(out, "# command: {}", self.command);
        for (name, value) in &self.flags {
            let _ = writeln!(out, "# --{name} {value}");
        }
        for note in &self.notes {
            let _ = writeln!(out, "# note: {note}");
        }
        let _ = writeln!(out, "# timestamp: {}", self.timestamp);
        out
    }

    /// Writes header and body to `path`, or to stdout when there is none.
    pub fn emit(&self, path: Option<&Path>, body: &str) -> Outcome {
        let text = format!("{}{body}", self.header());
        match path {
            Some(p) => fs::write(p, text).map_err(|e| Failure::io(p, e)),
            None => {
                let mut out = std::io::stdout().lock();
                out.write_all(text.as_bytes())
                    .and_then(|_| out.flush())
                    .map_err(|e| Failure::io(Path::new("<stdout>"), e))
            }
        }
    }
}
