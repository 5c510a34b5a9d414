//! Run manifests written next to command outputs.

use std::fmt::Write as _;
use std::path::PathBuf;

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct RunManifest {
    pub subcommand: String,
    /// Resolved flag values, defaults included, in a stable order.
    pub flags: Vec<(String, String)>,
    pub seeds: Vec<u64>,
    pub inputs: Vec<PathBuf>,
    pub outputs: Vec<PathBuf>,
    pub version: String,
}

impl RunManifest {
    pub fn new(subcommand: &str) -> Self {
        Self { subcommand: subcommand.into(), version: env!("CARGO_PKG_VERSION").into(), ..Self::default() }
    }

    pub fn flag(&mut self, name: &str, value: impl ToString) -> &mut Self {
        self.flags.push((name.into(), value.to_string()));
        self
    }

    /// Command line that reruns the step.
    pub fn command_line(&self) -> String {
        let mut s = format!("bpectc {}", self.subcommand);
        for (k, v) in &self.flags {
            if v == "true" {
                let _ = write!(s, " --{k}");
            } else if v != "false" && !v.is_empty() {
                for part in v.split('\u{1f}') {
                    let _ = write!(s, " --{k} {}", shell_quote(part));
                }
            }
        }
        s
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("tool bpectc {}\nsubcommand {}\n", self.version, self.subcommand);
        for (k, v) in &self.flags {
            let _ = writeln!(s, "flag {k} {}", v.replace('\u{1f}', " "));
        }
        for seed in &self.seeds {
            let _ = writeln!(s, "seed {seed}");
        }
        for p in &self.inputs {
            let _ = writeln!(s, "input {}", p.display());
        }
        for p in &self.outputs {
            let _ = writeln!(s, "output {}", p.display());
        }
        let _ = writeln!(s, "command {}", self.command_line());
        s
    }
}

/// Joins repeated flag values for [`RunManifest::flag`].
pub fn repeated<T: ToString>(values: &[T]) -> String {
    values.iter().map(ToString::to_string).collect::<Vec<_>>().join("\u{1f}")
}

fn shell_quote(s: &str) -> String {
    if !s.is_empty() && s.chars().all(|c| c.is_ascii_alphanumeric() || "-_./=:,@+".contains(c)) {
        s.to_string()
    } else {
        format!("'{}'", s.replace('\'', "'\\''"))
    }
}
