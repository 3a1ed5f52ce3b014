//! Run manifest echoed at the top of every simulation record.

use std::fmt::{Display, Write as _};
use std::path::PathBuf;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    SimulateHomogeneous,
    SimulateInhomogeneous,
    SimulateContinuous,
    SimulateCompare,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::SimulateHomogeneous => "simulate homogeneous",
            Command::SimulateInhomogeneous => "simulate inhomogeneous",
            Command::SimulateContinuous => "simulate continuous",
            Command::SimulateCompare => "simulate compare",
        }
    }
}

/// Command, validated parameters in insertion order, seed and destination.
#[derive(Debug, Clone)]
pub struct RunManifest {
    command: Command,
    parameters: Vec<(String, String)>,
    output_path: Option<PathBuf>,
    seed: Option<u64>,
}

impl RunManifest {
    pub fn new(command: Command, seed: Option<u64>, output_path: Option<PathBuf>) -> Self {
        RunManifest {
            command,
            parameters: Vec::new(),
            output_path,
            seed,
        }
    }

    pub fn param(&mut self, key: &str, value: impl Display) -> &mut Self {
        self.parameters.push((key.to_string(), value.to_string()));
        self
    }

    /// `key=value` lines: `command`, one `param.<key>` per parameter, `seed`
    /// and `output`.
    pub fn echo(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "command={}", self.command.name());
        for (k, v) in &self.parameters {
            let _ = writeln!(out, "param.{k}={v}");
        }
        if let Some(seed) = self.seed {
            let _ = writeln!(out, "seed={seed}");
        }
        let dest = self
            .output_path
            .as_ref()
            .map_or_else(|| "stdout".to_string(), |p| p.display().to_string());
        let _ = writeln!(out, "output={dest}");
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn echo_layout() {
        let mut m = RunManifest::new(Command::SimulateContinuous, Some(42), None);
        m.param("kappa", 2).param("alpha", 1.5);
        assert_eq!(
            m.echo(),
            "command=simulate continuous\nparam.kappa=2\nparam.alpha=1.5\nseed=42\noutput=stdout\n"
        );
    }
}
