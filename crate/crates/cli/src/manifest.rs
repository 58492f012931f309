//! key=value run manifests.
//!
//! `arg.<flag>=<value>` lines hold the fully resolved flags; passing each
//! back as `--<flag>=<value>` to the same subcommand repeats the run.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Duration;

pub struct Manifest {
    command: &'static str,
    args: Vec<(String, String)>,
    inputs: Vec<(&'static str, PathBuf)>,
    outputs: Vec<(&'static str, PathBuf)>,
    extra: Vec<(String, String)>,
}

impl Manifest {
    pub fn new(command: &'static str) -> Self {
        Self { command, args: Vec::new(), inputs: Vec::new(), outputs: Vec::new(), extra: Vec::new() }
    }

    pub fn arg(&mut self, flag: &str, value: impl ToString) -> &mut Self {
        self.args.push((flag.to_string(), value.to_string()));
        self
    }

    pub fn input(&mut self, key: &'static str, path: &Path) -> &mut Self {
        self.inputs.push((key, path.to_path_buf()));
        self
    }

    pub fn output(&mut self, key: &'static str, path: &Path) -> &mut Self {
        self.outputs.push((key, path.to_path_buf()));
        self
    }

    pub fn extra(&mut self, key: impl ToString, value: impl ToString) -> &mut Self {
        self.extra.push((key.to_string(), value.to_string()));
        self
    }

    /// Every `key=value` line of a block, prefixed.
    pub fn extra_block(&mut self, prefix: &str, block: &str) -> &mut Self {
        for line in block.lines() {
            if let Some((k, v)) = line.split_once('=') {
                self.extra(format!("{prefix}.{k}"), v);
            }
        }
        self
    }

    pub fn replay(&self) -> String {
        let mut s = format!("athtrack {}", self.command);
        for (k, v) in &self.args {
            let _ = write!(s, " --{k}={v}");
        }
        s
    }

    pub fn render(&self, wall: Duration) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "command={}", self.command);
        let _ = writeln!(s, "version={}", env!("CARGO_PKG_VERSION"));
        let _ = writeln!(s, "replay={}", self.replay());
        for (k, v) in &self.args {
            let _ = writeln!(s, "arg.{k}={v}");
        }
        for (k, p) in &self.inputs {
            let _ = writeln!(s, "input.{k}={}", p.display());
        }
        for (k, p) in &self.outputs {
            let _ = writeln!(s, "output.{k}={}", p.display());
        }
        for (k, v) in &self.extra {
            let _ = writeln!(s, "{k}={v}");
        }
        let _ = writeln!(s, "wall_time_s={:.6}", wall.as_secs_f64());
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn render_layout() {
        let mut m = Manifest::new("track");
        m.arg("top-k", 12).arg("strategy", "RS5").input("detections", Path::new("d.txt"));
        m.extra_block("scenario", "seed=7\nnot a pair\nframes=3\n");
        let s = m.render(Duration::from_millis(1500));
        let lines: Vec<&str> = s.lines().collect();
        assert_eq!(lines[0], "command=track");
        assert_eq!(lines[2], "replay=athtrack track --top-k=12 --strategy=RS5");
        assert!(lines.contains(&"arg.top-k=12"));
        assert!(lines.contains(&"input.detections=d.txt"));
        assert!(lines.contains(&"scenario.seed=7"));
        assert!(lines.contains(&"scenario.frames=3"));
        assert_eq!(*lines.last().unwrap(), "wall_time_s=1.500000");
    }
}
