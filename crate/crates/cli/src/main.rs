mod bench;
mod decon;
mod error;
mod eval;
mod files;
mod manifest;
mod stats;
mod synth;
mod track;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use athtrack::association::{RhConfig, Strategy};
use athtrack::tracker::{DEFAULT_AGE_L, DEFAULT_NEW_TRACK_MIN_SCORE};
use athtrack::TrackerConfig;

use crate::error::CliError;
use crate::manifest::Manifest;

/// Multi-athlete tracking toolkit.
///
/// Exit status: 0 on success, 1 on I/O or runtime failure, 2 on usage errors.
#[derive(Parser, Debug)]
#[command(name = "athtrack", version)]
struct Cli {
    /// Where to write the run manifest. Commands that write files default to
    /// a path next to their output; the others print it to stderr.
    #[arg(long, global = true)]
    manifest: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a seeded scenario: gt.txt, det.txt and manifest.txt.
    Synth(synth::SynthArgs),
    /// Track a detection file and write MOT records.
    Track(track::TrackArgs),
    /// Score predictions against ground truth.
    Eval(eval::EvalArgs),
    /// Frames per video, objects per frame and tracks per video.
    Stats(stats::StatsArgs),
    /// Report below-bound duplicate pairs and optionally push them apart.
    Decontaminate(decon::DeconArgs),
    /// Time the replacing strategies and count their probes.
    Bench(bench::BenchArgs),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Preset {
    Volleyball,
    Basketball,
    Soccer,
}

impl Preset {
    fn rh(self) -> RhConfig {
        match self {
            Preset::Volleyball => RhConfig::volleyball(),
            Preset::Basketball => RhConfig::basketball(),
            Preset::Soccer => RhConfig::soccer(),
        }
    }

    fn name(self) -> &'static str {
        match self {
            Preset::Volleyball => "volleyball",
            Preset::Basketball => "basketball",
            Preset::Soccer => "soccer",
        }
    }
}

/// Substitution pool size: a count or `unbounded`.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub struct Budget(Option<usize>);

impl std::str::FromStr for Budget {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.eq_ignore_ascii_case("unbounded") {
            return Ok(Budget(None));
        }
        s.parse().map(|n| Budget(Some(n))).map_err(|_| format!("expected a count or 'unbounded', got '{s}'"))
    }
}

impl std::fmt::Display for Budget {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.0 {
            Some(n) => write!(f, "{n}"),
            None => f.write_str("unbounded"),
        }
    }
}

pub fn parse_strategy(s: &str) -> Result<Strategy, String> {
    s.parse()
}

/// Tracker settings shared by `track` and `bench`. Unset lineup values come
/// from the preset.
#[derive(Args, Debug, Clone)]
pub struct TrackerArgs {
    #[arg(long, value_enum, default_value_t = Preset::Volleyball)]
    preset: Preset,
    /// Lineup size K.
    #[arg(long)]
    top_k: Option<usize>,
    /// Detections considered per frame (N).
    #[arg(long)]
    max_candidates: Option<usize>,
    /// Substitution pool size q, or `unbounded`.
    #[arg(long)]
    sub_budget: Option<Budget>,
    /// Matched GIoU losses above this are unacceptable.
    #[arg(long)]
    theta: Option<f64>,
    /// Frames a track may go unmatched before it is dropped.
    #[arg(long, default_value_t = DEFAULT_AGE_L)]
    age_l: u32,
    /// Lowest score allowed to start a track.
    #[arg(long, default_value_t = DEFAULT_NEW_TRACK_MIN_SCORE)]
    min_score: f64,
    /// Extrapolate tracks by their last displacement.
    #[arg(long, num_args = 0..=1, default_value_t = false, default_missing_value = "true", action = clap::ArgAction::Set)]
    const_velocity: bool,
}

impl TrackerArgs {
    pub fn resolve(&self, strategy: Strategy, use_rh: bool) -> Result<TrackerConfig, CliError> {
        let mut rh = self.preset.rh();
        rh.strategy = strategy;
        if let Some(k) = self.top_k {
            rh.top_k = k;
        }
        if let Some(n) = self.max_candidates {
            rh.max_candidates = n;
        }
        if let Some(Budget(q)) = self.sub_budget {
            rh.sub_budget = q;
        }
        if let Some(t) = self.theta {
            rh.accept_threshold = t;
        }
        let cfg = TrackerConfig {
            age_l: self.age_l,
            rh,
            use_rh,
            new_track_min_score: self.min_score,
            constant_velocity: self.const_velocity,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn record(&self, cfg: &TrackerConfig, m: &mut Manifest) {
        m.arg("preset", self.preset.name())
            .arg("top-k", cfg.rh.top_k)
            .arg("max-candidates", cfg.rh.max_candidates)
            .arg("sub-budget", Budget(cfg.rh.sub_budget))
            .arg("theta", cfg.rh.accept_threshold)
            .arg("age-l", cfg.age_l)
            .arg("min-score", cfg.new_track_min_score)
            .arg("const-velocity", cfg.constant_velocity);
    }
}

/// Finished run: the manifest plus where it goes when `--manifest` is unset.
pub struct Run {
    pub manifest: Manifest,
    pub default_path: Option<PathBuf>,
}

fn emit_manifest(run: Run, explicit: Option<&Path>, started: Instant) -> Result<(), CliError> {
    let text = run.manifest.render(started.elapsed());
    match explicit.map(Path::to_path_buf).or(run.default_path) {
        Some(path) => files::write_text(&path, &text),
        None => {
            eprint!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let started = Instant::now();
    let run = match &cli.command {
        Command::Synth(a) => synth::run(a)?,
        Command::Track(a) => track::run(a)?,
        Command::Eval(a) => eval::run(a)?,
        Command::Stats(a) => stats::run(a)?,
        Command::Decontaminate(a) => decon::run(a)?,
        Command::Bench(a) => bench::run(a)?,
    };
    emit_manifest(run, cli.manifest.as_deref(), started)
}

fn main() -> ExitCode {
    // clap exits with 2 on usage errors and 0 for --help/--version.
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn budget_parsing() {
        assert_eq!("5".parse::<Budget>().unwrap(), Budget(Some(5)));
        assert_eq!("Unbounded".parse::<Budget>().unwrap(), Budget(None));
        assert!("-1".parse::<Budget>().is_err());
        assert_eq!(Budget(None).to_string(), "unbounded");
    }

    #[test]
    fn presets_fill_unset_values() {
        let cli = Cli::try_parse_from(["athtrack", "bench", "--preset", "basketball", "--top-k", "8"]).unwrap();
        let Command::Bench(b) = cli.command else { panic!("expected bench") };
        let cfg = b.tracker.resolve(Strategy::Rs2, true).unwrap();
        assert_eq!((cfg.rh.top_k, cfg.rh.max_candidates, cfg.rh.sub_budget), (8, 15, Some(5)));
        assert_eq!(cfg.rh.strategy, Strategy::Rs2);
    }

    #[test]
    fn invalid_lineup_is_a_usage_error() {
        let cli = Cli::try_parse_from(["athtrack", "bench", "--top-k", "0"]).unwrap();
        let Command::Bench(b) = cli.command else { panic!("expected bench") };
        let e = b.tracker.resolve(Strategy::Rs5, true).unwrap_err();
        assert_eq!(e.exit_code(), 2);
    }
}
