use std::fs;
use std::path::PathBuf;

use clap::Args;

use athtrack::motio::to_mot_string;
use athtrack::{generate, ScenarioConfig};

use crate::error::CliError;
use crate::files::{parse_range, parse_size, write_text};
use crate::manifest::Manifest;
use crate::Run;

/// Unset values take the generator defaults.
#[derive(Args, Debug)]
pub struct SynthArgs {
    /// Required: every scenario is reproducible from its seed.
    #[arg(long)]
    seed: u64,
    /// Directory for gt.txt, det.txt and manifest.txt (created if missing).
    #[arg(long)]
    out_dir: PathBuf,
    #[arg(long)]
    athletes: Option<usize>,
    #[arg(long)]
    frames: Option<usize>,
    /// Arena size as WxH.
    #[arg(long, value_parser = parse_size)]
    arena: Option<(f64, f64)>,
    /// Athlete box size as WxH.
    #[arg(long, value_parser = parse_size)]
    box_size: Option<(f64, f64)>,
    /// Largest per-axis speed in pixels per frame.
    #[arg(long)]
    speed_max: Option<f64>,
    /// Chance that a detected athlete also gets a duplicate box.
    #[arg(long)]
    duplicate_rate: Option<f64>,
    /// Largest per-axis offset of a duplicate from its source box.
    #[arg(long)]
    duplicate_offset_max: Option<f64>,
    #[arg(long)]
    miss_rate: Option<f64>,
    /// Standard deviation of the detection coordinate noise.
    #[arg(long)]
    jitter: Option<f64>,
    /// Score interval of true detections as LO,HI.
    #[arg(long, value_parser = parse_range)]
    score_true: Option<(f64, f64)>,
    /// Score interval of duplicates as LO,HI.
    #[arg(long, value_parser = parse_range)]
    score_dup: Option<(f64, f64)>,
}

impl SynthArgs {
    fn config(&self) -> ScenarioConfig {
        let d = ScenarioConfig::default();
        ScenarioConfig {
            seed: self.seed,
            athletes: self.athletes.unwrap_or(d.athletes),
            frames: self.frames.unwrap_or(d.frames),
            arena: self.arena.unwrap_or(d.arena),
            box_size: self.box_size.unwrap_or(d.box_size),
            speed_max: self.speed_max.unwrap_or(d.speed_max),
            duplicate_rate: self.duplicate_rate.unwrap_or(d.duplicate_rate),
            duplicate_offset_max: self.duplicate_offset_max.unwrap_or(d.duplicate_offset_max),
            miss_rate: self.miss_rate.unwrap_or(d.miss_rate),
            jitter_sigma: self.jitter.unwrap_or(d.jitter_sigma),
            score_true_range: self.score_true.unwrap_or(d.score_true_range),
            score_dup_range: self.score_dup.unwrap_or(d.score_dup_range),
        }
    }
}

pub fn run(a: &SynthArgs) -> Result<Run, CliError> {
    let cfg = a.config();
    let scenario = generate(&cfg)?;

    fs::create_dir_all(&a.out_dir).map_err(|source| CliError::Io { path: a.out_dir.clone(), source })?;
    let gt_path = a.out_dir.join("gt.txt");
    let det_path = a.out_dir.join("det.txt");
    write_text(&gt_path, &to_mot_string(&scenario.ground_truth))?;
    let det_records = scenario.detection_records();
    write_text(&det_path, &to_mot_string(&det_records))?;

    let mut m = Manifest::new("synth");
    m.arg("seed", cfg.seed)
        .arg("out-dir", a.out_dir.display())
        .arg("athletes", cfg.athletes)
        .arg("frames", cfg.frames)
        .arg("arena", format!("{}x{}", cfg.arena.0, cfg.arena.1))
        .arg("box-size", format!("{}x{}", cfg.box_size.0, cfg.box_size.1))
        .arg("speed-max", cfg.speed_max)
        .arg("duplicate-rate", cfg.duplicate_rate)
        .arg("duplicate-offset-max", cfg.duplicate_offset_max)
        .arg("miss-rate", cfg.miss_rate)
        .arg("jitter", cfg.jitter_sigma)
        .arg("score-true", format!("{},{}", cfg.score_true_range.0, cfg.score_true_range.1))
        .arg("score-dup", format!("{},{}", cfg.score_dup_range.0, cfg.score_dup_range.1));
    m.output("ground_truth", &gt_path).output("detections", &det_path);
    m.extra_block("scenario", &cfg.to_key_value());
    m.extra("gt_records", scenario.ground_truth.len())
        .extra("det_records", det_records.len())
        .extra("true_detections", scenario.true_detections)
        .extra("duplicates", scenario.duplicates)
        .extra("misses", scenario.misses);

    println!(
        "wrote {} ground-truth and {} detection records ({} duplicates, {} misses) to {}",
        scenario.ground_truth.len(),
        det_records.len(),
        scenario.duplicates,
        scenario.misses,
        a.out_dir.display()
    );
    Ok(Run { manifest: m, default_path: Some(a.out_dir.join("manifest.txt")) })
}
