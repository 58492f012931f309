use std::collections::BTreeSet;
use std::path::PathBuf;

use clap::{Args, ValueEnum};

use athtrack::association::Strategy;
use athtrack::decontaminator::{DEFAULT_LOWER_BOUND, DEFAULT_MAX_STEPS, DEFAULT_STEP_SIZE};
use athtrack::motio::to_mot_string;
use athtrack::tracker::{decontaminate_detections, lb_prefilter};
use athtrack::{run_sequence, D3Config, Detection, LossMode};

use crate::error::CliError;
use crate::files::{read_detections, write_text};
use crate::manifest::Manifest;
use crate::{parse_strategy, Run, TrackerArgs};

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Associator {
    /// One gated assignment over all detections.
    Plain,
    /// Lineup plus substitution pool.
    Rh,
}

#[derive(Args, Debug)]
pub struct TrackArgs {
    /// Detection file in MOT format.
    #[arg(long)]
    input: PathBuf,
    /// Tracker output in MOT format.
    #[arg(long)]
    output: PathBuf,
    #[arg(long, value_enum, default_value_t = Associator::Rh)]
    associator: Associator,
    /// Replacing strategy, RS1 to RS5.
    #[arg(long, value_parser = parse_strategy, default_value = "RS5")]
    strategy: Strategy,
    #[command(flatten)]
    tracker: TrackerArgs,
    /// Drop the lower-scored box of every pair whose GIoU loss is below --lb.
    #[arg(long, num_args = 0..=1, default_value_t = false, default_missing_value = "true", action = clap::ArgAction::Set)]
    lb_prefilter: bool,
    /// Push apart below-bound pairs in every frame before association.
    #[arg(long, num_args = 0..=1, default_value_t = false, default_missing_value = "true", action = clap::ArgAction::Set)]
    decontaminate_first: bool,
    /// GIoU loss lower bound for the two options above.
    #[arg(long, default_value_t = DEFAULT_LOWER_BOUND)]
    lb: f64,
    #[arg(long, default_value_t = DEFAULT_STEP_SIZE)]
    step_size: f64,
    #[arg(long, default_value_t = DEFAULT_MAX_STEPS)]
    max_steps: usize,
    /// Keep only detections of this class.
    #[arg(long)]
    class: Option<i64>,
}

pub fn run(a: &TrackArgs) -> Result<Run, CliError> {
    let cfg = a.tracker.resolve(a.strategy, a.associator == Associator::Rh)?;
    let d3 = D3Config::new(a.lb, LossMode::Repulsive)?;
    if a.lb_prefilter && a.decontaminate_first {
        return Err(CliError::Usage("--lb-prefilter and --decontaminate-first are mutually exclusive".into()));
    }
    if !(a.step_size > 0.0 && a.step_size.is_finite()) {
        return Err(CliError::Usage(format!("--step-size must be positive, got {}", a.step_size)));
    }

    let mut frames = read_detections(&a.input, a.class)?;
    let detections: usize = frames.iter().map(Vec::len).sum();
    let (mut dropped, mut descended) = (0, 0);
    for dets in frames.iter_mut() {
        if a.lb_prefilter {
            let kept = lb_prefilter(dets, &d3);
            dropped += dets.len() - kept.len();
            *dets = kept;
        } else if a.decontaminate_first && dets.len() > 1 {
            let (moved, out): (Vec<Detection>, _) = decontaminate_detections(dets, &d3, a.step_size, a.max_steps)?;
            descended += usize::from(out.steps > 0);
            *dets = moved;
        }
    }

    let records = run_sequence(&frames, &cfg)?;
    write_text(&a.output, &to_mot_string(&records))?;
    let ids: BTreeSet<i64> = records.iter().map(|r| r.id).collect();

    let mut m = Manifest::new("track");
    m.arg("input", a.input.display())
        .arg("output", a.output.display())
        .arg("associator", if cfg.use_rh { "rh" } else { "plain" })
        .arg("strategy", cfg.rh.strategy);
    a.tracker.record(&cfg, &mut m);
    m.arg("lb-prefilter", a.lb_prefilter)
        .arg("decontaminate-first", a.decontaminate_first)
        .arg("lb", d3.lower_bound())
        .arg("step-size", a.step_size)
        .arg("max-steps", a.max_steps);
    if let Some(c) = a.class {
        m.arg("class", c);
    }
    m.input("detections", &a.input).output("tracks", &a.output);
    m.extra("frames", frames.len())
        .extra("detections", detections)
        .extra("prefilter_dropped", dropped)
        .extra("decontaminated_frames", descended)
        .extra("output_records", records.len())
        .extra("distinct_ids", ids.len());

    println!(
        "tracked {} frames: {} detections in, {} records out, {} distinct ids",
        frames.len(),
        detections,
        records.len(),
        ids.len()
    );
    let mut default_path = a.output.clone().into_os_string();
    default_path.push(".manifest");
    Ok(Run { manifest: m, default_path: Some(default_path.into()) })
}
