use std::fmt::Write as _;
use std::path::PathBuf;
use std::time::{Duration, Instant};

use clap::Args;

use athtrack::association::{RhConfig, Strategy};
use athtrack::{generate, rally_hungarian, Detection, ScenarioConfig, Tracker, TrackerConfig};

use crate::error::CliError;
use crate::files::{read_detections, write_text};
use crate::manifest::Manifest;
use crate::{parse_strategy, Run, TrackerArgs};

const MIN_REPEATS: usize = 5;

#[derive(Args, Debug)]
pub struct BenchArgs {
    /// Detection file in MOT format; without it a scenario is generated.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Seed of the generated scenario.
    #[arg(long, default_value_t = ScenarioConfig::default().seed, conflicts_with = "input")]
    seed: u64,
    /// Strategy to time; repeat the flag for several. Default: all five.
    #[arg(long = "strategy", value_parser = parse_strategy)]
    strategies: Vec<Strategy>,
    /// Runs per strategy; the median is reported.
    #[arg(long, default_value_t = MIN_REPEATS)]
    repeats: usize,
    #[command(flatten)]
    pub tracker: TrackerArgs,
    /// Also write the timing table to this CSV file.
    #[arg(long)]
    csv: Option<PathBuf>,
}

struct Row {
    strategy: Strategy,
    median: Duration,
    rally_iterations: usize,
    probes: usize,
    max_probes: usize,
}

const HEADER: &str =
    "strategy,frames,repeats,median_total_ms,mean_frame_us,rally_iterations,probes,max_probes_per_iteration";

fn median(mut v: Vec<Duration>) -> Duration {
    v.sort_unstable();
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2
    }
}

/// Wall time of `step` over the sequence, plus the rally counters (the same
/// on every repeat).
fn time_once(frames: &[Vec<Detection>], cfg: &TrackerConfig) -> (Duration, usize, usize, usize) {
    let mut t = Tracker::new(*cfg).expect("validated config");
    let (mut spent, mut iterations, mut probes, mut max_probes) = (Duration::ZERO, 0, 0, 0);
    for dets in frames {
        let start = Instant::now();
        t.step(dets);
        spent += start.elapsed();
        if let Some(r) = t.last_association() {
            iterations += r.rally_iterations;
            probes += r.total_probes();
            max_probes = max_probes.max(r.max_probes_per_iteration());
        }
    }
    (spent, iterations, probes, max_probes)
}

/// Every strategy applied to the same inputs: the detections of each frame
/// and the active boxes of one reference tracker.
struct Audit {
    frames: usize,
    rs4_le_rs2: usize,
    rs4_fewest: usize,
    probes: [usize; 5],
    iterations: [usize; 5],
}

fn audit(frames: &[Vec<Detection>], reference: &TrackerConfig) -> Audit {
    let mut t = Tracker::new(*reference).expect("validated config");
    let mut a = Audit { frames: frames.len(), rs4_le_rs2: 0, rs4_fewest: 0, probes: [0; 5], iterations: [0; 5] };
    for dets in frames {
        let tracks = t.active_boxes();
        let mut per_iteration = [0; 5];
        for (k, st) in Strategy::ALL.into_iter().enumerate() {
            let r = rally_hungarian(dets, &tracks, &RhConfig { strategy: st, ..reference.rh });
            per_iteration[k] = r.max_probes_per_iteration();
            a.probes[k] += r.total_probes();
            a.iterations[k] += r.rally_iterations;
        }
        a.rs4_le_rs2 += usize::from(per_iteration[3] <= per_iteration[1]);
        a.rs4_fewest += usize::from(per_iteration.iter().all(|&p| per_iteration[3] <= p));
        t.step(dets);
    }
    a
}

pub fn run(a: &BenchArgs) -> Result<Run, CliError> {
    if a.repeats < MIN_REPEATS {
        return Err(CliError::Usage(format!("--repeats must be at least {MIN_REPEATS}, got {}", a.repeats)));
    }
    let strategies = if a.strategies.is_empty() { Strategy::ALL.to_vec() } else { a.strategies.clone() };
    let reference = a.tracker.resolve(Strategy::default(), true)?;

    let mut m = Manifest::new("bench");
    let frames = match &a.input {
        Some(path) => {
            m.arg("input", path.display()).input("detections", path);
            read_detections(path, None)?
        }
        None => {
            m.arg("seed", a.seed);
            generate(&ScenarioConfig { seed: a.seed, ..ScenarioConfig::default() })?.detections
        }
    };
    for st in &strategies {
        m.arg("strategy", st);
    }
    m.arg("repeats", a.repeats);
    a.tracker.record(&reference, &mut m);

    let mut rows = Vec::new();
    for &st in &strategies {
        let cfg = TrackerConfig { rh: RhConfig { strategy: st, ..reference.rh }, ..reference };
        let mut times = Vec::with_capacity(a.repeats);
        let mut counters = (0, 0, 0);
        for _ in 0..a.repeats {
            let (spent, iterations, probes, max_probes) = time_once(&frames, &cfg);
            times.push(spent);
            counters = (iterations, probes, max_probes);
        }
        rows.push(Row {
            strategy: st,
            median: median(times),
            rally_iterations: counters.0,
            probes: counters.1,
            max_probes: counters.2,
        });
    }

    let mut table = format!("{HEADER}\n");
    for r in &rows {
        let total_ms = r.median.as_secs_f64() * 1e3;
        let per_frame_us = if frames.is_empty() { 0.0 } else { total_ms * 1e3 / frames.len() as f64 };
        let _ = writeln!(
            table,
            "{},{},{},{total_ms:.3},{per_frame_us:.3},{},{},{}",
            r.strategy,
            frames.len(),
            a.repeats,
            r.rally_iterations,
            r.probes,
            r.max_probes
        );
        m.extra(format!("{}.rally_iterations", r.strategy), r.rally_iterations)
            .extra(format!("{}.probes", r.strategy), r.probes)
            .extra(format!("{}.max_probes_per_iteration", r.strategy), r.max_probes);
    }
    print!("{table}");

    let au = audit(&frames, &reference);
    println!();
    println!("probe_audit.reference={}", reference.rh.strategy);
    println!("probe_audit.rs4_le_rs2_frames={}/{}", au.rs4_le_rs2, au.frames);
    println!("probe_audit.rs4_fewest_frames={}/{}", au.rs4_fewest, au.frames);
    for (k, st) in Strategy::ALL.into_iter().enumerate() {
        let mean = if au.iterations[k] == 0 { 0.0 } else { au.probes[k] as f64 / au.iterations[k] as f64 };
        println!("probe_audit.{st}.probes_per_iteration={mean:.4}");
    }
    m.extra("frames", frames.len())
        .extra("probe_audit.rs4_le_rs2_frames", format!("{}/{}", au.rs4_le_rs2, au.frames))
        .extra("probe_audit.rs4_fewest_frames", format!("{}/{}", au.rs4_fewest, au.frames));

    if let Some(csv) = &a.csv {
        write_text(csv, &table)?;
        m.arg("csv", csv.display()).output("timings", csv);
    }
    Ok(Run { manifest: m, default_path: None })
}
