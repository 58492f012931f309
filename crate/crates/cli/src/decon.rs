use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{ArgGroup, Args};

use athtrack::decontaminator::{DEFAULT_LOWER_BOUND, DEFAULT_MAX_STEPS, DEFAULT_STEP_SIZE};
use athtrack::{decontaminate, detect_duplicates, self_giou_matrix, BBox, D3Config, LossMode};

use crate::error::CliError;
use crate::files::read_detections;
use crate::manifest::Manifest;
use crate::Run;

#[derive(Args, Debug)]
#[command(group(ArgGroup::new("source").required(true).args(["input", "boxes"])))]
pub struct DeconArgs {
    /// Detection file in MOT format.
    #[arg(long)]
    input: Option<PathBuf>,
    /// One frame given inline as `x,y,w,h;x,y,w,h;...`.
    #[arg(long)]
    boxes: Option<String>,
    /// Pairs with GIoU loss below this are duplicates.
    #[arg(long, default_value_t = DEFAULT_LOWER_BOUND)]
    lb: f64,
    /// Only report this frame of --input.
    #[arg(long)]
    frame: Option<u32>,
    /// Run the repulsive descent and print the moved boxes.
    #[arg(long, num_args = 0..=1, default_value_t = false, default_missing_value = "true", action = clap::ArgAction::Set)]
    descend: bool,
    #[arg(long, default_value_t = DEFAULT_STEP_SIZE)]
    step_size: f64,
    #[arg(long, default_value_t = DEFAULT_MAX_STEPS)]
    max_steps: usize,
}

fn parse_boxes(s: &str) -> Result<Vec<BBox>, CliError> {
    s.split(';')
        .filter(|part| !part.trim().is_empty())
        .map(|part| {
            let v: Vec<f64> = part
                .split(',')
                .map(|f| f.trim().parse::<f64>())
                .collect::<Result<_, _>>()
                .map_err(|_| CliError::Usage(format!("--boxes: '{part}' is not a list of numbers")))?;
            let [x, y, w, h] = v[..] else {
                return Err(CliError::Usage(format!("--boxes: '{part}' needs exactly x,y,w,h")));
            };
            BBox::from_xywh(x, y, w, h).map_err(|e| CliError::Usage(format!("--boxes: '{part}': {e}")))
        })
        .collect()
}

fn fmt_loss(v: Option<f64>) -> String {
    v.map_or_else(|| "none".to_string(), |v| format!("{v:.6}"))
}

/// Report for one frame; returns the text and the number of pairs found.
fn frame_report(frame: u32, boxes: &[BBox], a: &DeconArgs, cfg: &D3Config) -> Result<(String, usize), CliError> {
    let mut s = String::new();
    if boxes.is_empty() {
        let _ = writeln!(s, "frame {frame}: 0 duplicate pairs");
        return Ok((s, 0));
    }
    let m = self_giou_matrix(boxes)?;
    let report = detect_duplicates(&m, cfg);
    let _ = writeln!(s, "frame {frame}: {} duplicate pairs", report.len());
    for p in &report.pairs {
        let _ = writeln!(s, "  pair {} {} loss={:.6}", p.i, p.j, p.loss);
    }
    if a.descend {
        let out = decontaminate(boxes, cfg, a.step_size, a.max_steps)?;
        let after = self_giou_matrix(&out.boxes)?.min_off_diagonal();
        let _ = writeln!(
            s,
            "  descend: steps={} converged={} min_pairwise_loss={} lb={}",
            out.steps,
            out.converged,
            fmt_loss(after),
            cfg.lower_bound()
        );
        for (i, b) in out.boxes.iter().enumerate() {
            let _ = writeln!(s, "  box {i} x={:.4} y={:.4} w={:.4} h={:.4}", b.x1(), b.y1(), b.width(), b.height());
        }
    }
    Ok((s, report.len()))
}

pub fn run(a: &DeconArgs) -> Result<Run, CliError> {
    let cfg = D3Config::new(a.lb, LossMode::Repulsive)?;
    if !(a.step_size > 0.0 && a.step_size.is_finite()) {
        return Err(CliError::Usage(format!("--step-size must be positive, got {}", a.step_size)));
    }

    let mut m = Manifest::new("decontaminate");
    let frames: Vec<(u32, Vec<BBox>)> = match (&a.input, &a.boxes) {
        (Some(path), _) => {
            m.arg("input", path.display()).input("detections", path);
            read_detections(path, None)?
                .into_iter()
                .enumerate()
                .map(|(i, dets)| (i as u32 + 1, dets.into_iter().map(|d| d.bbox).collect()))
                .filter(|(f, _)| a.frame.is_none_or(|want| want == *f))
                .collect()
        }
        (None, Some(inline)) => {
            m.arg("boxes", inline);
            vec![(1, parse_boxes(inline)?)]
        }
        (None, None) => unreachable!("clap requires one source"),
    };
    if let (Some(want), true) = (a.frame, a.input.is_some()) {
        if frames.is_empty() {
            return Err(CliError::Usage(format!("--frame {want} is not in the input")));
        }
        m.arg("frame", want);
    }
    m.arg("lb", cfg.lower_bound())
        .arg("descend", a.descend)
        .arg("step-size", a.step_size)
        .arg("max-steps", a.max_steps);

    let mut total = 0;
    for (f, boxes) in &frames {
        let (text, pairs) = frame_report(*f, boxes, a, &cfg)?;
        print!("{text}");
        total += pairs;
    }
    println!("total: {total} duplicate pairs in {} frames", frames.len());
    m.extra("frames", frames.len()).extra("duplicate_pairs", total);
    Ok(Run { manifest: m, default_path: None })
}
