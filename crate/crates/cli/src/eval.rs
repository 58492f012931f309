use std::path::PathBuf;

use clap::Args;

use athtrack::metrics::DEFAULT_IOU_THRESHOLD;
use athtrack::{evaluate, EvalResult};

use crate::error::CliError;
use crate::files::{read_records, write_text};
use crate::manifest::Manifest;
use crate::Run;

#[derive(Args, Debug)]
pub struct EvalArgs {
    /// Tracker output in MOT format.
    #[arg(long)]
    pred: PathBuf,
    /// Ground truth in MOT format.
    #[arg(long)]
    gt: PathBuf,
    /// Smallest IoU that counts as a match.
    #[arg(long, default_value_t = DEFAULT_IOU_THRESHOLD)]
    iou_threshold: f64,
    /// Keep only ground-truth records of this class.
    #[arg(long)]
    gt_class: Option<i64>,
    /// Also write the header and one result row to this CSV file.
    #[arg(long)]
    csv: Option<PathBuf>,
}

pub fn run(a: &EvalArgs) -> Result<Run, CliError> {
    if !(0.0..=1.0).contains(&a.iou_threshold) {
        return Err(CliError::Usage(format!("--iou-threshold must lie in [0, 1], got {}", a.iou_threshold)));
    }
    let gt = read_records(&a.gt, a.gt_class)?;
    let pred = read_records(&a.pred, None)?;
    let r = evaluate(&pred, &gt, a.iou_threshold)?;
    print!("{}", r.to_key_value());

    let mut m = Manifest::new("eval");
    m.arg("pred", a.pred.display()).arg("gt", a.gt.display()).arg("iou-threshold", a.iou_threshold);
    if let Some(c) = a.gt_class {
        m.arg("gt-class", c);
    }
    m.input("predictions", &a.pred).input("ground_truth", &a.gt);
    if let Some(csv) = &a.csv {
        write_text(csv, &format!("{}\n{}\n", EvalResult::CSV_HEADER, r.csv_row()))?;
        m.arg("csv", csv.display()).output("report", csv);
    }
    m.extra_block("result", &r.to_key_value());
    Ok(Run { manifest: m, default_path: None })
}
