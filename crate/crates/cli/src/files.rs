use std::fs::{self, File};
use std::io::BufReader;
use std::path::Path;

use athtrack::motio::{frames_to_detections, group_by_frame};
use athtrack::{parse_mot_csv, Detection, FrameRecord};

use crate::error::CliError;

/// Records of a MOT file, optionally restricted to one class.
pub fn read_records(path: &Path, class: Option<i64>) -> Result<Vec<FrameRecord>, CliError> {
    let file = File::open(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })?;
    let mut records =
        parse_mot_csv(BufReader::new(file)).map_err(|source| CliError::Parse { path: path.to_path_buf(), source })?;
    if let Some(c) = class {
        records.retain(|r| r.class_id == c);
    }
    Ok(records)
}

/// Per-frame detections; index 0 is frame 1.
pub fn read_detections(path: &Path, class: Option<i64>) -> Result<Vec<Vec<Detection>>, CliError> {
    let records = read_records(path, class)?;
    frames_to_detections(&group_by_frame(&records)).map_err(|source| CliError::Geometry { path: path.to_path_buf(), source })
}

pub fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

/// `WxH`, e.g. `1280x720`.
pub fn parse_size(s: &str) -> Result<(f64, f64), String> {
    let (w, h) = s.split_once(['x', 'X']).ok_or_else(|| format!("expected WxH, got '{s}'"))?;
    let num = |v: &str| v.trim().parse::<f64>().map_err(|_| format!("'{v}' is not a number"));
    Ok((num(w)?, num(h)?))
}

/// `LO,HI`, e.g. `0.6,1.0`.
pub fn parse_range(s: &str) -> Result<(f64, f64), String> {
    let (lo, hi) = s.split_once(',').ok_or_else(|| format!("expected LO,HI, got '{s}'"))?;
    let num = |v: &str| v.trim().parse::<f64>().map_err(|_| format!("'{v}' is not a number"));
    Ok((num(lo)?, num(hi)?))
}
