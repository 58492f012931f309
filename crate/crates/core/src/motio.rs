//! MOTChallenge CSV records.
//!
//! One record per line: `frame,id,left,top,width,height,conf,class,visibility`.
//! Lines need at least the first six fields; missing `conf`, `class` and
//! `visibility` default to 1. Columns past the ninth (world coordinates in
//! some files) are ignored. Reading accepts LF and CRLF; writing emits LF.

use std::io::{Read, Write};

use crate::association::Detection;
use crate::error::{GeometryError, MotError};
use crate::geometry::BBox;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameRecord {
    pub frame: u32,
    /// Track or ground-truth identity; `-1` for raw detections.
    pub id: i64,
    pub x: f64,
    pub y: f64,
    pub w: f64,
    pub h: f64,
    pub conf: f64,
    pub class_id: i64,
    pub visibility: f64,
}

impl FrameRecord {
    pub fn from_bbox(frame: u32, id: i64, b: &BBox, conf: f64) -> Self {
        Self {
            frame,
            id,
            x: b.x1(),
            y: b.y1(),
            w: b.width(),
            h: b.height(),
            conf,
            class_id: -1,
            visibility: -1.0,
        }
    }

    pub fn bbox(&self) -> Result<BBox, GeometryError> {
        BBox::from_xywh(self.x, self.y, self.w, self.h)
    }

    /// Detection with the confidence clamped into `[0, 1]`.
    pub fn detection(&self) -> Result<Detection, GeometryError> {
        Ok(Detection { bbox: self.bbox()?, score: self.conf.clamp(0.0, 1.0) })
    }
}

fn parse_f64(field: &str, name: &str, line: u64) -> Result<f64, MotError> {
    let v: f64 = field.parse().map_err(|_| MotError::Malformed {
        line,
        msg: format!("{name} '{field}' is not a number"),
    })?;
    if !v.is_finite() {
        return Err(MotError::Malformed { line, msg: format!("{name} '{field}' is not finite") });
    }
    Ok(v)
}

/// Integers may also be written as integral decimals (`7.0`).
fn parse_int(field: &str, name: &str, line: u64) -> Result<i64, MotError> {
    if let Ok(v) = field.parse::<i64>() {
        return Ok(v);
    }
    let v = parse_f64(field, name, line)?;
    if v.fract() != 0.0 || v.abs() > 9.0e15 {
        return Err(MotError::Malformed { line, msg: format!("{name} '{field}' is not an integer") });
    }
    Ok(v as i64)
}

pub fn parse_mot_csv<R: Read>(reader: R) -> Result<Vec<FrameRecord>, MotError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut out = Vec::new();
    for row in rdr.records() {
        let row = row?;
        let line = row.position().map_or(0, |p| p.line());
        if row.iter().all(str::is_empty) {
            continue;
        }
        if row.len() < 6 {
            return Err(MotError::Malformed {
                line,
                msg: format!("expected at least 6 fields, found {}", row.len()),
            });
        }
        let frame = parse_int(&row[0], "frame", line)?;
        if frame < 1 || frame > i64::from(u32::MAX) {
            return Err(MotError::Malformed { line, msg: format!("frame {frame} must be >= 1") });
        }
        let w = parse_f64(&row[4], "width", line)?;
        let h = parse_f64(&row[5], "height", line)?;
        if w <= 0.0 || h <= 0.0 {
            return Err(MotError::NonPositiveSize { line, w, h });
        }
        let opt = |k: usize| row.get(k).filter(|s| !s.is_empty());
        out.push(FrameRecord {
            frame: frame as u32,
            id: parse_int(&row[1], "id", line)?,
            x: parse_f64(&row[2], "left", line)?,
            y: parse_f64(&row[3], "top", line)?,
            w,
            h,
            conf: opt(6).map_or(Ok(1.0), |s| parse_f64(s, "conf", line))?,
            class_id: opt(7).map_or(Ok(1), |s| parse_int(s, "class", line))?,
            visibility: opt(8).map_or(Ok(1.0), |s| parse_f64(s, "visibility", line))?,
        });
    }
    Ok(out)
}

pub fn parse_mot_str(text: &str) -> Result<Vec<FrameRecord>, MotError> {
    parse_mot_csv(text.as_bytes())
}

/// At most two decimals, trailing zeros trimmed.
fn fmt_coord(v: f64) -> String {
    let s = format!("{v:.2}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".to_string()
    } else {
        s.to_string()
    }
}

pub fn format_record(r: &FrameRecord) -> String {
    format!(
        "{},{},{},{},{},{},{},{},{}",
        r.frame,
        r.id,
        fmt_coord(r.x),
        fmt_coord(r.y),
        fmt_coord(r.w),
        fmt_coord(r.h),
        r.conf,
        r.class_id,
        r.visibility
    )
}

pub fn write_mot_csv<W: Write>(mut w: W, records: &[FrameRecord]) -> std::io::Result<()> {
    for r in records {
        writeln!(w, "{}", format_record(r))?;
    }
    Ok(())
}

pub fn to_mot_string(records: &[FrameRecord]) -> String {
    let mut buf = Vec::new();
    write_mot_csv(&mut buf, records).expect("writing to a Vec cannot fail");
    String::from_utf8(buf).expect("records format as ASCII")
}

/// Dense per-frame grouping: index 0 holds frame 1. Frames without records
/// give empty groups; file order is kept inside a group.
pub fn group_by_frame(records: &[FrameRecord]) -> Vec<Vec<FrameRecord>> {
    let last = records.iter().map(|r| r.frame).max().unwrap_or(0) as usize;
    let mut groups = vec![Vec::new(); last];
    for r in records {
        groups[r.frame as usize - 1].push(*r);
    }
    groups
}

pub fn frames_to_detections(groups: &[Vec<FrameRecord>]) -> Result<Vec<Vec<Detection>>, GeometryError> {
    groups
        .iter()
        .map(|g| g.iter().map(FrameRecord::detection).collect())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn field_mapping() {
        let r = parse_mot_str("1,7,10,20,30,40,1,1,1\n").unwrap();
        assert_eq!(r.len(), 1);
        assert_eq!((r[0].frame, r[0].id), (1, 7));
        let b = r[0].bbox().unwrap();
        assert_eq!(b.coords(), [10.0, 20.0, 40.0, 60.0]);
    }

    #[test]
    fn defaults_for_missing_fields() {
        let r = parse_mot_str("1,-1,0,0,5,5,0.9").unwrap();
        assert_eq!(r[0].id, -1);
        assert_eq!(r[0].conf, 0.9);
        assert_eq!(r[0].class_id, 1);
        assert_eq!(r[0].visibility, 1.0);
        let r = parse_mot_str("3,2,0,0,5,5").unwrap();
        assert_eq!(r[0].conf, 1.0);
    }

    #[test]
    fn tolerates_crlf_and_world_columns() {
        let r = parse_mot_str("1,1,1,1,5,5,1,1,1,-1,-1,-1\r\n2,1,2,2,5,5,1,1,0.5\r\n").unwrap();
        assert_eq!(r.len(), 2);
        assert_eq!(r[1].visibility, 0.5);
        assert_eq!(r[1].frame, 2);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let e = parse_mot_str("1,1,0,0,5,5\n2,1,0,0\n").unwrap_err();
        assert!(matches!(e, MotError::Malformed { line: 2, .. }), "{e}");
        let e = parse_mot_str("1,1,0,0,5,5\n1,2,0,0,5,5\n1,x,0,0,5,5\n").unwrap_err();
        assert!(matches!(e, MotError::Malformed { line: 3, .. }), "{e}");
        let e = parse_mot_str("1,1,0,0,-5,5\n").unwrap_err();
        assert!(matches!(e, MotError::NonPositiveSize { line: 1, .. }), "{e}");
        let e = parse_mot_str("0,1,0,0,5,5\n").unwrap_err();
        assert!(matches!(e, MotError::Malformed { line: 1, .. }), "{e}");
        let e = parse_mot_str("1,1,0,nan,5,5\n").unwrap_err();
        assert!(matches!(e, MotError::Malformed { line: 1, .. }), "{e}");
    }

    #[test]
    fn writing() {
        assert_eq!(to_mot_string(&[]), "");
        let r = parse_mot_str("1,7,10.5,20.25,30,40,0.9,1,1").unwrap();
        let s = to_mot_string(&r);
        assert_eq!(s, "1,7,10.5,20.25,30,40,0.9,1,1\n");
        assert_eq!(s.matches(',').count(), 8);
        assert_eq!(fmt_coord(-0.001), "0");
        assert_eq!(fmt_coord(12.3456), "12.35");
    }

    #[test]
    fn grouping() {
        let r = parse_mot_str("1,1,0,0,5,5\n3,1,0,0,5,5\n3,2,9,0,5,5\n").unwrap();
        let g = group_by_frame(&r);
        assert_eq!(g.len(), 3);
        assert!(g[1].is_empty());
        assert_eq!(g[2].iter().map(|r| r.id).collect::<Vec<_>>(), vec![1, 2]);

        let many: Vec<FrameRecord> = (0..100).map(|i| FrameRecord { id: i, ..r[0] }).collect();
        let g = group_by_frame(&many);
        assert_eq!(g.len(), 1);
        assert_eq!(g[0].len(), 100);
        assert_eq!(g[0][57].id, 57);
    }

    fn record() -> impl Strategy<Value = FrameRecord> {
        (
            1u32..500,
            -1i64..200,
            (-50_000i64..500_000, -50_000i64..500_000, 1i64..40_000, 1i64..40_000),
            0.0f64..1.0,
            -1i64..12,
            0.0f64..=1.0,
        )
            .prop_map(|(frame, id, (x, y, w, h), conf, class_id, visibility)| FrameRecord {
                frame,
                id,
                x: x as f64 / 100.0,
                y: y as f64 / 100.0,
                w: w as f64 / 100.0,
                h: h as f64 / 100.0,
                conf,
                class_id,
                visibility,
            })
    }

    proptest! {
        #[test]
        fn round_trip(records in prop::collection::vec(record(), 0..40)) {
            let text = to_mot_string(&records);
            let parsed = parse_mot_str(&text).unwrap();
            prop_assert_eq!(&parsed, &records);
            let again = parse_mot_str(&to_mot_string(&parsed)).unwrap();
            prop_assert_eq!(again, parsed);
        }

        #[test]
        fn parsed_records_give_valid_boxes(records in prop::collection::vec(record(), 1..20)) {
            let parsed = parse_mot_str(&to_mot_string(&records)).unwrap();
            for r in parsed {
                prop_assert!(r.bbox().is_ok());
            }
        }
    }
}
