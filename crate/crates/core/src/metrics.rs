//! CLEAR-MOT and identity metrics, plus dataset summary statistics.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;

use crate::assignment::{hungarian, CostMatrix};
use crate::error::EvalError;
use crate::geometry::{iou, BBox};
use crate::motio::FrameRecord;

pub const DEFAULT_IOU_THRESHOLD: f64 = 0.5;
/// Fraction of its frames a ground-truth trajectory must be matched in to
/// count as mostly tracked.
pub const MT_COVERAGE: f64 = 0.8;

#[derive(Debug, Clone, PartialEq)]
pub struct EvalResult {
    pub mota: f64,
    pub motp: f64,
    pub idf1: f64,
    pub mt_ratio: f64,
    pub fp: usize,
    pub fn_: usize,
    pub ids: usize,
    pub gt_total: usize,
    pub pred_total: usize,
    pub matches: usize,
    pub idtp: usize,
    pub gt_tracks: usize,
    pub mostly_tracked: usize,
}

impl EvalResult {
    pub const CSV_HEADER: &'static str = "mota,motp,idf1,mt_ratio,fp,fn,ids,gt_total,pred_total,matches,idtp,gt_tracks,mostly_tracked";

    pub fn to_key_value(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "mota={:.6}", self.mota);
        let _ = writeln!(s, "motp={:.6}", self.motp);
        let _ = writeln!(s, "idf1={:.6}", self.idf1);
        let _ = writeln!(s, "mt_ratio={:.6}", self.mt_ratio);
        let _ = writeln!(s, "fp={}", self.fp);
        let _ = writeln!(s, "fn={}", self.fn_);
        let _ = writeln!(s, "ids={}", self.ids);
        let _ = writeln!(s, "gt_total={}", self.gt_total);
        let _ = writeln!(s, "pred_total={}", self.pred_total);
        let _ = writeln!(s, "matches={}", self.matches);
        let _ = writeln!(s, "idtp={}", self.idtp);
        let _ = writeln!(s, "gt_tracks={}", self.gt_tracks);
        let _ = writeln!(s, "mostly_tracked={}", self.mostly_tracked);
        s
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{:.6},{:.6},{:.6},{:.6},{},{},{},{},{},{},{},{},{}",
            self.mota,
            self.motp,
            self.idf1,
            self.mt_ratio,
            self.fp,
            self.fn_,
            self.ids,
            self.gt_total,
            self.pred_total,
            self.matches,
            self.idtp,
            self.gt_tracks,
            self.mostly_tracked
        )
    }
}

struct Frame {
    gt: Vec<(i64, BBox)>,
    pred: Vec<(i64, BBox)>,
}

fn index_frames(
    preds: &[FrameRecord],
    gt: &[FrameRecord],
) -> Result<Vec<Frame>, EvalError> {
    let last = gt.iter().map(|r| r.frame).max().ok_or(EvalError::EmptyGroundTruth)?;
    if let Some(r) = preds.iter().find(|r| r.frame > last) {
        return Err(EvalError::FrameMismatch { frame: r.frame, last });
    }
    let mut frames: Vec<Frame> = (0..last).map(|_| Frame { gt: Vec::new(), pred: Vec::new() }).collect();
    for (records, source_name, is_gt) in [(gt, "ground truth", true), (preds, "predictions", false)] {
        for r in records {
            let b = r.bbox().map_err(|err| EvalError::BadBox { frame: r.frame, source_name, err })?;
            let f = &mut frames[r.frame as usize - 1];
            let list = if is_gt { &mut f.gt } else { &mut f.pred };
            if list.iter().any(|(id, _)| *id == r.id) {
                return Err(EvalError::DuplicateId { frame: r.frame, id: r.id, source_name });
            }
            list.push((r.id, b));
        }
    }
    Ok(frames)
}

fn overlaps(a: &BBox, b: &BBox, thr: f64) -> Option<f64> {
    let v = iou(a, b);
    (v > 0.0 && v >= thr).then_some(v)
}

/// CLEAR-MOT and IDF1 over a whole sequence.
///
/// Per frame, correspondences from earlier frames are kept while their IoU
/// stays at or above `iou_threshold`; remaining objects are matched by
/// minimum total `1 - IoU`. An ID switch is counted when a ground-truth
/// object is matched to a different prediction ID than at its last match.
pub fn evaluate(
    predictions: &[FrameRecord],
    ground_truth: &[FrameRecord],
    iou_threshold: f64,
) -> Result<EvalResult, EvalError> {
    let frames = index_frames(predictions, ground_truth)?;

    let mut last_match: HashMap<i64, i64> = HashMap::new();
    let mut gt_frames: BTreeMap<i64, (usize, usize)> = BTreeMap::new();
    let mut co: HashMap<(i64, i64), usize> = HashMap::new();
    let (mut fp, mut fn_, mut ids, mut matches) = (0usize, 0usize, 0usize, 0usize);
    let mut iou_sum = 0.0;

    for f in &frames {
        for (g, gb) in &f.gt {
            gt_frames.entry(*g).or_default().0 += 1;
            for (p, pb) in &f.pred {
                if overlaps(gb, pb, iou_threshold).is_some() {
                    *co.entry((*g, *p)).or_default() += 1;
                }
            }
        }

        let mut gt_used = vec![false; f.gt.len()];
        let mut pred_used = vec![false; f.pred.len()];
        let mut pairs: Vec<(usize, usize, f64)> = Vec::new();

        for (gi, (g, gb)) in f.gt.iter().enumerate() {
            let Some(&p) = last_match.get(g) else { continue };
            let Some(pi) = f.pred.iter().position(|(id, _)| *id == p) else { continue };
            if pred_used[pi] {
                continue;
            }
            if let Some(v) = overlaps(gb, &f.pred[pi].1, iou_threshold) {
                gt_used[gi] = true;
                pred_used[pi] = true;
                pairs.push((gi, pi, v));
            }
        }

        let free_gt: Vec<usize> = (0..f.gt.len()).filter(|&i| !gt_used[i]).collect();
        let free_pred: Vec<usize> = (0..f.pred.len()).filter(|&i| !pred_used[i]).collect();
        if !free_gt.is_empty() && !free_pred.is_empty() {
            // Forbidden pairs cost more than any complete set of allowed ones,
            // so the solver maximises the number of allowed matches first.
            let forbidden = (free_gt.len().min(free_pred.len()) + 1) as f64;
            let c = CostMatrix::from_fn(free_gt.len(), free_pred.len(), |i, j| {
                overlaps(&f.gt[free_gt[i]].1, &f.pred[free_pred[j]].1, iou_threshold)
                    .map_or(forbidden, |v| 1.0 - v)
            })
            .expect("costs are finite");
            for &(i, j) in hungarian(&c).iter() {
                let (gi, pi) = (free_gt[i], free_pred[j]);
                if let Some(v) = overlaps(&f.gt[gi].1, &f.pred[pi].1, iou_threshold) {
                    gt_used[gi] = true;
                    pred_used[pi] = true;
                    pairs.push((gi, pi, v));
                }
            }
        }

        for &(gi, pi, v) in &pairs {
            let (g, p) = (f.gt[gi].0, f.pred[pi].0);
            if last_match.insert(g, p).is_some_and(|prev| prev != p) {
                ids += 1;
            }
            gt_frames.entry(g).or_default().1 += 1;
            iou_sum += v;
        }
        matches += pairs.len();
        fp += f.pred.len() - pairs.len();
        fn_ += f.gt.len() - pairs.len();
    }

    let gt_total = ground_truth.len();
    let pred_total = predictions.len();
    let mostly_tracked = gt_frames
        .values()
        .filter(|&&(present, matched)| matched as f64 >= MT_COVERAGE * present as f64)
        .count();
    let idtp = identity_true_positives(&co);

    Ok(EvalResult {
        mota: 1.0 - (fp + fn_ + ids) as f64 / gt_total as f64,
        motp: if matches == 0 { 0.0 } else { iou_sum / matches as f64 },
        idf1: 2.0 * idtp as f64 / (gt_total + pred_total) as f64,
        mt_ratio: mostly_tracked as f64 / gt_frames.len() as f64,
        fp,
        fn_,
        ids,
        gt_total,
        pred_total,
        matches,
        idtp,
        gt_tracks: gt_frames.len(),
        mostly_tracked,
    })
}

/// Best one-to-one pairing of ground-truth and predicted trajectories,
/// maximising the number of frames they overlap in.
fn identity_true_positives(co: &HashMap<(i64, i64), usize>) -> usize {
    if co.is_empty() {
        return 0;
    }
    let gts: Vec<i64> = co.keys().map(|k| k.0).collect::<BTreeSet<_>>().into_iter().collect();
    let preds: Vec<i64> = co.keys().map(|k| k.1).collect::<BTreeSet<_>>().into_iter().collect();
    let c = CostMatrix::from_fn(gts.len(), preds.len(), |i, j| {
        -(co.get(&(gts[i], preds[j])).copied().unwrap_or(0) as f64)
    })
    .expect("counts are finite");
    hungarian(&c)
        .iter()
        .map(|&(i, j)| co.get(&(gts[i], preds[j])).copied().unwrap_or(0))
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DatasetStats {
    pub videos: usize,
    pub frames: usize,
    pub objects: usize,
    pub tracks: usize,
}

/// `num / den` rounded half-up to one decimal, computed exactly on the
/// integers; a trailing `.0` is dropped.
fn ratio_1dp(num: usize, den: usize) -> String {
    if den == 0 {
        return "NaN".to_string();
    }
    let (num, den) = (num as u128, den as u128);
    let tenths = (20 * num + den) / (2 * den);
    match tenths % 10 {
        0 => format!("{}", tenths / 10),
        d => format!("{}.{d}", tenths / 10),
    }
}

impl DatasetStats {
    pub fn frames_per_video(&self) -> f64 {
        self.frames as f64 / self.videos as f64
    }

    pub fn objects_per_frame(&self) -> f64 {
        self.objects as f64 / self.frames as f64
    }

    pub fn tracks_per_video(&self) -> f64 {
        self.tracks as f64 / self.videos as f64
    }

    /// The three ratios rounded half-up to one decimal: `(F/V, O/F, T/V)`.
    pub fn rounded(&self) -> (String, String, String) {
        (
            ratio_1dp(self.frames, self.videos),
            ratio_1dp(self.objects, self.frames),
            ratio_1dp(self.tracks, self.videos),
        )
    }

    /// Totals over several datasets (e.g. one per file).
    pub fn combine(parts: &[DatasetStats]) -> DatasetStats {
        parts.iter().fold(DatasetStats { videos: 0, frames: 0, objects: 0, tracks: 0 }, |a, p| DatasetStats {
            videos: a.videos + p.videos,
            frames: a.frames + p.frames,
            objects: a.objects + p.objects,
            tracks: a.tracks + p.tracks,
        })
    }

    pub fn to_key_value(&self) -> String {
        let (fv, of, tv) = self.rounded();
        format!(
            "videos={}\nframes={}\nobjects={}\ntracks={}\nF/V={fv}\nO/F={of}\nT/V={tv}\n",
            self.videos, self.frames, self.objects, self.tracks
        )
    }
}

/// Frames are the distinct frame numbers, objects the records and tracks the
/// distinct IDs.
pub fn dataset_stats(records: &[FrameRecord], video_count: usize) -> DatasetStats {
    DatasetStats {
        videos: video_count,
        frames: records.iter().map(|r| r.frame).collect::<BTreeSet<_>>().len(),
        objects: records.len(),
        tracks: records.iter().map(|r| r.id).collect::<BTreeSet<_>>().len(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(frame: u32, id: i64, x: f64) -> FrameRecord {
        FrameRecord { frame, id, x, y: 0.0, w: 10.0, h: 10.0, conf: 1.0, class_id: 1, visibility: 1.0 }
    }

    /// 10 objects, 10 frames, spaced far apart.
    fn grid() -> Vec<FrameRecord> {
        (1..=10).flat_map(|f| (0..10).map(move |i| rec(f, i, i as f64 * 100.0))).collect()
    }

    #[test]
    fn perfect_predictions() {
        let gt = grid();
        for thr in [0.0, 0.5, 1.0] {
            let r = evaluate(&gt, &gt, thr).unwrap();
            assert_eq!((r.fp, r.fn_, r.ids), (0, 0, 0));
            assert_eq!(r.mota, 1.0);
            assert_eq!(r.idf1, 1.0);
            assert_eq!(r.motp, 1.0);
            assert_eq!(r.mt_ratio, 1.0);
        }
    }

    #[test]
    fn missing_trajectory() {
        let gt = grid();
        let pred: Vec<_> = gt.iter().copied().filter(|r| r.id != 3).collect();
        let r = evaluate(&pred, &gt, 0.5).unwrap();
        assert_eq!((r.fp, r.fn_, r.ids), (0, 10, 0));
        assert!((r.mota - 0.9).abs() < 1e-12);
        // IDTP 90, 100 gt + 90 pred boxes.
        assert!((r.idf1 - 180.0 / 190.0).abs() < 1e-12);
        assert!((r.mt_ratio - 0.9).abs() < 1e-12);
    }

    #[test]
    fn single_id_flip() {
        let gt: Vec<_> = (1..=10).map(|f| rec(f, 1, 0.0)).chain((1..=10).map(|f| rec(f, 2, 500.0))).collect();
        let pred: Vec<_> = gt
            .iter()
            .map(|r| if r.id == 1 && r.frame > 5 { FrameRecord { id: 9, ..*r } } else { *r })
            .collect();
        let r = evaluate(&pred, &gt, 0.5).unwrap();
        assert_eq!(r.ids, 1);
        assert!((r.mota - 0.95).abs() < 1e-12);
        assert_eq!(r.idtp, 15);
        assert!(r.idf1 < 1.0);
        assert!((r.idf1 - 30.0 / 40.0).abs() < 1e-12);
    }

    #[test]
    fn gaps_keep_last_id() {
        // Same prediction ID before and after a gap: no switch.
        let gt: Vec<_> = (1..=6).map(|f| rec(f, 1, 0.0)).collect();
        let pred: Vec<_> = gt.iter().copied().filter(|r| r.frame != 3).collect();
        let r = evaluate(&pred, &gt, 0.5).unwrap();
        assert_eq!((r.fn_, r.ids), (1, 0));
    }

    #[test]
    fn errors() {
        assert_eq!(evaluate(&[], &[], 0.5), Err(EvalError::EmptyGroundTruth));
        let gt = vec![rec(1, 1, 0.0)];
        assert!(matches!(evaluate(&[rec(2, 1, 0.0)], &gt, 0.5), Err(EvalError::FrameMismatch { frame: 2, last: 1 })));
        assert!(matches!(
            evaluate(&[rec(1, 4, 0.0), rec(1, 4, 50.0)], &gt, 0.5),
            Err(EvalError::DuplicateId { id: 4, .. })
        ));
    }

    #[test]
    fn stats_examples() {
        let s = dataset_stats(&[rec(1, 1, 0.0), rec(1, 2, 0.0), rec(1, 3, 0.0)], 1);
        assert_eq!(s.rounded(), ("1".into(), "3".into(), "3".into()));
        let mot17 = DatasetStats { videos: 7, frames: 5316, objects: 85828, tracks: 546 };
        assert_eq!(mot17.rounded(), ("759.4".into(), "16.1".into(), "78".into()));
        // 68449 / 8104 = 8.446...
        let rally = DatasetStats { videos: 10, frames: 8104, objects: 68449, tracks: 122 };
        assert_eq!(rally.rounded(), ("810.4".into(), "8.4".into(), "12.2".into()));
        let total = DatasetStats::combine(&[rally, DatasetStats { videos: 10, frames: 9757, objects: 91126, tracks: 126 }]);
        // 17861 / 20 = 893.05 exactly, which binary floating point would round down.
        assert_eq!(total.rounded(), ("893.1".into(), "8.9".into(), "12.4".into()));
        assert_eq!(ratio_1dp(0, 3), "0");
        assert_eq!(ratio_1dp(1, 0), "NaN");
    }

    #[test]
    fn report_formats() {
        let gt = grid();
        let r = evaluate(&gt, &gt, 0.5).unwrap();
        assert!(r.to_key_value().starts_with("mota=1.000000\n"));
        assert_eq!(r.csv_row().split(',').count(), EvalResult::CSV_HEADER.split(',').count());
    }
}
