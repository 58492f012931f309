//! Sequence-level tracking driver.
//!
//! Each frame is associated in two stages: detections against active tracks
//! (matched at the previous frame) with the configured associator, then the
//! leftover detections against inactive tracks with a plain assignment.
//! A track unmatched for more than `age_l` consecutive frames is retired.
//! Detections benched by the lineup/substitution split never spawn tracks.

use crate::association::{plain_hungarian_associate, rally_hungarian, AssociationResult, Detection, RhConfig};
use crate::decontaminator::{decontaminate, detect_duplicates, self_giou_matrix, D3Config, Decontamination};
use crate::error::{ConfigError, D3Error};
use crate::geometry::BBox;
use crate::motio::FrameRecord;

pub const DEFAULT_AGE_L: u32 = 80;
pub const DEFAULT_NEW_TRACK_MIN_SCORE: f64 = 0.4;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrackState {
    Active,
    Inactive,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Track {
    pub id: u64,
    pub bbox: BBox,
    /// Centre displacement per frame, measured between the last two matches.
    pub velocity: (f64, f64),
    pub misses: u32,
}

impl Track {
    pub fn state(&self) -> TrackState {
        if self.misses == 0 {
            TrackState::Active
        } else {
            TrackState::Inactive
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackerConfig {
    pub age_l: u32,
    pub rh: RhConfig,
    pub use_rh: bool,
    pub new_track_min_score: f64,
    /// Extrapolate active tracks by their last velocity instead of holding
    /// the previous box.
    pub constant_velocity: bool,
}

impl TrackerConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.age_l < 1 {
            return Err(ConfigError::Invalid("age_l must be at least 1".into()));
        }
        if !(0.0..=1.0).contains(&self.new_track_min_score) {
            return Err(ConfigError::Invalid(format!(
                "new_track_min_score must lie in [0, 1], got {}",
                self.new_track_min_score
            )));
        }
        self.rh.validate()
    }

    pub fn plain() -> Self {
        Self { use_rh: false, ..Self::default() }
    }
}

impl Default for TrackerConfig {
    fn default() -> Self {
        Self {
            age_l: DEFAULT_AGE_L,
            rh: RhConfig::default(),
            use_rh: true,
            new_track_min_score: DEFAULT_NEW_TRACK_MIN_SCORE,
            constant_velocity: false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Tracker {
    cfg: TrackerConfig,
    tracks: Vec<Track>,
    next_id: u64,
    frame: u32,
    last_association: Option<AssociationResult>,
}

impl Tracker {
    pub fn new(cfg: TrackerConfig) -> Result<Self, ConfigError> {
        cfg.validate()?;
        Ok(Self { cfg, tracks: Vec::new(), next_id: 1, frame: 0, last_association: None })
    }

    pub fn config(&self) -> &TrackerConfig {
        &self.cfg
    }

    pub fn tracks(&self) -> &[Track] {
        &self.tracks
    }

    pub fn frame(&self) -> u32 {
        self.frame
    }

    /// First-stage association of the most recent frame.
    pub fn last_association(&self) -> Option<&AssociationResult> {
        self.last_association.as_ref()
    }

    /// Boxes the next frame's first association stage will match against.
    pub fn active_boxes(&self) -> Vec<BBox> {
        self.tracks.iter().filter(|t| t.misses == 0).map(|t| self.predicted(t)).collect()
    }

    fn predicted(&self, t: &Track) -> BBox {
        if self.cfg.constant_velocity {
            t.bbox.translate(t.velocity.0, t.velocity.1).unwrap_or(t.bbox)
        } else {
            t.bbox
        }
    }

    fn update(track: &mut Track, bbox: BBox) {
        let (ox, oy) = track.bbox.center();
        let (nx, ny) = bbox.center();
        let elapsed = f64::from(track.misses + 1);
        track.velocity = ((nx - ox) / elapsed, (ny - oy) / elapsed);
        track.bbox = bbox;
        track.misses = 0;
    }

    /// Processes one frame and returns the active `(id, box)` pairs, sorted by id.
    pub fn step(&mut self, detections: &[Detection]) -> Vec<(u64, BBox)> {
        self.frame += 1;
        let theta = self.cfg.rh.accept_threshold;
        let mut matched = vec![false; self.tracks.len()];

        let active: Vec<usize> = (0..self.tracks.len()).filter(|&k| self.tracks[k].misses == 0).collect();
        let active_boxes = self.active_boxes();
        let first = if self.cfg.use_rh {
            rally_hungarian(detections, &active_boxes, &self.cfg.rh).gated(theta)
        } else {
            plain_hungarian_associate(detections, &active_boxes, theta)
        };
        for m in &first.matches {
            let k = active[m.track];
            Self::update(&mut self.tracks[k], detections[m.detection].bbox);
            matched[k] = true;
        }

        // Leftover detections may revive inactive tracks.
        let leftovers: Vec<usize> = first.unmatched_detections.clone();
        let inactive: Vec<usize> = (0..self.tracks.len())
            .filter(|&k| !matched[k] && self.tracks[k].misses > 0)
            .collect();
        let mut spawn_from: Vec<usize> = leftovers.clone();
        if !leftovers.is_empty() && !inactive.is_empty() {
            let dets: Vec<Detection> = leftovers.iter().map(|&d| detections[d]).collect();
            let boxes: Vec<BBox> = inactive.iter().map(|&k| self.tracks[k].bbox).collect();
            let second = plain_hungarian_associate(&dets, &boxes, theta);
            for m in &second.matches {
                let k = inactive[m.track];
                Self::update(&mut self.tracks[k], dets[m.detection].bbox);
                matched[k] = true;
            }
            spawn_from = second.unmatched_detections.iter().map(|&i| leftovers[i]).collect();
        }
        self.last_association = Some(first);

        for (k, t) in self.tracks.iter_mut().enumerate() {
            if !matched[k] {
                t.misses += 1;
            }
        }
        let age_l = self.cfg.age_l;
        self.tracks.retain(|t| t.misses <= age_l);

        spawn_from.sort_unstable();
        for d in spawn_from {
            if detections[d].score >= self.cfg.new_track_min_score {
                self.tracks.push(Track { id: self.next_id, bbox: detections[d].bbox, velocity: (0.0, 0.0), misses: 0 });
                self.next_id += 1;
            }
        }

        let mut out: Vec<(u64, BBox)> =
            self.tracks.iter().filter(|t| t.misses == 0).map(|t| (t.id, t.bbox)).collect();
        out.sort_unstable_by_key(|p| p.0);
        out
    }
}

/// Tracks a whole sequence; frame numbers in the output are 1-based.
pub fn run_sequence(frames: &[Vec<Detection>], cfg: &TrackerConfig) -> Result<Vec<FrameRecord>, ConfigError> {
    let mut tracker = Tracker::new(*cfg)?;
    let mut out = Vec::new();
    for (f, dets) in frames.iter().enumerate() {
        for (id, b) in tracker.step(dets) {
            out.push(FrameRecord::from_bbox(f as u32 + 1, id as i64, &b, 1.0));
        }
    }
    Ok(out)
}

/// Pushes apart every pair of a frame's detections whose self-GIoU loss is
/// below the lower bound; scores are kept.
pub fn decontaminate_detections(
    detections: &[Detection],
    cfg: &D3Config,
    step_size: f64,
    max_steps: usize,
) -> Result<(Vec<Detection>, Decontamination), D3Error> {
    let boxes: Vec<BBox> = detections.iter().map(|d| d.bbox).collect();
    let out = decontaminate(&boxes, cfg, step_size, max_steps)?;
    let dets = detections.iter().zip(&out.boxes).map(|(d, b)| Detection { bbox: *b, score: d.score }).collect();
    Ok((dets, out))
}

/// Drops the lower-scored member of every below-bound pair, visiting pairs
/// from the most to the least overlapping. Order of the survivors is kept.
pub fn lb_prefilter(detections: &[Detection], cfg: &D3Config) -> Vec<Detection> {
    if detections.len() < 2 {
        return detections.to_vec();
    }
    let boxes: Vec<BBox> = detections.iter().map(|d| d.bbox).collect();
    let m = self_giou_matrix(&boxes).expect("at least two boxes");
    let mut dropped = vec![false; detections.len()];
    for p in detect_duplicates(&m, cfg).pairs {
        if dropped[p.i] || dropped[p.j] {
            continue;
        }
        let loser = if detections[p.j].score > detections[p.i].score { p.i } else { p.j };
        dropped[loser] = true;
    }
    detections.iter().zip(&dropped).filter(|(_, &d)| !d).map(|(d, _)| *d).collect()
}
