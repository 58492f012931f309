//! Seeded synthetic scenarios: athletes moving around a rectangular arena,
//! observed through a noisy detector that misses, jitters and duplicates
//! boxes.

use std::f64::consts::TAU;
use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::association::Detection;
use crate::error::ConfigError;
use crate::geometry::{giou_loss, BBox};
use crate::motio::FrameRecord;

/// Name of the pseudorandom generator, written into scenario sidecars.
pub const GENERATOR: &str = "ChaCha8Rng (rand_chacha 0.9, seed_from_u64)";
/// Per-frame probability that an athlete picks a new heading and speed.
pub const TURN_PROBABILITY: f64 = 0.05;
/// A duplicate must stay this close (in GIoU loss) to the box it copies.
pub const MAX_DUPLICATE_LOSS: f64 = 0.2;

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub seed: u64,
    pub athletes: usize,
    pub frames: usize,
    pub arena: (f64, f64),
    pub box_size: (f64, f64),
    pub speed_max: f64,
    pub duplicate_rate: f64,
    pub duplicate_offset_max: f64,
    pub miss_rate: f64,
    pub jitter_sigma: f64,
    pub score_true_range: (f64, f64),
    /// Duplicates are secondary responses; by default they score below
    /// every genuine detection.
    pub score_dup_range: (f64, f64),
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            seed: 7,
            athletes: 12,
            frames: 800,
            arena: (1280.0, 720.0),
            box_size: (40.0, 90.0),
            speed_max: 6.0,
            duplicate_rate: 0.15,
            duplicate_offset_max: 3.0,
            miss_rate: 0.05,
            jitter_sigma: 1.5,
            score_true_range: (0.6, 1.0),
            score_dup_range: (0.2, 0.6),
        }
    }
}

fn check_unit(name: &str, v: f64) -> Result<(), ConfigError> {
    if (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(ConfigError::Invalid(format!("{name} must lie in [0, 1], got {v}")))
    }
}

fn check_range(name: &str, (lo, hi): (f64, f64)) -> Result<(), ConfigError> {
    check_unit(name, lo)?;
    check_unit(name, hi)?;
    if lo > hi {
        return Err(ConfigError::Invalid(format!("{name} is empty: {lo} > {hi}")));
    }
    Ok(())
}

impl ScenarioConfig {
    /// GIoU loss between a box and a copy shifted by the largest offset in
    /// both axes; the worst case for a duplicate.
    pub fn worst_duplicate_loss(&self) -> f64 {
        let (w, h) = self.box_size;
        let d = self.duplicate_offset_max;
        let a = BBox::new(0.0, 0.0, w, h).expect("validated box size");
        let b = BBox::new(d, d, w + d, h + d).expect("validated box size");
        giou_loss(&a, &b)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |msg: String| Err(ConfigError::Invalid(msg));
        if self.athletes < 1 {
            return bad("athletes must be at least 1".into());
        }
        if self.frames < 1 {
            return bad("frames must be at least 1".into());
        }
        let (aw, ah) = self.arena;
        let (bw, bh) = self.box_size;
        if !(bw > 0.0 && bh > 0.0 && bw.is_finite() && bh.is_finite()) {
            return bad(format!("box size must be positive, got {bw}x{bh}"));
        }
        if !(aw > bw && ah > bh && aw.is_finite() && ah.is_finite()) {
            return bad(format!("arena {aw}x{ah} must be larger than the box {bw}x{bh}"));
        }
        if !(self.speed_max >= 0.0 && self.speed_max.is_finite()) {
            return bad(format!("speed_max must be non-negative, got {}", self.speed_max));
        }
        if !(self.jitter_sigma >= 0.0 && self.jitter_sigma.is_finite()) {
            return bad(format!("jitter_sigma must be non-negative, got {}", self.jitter_sigma));
        }
        if !(self.duplicate_offset_max >= 0.0 && self.duplicate_offset_max.is_finite()) {
            return bad(format!("duplicate_offset_max must be non-negative, got {}", self.duplicate_offset_max));
        }
        check_unit("duplicate_rate", self.duplicate_rate)?;
        check_unit("miss_rate", self.miss_rate)?;
        check_range("score_true_range", self.score_true_range)?;
        check_range("score_dup_range", self.score_dup_range)?;
        let worst = self.worst_duplicate_loss();
        if worst >= MAX_DUPLICATE_LOSS {
            return bad(format!(
                "duplicate_offset_max {} allows duplicates with GIoU loss {worst:.4} >= {MAX_DUPLICATE_LOSS}",
                self.duplicate_offset_max
            ));
        }
        Ok(())
    }

    pub fn to_key_value(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "generator={GENERATOR}");
        let _ = writeln!(s, "seed={}", self.seed);
        let _ = writeln!(s, "athletes={}", self.athletes);
        let _ = writeln!(s, "frames={}", self.frames);
        let _ = writeln!(s, "arena={}x{}", self.arena.0, self.arena.1);
        let _ = writeln!(s, "box_size={}x{}", self.box_size.0, self.box_size.1);
        let _ = writeln!(s, "speed_max={}", self.speed_max);
        let _ = writeln!(s, "duplicate_rate={}", self.duplicate_rate);
        let _ = writeln!(s, "duplicate_offset_max={}", self.duplicate_offset_max);
        let _ = writeln!(s, "miss_rate={}", self.miss_rate);
        let _ = writeln!(s, "jitter_sigma={}", self.jitter_sigma);
        let _ = writeln!(s, "score_true_range={},{}", self.score_true_range.0, self.score_true_range.1);
        let _ = writeln!(s, "score_dup_range={},{}", self.score_dup_range.0, self.score_dup_range.1);
        let _ = writeln!(s, "turn_probability={TURN_PROBABILITY}");
        s
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub config: ScenarioConfig,
    /// Every athlete in every frame, ids `1..=athletes`.
    pub ground_truth: Vec<FrameRecord>,
    /// Per-frame detections, index 0 holding frame 1, shuffled within a frame.
    pub detections: Vec<Vec<Detection>>,
    pub true_detections: usize,
    pub duplicates: usize,
    pub misses: usize,
}

impl Scenario {
    /// Detections as MOT records with id `-1`.
    pub fn detection_records(&self) -> Vec<FrameRecord> {
        self.detections
            .iter()
            .enumerate()
            .flat_map(|(f, dets)| {
                dets.iter().map(move |d| FrameRecord::from_bbox(f as u32 + 1, -1, &d.bbox, d.score))
            })
            .collect()
    }
}

fn round2(v: f64) -> f64 {
    (v * 100.0).round() / 100.0
}

fn round4(v: f64) -> f64 {
    (v * 10_000.0).round() / 10_000.0
}

struct Athlete {
    x: f64,
    y: f64,
    vx: f64,
    vy: f64,
}

fn random_velocity(rng: &mut ChaCha8Rng, speed_max: f64) -> (f64, f64) {
    let angle = rng.random_range(0.0..TAU);
    let speed = if speed_max > 0.0 { rng.random_range(0.0..=speed_max) } else { 0.0 };
    (speed * angle.cos(), speed * angle.sin())
}

/// Moves one coordinate and reflects it back into `[0, limit]`.
fn reflect(pos: f64, vel: f64, limit: f64) -> (f64, f64) {
    let mut p = pos + vel;
    let mut v = vel;
    if p < 0.0 {
        p = -p;
        v = -v;
    } else if p > limit {
        p = 2.0 * limit - p;
        v = -v;
    }
    (p.clamp(0.0, limit), v)
}

/// Box of the configured size at `(x, y)`, pushed inside the arena and
/// rounded to hundredths.
fn placed_box(x: f64, y: f64, cfg: &ScenarioConfig) -> BBox {
    let (bw, bh) = cfg.box_size;
    let x = round2(x.clamp(0.0, cfg.arena.0 - bw));
    let y = round2(y.clamp(0.0, cfg.arena.1 - bh));
    BBox::from_xywh(x, y, bw, bh).expect("box size validated")
}

fn score_in(rng: &mut ChaCha8Rng, (lo, hi): (f64, f64)) -> f64 {
    if lo == hi {
        lo
    } else {
        round4(rng.random_range(lo..=hi))
    }
}

pub fn generate(cfg: &ScenarioConfig) -> Result<Scenario, ConfigError> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let (bw, bh) = cfg.box_size;
    let (max_x, max_y) = (cfg.arena.0 - bw, cfg.arena.1 - bh);
    let jitter = Normal::new(0.0, cfg.jitter_sigma).expect("sigma validated");

    let mut athletes: Vec<Athlete> = (0..cfg.athletes)
        .map(|_| {
            let x = rng.random_range(0.0..=max_x);
            let y = rng.random_range(0.0..=max_y);
            let (vx, vy) = random_velocity(&mut rng, cfg.speed_max);
            Athlete { x, y, vx, vy }
        })
        .collect();

    let mut ground_truth = Vec::with_capacity(cfg.athletes * cfg.frames);
    let mut detections = Vec::with_capacity(cfg.frames);
    let (mut true_detections, mut duplicates, mut misses) = (0, 0, 0);

    for f in 0..cfg.frames {
        let frame = f as u32 + 1;
        let mut dets = Vec::new();
        for (k, a) in athletes.iter().enumerate() {
            let gt = placed_box(a.x, a.y, cfg);
            ground_truth.push(FrameRecord {
                frame,
                id: k as i64 + 1,
                x: gt.x1(),
                y: gt.y1(),
                w: bw,
                h: bh,
                conf: 1.0,
                class_id: 1,
                visibility: 1.0,
            });

            if rng.random_bool(cfg.miss_rate) {
                misses += 1;
                continue;
            }
            let (jx, jy) = if cfg.jitter_sigma > 0.0 {
                (jitter.sample(&mut rng), jitter.sample(&mut rng))
            } else {
                (0.0, 0.0)
            };
            let seen = placed_box(gt.x1() + jx, gt.y1() + jy, cfg);
            dets.push(Detection { bbox: seen, score: score_in(&mut rng, cfg.score_true_range) });
            true_detections += 1;

            if rng.random_bool(cfg.duplicate_rate) {
                let m = cfg.duplicate_offset_max;
                let (dx, dy) = if m > 0.0 {
                    (rng.random_range(-m..=m), rng.random_range(-m..=m))
                } else {
                    (0.0, 0.0)
                };
                let copy = placed_box(seen.x1() + dx, seen.y1() + dy, cfg);
                dets.push(Detection { bbox: copy, score: score_in(&mut rng, cfg.score_dup_range) });
                duplicates += 1;
            }
        }
        dets.shuffle(&mut rng);
        detections.push(dets);

        for a in &mut athletes {
            if rng.random_bool(TURN_PROBABILITY) {
                (a.vx, a.vy) = random_velocity(&mut rng, cfg.speed_max);
            }
            (a.x, a.vx) = reflect(a.x, a.vx, max_x);
            (a.y, a.vy) = reflect(a.y, a.vy, max_y);
        }
    }

    Ok(Scenario { config: cfg.clone(), ground_truth, detections, true_detections, duplicates, misses })
}
