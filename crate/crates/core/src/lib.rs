//! Multi-athlete tracking toolkit.
//!
//! Box geometry and GIoU, an exact assignment solver, a self-GIoU duplicate
//! penalty with a repulsive descent, lineup/substitution association, a
//! frame-by-frame tracker, MOTChallenge I/O, CLEAR-MOT/IDF1 metrics and a
//! seeded scenario generator.

pub mod assignment;
pub mod association;
pub mod decontaminator;
pub mod error;
pub mod geometry;
pub mod metrics;
pub mod motio;
pub mod synth;
pub mod tracker;

pub use assignment::{brute_force_assignment, hungarian, CostMatrix, MatchPairs};
pub use association::{plain_hungarian_associate, rally_hungarian, AssociationResult, Detection, RhConfig, Strategy};
pub use decontaminator::{decontaminate, d3_grad, d3_loss, detect_duplicates, self_giou_matrix, D3Config, LossMode};
pub use error::{AssignmentError, ConfigError, D3Error, EvalError, GeometryError, MotError};
pub use geometry::{giou, giou_loss, giou_loss_grad, iou, BBox, BoxGrad};
pub use metrics::{dataset_stats, evaluate, DatasetStats, EvalResult};
pub use motio::{parse_mot_csv, parse_mot_str, write_mot_csv, FrameRecord};
pub use synth::{generate, Scenario, ScenarioConfig};
pub use tracker::{run_sequence, Tracker, TrackerConfig};
