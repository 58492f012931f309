//! Frame-to-frame association of detections with track boxes.
//!
//! Two associators are provided:
//!
//! * [`plain_hungarian_associate`]: a single assignment over every detection
//!   and track, with over-threshold matches discarded.
//! * [`rally_hungarian`]: detections sorted by score are split into a lineup
//!   (the top `K`) and a substitution pool. The lineup is matched against the
//!   tracks; lineup rows whose assigned cost exceeds the acceptance threshold
//!   are replaced from the pool according to a [`Strategy`], and the match is
//!   repeated until every matched cost is acceptable, the pool is empty, or no
//!   acceptable substitute exists.
//!
//! Costs are GIoU losses, so they lie in `[0, 2)`.

use crate::assignment::{hungarian, CostMatrix, MatchPairs};
use crate::error::{AssignmentError, ConfigError};
use crate::geometry::{giou_loss, BBox};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Detection {
    pub bbox: BBox,
    pub score: f64,
}

impl Detection {
    pub fn new(bbox: BBox, score: f64) -> Result<Self, ConfigError> {
        if !(0.0..=1.0).contains(&score) {
            return Err(ConfigError::Invalid(format!("detection score {score} outside [0, 1]")));
        }
        Ok(Self { bbox, score })
    }
}

/// Replacing strategy for unacceptable lineup rows.
///
/// | strategy | rows deleted  | substitutions inserted | probes per iteration |
/// |----------|---------------|------------------------|----------------------|
/// | RS1      | all `p` bad   | 1, highest score       | `p`                  |
/// | RS2      | all `p` bad   | 1, first acceptable    | up to `p·q`          |
/// | RS3      | all `p` bad   | `min(p, q)` by score   | `p·min(p, q)`        |
/// | RS4      | worst bad row | 1, highest score       | 1                    |
/// | RS5      | worst bad row | 1, first acceptable    | up to `q`            |
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Hash)]
pub enum Strategy {
    Rs1,
    Rs2,
    Rs3,
    Rs4,
    #[default]
    Rs5,
}

impl Strategy {
    pub const ALL: [Strategy; 5] =
        [Strategy::Rs1, Strategy::Rs2, Strategy::Rs3, Strategy::Rs4, Strategy::Rs5];

    fn deletes_all_bad(self) -> bool {
        matches!(self, Strategy::Rs1 | Strategy::Rs2 | Strategy::Rs3)
    }
}

impl std::str::FromStr for Strategy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_uppercase().as_str() {
            "RS1" | "1" => Ok(Strategy::Rs1),
            "RS2" | "2" => Ok(Strategy::Rs2),
            "RS3" | "3" => Ok(Strategy::Rs3),
            "RS4" | "4" => Ok(Strategy::Rs4),
            "RS5" | "5" => Ok(Strategy::Rs5),
            other => Err(format!("unknown strategy '{other}' (expected RS1..RS5)")),
        }
    }
}

impl std::fmt::Display for Strategy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let n = match self {
            Strategy::Rs1 => 1,
            Strategy::Rs2 => 2,
            Strategy::Rs3 => 3,
            Strategy::Rs4 => 4,
            Strategy::Rs5 => 5,
        };
        write!(f, "RS{n}")
    }
}

pub const DEFAULT_TOP_K: usize = 12;
pub const DEFAULT_ACCEPT_THRESHOLD: f64 = 1.0;
pub const DEFAULT_MAX_CANDIDATES: usize = 22;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RhConfig {
    /// Lineup size `K`.
    pub top_k: usize,
    /// Matched costs above this are unacceptable.
    pub accept_threshold: f64,
    pub strategy: Strategy,
    /// Detections considered per frame (`N`); lower-scored ones are benched.
    pub max_candidates: usize,
    /// Substitution pool size `q`; `None` keeps every candidate past the lineup.
    pub sub_budget: Option<usize>,
}

impl RhConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.top_k == 0 {
            return Err(ConfigError::Invalid("top_k must be at least 1".into()));
        }
        if self.top_k > self.max_candidates {
            return Err(ConfigError::Invalid(format!(
                "top_k ({}) must not exceed max_candidates ({})",
                self.top_k, self.max_candidates
            )));
        }
        if !(self.accept_threshold > 0.0 && self.accept_threshold <= 2.0) {
            return Err(ConfigError::Invalid(format!(
                "accept_threshold must lie in (0, 2], got {}",
                self.accept_threshold
            )));
        }
        Ok(())
    }

    /// Volleyball: K = 12, up to 22 candidates, unbounded pool.
    pub fn volleyball() -> Self {
        Self {
            top_k: 12,
            accept_threshold: DEFAULT_ACCEPT_THRESHOLD,
            strategy: Strategy::Rs5,
            max_candidates: 22,
            sub_budget: None,
        }
    }

    /// Basketball: N = 15, K = 10, q = 5.
    pub fn basketball() -> Self {
        Self { top_k: 10, max_candidates: 15, sub_budget: Some(5), ..Self::volleyball() }
    }

    /// Soccer: N = 20, K = 15, q = 5.
    pub fn soccer() -> Self {
        Self { top_k: 15, max_candidates: 20, sub_budget: Some(5), ..Self::volleyball() }
    }
}

impl Default for RhConfig {
    fn default() -> Self {
        Self::volleyball()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Match {
    pub detection: usize,
    pub track: usize,
    pub cost: f64,
}

/// Per-iteration bookkeeping of the rally loop.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct IterationStats {
    pub bad_rows: usize,
    pub deleted: usize,
    pub inserted: usize,
    pub probes: usize,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct AssociationResult {
    pub matches: Vec<Match>,
    pub unmatched_detections: Vec<usize>,
    pub unmatched_tracks: Vec<usize>,
    /// Detections that never reached (or were removed from) the lineup.
    /// Always empty for the plain associator.
    pub benched: Vec<usize>,
    pub rally_iterations: usize,
    pub iterations: Vec<IterationStats>,
}

impl AssociationResult {
    /// Moves matches costing more than `threshold` into the unmatched lists.
    pub fn gated(mut self, threshold: f64) -> Self {
        let (keep, drop): (Vec<Match>, Vec<Match>) =
            self.matches.into_iter().partition(|m| m.cost <= threshold);
        self.matches = keep;
        for m in drop {
            self.unmatched_detections.push(m.detection);
            self.unmatched_tracks.push(m.track);
        }
        self.unmatched_detections.sort_unstable();
        self.unmatched_tracks.sort_unstable();
        self
    }

    pub fn total_probes(&self) -> usize {
        self.iterations.iter().map(|s| s.probes).sum()
    }

    pub fn max_probes_per_iteration(&self) -> usize {
        self.iterations.iter().map(|s| s.probes).max().unwrap_or(0)
    }
}

/// Indices of `detections` ordered by descending score, ties by index.
pub fn score_order(detections: &[Detection]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..detections.len()).collect();
    order.sort_by(|&a, &b| detections[b].score.total_cmp(&detections[a].score));
    order
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LineupSplit {
    pub lineup: Vec<usize>,
    pub substitution: Vec<usize>,
}

/// Splits detections (as indices) into the top-`k` lineup and the remainder.
/// Input order does not matter: detections are re-sorted by score, stably.
pub fn split_lineup(detections: &[Detection], k: usize) -> LineupSplit {
    let mut order = score_order(detections);
    let substitution = order.split_off(k.min(order.len()));
    LineupSplit { lineup: order, substitution }
}

/// `C[i][j] = giou_loss(lineup[i], tracks[j])`.
pub fn match_cost_matrix(lineup: &[BBox], tracks: &[BBox]) -> Result<CostMatrix, AssignmentError> {
    CostMatrix::from_fn(lineup.len(), tracks.len(), |i, j| giou_loss(&lineup[i], &tracks[j]))
}

/// Lineup row whose matched cost is unacceptable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BadRow {
    pub row: usize,
    pub cost: f64,
}

/// Orders bad rows worst first, ties by row index.
pub fn order_bad_rows(rows: &mut [BadRow]) {
    rows.sort_by(|a, b| b.cost.total_cmp(&a.cost).then(a.row.cmp(&b.row)));
}

/// What one rally iteration does to the lineup. Each insertion reuses the slot
/// of a deleted row; deleted rows without an insertion leave the lineup.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ReplacementPlan {
    pub delete: Vec<usize>,
    /// `(slot row, substitution position)` pairs.
    pub insert: Vec<(usize, usize)>,
    pub probes: usize,
}

/// Builds the replacement plan for one rally iteration.
///
/// `bad_rows` must be ordered by [`order_bad_rows`]. `substitution_len` is the
/// current pool size; positions refer to the pool, which is sorted by
/// descending score. `is_good(position, deleted_rows)` decides whether a
/// candidate would be acceptable in place of the deleted rows; it is only
/// called by RS2 and RS5. An empty pool yields a delete-only plan.
pub fn apply_strategy(
    bad_rows: &[BadRow],
    substitution_len: usize,
    strategy: Strategy,
    mut is_good: impl FnMut(usize, &[usize]) -> bool,
) -> ReplacementPlan {
    if bad_rows.is_empty() {
        return ReplacementPlan::default();
    }
    let delete: Vec<usize> = if strategy.deletes_all_bad() {
        bad_rows.iter().map(|b| b.row).collect()
    } else {
        vec![bad_rows[0].row]
    };
    let p = delete.len();
    let q = substitution_len;
    if q == 0 {
        return ReplacementPlan { delete, insert: Vec::new(), probes: 0 };
    }
    let slot = delete[0];
    let (insert, probes) = match strategy {
        Strategy::Rs1 => (vec![(slot, 0)], p),
        Strategy::Rs4 => (vec![(slot, 0)], 1),
        Strategy::Rs3 => {
            let n = p.min(q);
            (delete.iter().take(n).enumerate().map(|(k, &row)| (row, k)).collect(), p * n)
        }
        Strategy::Rs2 | Strategy::Rs5 => {
            let mut probes = 0;
            let mut found = None;
            for pos in 0..q {
                probes += p;
                if is_good(pos, &delete) {
                    found = Some(pos);
                    break;
                }
            }
            (found.map(|pos| vec![(slot, pos)]).unwrap_or_default(), probes)
        }
    };
    ReplacementPlan { delete, insert, probes }
}

/// Single assignment over all detections and tracks; matches above
/// `accept_threshold` are discarded.
pub fn plain_hungarian_associate(
    detections: &[Detection],
    tracks: &[BBox],
    accept_threshold: f64,
) -> AssociationResult {
    if detections.is_empty() || tracks.is_empty() {
        return AssociationResult {
            unmatched_detections: (0..detections.len()).collect(),
            unmatched_tracks: (0..tracks.len()).collect(),
            ..Default::default()
        };
    }
    let boxes: Vec<BBox> = detections.iter().map(|d| d.bbox).collect();
    let c = match_cost_matrix(&boxes, tracks).expect("both sides non-empty");
    let pairs = hungarian(&c);
    let result = collect(&c, &pairs, &(0..detections.len()).collect::<Vec<_>>(), tracks.len());
    AssociationResult { rally_iterations: 1, iterations: vec![IterationStats::default()], ..result }
        .gated(accept_threshold)
}

/// Matches, unmatched rows and unmatched columns of one solve; rows map to
/// detection indices through `row_det`.
fn collect(c: &CostMatrix, pairs: &MatchPairs, row_det: &[usize], n_tracks: usize) -> AssociationResult {
    let mut matched_row = vec![false; row_det.len()];
    let mut matched_col = vec![false; n_tracks];
    let mut matches = Vec::with_capacity(pairs.len());
    for &(i, j) in pairs.iter() {
        matched_row[i] = true;
        matched_col[j] = true;
        matches.push(Match { detection: row_det[i], track: j, cost: c.get(i, j) });
    }
    let mut unmatched_detections: Vec<usize> =
        (0..row_det.len()).filter(|&i| !matched_row[i]).map(|i| row_det[i]).collect();
    unmatched_detections.sort_unstable();
    AssociationResult {
        matches,
        unmatched_detections,
        unmatched_tracks: (0..n_tracks).filter(|&j| !matched_col[j]).collect(),
        ..Default::default()
    }
}

/// Lineup/substitution association with iterative replacement of
/// unacceptable lineup rows.
///
/// Matches in the result may still exceed the threshold when the pool ran dry
/// or held no acceptable substitute; use [`AssociationResult::gated`] to
/// drop them.
pub fn rally_hungarian(detections: &[Detection], tracks: &[BBox], cfg: &RhConfig) -> AssociationResult {
    let mut order = score_order(detections);
    let mut benched = order.split_off(cfg.max_candidates.min(order.len()));
    let mut pool = order.split_off(cfg.top_k.min(order.len()));
    if let Some(q) = cfg.sub_budget {
        benched.extend(pool.drain(q.min(pool.len())..));
    }
    let mut lineup = order;

    if lineup.is_empty() || tracks.is_empty() {
        lineup.sort_unstable();
        benched.extend(pool);
        benched.sort_unstable();
        return AssociationResult {
            unmatched_detections: lineup,
            unmatched_tracks: (0..tracks.len()).collect(),
            benched,
            ..Default::default()
        };
    }

    let theta = cfg.accept_threshold;
    let mut iterations = Vec::new();
    loop {
        let boxes: Vec<BBox> = lineup.iter().map(|&d| detections[d].bbox).collect();
        let c = match_cost_matrix(&boxes, tracks).expect("lineup and tracks non-empty");
        let pairs = hungarian(&c);

        let mut bad: Vec<BadRow> = pairs
            .iter()
            .filter(|&&(i, j)| c.get(i, j) > theta)
            .map(|&(i, j)| BadRow { row: i, cost: c.get(i, j) })
            .collect();
        order_bad_rows(&mut bad);

        if bad.is_empty() || pool.is_empty() {
            iterations.push(IterationStats { bad_rows: bad.len(), ..Default::default() });
            return finish(&c, &pairs, &lineup, tracks.len(), pool, benched, iterations);
        }

        // Columns a replacement could take: those of the deleted rows plus
        // every column the current solve left unmatched.
        let mut col_taken = vec![false; tracks.len()];
        for &(_, j) in pairs.iter() {
            col_taken[j] = true;
        }
        let free_cols: Vec<usize> = (0..tracks.len()).filter(|&j| !col_taken[j]).collect();
        let plan = apply_strategy(&bad, pool.len(), cfg.strategy, |pos, deleted| {
            let cand = &detections[pool[pos]].bbox;
            deleted
                .iter()
                .filter_map(|&row| pairs.col_for_row(row))
                .chain(free_cols.iter().copied())
                .any(|j| giou_loss(cand, &tracks[j]) <= theta)
        });
        iterations.push(IterationStats {
            bad_rows: bad.len(),
            deleted: plan.delete.len(),
            inserted: plan.insert.len(),
            probes: plan.probes,
        });

        if plan.insert.is_empty() {
            // No acceptable substitute: stop as if the pool were empty and
            // report the bad matches.
            return finish(&c, &pairs, &lineup, tracks.len(), pool, benched, iterations);
        }

        let mut used_pool = vec![false; pool.len()];
        let mut next = Vec::with_capacity(lineup.len());
        for (row, &det) in lineup.iter().enumerate() {
            if !plan.delete.contains(&row) {
                next.push(det);
            } else if let Some(&(_, pos)) = plan.insert.iter().find(|(slot, _)| *slot == row) {
                used_pool[pos] = true;
                next.push(pool[pos]);
                benched.push(det);
            } else {
                benched.push(det);
            }
        }
        pool = pool.into_iter().zip(used_pool).filter(|(_, used)| !used).map(|(d, _)| d).collect();
        lineup = next;
    }
}

fn finish(
    c: &CostMatrix,
    pairs: &MatchPairs,
    lineup: &[usize],
    n_tracks: usize,
    pool: Vec<usize>,
    mut benched: Vec<usize>,
    iterations: Vec<IterationStats>,
) -> AssociationResult {
    let mut result = collect(c, pairs, lineup, n_tracks);
    benched.extend(pool);
    benched.sort_unstable();
    result.benched = benched;
    result.rally_iterations = iterations.len();
    result.iterations = iterations;
    result
}

#[cfg(test)]
mod tests {
    use super::*;

    fn det(x: f64, y: f64, score: f64) -> Detection {
        Detection::new(BBox::from_xywh(x, y, 20.0, 40.0).unwrap(), score).unwrap()
    }

    fn trk(x: f64, y: f64) -> BBox {
        BBox::from_xywh(x, y, 20.0, 40.0).unwrap()
    }

    fn cfg(k: usize, strategy: Strategy) -> RhConfig {
        RhConfig { top_k: k, strategy, ..RhConfig::volleyball() }
    }

    /// Every detection index appears exactly once across the output lists.
    fn assert_partition(r: &AssociationResult, n_det: usize, n_trk: usize) {
        let mut dets: Vec<usize> = r.matches.iter().map(|m| m.detection).collect();
        dets.extend(&r.unmatched_detections);
        dets.extend(&r.benched);
        dets.sort_unstable();
        assert_eq!(dets, (0..n_det).collect::<Vec<_>>(), "{r:?}");
        let mut trks: Vec<usize> = r.matches.iter().map(|m| m.track).collect();
        trks.extend(&r.unmatched_tracks);
        trks.sort_unstable();
        assert_eq!(trks, (0..n_trk).collect::<Vec<_>>(), "{r:?}");
    }

    #[test]
    fn score_validation() {
        let b = trk(0., 0.);
        assert!(Detection::new(b, 1.2).is_err());
        assert!(Detection::new(b, -0.1).is_err());
        assert!(Detection::new(b, 0.0).is_ok());
    }

    #[test]
    fn config_validation() {
        assert!(RhConfig::volleyball().validate().is_ok());
        assert!(RhConfig::basketball().validate().is_ok());
        assert!(RhConfig::soccer().validate().is_ok());
        assert!(RhConfig { top_k: 0, ..RhConfig::default() }.validate().is_err());
        assert!(RhConfig { top_k: 30, ..RhConfig::default() }.validate().is_err());
        assert!(RhConfig { accept_threshold: 0.0, ..RhConfig::default() }.validate().is_err());
        assert!(RhConfig { accept_threshold: 2.5, ..RhConfig::default() }.validate().is_err());
    }

    #[test]
    fn split_examples() {
        let dets: Vec<Detection> = (0..14).map(|i| det(i as f64 * 30.0, 0.0, 0.5 + i as f64 * 0.03)).collect();
        let s = split_lineup(&dets, 12);
        assert_eq!(s.lineup.len(), 12);
        assert_eq!(s.substitution.len(), 2);
        assert_eq!(s.lineup[0], 13);
        assert_eq!(s.substitution, vec![1, 0]);

        let s = split_lineup(&dets[..5], 12);
        assert_eq!(s.lineup.len(), 5);
        assert!(s.substitution.is_empty());

        let ties: Vec<Detection> = (0..4).map(|i| det(i as f64 * 30.0, 0.0, 0.7)).collect();
        let s = split_lineup(&ties, 2);
        assert_eq!(s.lineup, vec![0, 1]);
        assert_eq!(s.substitution, vec![2, 3]);
    }

    #[test]
    fn cost_matrix_examples() {
        let a = trk(0., 0.);
        let c = match_cost_matrix(&[a, trk(100., 0.)], &[trk(100., 0.), a]).unwrap();
        assert_eq!(c.get(0, 1), 0.0);
        assert_eq!(c.get(1, 0), 0.0);

        let u = BBox::new(0., 0., 1., 1.).unwrap();
        let v = BBox::new(1., 0., 2., 1.).unwrap();
        let c = match_cost_matrix(&[u], &[v]).unwrap();
        assert_eq!(c.get(0, 0), 1.0);
        assert_eq!(c.get(0, 0), giou_loss(&u, &v));

        assert!(match_cost_matrix(&[], &[u]).is_err());
    }

    #[test]
    fn coincident_lineup_matches_in_one_iteration() {
        let tracks: Vec<BBox> = (0..4).map(|i| trk(i as f64 * 50.0, 0.0)).collect();
        let dets: Vec<Detection> =
            tracks.iter().rev().enumerate().map(|(k, b)| Detection::new(*b, 0.9 - k as f64 * 0.1).unwrap()).collect();
        let r = rally_hungarian(&dets, &tracks, &cfg(4, Strategy::Rs5));
        assert_eq!(r.rally_iterations, 1);
        assert_eq!(r.matches.len(), 4);
        assert!(r.matches.iter().all(|m| m.cost == 0.0));
        for m in &r.matches {
            assert_eq!(dets[m.detection].bbox, tracks[m.track]);
        }
        assert_partition(&r, 4, 4);
    }

    /// Lineup holds a far-off false positive; the pool holds the box that
    /// coincides with the uncovered track.
    fn planted_false_positive() -> (Vec<Detection>, Vec<BBox>) {
        let tracks = vec![trk(0., 0.), trk(50., 0.), trk(100., 0.)];
        let dets = vec![
            det(0., 0., 0.95),
            det(50., 0., 0.9),
            det(600., 400., 0.85), // false positive
            det(100., 0., 0.6),    // substitution
            det(300., 300., 0.5),  // substitution, far from everything
        ];
        (dets, tracks)
    }

    #[test]
    fn false_positive_row_is_replaced() {
        let (dets, tracks) = planted_false_positive();
        let r = rally_hungarian(&dets, &tracks, &cfg(3, Strategy::Rs5));
        let mut got: Vec<(usize, usize)> = r.matches.iter().map(|m| (m.detection, m.track)).collect();
        got.sort_unstable();
        assert_eq!(got, vec![(0, 0), (1, 1), (3, 2)]);
        assert!(r.matches.iter().all(|m| m.cost == 0.0));
        assert_eq!(r.rally_iterations, 2);
        assert_eq!(r.benched, vec![2, 4]);
        assert_partition(&r, 5, 3);
    }

    #[test]
    fn every_strategy_recovers_planted_scenario() {
        let (dets, tracks) = planted_false_positive();
        for s in Strategy::ALL {
            let r = rally_hungarian(&dets, &tracks, &cfg(3, s));
            assert!(r.matches.iter().all(|m| m.cost <= 1.0), "{s}: {r:?}");
            assert_partition(&r, 5, 3);
        }
    }

    #[test]
    fn empty_pool_reports_bad_match() {
        let tracks = vec![trk(0., 0.), trk(50., 0.)];
        let dets = vec![det(0., 0., 0.9), det(700., 500., 0.8)];
        let r = rally_hungarian(&dets, &tracks, &cfg(2, Strategy::Rs5));
        assert_eq!(r.rally_iterations, 1);
        let bad = r.matches.iter().find(|m| m.detection == 1).unwrap();
        assert_eq!(bad.track, 1);
        assert!(bad.cost > 1.0);
        assert_eq!(bad.cost, giou_loss(&dets[1].bbox, &tracks[1]));
        let g = r.gated(1.0);
        assert_eq!(g.unmatched_detections, vec![1]);
        assert_eq!(g.unmatched_tracks, vec![1]);
    }

    #[test]
    fn no_acceptable_substitute_reports_bad_match() {
        let tracks = vec![trk(0., 0.), trk(50., 0.)];
        let dets = vec![det(0., 0., 0.9), det(700., 500., 0.8), det(900., 10., 0.3)];
        let r = rally_hungarian(&dets, &tracks, &cfg(2, Strategy::Rs5));
        assert_eq!(r.rally_iterations, 1);
        assert_eq!(r.iterations[0].probes, 1);
        assert_eq!(r.iterations[0].inserted, 0);
        assert_eq!(r.benched, vec![2]);
        assert_partition(&r, 3, 2);
        let g = r.gated(1.0);
        assert_eq!(g.matches.len(), 1);
        assert_eq!(g.unmatched_detections, vec![1]);
        assert_eq!(g.unmatched_tracks, vec![1]);
    }

    #[test]
    fn strategy_plans() {
        let bad = [BadRow { row: 4, cost: 1.9 }, BadRow { row: 1, cost: 1.5 }, BadRow { row: 2, cost: 1.2 }];
        let never = |_: usize, _: &[usize]| false;
        let rs3 = apply_strategy(&bad, 3, Strategy::Rs3, never);
        assert_eq!(rs3.delete.len(), 3);
        assert_eq!(rs3.insert.len(), 3);
        assert_eq!(rs3.probes, 9);

        let rs4 = apply_strategy(&bad, 3, Strategy::Rs4, never);
        assert_eq!(rs4.delete, vec![4]);
        assert_eq!(rs4.insert, vec![(4, 0)]);
        assert_eq!(rs4.probes, 1);

        let rs1 = apply_strategy(&bad, 3, Strategy::Rs1, never);
        assert_eq!((rs1.delete.len(), rs1.insert.len(), rs1.probes), (3, 1, 3));

        let second_good = |pos: usize, _: &[usize]| pos == 1;
        let rs2 = apply_strategy(&bad, 3, Strategy::Rs2, second_good);
        assert_eq!((rs2.delete.len(), rs2.insert.clone(), rs2.probes), (3, vec![(4, 1)], 6));
        let rs5 = apply_strategy(&bad, 3, Strategy::Rs5, second_good);
        assert_eq!((rs5.delete.clone(), rs5.insert.clone(), rs5.probes), (vec![4], vec![(4, 1)], 2));

        for s in Strategy::ALL {
            let plan = apply_strategy(&bad[..1], 0, s, never);
            assert_eq!((plan.delete.len(), plan.insert.len()), (1, 0), "{s}");
        }
    }

    #[test]
    fn bad_rows_order_worst_first() {
        let mut rows = vec![
            BadRow { row: 3, cost: 1.2 },
            BadRow { row: 1, cost: 1.5 },
            BadRow { row: 0, cost: 1.2 },
        ];
        order_bad_rows(&mut rows);
        assert_eq!(rows.iter().map(|b| b.row).collect::<Vec<_>>(), vec![1, 0, 3]);
    }

    #[test]
    fn plain_examples() {
        let tracks = vec![trk(0., 0.), trk(50., 0.)];
        let dets: Vec<Detection> = tracks.iter().map(|b| Detection::new(*b, 0.9).unwrap()).collect();
        let r = plain_hungarian_associate(&dets, &tracks, 1.0);
        assert_eq!(r.matches.len(), 2);
        assert!(r.matches.iter().all(|m| m.cost == 0.0));

        let r = plain_hungarian_associate(&dets[..1], &tracks, 1.0);
        assert_eq!(r.matches.len(), 1);
        assert_eq!(r.unmatched_tracks, vec![1]);

        // Two duplicates on one track: only one can take it.
        let dup = vec![det(0., 0., 0.9), det(0.5, 0.2, 0.8)];
        let r = plain_hungarian_associate(&dup, &tracks[..1], 1.0);
        assert_eq!(r.matches.len(), 1);
        assert_eq!(r.unmatched_detections.len(), 1);
        assert_partition(&r, 2, 1);
    }

    #[test]
    fn empty_inputs() {
        let tracks = vec![trk(0., 0.)];
        let r = rally_hungarian(&[], &tracks, &RhConfig::default());
        assert_eq!(r.unmatched_tracks, vec![0]);
        assert_eq!(r.rally_iterations, 0);
        let dets = vec![det(0., 0., 0.9)];
        let r = rally_hungarian(&dets, &[], &RhConfig::default());
        assert_eq!(r.unmatched_detections, vec![0]);
        let r = plain_hungarian_associate(&dets, &[], 1.0);
        assert_eq!(r.unmatched_detections, vec![0]);
    }

    #[test]
    fn candidate_cap_and_pool_budget() {
        let tracks: Vec<BBox> = (0..3).map(|i| trk(i as f64 * 50.0, 0.0)).collect();
        let dets: Vec<Detection> = (0..8).map(|i| det(i as f64 * 50.0, 0.0, 0.9 - i as f64 * 0.05)).collect();
        let c = RhConfig { top_k: 3, max_candidates: 6, sub_budget: Some(2), ..RhConfig::default() };
        let r = rally_hungarian(&dets, &tracks, &c);
        assert_eq!(r.benched, vec![3, 4, 5, 6, 7]);
        assert_partition(&r, 8, 3);
    }
}
