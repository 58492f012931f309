//! Duplicate-detection penalty built on the self-GIoU loss matrix.
//!
//! For one frame's boxes, entry `(i, j)` of the self-GIoU matrix is
//! `1 - GIoU(b_i, b_j)`. Off-diagonal entries below the lower bound mark
//! duplicate detections. The penalty sums those entries over ordered pairs and
//! halves the result, since the matrix is symmetric.
//!
//! Two penalty modes exist:
//!
//! * [`LossMode::Literal`] sums the below-bound entries themselves. Its
//!   gradient pulls a duplicate pair further together.
//! * [`LossMode::Repulsive`] sums the hinge `LB - B_ij` over the same pairs.
//!   Its gradient pushes the pair apart until the entry reaches the bound.
//!
//! [`decontaminate`] runs gradient descent on the repulsive penalty.

use std::collections::HashMap;

use crate::error::D3Error;
use crate::geometry::{giou_loss, giou_loss_grad, BBox, BoxGrad};

pub const DEFAULT_LOWER_BOUND: f64 = 0.011;
pub const DEFAULT_STEP_SIZE: f64 = 0.5;
pub const DEFAULT_MAX_STEPS: usize = 500;

/// Halvings attempted before a pair's step is frozen at zero.
const MAX_STEP_HALVINGS: u32 = 60;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LossMode {
    #[default]
    Literal,
    Repulsive,
}

impl std::str::FromStr for LossMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "literal" => Ok(LossMode::Literal),
            "repulsive" => Ok(LossMode::Repulsive),
            other => Err(format!("unknown loss mode '{other}' (expected literal or repulsive)")),
        }
    }
}

impl std::fmt::Display for LossMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            LossMode::Literal => "literal",
            LossMode::Repulsive => "repulsive",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct D3Config {
    lower_bound: f64,
    pub mode: LossMode,
}

impl D3Config {
    pub fn new(lower_bound: f64, mode: LossMode) -> Result<Self, D3Error> {
        if !(lower_bound > 0.0 && lower_bound < 2.0) {
            return Err(D3Error::LowerBound(lower_bound));
        }
        Ok(Self { lower_bound, mode })
    }

    pub fn lower_bound(&self) -> f64 {
        self.lower_bound
    }

    /// Penalty contribution of a single ordered-pair entry.
    fn pair_penalty(&self, entry: f64) -> f64 {
        match self.mode {
            LossMode::Literal => entry,
            LossMode::Repulsive => self.lower_bound - entry,
        }
    }
}

impl Default for D3Config {
    fn default() -> Self {
        Self { lower_bound: DEFAULT_LOWER_BOUND, mode: LossMode::Literal }
    }
}

/// Symmetric `n x n` matrix of pairwise GIoU losses with a zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct SelfGiouMatrix {
    n: usize,
    values: Vec<f64>,
}

impl SelfGiouMatrix {
    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n + j]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Smallest off-diagonal entry, `None` for a single box.
    pub fn min_off_diagonal(&self) -> Option<f64> {
        let mut best: Option<f64> = None;
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                let v = self.get(i, j);
                best = Some(best.map_or(v, |b| b.min(v)));
            }
        }
        best
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DuplicatePair {
    pub i: usize,
    pub j: usize,
    pub loss: f64,
}

/// Below-bound pairs `i < j`, sorted by ascending loss.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct DuplicateReport {
    pub pairs: Vec<DuplicatePair>,
}

impl DuplicateReport {
    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }
}

pub fn self_giou_matrix(boxes: &[BBox]) -> Result<SelfGiouMatrix, D3Error> {
    if boxes.is_empty() {
        return Err(D3Error::NoBoxes);
    }
    let n = boxes.len();
    let mut values = vec![0.0; n * n];
    for i in 0..n {
        for j in (i + 1)..n {
            let v = giou_loss(&boxes[i], &boxes[j]);
            values[i * n + j] = v;
            values[j * n + i] = v;
        }
    }
    Ok(SelfGiouMatrix { n, values })
}

pub fn detect_duplicates(m: &SelfGiouMatrix, cfg: &D3Config) -> DuplicateReport {
    let mut pairs = Vec::new();
    for i in 0..m.n {
        for j in (i + 1)..m.n {
            let loss = m.get(i, j);
            if loss < cfg.lower_bound {
                pairs.push(DuplicatePair { i, j, loss });
            }
        }
    }
    pairs.sort_by(|a, b| a.loss.total_cmp(&b.loss).then((a.i, a.j).cmp(&(b.i, b.j))));
    DuplicateReport { pairs }
}

/// Half the sum of per-entry penalties over ordered off-diagonal pairs below
/// the lower bound.
pub fn d3_loss(m: &SelfGiouMatrix, cfg: &D3Config) -> f64 {
    let mut total = 0.0;
    for i in 0..m.n {
        for j in 0..m.n {
            if i == j {
                continue;
            }
            let v = m.get(i, j);
            if v < cfg.lower_bound {
                total += cfg.pair_penalty(v);
            }
        }
    }
    0.5 * total
}

pub fn total_boxes_loss(origin_loss: f64, m: &SelfGiouMatrix, cfg: &D3Config) -> f64 {
    origin_loss + d3_loss(m, cfg)
}

/// Gradient of [`d3_loss`] with respect to every box.
///
/// Membership in the active set is treated as locally constant, so the result
/// is exact away from the `B_ij = LB` boundary.
pub fn d3_grad(boxes: &[BBox], cfg: &D3Config) -> Result<Vec<BoxGrad>, D3Error> {
    let m = self_giou_matrix(boxes)?;
    let sign = match cfg.mode {
        LossMode::Literal => 1.0,
        LossMode::Repulsive => -1.0,
    };
    let mut grads = vec![BoxGrad::ZERO; boxes.len()];
    for p in detect_duplicates(&m, cfg).pairs {
        let (ga, gb) = giou_loss_grad(&boxes[p.i], &boxes[p.j]);
        grads[p.i] += ga.scaled(sign);
        grads[p.j] += gb.scaled(sign);
    }
    Ok(grads)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Decontamination {
    pub boxes: Vec<BBox>,
    pub steps: usize,
    /// `true` when no pair remains below the lower bound.
    pub converged: bool,
}

/// Pair loss gradient used by the descent. Exactly coincident boxes have a
/// zero subgradient under the first-argument tie rule; for those the
/// one-sided derivative of separating `b` towards `+x` is used instead.
fn separating_grad(a: &BBox, b: &BBox) -> (BoxGrad, BoxGrad) {
    let (ga, gb) = giou_loss_grad(a, b);
    if !(ga.is_zero() && gb.is_zero()) {
        return (ga, gb);
    }
    let s = 1.0 / a.width().max(b.width());
    (
        BoxGrad { d_x1: -s, d_y1: 0.0, d_x2: -s, d_y2: 0.0 },
        BoxGrad { d_x1: s, d_y1: 0.0, d_x2: s, d_y2: 0.0 },
    )
}

/// Gradient descent on the repulsive penalty until no duplicate pair is left
/// or `max_steps` is reached.
///
/// Every active pair carries its own step size. A step that would make a box
/// degenerate is rejected and the step size of each pair touching that box is
/// halved before retrying.
pub fn decontaminate(
    boxes: &[BBox],
    cfg: &D3Config,
    step_size: f64,
    max_steps: usize,
) -> Result<Decontamination, D3Error> {
    if cfg.mode != LossMode::Repulsive {
        return Err(D3Error::LiteralMode);
    }
    if !(step_size > 0.0 && step_size.is_finite()) {
        return Err(D3Error::StepSize(step_size));
    }
    if boxes.is_empty() {
        return Ok(Decontamination { boxes: Vec::new(), steps: 0, converged: true });
    }

    let mut current = boxes.to_vec();
    let mut pair_steps: HashMap<(usize, usize), f64> = HashMap::new();
    let mut steps = 0;

    loop {
        let m = self_giou_matrix(&current)?;
        let report = detect_duplicates(&m, cfg);
        if report.is_empty() {
            return Ok(Decontamination { boxes: current, steps, converged: true });
        }
        if steps >= max_steps {
            return Ok(Decontamination { boxes: current, steps, converged: false });
        }

        let grads: Vec<((usize, usize), BoxGrad, BoxGrad)> = report
            .pairs
            .iter()
            .map(|p| {
                let (ga, gb) = separating_grad(&current[p.i], &current[p.j]);
                ((p.i, p.j), ga, gb)
            })
            .collect();

        let mut halvings = 0;
        loop {
            // Descending on LB - B means moving along +dB.
            let mut delta = vec![BoxGrad::ZERO; current.len()];
            for &(key, ga, gb) in &grads {
                let s = *pair_steps.entry(key).or_insert(step_size);
                delta[key.0] += ga.scaled(-s);
                delta[key.1] += gb.scaled(-s);
            }
            let proposal: Vec<Result<BBox, _>> =
                current.iter().zip(&delta).map(|(b, d)| b.descend(d, 1.0)).collect();
            let bad: Vec<usize> = proposal
                .iter()
                .enumerate()
                .filter_map(|(k, r)| r.is_err().then_some(k))
                .collect();
            if bad.is_empty() {
                current = proposal.into_iter().map(|r| r.expect("checked")).collect();
                break;
            }
            halvings += 1;
            for &(key, _, _) in &grads {
                if bad.contains(&key.0) || bad.contains(&key.1) {
                    let s = pair_steps.get_mut(&key).expect("inserted above");
                    *s = if halvings >= MAX_STEP_HALVINGS { 0.0 } else { *s * 0.5 };
                }
            }
        }
        steps += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn bb(x1: f64, y1: f64, x2: f64, y2: f64) -> BBox {
        BBox::new(x1, y1, x2, y2).unwrap()
    }

    fn cfg(lb: f64, mode: LossMode) -> D3Config {
        D3Config::new(lb, mode).unwrap()
    }

    /// Box `src` shifted right until its GIoU loss against `src` equals `target`.
    /// For a pure x-shift `d` the loss is `2d / (w + d)`.
    fn shifted_with_loss(src: &BBox, target: f64) -> BBox {
        let w = src.width();
        let d = target * w / (2.0 - target);
        src.translate(d, 0.0).unwrap()
    }

    #[test]
    fn config_bounds() {
        assert!(D3Config::new(0.0, LossMode::Literal).is_err());
        assert!(D3Config::new(2.0, LossMode::Literal).is_err());
        assert!(D3Config::new(f64::NAN, LossMode::Literal).is_err());
        assert_eq!(D3Config::default().lower_bound(), 0.011);
    }

    #[test]
    fn matrix_examples() {
        let one = self_giou_matrix(&[bb(0., 0., 1., 1.)]).unwrap();
        assert_eq!(one.values(), &[0.0]);

        let a = bb(3., 3., 9., 9.);
        let same = self_giou_matrix(&[a, a]).unwrap();
        assert_eq!(same.values(), &[0.0, 0.0, 0.0, 0.0]);

        let m = self_giou_matrix(&[bb(0., 0., 2., 2.), bb(1., 1., 3., 3.)]).unwrap();
        assert_eq!(m.get(0, 0), 0.0);
        assert_abs_diff_eq!(m.get(0, 1), 1.0 + 5.0 / 63.0, epsilon = 1e-15);
        assert_eq!(m.get(0, 1), m.get(1, 0));

        assert_eq!(self_giou_matrix(&[]), Err(D3Error::NoBoxes));
    }

    #[test]
    fn detect_examples() {
        let c = cfg(0.011, LossMode::Literal);
        let spread = [bb(0., 0., 10., 10.), bb(50., 0., 60., 10.), bb(0., 50., 10., 60.)];
        assert!(detect_duplicates(&self_giou_matrix(&spread).unwrap(), &c).is_empty());

        let a = bb(4., 4., 20., 30.);
        let r = detect_duplicates(&self_giou_matrix(&[a, a]).unwrap(), &c);
        assert_eq!(r.pairs, vec![DuplicatePair { i: 0, j: 1, loss: 0.0 }]);

        // Pairwise losses 0.005 (0,1) and ~0.8 for a third, overlapping box.
        let src = bb(0., 0., 40., 40.);
        let dup = shifted_with_loss(&src, 0.005);
        assert_abs_diff_eq!(giou_loss(&src, &dup), 0.005, epsilon = 1e-12);
        let other = bb(20., 20., 60., 60.);
        let boxes = [src, dup, other];
        let m = self_giou_matrix(&boxes).unwrap();
        assert!(m.get(0, 2) > 0.5 && m.get(1, 2) > 0.5);
        let r = detect_duplicates(&m, &c);
        assert_eq!(r.len(), 1);
        assert_eq!((r.pairs[0].i, r.pairs[0].j), (0, 1));
    }

    #[test]
    fn loss_examples() {
        let spread = [bb(0., 0., 10., 10.), bb(50., 0., 60., 10.)];
        let m = self_giou_matrix(&spread).unwrap();
        assert_eq!(d3_loss(&m, &cfg(0.011, LossMode::Literal)), 0.0);
        assert_eq!(d3_loss(&m, &cfg(0.011, LossMode::Repulsive)), 0.0);

        let src = bb(0., 0., 40., 40.);
        let dup = shifted_with_loss(&src, 0.004);
        let m = self_giou_matrix(&[src, dup]).unwrap();
        assert_abs_diff_eq!(d3_loss(&m, &cfg(0.011, LossMode::Literal)), 0.004, epsilon = 1e-12);
        assert_abs_diff_eq!(d3_loss(&m, &cfg(0.011, LossMode::Repulsive)), 0.007, epsilon = 1e-12);

        let lit = cfg(0.011, LossMode::Literal);
        assert_abs_diff_eq!(total_boxes_loss(1.5, &m, &lit), 1.504, epsilon = 1e-12);
        assert_eq!(total_boxes_loss(0.0, &m, &lit), d3_loss(&m, &lit));
        let clean = self_giou_matrix(&spread).unwrap();
        assert_eq!(total_boxes_loss(1.5, &clean, &lit), 1.5);
    }

    #[test]
    fn grad_is_zero_without_active_pairs() {
        let spread = [bb(0., 0., 10., 10.), bb(50., 0., 60., 10.)];
        let g = d3_grad(&spread, &cfg(0.011, LossMode::Repulsive)).unwrap();
        assert!(g.iter().all(BoxGrad::is_zero));
    }

    #[test]
    fn repulsive_grad_separates_pair() {
        let src = bb(10., 10., 50., 90.);
        let dup = src.translate(0.05, 0.03).unwrap();
        let c = cfg(0.011, LossMode::Repulsive);
        let g = d3_grad(&[src, dup], &c).unwrap();
        let before = giou_loss(&src, &dup);
        let h = 1e-3;
        let a2 = src.descend(&g[0], h).unwrap();
        assert!(giou_loss(&a2, &dup) > before);
        let b2 = dup.descend(&g[1], h).unwrap();
        assert!(giou_loss(&src, &b2) > before);
    }

    #[test]
    fn literal_mode_is_rejected_by_descent() {
        let a = bb(0., 0., 10., 10.);
        assert_eq!(
            decontaminate(&[a], &cfg(0.011, LossMode::Literal), 0.5, 10),
            Err(D3Error::LiteralMode)
        );
        assert_eq!(
            decontaminate(&[a], &cfg(0.011, LossMode::Repulsive), 0.0, 10),
            Err(D3Error::StepSize(0.0))
        );
    }

    #[test]
    fn descent_leaves_clean_frames_alone() {
        let boxes = [bb(0., 0., 10., 10.), bb(50., 0., 60., 10.)];
        let out = decontaminate(&boxes, &cfg(0.011, LossMode::Repulsive), 0.5, 500).unwrap();
        assert_eq!(out.boxes, boxes.to_vec());
        assert_eq!(out.steps, 0);
        assert!(out.converged);
    }

    #[test]
    fn descent_separates_pair_and_triple() {
        let c = cfg(0.011, LossMode::Repulsive);
        let src = bb(100., 100., 140., 200.);
        let pair = [src, src.translate(0.1, -0.05).unwrap()];
        let out = decontaminate(&pair, &c, 0.5, 500).unwrap();
        assert!(out.converged && out.steps > 0);
        assert!(giou_loss(&out.boxes[0], &out.boxes[1]) >= 0.011);

        let triple = [src, src.translate(0.08, 0.0).unwrap(), src.translate(-0.02, 0.07).unwrap()];
        let out = decontaminate(&triple, &c, 0.5, 500).unwrap();
        assert!(out.converged);
        let m = self_giou_matrix(&out.boxes).unwrap();
        assert!(m.min_off_diagonal().unwrap() >= 0.011);
    }

    #[test]
    fn descent_breaks_exact_coincidence() {
        let c = cfg(0.011, LossMode::Repulsive);
        let a = bb(0., 0., 30., 60.);
        let out = decontaminate(&[a, a], &c, 0.5, 500).unwrap();
        assert!(out.converged);
        assert!(giou_loss(&out.boxes[0], &out.boxes[1]) >= 0.011);
    }

    #[test]
    fn descent_halts_at_step_budget() {
        let c = cfg(0.5, LossMode::Repulsive);
        let a = bb(0., 0., 300., 300.);
        let b = a.translate(0.5, 0.0).unwrap();
        let out = decontaminate(&[a, b], &c, 0.01, 3).unwrap();
        assert_eq!(out.steps, 3);
        assert!(!out.converged);
    }
}
