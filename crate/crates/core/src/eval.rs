//! 3D MOT evaluation: CLEAR matching in 3D IoU, MOTA/MOTP/IDS/FRAG, and the
//! recall-integrated metrics sAMOTA, AMOTA and AMOTP.
//!
//! Matching per frame follows the CLEAR protocol. Ground-truth ↔ prediction
//! correspondences from the previous frame are kept while their 3D IoU stays
//! at or above the gate; the rest are matched by optimal assignment, where
//! pairs below the gate are infeasible (priced at [`INFEASIBLE_COST`]), so the
//! number of matches is maximized first and their total IoU second.
//!
//! Integral metrics sweep a confidence threshold over every distinct
//! prediction score. For each target recall `r = k/L` (`k = 1..=L`) the
//! threshold whose achieved recall is the smallest value `≥ r` is used:
//!
//! ```text
//! MOTA_r  = max(0, 1 - (FP + FN + IDS) / num_gt)
//! sMOTA_r = min(1, max(0, 1 - (FP + FN + IDS - (1 - r)·num_gt) / (r·num_gt)))
//! MOTP_r  = iou_sum / TP
//! ```
//!
//! Targets no threshold reaches contribute 0. The averages over the `L`
//! points are AMOTA, sAMOTA and AMOTP. Counts from several sequences are
//! summed before any ratio is taken and the sweep is global across them.

use std::collections::HashMap;
use std::io::Write;
use std::ops::AddAssign;

use rayon::prelude::*;
use thiserror::Error;

use crate::assignment::{solve_min_cost, CostMatrix};
use crate::geometry::iou3d;
use crate::kitti::GtObject;
use crate::tracker::{FrameGroups, TrackReport};

pub const DEFAULT_MIN_IOU: f64 = 0.25;
pub const DEFAULT_RECALL_POINTS: usize = 40;
/// Cost of a below-gate pair in the assignment; larger than any feasible total.
pub const INFEASIBLE_COST: f64 = 1e6;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("ground truth is empty: no objects of the evaluated category")]
    EmptyGroundTruth,
    #[error("recall point count must be at least 1")]
    NoRecallPoints,
    #[error("minimum IoU must be in (0, 1], got {0}")]
    InvalidMinIou(f64),
    #[error("csv output: {0}")]
    Csv(#[from] csv::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

/// CLEAR accumulators.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ClearCounts {
    pub tp: u64,
    pub fp: u64,
    /// False negatives (misses).
    pub misses: u64,
    pub ids: u64,
    pub frag: u64,
    /// Sum of 3D IoU over matched pairs.
    pub iou_sum: f64,
    pub num_gt: u64,
}

impl AddAssign for ClearCounts {
    fn add_assign(&mut self, o: Self) {
        self.tp += o.tp;
        self.fp += o.fp;
        self.misses += o.misses;
        self.ids += o.ids;
        self.frag += o.frag;
        self.iou_sum += o.iou_sum;
        self.num_gt += o.num_gt;
    }
}

impl ClearCounts {
    pub fn recall(&self) -> f64 {
        if self.num_gt == 0 {
            0.0
        } else {
            self.tp as f64 / self.num_gt as f64
        }
    }
}

/// `(mota, motp)`. MOTA may be negative; MOTP is 0 when nothing matched.
pub fn metrics_from_counts(c: &ClearCounts) -> Result<(f64, f64), EvalError> {
    if c.num_gt == 0 {
        return Err(EvalError::EmptyGroundTruth);
    }
    let errors = (c.fp + c.misses + c.ids) as f64;
    let mota = 1.0 - errors / c.num_gt as f64;
    let motp = if c.tp == 0 {
        0.0
    } else {
        c.iou_sum / c.tp as f64
    };
    Ok((mota, motp))
}

/// Ground-truth id → prediction id pairs matched in the previous frame.
pub type Correspondence = HashMap<i64, u64>;

#[derive(Debug, Clone, PartialEq, Default)]
pub struct FrameMatch {
    /// `(gt index, prediction index, IoU)`, sorted by gt index.
    pub matches: Vec<(usize, usize, f64)>,
    /// Matchable ground-truth indices left unmatched.
    pub unmatched_gt: Vec<usize>,
    pub unmatched_pred: Vec<usize>,
    pub correspondence: Correspondence,
}

/// Matches one frame's predictions to its ground truth.
///
/// Non-matchable ground truth (`DontCare`) is ignored entirely.
pub fn match_frame(
    gt: &[GtObject],
    preds: &[TrackReport],
    prev: &Correspondence,
    min_iou: f64,
) -> FrameMatch {
    let frame = PreparedFrame::new(0, gt, preds);
    let active = vec![true; preds.len()];
    let mut m = frame.match_active(&active, prev, min_iou);
    for (g, _, _) in &mut m.matches {
        *g = frame.gt_index[*g];
    }
    for g in &mut m.unmatched_gt {
        *g = frame.gt_index[*g];
    }
    m
}

/// Frame with IoUs precomputed between matchable gt and all predictions.
#[derive(Debug, Clone)]
struct PreparedFrame {
    frame: u32,
    /// Index of each matchable gt in the caller's slice.
    gt_index: Vec<usize>,
    gt_ids: Vec<i64>,
    pred_ids: Vec<u64>,
    pred_scores: Vec<f64>,
    /// Row-major `gt × pred`.
    ious: Vec<f64>,
}

impl PreparedFrame {
    fn new(frame: u32, gt: &[GtObject], preds: &[TrackReport]) -> Self {
        let matchable: Vec<(usize, &GtObject)> = gt
            .iter()
            .enumerate()
            .filter(|(_, g)| g.is_matchable())
            .collect();
        let mut ious = Vec::with_capacity(matchable.len() * preds.len());
        for (_, g) in &matchable {
            let gb = g.box3d.as_ref().expect("matchable gt has a box");
            ious.extend(preds.iter().map(|p| iou3d(gb, &p.box3d)));
        }
        Self {
            frame,
            gt_index: matchable.iter().map(|(i, _)| *i).collect(),
            gt_ids: matchable.iter().map(|(_, g)| g.track_id).collect(),
            pred_ids: preds.iter().map(|p| p.id).collect(),
            pred_scores: preds.iter().map(|p| p.score).collect(),
            ious,
        }
    }

    #[inline]
    fn iou(&self, g: usize, p: usize) -> f64 {
        self.ious[g * self.pred_ids.len() + p]
    }

    /// Indices are into the prepared (matchable) gt list.
    fn match_active(&self, active: &[bool], prev: &Correspondence, min_iou: f64) -> FrameMatch {
        let n_gt = self.gt_ids.len();
        let n_pred = self.pred_ids.len();
        let mut gt_pair: Vec<Option<(usize, f64)>> = vec![None; n_gt];
        let mut pred_taken = vec![false; n_pred];

        // Carry over last frame's correspondences that still clear the gate.
        for (g, pair) in gt_pair.iter_mut().enumerate() {
            let Some(&pid) = prev.get(&self.gt_ids[g]) else {
                continue;
            };
            let found =
                (0..n_pred).find(|&p| active[p] && !pred_taken[p] && self.pred_ids[p] == pid);
            if let Some(p) = found {
                let iou = self.iou(g, p);
                if iou >= min_iou {
                    *pair = Some((p, iou));
                    pred_taken[p] = true;
                }
            }
        }

        // Optimal assignment over the rest, restricted to rows/cols that have
        // at least one feasible partner.
        let rows: Vec<usize> = (0..n_gt)
            .filter(|&g| {
                gt_pair[g].is_none()
                    && (0..n_pred).any(|p| active[p] && !pred_taken[p] && self.iou(g, p) >= min_iou)
            })
            .collect();
        let cols: Vec<usize> = (0..n_pred)
            .filter(|&p| {
                active[p] && !pred_taken[p] && rows.iter().any(|&g| self.iou(g, p) >= min_iou)
            })
            .collect();
        if !rows.is_empty() && !cols.is_empty() {
            let cost = CostMatrix::from_fn(rows.len(), cols.len(), |i, j| {
                let iou = self.iou(rows[i], cols[j]);
                if iou >= min_iou {
                    -iou
                } else {
                    INFEASIBLE_COST
                }
            })
            .expect("finite costs");
            for (i, j) in solve_min_cost(&cost).pairs {
                let (g, p) = (rows[i], cols[j]);
                let iou = self.iou(g, p);
                if iou >= min_iou {
                    gt_pair[g] = Some((p, iou));
                    pred_taken[p] = true;
                }
            }
        }

        let mut out = FrameMatch::default();
        for (g, pair) in gt_pair.iter().enumerate() {
            match pair {
                Some((p, iou)) => {
                    out.matches.push((g, *p, *iou));
                    out.correspondence.insert(self.gt_ids[g], self.pred_ids[*p]);
                }
                None => out.unmatched_gt.push(g),
            }
        }
        out.unmatched_pred = (0..n_pred)
            .filter(|&p| active[p] && !pred_taken[p])
            .collect();
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum GtStatus {
    Matched,
    Lost,
}

#[derive(Debug, Clone)]
struct PreparedSequence {
    frames: Vec<PreparedFrame>,
}

impl PreparedSequence {
    fn new(gt: &FrameGroups<GtObject>, preds: &FrameGroups<TrackReport>) -> Self {
        let mut frames: Vec<u32> = gt.keys().chain(preds.keys()).copied().collect();
        frames.sort_unstable();
        frames.dedup();
        let frames = frames
            .into_iter()
            .map(|f| {
                let g = gt.get(&f).map_or(&[][..], Vec::as_slice);
                let p = preds.get(&f).map_or(&[][..], Vec::as_slice);
                PreparedFrame::new(f, g, p)
            })
            .collect();
        Self { frames }
    }

    fn num_gt(&self) -> u64 {
        self.frames.iter().map(|f| f.gt_ids.len() as u64).sum()
    }

    /// CLEAR counts keeping only predictions with `score >= threshold`.
    fn accumulate(&self, threshold: f64, min_iou: f64) -> ClearCounts {
        let mut counts = ClearCounts::default();
        let mut prev = Correspondence::new();
        let mut prev_frame: Option<u32> = None;
        let mut last_pred: HashMap<i64, u64> = HashMap::new();
        let mut status: HashMap<i64, GtStatus> = HashMap::new();
        let mut active = Vec::new();

        for frame in &self.frames {
            if prev_frame.map_or(true, |pf| pf + 1 != frame.frame) {
                prev.clear();
            }
            active.clear();
            active.extend(frame.pred_scores.iter().map(|&s| s >= threshold));

            let m = frame.match_active(&active, &prev, min_iou);
            counts.num_gt += frame.gt_ids.len() as u64;
            counts.tp += m.matches.len() as u64;
            counts.misses += m.unmatched_gt.len() as u64;
            counts.fp += m.unmatched_pred.len() as u64;
            for &(g, p, iou) in &m.matches {
                counts.iou_sum += iou;
                let gid = frame.gt_ids[g];
                let pid = frame.pred_ids[p];
                if last_pred.insert(gid, pid).is_some_and(|old| old != pid) {
                    counts.ids += 1;
                }
                if status.insert(gid, GtStatus::Matched) == Some(GtStatus::Lost) {
                    counts.frag += 1;
                }
            }
            for &g in &m.unmatched_gt {
                let gid = frame.gt_ids[g];
                if let Some(s) = status.get_mut(&gid) {
                    *s = GtStatus::Lost;
                }
            }
            prev = m.correspondence;
            prev_frame = Some(frame.frame);
        }
        counts
    }
}

/// CLEAR counts for one sequence using every prediction.
pub fn accumulate_clear(
    gt: &FrameGroups<GtObject>,
    preds: &FrameGroups<TrackReport>,
    min_iou: f64,
) -> ClearCounts {
    PreparedSequence::new(gt, preds).accumulate(f64::NEG_INFINITY, min_iou)
}

/// Ground truth and tracker output for one sequence.
#[derive(Debug, Clone, Default)]
pub struct EvalSequence {
    pub name: String,
    pub gt: FrameGroups<GtObject>,
    pub preds: FrameGroups<TrackReport>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalConfig {
    pub min_iou: f64,
    pub recall_points: usize,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            min_iou: DEFAULT_MIN_IOU,
            recall_points: DEFAULT_RECALL_POINTS,
        }
    }
}

/// Dataset-level counts at one confidence threshold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdResult {
    pub threshold: f64,
    pub counts: ClearCounts,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RecallPoint {
    /// Target recall `k / L`.
    pub target: f64,
    /// Threshold selected for this target; `None` if no threshold reaches it.
    pub threshold: Option<f64>,
    /// Achieved recall at the selected threshold.
    pub recall: f64,
    /// MOTA floored at 0.
    pub mota: f64,
    pub mota_unfloored: f64,
    pub smota: f64,
    pub motp: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntegralMetrics {
    pub samota: f64,
    pub amota: f64,
    pub amotp: f64,
    pub curve: Vec<RecallPoint>,
}

/// Full evaluation output: integral metrics plus the CLEAR metrics at the
/// threshold with the highest MOTA.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub integral: IntegralMetrics,
    pub best: ThresholdResult,
    pub best_mota: f64,
    pub best_motp: f64,
    /// Counts at every evaluated threshold, highest threshold first.
    pub sweep: Vec<ThresholdResult>,
}

fn validate(cfg: &EvalConfig) -> Result<(), EvalError> {
    if cfg.recall_points == 0 {
        return Err(EvalError::NoRecallPoints);
    }
    if !(cfg.min_iou > 0.0 && cfg.min_iou <= 1.0) {
        return Err(EvalError::InvalidMinIou(cfg.min_iou));
    }
    Ok(())
}

/// Distinct prediction scores, highest first. Empty when there are no predictions.
fn candidate_thresholds(sequences: &[EvalSequence]) -> Vec<f64> {
    let mut scores: Vec<f64> = sequences
        .iter()
        .flat_map(|s| s.preds.values().flatten().map(|p| p.score))
        .collect();
    scores.sort_by(|a, b| b.total_cmp(a));
    scores.dedup();
    scores
}

/// Evaluates every distinct score threshold (in parallel) and summarizes.
pub fn evaluate(sequences: &[EvalSequence], cfg: &EvalConfig) -> Result<EvalReport, EvalError> {
    validate(cfg)?;
    let prepared: Vec<PreparedSequence> = sequences
        .par_iter()
        .map(|s| PreparedSequence::new(&s.gt, &s.preds))
        .collect();
    let num_gt: u64 = prepared.iter().map(PreparedSequence::num_gt).sum();
    if num_gt == 0 {
        return Err(EvalError::EmptyGroundTruth);
    }

    let mut thresholds = candidate_thresholds(sequences);
    let no_predictions = thresholds.is_empty();
    if no_predictions {
        thresholds.push(f64::NEG_INFINITY);
    }
    let sweep: Vec<ThresholdResult> = thresholds
        .par_iter()
        .map(|&threshold| {
            let mut counts = ClearCounts::default();
            for s in &prepared {
                counts += s.accumulate(threshold, cfg.min_iou);
            }
            ThresholdResult { threshold, counts }
        })
        .collect();

    let integral = if no_predictions {
        integrate(&[], num_gt, cfg.recall_points)
    } else {
        integrate(&sweep, num_gt, cfg.recall_points)
    };

    let mut best = sweep[0];
    let mut best_mota = f64::NEG_INFINITY;
    for r in &sweep {
        let (mota, _) = metrics_from_counts(&r.counts)?;
        if mota > best_mota {
            best_mota = mota;
            best = *r;
        }
    }
    let (best_mota, best_motp) = metrics_from_counts(&best.counts)?;
    Ok(EvalReport {
        integral,
        best,
        best_mota,
        best_motp,
        sweep,
    })
}

/// sAMOTA, AMOTA and AMOTP over `recall_points` recall targets.
pub fn sweep_thresholds(
    sequences: &[EvalSequence],
    cfg: &EvalConfig,
) -> Result<IntegralMetrics, EvalError> {
    evaluate(sequences, cfg).map(|r| r.integral)
}

/// Reduces per-threshold counts (highest threshold first) to integral metrics.
fn integrate(sweep: &[ThresholdResult], num_gt: u64, recall_points: usize) -> IntegralMetrics {
    let l = recall_points as u64;
    let n = num_gt as f64;
    let mut curve = Vec::with_capacity(recall_points);
    for k in 1..=l {
        let target = k as f64 / l as f64;
        // Smallest achieved recall ≥ k/L, compared exactly as tp·L ≥ k·num_gt.
        // Ties keep the highest threshold.
        let chosen = sweep
            .iter()
            .filter(|r| r.counts.tp * l >= k * num_gt)
            .min_by_key(|r| r.counts.tp);
        let point = match chosen {
            None => RecallPoint {
                target,
                threshold: None,
                recall: 0.0,
                mota: 0.0,
                mota_unfloored: 0.0,
                smota: 0.0,
                motp: 0.0,
            },
            Some(r) => {
                let c = &r.counts;
                let errors = (c.fp + c.misses + c.ids) as f64;
                let mota_unfloored = 1.0 - errors / n;
                let smota = 1.0 - (errors - (1.0 - target) * n) / (target * n);
                RecallPoint {
                    target,
                    threshold: Some(r.threshold),
                    recall: c.recall(),
                    mota: mota_unfloored.max(0.0),
                    mota_unfloored,
                    smota: smota.clamp(0.0, 1.0),
                    motp: if c.tp == 0 {
                        0.0
                    } else {
                        c.iou_sum / c.tp as f64
                    },
                }
            }
        };
        curve.push(point);
    }
    let mean = |f: fn(&RecallPoint) -> f64| curve.iter().map(f).sum::<f64>() / recall_points as f64;
    IntegralMetrics {
        samota: mean(|p| p.smota),
        amota: mean(|p| p.mota),
        amotp: mean(|p| p.motp),
        curve,
    }
}

/// Writes one row per recall point plus a `mean` summary row.
pub fn write_curve_csv<W: Write>(metrics: &IntegralMetrics, out: W) -> Result<(), EvalError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "recall_target",
        "threshold",
        "recall",
        "mota",
        "mota_unfloored",
        "smota",
        "motp",
    ])?;
    for p in &metrics.curve {
        w.write_record([
            p.target.to_string(),
            p.threshold.map(|t| t.to_string()).unwrap_or_default(),
            p.recall.to_string(),
            p.mota.to_string(),
            p.mota_unfloored.to_string(),
            p.smota.to_string(),
            p.motp.to_string(),
        ])?;
    }
    let unfloored = metrics.curve.iter().map(|p| p.mota_unfloored).sum::<f64>()
        / metrics.curve.len().max(1) as f64;
    w.write_record([
        "mean".to_string(),
        String::new(),
        String::new(),
        metrics.amota.to_string(),
        unfloored.to_string(),
        metrics.samota.to_string(),
        metrics.amotp.to_string(),
    ])?;
    w.flush()?;
    Ok(())
}

/// Human-readable summary table, values in percent.
pub fn format_table(report: &EvalReport) -> String {
    let i = &report.integral;
    let c = &report.best.counts;
    let mut s = String::new();
    s.push_str(&format!(
        "{:>8} {:>8} {:>8} {:>8} {:>8} {:>6} {:>6}\n",
        "sAMOTA", "AMOTA", "AMOTP", "MOTA", "MOTP", "IDS", "FRAG"
    ));
    s.push_str(&format!(
        "{:>8.2} {:>8.2} {:>8.2} {:>8.2} {:>8.2} {:>6} {:>6}\n",
        100.0 * i.samota,
        100.0 * i.amota,
        100.0 * i.amotp,
        100.0 * report.best_mota,
        100.0 * report.best_motp,
        c.ids,
        c.frag
    ));
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Box3D;

    fn bx(x: f64, z: f64) -> Box3D {
        Box3D::new(x, 1.6, z, 4.0, 2.0, 1.5, 0.0).unwrap()
    }

    fn gt(frame: u32, id: i64, b: Box3D) -> GtObject {
        GtObject {
            frame,
            track_id: id,
            category: "Car".into(),
            truncated: 0.0,
            occluded: 0.0,
            alpha: 0.0,
            bbox2d: [0.0; 4],
            box3d: Some(b),
        }
    }

    fn pred(frame: u32, id: u64, b: Box3D, score: f64) -> TrackReport {
        TrackReport {
            frame,
            id,
            box3d: b,
            score,
        }
    }

    fn groups<T: Clone>(items: &[(u32, T)]) -> FrameGroups<T> {
        let mut g = FrameGroups::new();
        for (f, t) in items {
            g.entry(*f).or_insert_with(Vec::new).push(t.clone());
        }
        g
    }

    #[test]
    fn identical_single_object() {
        let m = match_frame(
            &[gt(0, 0, bx(0.0, 10.0))],
            &[pred(0, 1, bx(0.0, 10.0), 1.0)],
            &Correspondence::new(),
            DEFAULT_MIN_IOU,
        );
        assert_eq!(m.matches, vec![(0, 0, 1.0)]);
        assert_eq!(m.correspondence.get(&0), Some(&1));
    }

    #[test]
    fn below_gate_is_fp_and_fn() {
        // Offset 3 m along the 4 m length: IoU = 1/7.
        let g = gt(0, 0, bx(0.0, 10.0));
        let p = pred(0, 1, bx(3.0, 10.0), 1.0);
        assert!(iou3d(&g.box3d.unwrap(), &p.box3d) < 0.25);
        let m = match_frame(&[g], &[p], &Correspondence::new(), DEFAULT_MIN_IOU);
        assert!(m.matches.is_empty());
        assert_eq!((m.unmatched_gt.len(), m.unmatched_pred.len()), (1, 1));
    }

    #[test]
    fn hungarian_beats_greedy() {
        // Greedy-by-best-IoU takes (g0, p1) first and leaves g1 with nothing.
        let g0 = bx(0.0, 10.0);
        let g1 = bx(2.6, 10.0);
        let p0 = bx(-2.0, 10.0);
        let p1 = bx(0.5, 10.0);
        assert!(iou3d(&g0, &p1) > iou3d(&g1, &p1) && iou3d(&g0, &p1) > iou3d(&g0, &p0));
        assert!(iou3d(&g1, &p0) < 0.25);
        assert!(iou3d(&g0, &p0) >= 0.25 && iou3d(&g1, &p1) >= 0.25);
        let m = match_frame(
            &[gt(0, 0, g0), gt(0, 1, g1)],
            &[pred(0, 10, p0, 1.0), pred(0, 11, p1, 1.0)],
            &Correspondence::new(),
            DEFAULT_MIN_IOU,
        );
        let pairs: Vec<(usize, usize)> = m.matches.iter().map(|&(g, p, _)| (g, p)).collect();
        assert_eq!(pairs, vec![(0, 0), (1, 1)]);
    }

    #[test]
    fn carryover_precedes_assignment() {
        let g = bx(0.0, 10.0);
        let a = bx(1.0, 10.0); // IoU 0.6
        let b = bx(0.2, 10.0); // higher IoU
        assert!(iou3d(&g, &b) > iou3d(&g, &a) && iou3d(&g, &a) >= 0.25);
        let mut prev = Correspondence::new();
        prev.insert(0, 7);
        let m = match_frame(
            &[gt(1, 0, g)],
            &[pred(1, 7, a, 1.0), pred(1, 8, b, 1.0)],
            &prev,
            DEFAULT_MIN_IOU,
        );
        assert_eq!(m.matches.len(), 1);
        assert_eq!(m.matches[0].1, 0);
        assert_eq!(m.unmatched_pred, vec![1]);
        // Without the history the better box wins.
        let m = match_frame(
            &[gt(1, 0, g)],
            &[pred(1, 7, a, 1.0), pred(1, 8, b, 1.0)],
            &Correspondence::new(),
            DEFAULT_MIN_IOU,
        );
        assert_eq!(m.matches[0].1, 1);
    }

    #[test]
    fn dont_care_is_ignored() {
        let mut dc = gt(0, -1, bx(0.0, 10.0));
        dc.category = "DontCare".into();
        let m = match_frame(
            &[dc, gt(0, 3, bx(10.0, 10.0))],
            &[pred(0, 1, bx(10.0, 10.0), 1.0)],
            &Correspondence::new(),
            DEFAULT_MIN_IOU,
        );
        assert_eq!(m.matches.len(), 1);
        assert_eq!(m.matches[0].0, 1);
        assert!(m.unmatched_gt.is_empty());
    }

    #[test]
    fn perfect_tracking_counts() {
        let g: Vec<_> = (0..10).map(|f| (f, gt(f, 0, bx(f as f64, 10.0)))).collect();
        let p: Vec<_> = (0..10)
            .map(|f| (f, pred(f, 5, bx(f as f64, 10.0), 1.0)))
            .collect();
        let c = accumulate_clear(&groups(&g), &groups(&p), DEFAULT_MIN_IOU);
        assert_eq!(
            (c.tp, c.fp, c.misses, c.ids, c.frag, c.num_gt),
            (10, 0, 0, 0, 0, 10)
        );
        assert_eq!(c.iou_sum, 10.0);
    }

    #[test]
    fn single_swap_counts_two_switches() {
        let mut g = Vec::new();
        let mut p = Vec::new();
        for f in 0..6u32 {
            g.push((f, gt(f, 0, bx(0.0, 10.0))));
            g.push((f, gt(f, 1, bx(0.0, 20.0))));
            let (a, b) = if f < 3 { (1, 2) } else { (2, 1) };
            p.push((f, pred(f, a, bx(0.0, 10.0), 1.0)));
            p.push((f, pred(f, b, bx(0.0, 20.0), 1.0)));
        }
        let c = accumulate_clear(&groups(&g), &groups(&p), DEFAULT_MIN_IOU);
        assert_eq!((c.ids, c.frag, c.tp, c.fp, c.misses), (2, 0, 12, 0, 0));
    }

    #[test]
    fn occlusion_gap_counts_one_fragment() {
        let g: Vec<_> = (0..10).map(|f| (f, gt(f, 0, bx(0.0, 10.0)))).collect();
        let p: Vec<_> = (0..10)
            .filter(|f| !(4..=5).contains(f))
            .map(|f| (f, pred(f, 9, bx(0.0, 10.0), 1.0)))
            .collect();
        let c = accumulate_clear(&groups(&g), &groups(&p), DEFAULT_MIN_IOU);
        assert_eq!((c.frag, c.ids, c.misses, c.tp), (1, 0, 2, 8));
    }

    #[test]
    fn mota_motp_arithmetic() {
        let c = ClearCounts {
            tp: 10,
            num_gt: 10,
            iou_sum: 7.8,
            ..Default::default()
        };
        let (mota, motp) = metrics_from_counts(&c).unwrap();
        assert_eq!(mota, 1.0);
        assert!((motp - 0.78).abs() < 1e-15);
        let c = ClearCounts {
            tp: 9,
            fp: 1,
            misses: 1,
            num_gt: 10,
            iou_sum: 9.0,
            ..Default::default()
        };
        assert!((metrics_from_counts(&c).unwrap().0 - 0.8).abs() < 1e-15);
        assert!(matches!(
            metrics_from_counts(&ClearCounts::default()),
            Err(EvalError::EmptyGroundTruth)
        ));
        let c = ClearCounts {
            misses: 4,
            num_gt: 4,
            ..Default::default()
        };
        assert_eq!(metrics_from_counts(&c).unwrap(), (0.0, 0.0));
    }

    fn seq(g: Vec<(u32, GtObject)>, p: Vec<(u32, TrackReport)>) -> EvalSequence {
        EvalSequence {
            name: "0000".into(),
            gt: groups(&g),
            preds: groups(&p),
        }
    }

    #[test]
    fn perfect_tracker_scores_one() {
        let g: Vec<_> = (0..5).map(|f| (f, gt(f, 0, bx(0.0, 10.0)))).collect();
        let p: Vec<_> = (0..5)
            .map(|f| (f, pred(f, 1, bx(0.0, 10.0), 0.5)))
            .collect();
        let m = sweep_thresholds(&[seq(g, p)], &EvalConfig::default()).unwrap();
        assert_eq!(m.curve.len(), 40);
        assert_eq!((m.samota, m.amota, m.amotp), (1.0, 1.0, 1.0));
    }

    #[test]
    fn no_predictions_scores_zero() {
        let g: Vec<_> = (0..5).map(|f| (f, gt(f, 0, bx(0.0, 10.0)))).collect();
        let r = evaluate(&[seq(g, vec![])], &EvalConfig::default()).unwrap();
        assert_eq!(
            (r.integral.samota, r.integral.amota, r.integral.amotp),
            (0.0, 0.0, 0.0)
        );
        assert_eq!(r.best.counts.misses, 5);
    }

    #[test]
    fn empty_ground_truth_is_error() {
        let p = vec![(0, pred(0, 1, bx(0.0, 10.0), 1.0))];
        assert!(matches!(
            evaluate(&[seq(vec![], p)], &EvalConfig::default()),
            Err(EvalError::EmptyGroundTruth)
        ));
    }

    #[test]
    fn half_recall_curve() {
        // Two objects, only one ever tracked: recall 0.5 at every threshold.
        let mut g = Vec::new();
        let mut p = Vec::new();
        for f in 0..4u32 {
            g.push((f, gt(f, 0, bx(0.0, 10.0))));
            g.push((f, gt(f, 1, bx(0.0, 30.0))));
            p.push((f, pred(f, 1, bx(0.0, 10.0), 0.9)));
        }
        let m = sweep_thresholds(
            &[seq(g, p)],
            &EvalConfig {
                min_iou: 0.25,
                recall_points: 4,
            },
        )
        .unwrap();
        // r = 0.25, 0.5 reached (mota 0.5; smota 1 at 0.5, clamped at 0.25), r = 0.75, 1 not.
        let smota: Vec<f64> = m.curve.iter().map(|p| p.smota).collect();
        let mota: Vec<f64> = m.curve.iter().map(|p| p.mota).collect();
        assert_eq!(mota, vec![0.5, 0.5, 0.0, 0.0]);
        assert_eq!(smota, vec![1.0, 1.0, 0.0, 0.0]);
        assert_eq!(m.amota, 0.25);
        assert_eq!(m.samota, 0.5);
    }

    #[test]
    fn csv_layout() {
        let g: Vec<_> = (0..2).map(|f| (f, gt(f, 0, bx(0.0, 10.0)))).collect();
        let p: Vec<_> = (0..2)
            .map(|f| (f, pred(f, 1, bx(0.0, 10.0), 0.5)))
            .collect();
        let m = sweep_thresholds(
            &[seq(g, p)],
            &EvalConfig {
                min_iou: 0.25,
                recall_points: 2,
            },
        )
        .unwrap();
        let mut buf = Vec::new();
        write_curve_csv(&m, &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "recall_target,threshold,recall,mota,mota_unfloored,smota,motp\n\
             0.5,0.5,1,1,1,1,1\n\
             1,0.5,1,1,1,1,1\n\
             mean,,,1,1,1,1\n"
        );
    }
}
