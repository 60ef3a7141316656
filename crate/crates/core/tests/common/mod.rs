//! Independent reference implementations used by the integration tests.
//!
//! Nothing here calls into the code under test except to construct inputs
//! and, for the evaluator oracle, to obtain the pairwise 3D IoU values that
//! both implementations must consume identically.
#![allow(dead_code)]

use std::collections::{BTreeMap, HashMap};
use std::f64::consts::PI;

use ab3dmot::{iou3d, Box3D, FrameGroups, GtObject, TrackReport};
use rand::rngs::SmallRng;
use rand::Rng;

// ---------------------------------------------------------------------------
// Geometry: Monte-Carlo volume sampling.

/// A KITTI box prepared for point membership tests. The box occupies
/// `y - h ..= y` vertically and its footprint is the `l × w` rectangle
/// rotated by `R_y(theta) = [[c, 0, s], [0, 1, 0], [-s, 0, c]]`.
struct Solid {
    x: f64,
    z: f64,
    y_top: f64,
    y_bottom: f64,
    sin: f64,
    cos: f64,
    half_l: f64,
    half_w: f64,
}

impl Solid {
    fn new(b: &Box3D) -> Self {
        let (sin, cos) = b.theta().sin_cos();
        Self {
            x: b.x(),
            z: b.z(),
            y_top: b.y() - b.h(),
            y_bottom: b.y(),
            sin,
            cos,
            half_l: b.l() / 2.0,
            half_w: b.w() / 2.0,
        }
    }

    #[inline]
    fn contains(&self, p: [f64; 3]) -> bool {
        if p[1] > self.y_bottom || p[1] < self.y_top {
            return false;
        }
        let (dx, dz) = (p[0] - self.x, p[2] - self.z);
        // R_y(theta)^T applied to the offset.
        let local_l = self.cos * dx - self.sin * dz;
        let local_w = self.sin * dx + self.cos * dz;
        local_l.abs() <= self.half_l && local_w.abs() <= self.half_w
    }
}

/// Axis-aligned bounds `[min, max]` per axis, from the eight corners.
fn aabb(b: &Box3D) -> [[f64; 2]; 3] {
    let (s, c) = b.theta().sin_cos();
    let mut out = [[f64::INFINITY, f64::NEG_INFINITY]; 3];
    for sl in [-0.5, 0.5] {
        for sw in [-0.5, 0.5] {
            let (dl, dw) = (sl * b.l(), sw * b.w());
            let x = b.x() + c * dl + s * dw;
            let z = b.z() - s * dl + c * dw;
            for (axis, v) in [(0, x), (2, z)] {
                out[axis][0] = out[axis][0].min(v);
                out[axis][1] = out[axis][1].max(v);
            }
        }
    }
    out[1] = [b.y() - b.h(), b.y()];
    out
}

/// IoU estimated from `n³` stratified jittered samples over the bounding box
/// of the union. Returns exactly 0 when the bounding boxes are disjoint.
pub fn mc_iou(a: &Box3D, b: &Box3D, n: usize, rng: &mut SmallRng) -> f64 {
    let (ba, bb) = (aabb(a), aabb(b));
    if (0..3).any(|k| ba[k][1] < bb[k][0] || bb[k][1] < ba[k][0]) {
        return 0.0;
    }
    let lo: [f64; 3] = std::array::from_fn(|k| ba[k][0].min(bb[k][0]));
    let step: [f64; 3] = std::array::from_fn(|k| (ba[k][1].max(bb[k][1]) - lo[k]) / n as f64);
    let (sa, sb) = (Solid::new(a), Solid::new(b));
    let (mut in_a, mut in_b, mut both) = (0u64, 0u64, 0u64);
    for i in 0..n {
        let x = lo[0] + i as f64 * step[0];
        for j in 0..n {
            let y = lo[1] + j as f64 * step[1];
            for k in 0..n {
                let z = lo[2] + k as f64 * step[2];
                let p = [
                    x + rng.gen::<f64>() * step[0],
                    y + rng.gen::<f64>() * step[1],
                    z + rng.gen::<f64>() * step[2],
                ];
                let (ia, ib) = (sa.contains(p), sb.contains(p));
                in_a += u64::from(ia);
                in_b += u64::from(ib);
                both += u64::from(ia && ib);
            }
        }
    }
    let union = in_a + in_b - both;
    if union == 0 {
        0.0
    } else {
        both as f64 / union as f64
    }
}

/// A KITTI-plausible pair: sizes 0.5–6 m, footprint centers 0–10 m apart in
/// a random direction, bottoms within ±1 m of each other.
pub fn random_box_pair(rng: &mut SmallRng) -> (Box3D, Box3D) {
    let mut size = || rng.gen_range(0.5..6.0);
    let (la, wa, ha, lb, wb, hb) = (size(), size(), size(), size(), size(), size());
    let a = Box3D::new(
        rng.gen_range(-20.0..20.0),
        rng.gen_range(1.0..2.0),
        rng.gen_range(5.0..50.0),
        la,
        wa,
        ha,
        rng.gen_range(-PI..PI),
    )
    .unwrap();
    let d = rng.gen_range(0.0..10.0);
    let dir = rng.gen_range(-PI..PI);
    let b = Box3D::new(
        a.x() + d * dir.cos(),
        a.y() + rng.gen_range(-1.0..1.0),
        a.z() + d * dir.sin(),
        lb,
        wb,
        hb,
        rng.gen_range(-PI..PI),
    )
    .unwrap();
    (a, b)
}

// ---------------------------------------------------------------------------
// Assignment: exhaustive enumeration.

/// Minimum total cost over all matchings of size `min(rows, cols)`, summing
/// each candidate in row order.
pub fn brute_min_cost(cost: &[Vec<f64>]) -> f64 {
    let rows = cost.len();
    let cols = cost.first().map_or(0, Vec::len);
    if rows == 0 || cols == 0 {
        return 0.0;
    }
    if rows > cols {
        let t: Vec<Vec<f64>> = (0..cols)
            .map(|j| (0..rows).map(|i| cost[i][j]).collect())
            .collect();
        return brute_min_cost_rows(&t);
    }
    brute_min_cost_rows(cost)
}

/// Rows ≤ cols: every row gets a distinct column.
fn brute_min_cost_rows(cost: &[Vec<f64>]) -> f64 {
    fn go(cost: &[Vec<f64>], row: usize, used: &mut [bool], acc: f64, best: &mut f64) {
        if row == cost.len() {
            *best = best.min(acc);
            return;
        }
        for j in 0..used.len() {
            if !used[j] {
                used[j] = true;
                go(cost, row + 1, used, acc + cost[row][j], best);
                used[j] = false;
            }
        }
    }
    let mut best = f64::INFINITY;
    go(cost, 0, &mut vec![false; cost[0].len()], 0.0, &mut best);
    best
}

// ---------------------------------------------------------------------------
// Evaluation: recompute everything from scratch at every threshold.

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct BruteCounts {
    pub tp: u64,
    pub fp: u64,
    pub fn_: u64,
    pub ids: u64,
    pub frag: u64,
    pub iou_sum: f64,
    pub num_gt: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BruteReport {
    pub samota: f64,
    pub amota: f64,
    pub amotp: f64,
    pub mota: f64,
    pub motp: f64,
    pub ids: u64,
    pub frag: u64,
    /// `(threshold, counts)` for every distinct score, descending.
    pub per_threshold: Vec<(f64, BruteCounts)>,
}

pub struct BruteSequence<'a> {
    pub gt: &'a FrameGroups<GtObject>,
    pub preds: &'a FrameGroups<TrackReport>,
}

/// Best partial matching over feasible pairs: most pairs, then highest IoU
/// total. Returns `(row, col)` pairs.
fn best_partial_matching(iou: &[Vec<f64>], gate: f64) -> Vec<(usize, usize)> {
    fn go(
        iou: &[Vec<f64>],
        gate: f64,
        row: usize,
        used: &mut Vec<bool>,
        cur: &mut Vec<(usize, usize)>,
        cur_sum: f64,
        best: &mut (usize, f64, Vec<(usize, usize)>),
    ) {
        if row == iou.len() {
            if cur.len() > best.0 || (cur.len() == best.0 && cur_sum > best.1) {
                *best = (cur.len(), cur_sum, cur.clone());
            }
            return;
        }
        for j in 0..used.len() {
            if !used[j] && iou[row][j] >= gate {
                used[j] = true;
                cur.push((row, j));
                go(iou, gate, row + 1, used, cur, cur_sum + iou[row][j], best);
                cur.pop();
                used[j] = false;
            }
        }
        go(iou, gate, row + 1, used, cur, cur_sum, best);
    }
    let cols = iou.first().map_or(0, Vec::len);
    let mut best = (0, f64::NEG_INFINITY, Vec::new());
    go(
        iou,
        gate,
        0,
        &mut vec![false; cols],
        &mut Vec::new(),
        0.0,
        &mut best,
    );
    best.2
}

fn brute_clear(seq: &BruteSequence, threshold: f64, gate: f64) -> BruteCounts {
    let mut c = BruteCounts::default();
    let last = seq.gt.keys().chain(seq.preds.keys()).copied().max();
    let Some(last) = last else {
        return c;
    };
    let mut prev: HashMap<i64, u64> = HashMap::new();
    let mut ever_pred: HashMap<i64, u64> = HashMap::new();
    // gt id → currently tracked? (present only once ever matched)
    let mut tracked: HashMap<i64, bool> = HashMap::new();

    for frame in 0..=last {
        let gts: Vec<&GtObject> = seq
            .gt
            .get(&frame)
            .map(|v| {
                v.iter()
                    .filter(|g| g.category != "DontCare" && g.box3d.is_some())
                    .collect()
            })
            .unwrap_or_default();
        let preds: Vec<&TrackReport> = seq
            .preds
            .get(&frame)
            .map(|v| v.iter().filter(|p| p.score >= threshold).collect())
            .unwrap_or_default();
        let iou: Vec<Vec<f64>> = gts
            .iter()
            .map(|g| {
                preds
                    .iter()
                    .map(|p| iou3d(g.box3d.as_ref().unwrap(), &p.box3d))
                    .collect()
            })
            .collect();

        let mut gt_to: Vec<Option<usize>> = vec![None; gts.len()];
        let mut pred_used = vec![false; preds.len()];
        for (gi, g) in gts.iter().enumerate() {
            if let Some(&pid) = prev.get(&g.track_id) {
                if let Some(pj) = (0..preds.len()).find(|&pj| !pred_used[pj] && preds[pj].id == pid)
                {
                    if iou[gi][pj] >= gate {
                        gt_to[gi] = Some(pj);
                        pred_used[pj] = true;
                    }
                }
            }
        }
        let free_g: Vec<usize> = (0..gts.len()).filter(|&g| gt_to[g].is_none()).collect();
        let free_p: Vec<usize> = (0..preds.len()).filter(|&p| !pred_used[p]).collect();
        let sub: Vec<Vec<f64>> = free_g
            .iter()
            .map(|&g| free_p.iter().map(|&p| iou[g][p]).collect())
            .collect();
        for (r, col) in best_partial_matching(&sub, gate) {
            gt_to[free_g[r]] = Some(free_p[col]);
            pred_used[free_p[col]] = true;
        }

        prev.clear();
        for (gi, g) in gts.iter().enumerate() {
            c.num_gt += 1;
            match gt_to[gi] {
                Some(pj) => {
                    c.tp += 1;
                    c.iou_sum += iou[gi][pj];
                    let pid = preds[pj].id;
                    if let Some(&old) = ever_pred.get(&g.track_id) {
                        if old != pid {
                            c.ids += 1;
                        }
                    }
                    ever_pred.insert(g.track_id, pid);
                    if tracked.get(&g.track_id) == Some(&false) {
                        c.frag += 1;
                    }
                    tracked.insert(g.track_id, true);
                    prev.insert(g.track_id, pid);
                }
                None => {
                    c.fn_ += 1;
                    if let Some(t) = tracked.get_mut(&g.track_id) {
                        *t = false;
                    }
                }
            }
        }
        c.fp += pred_used.iter().filter(|u| !**u).count() as u64;
    }
    c
}

fn add(a: &mut BruteCounts, b: &BruteCounts) {
    a.tp += b.tp;
    a.fp += b.fp;
    a.fn_ += b.fn_;
    a.ids += b.ids;
    a.frag += b.frag;
    a.iou_sum += b.iou_sum;
    a.num_gt += b.num_gt;
}

/// Sequence counts are summed in order before any ratio is formed.
pub fn brute_evaluate(seqs: &[BruteSequence], gate: f64, recall_points: u64) -> BruteReport {
    let mut scores: Vec<f64> = seqs
        .iter()
        .flat_map(|s| s.preds.values().flatten().map(|p| p.score))
        .collect();
    scores.sort_by(|a, b| b.partial_cmp(a).unwrap());
    scores.dedup();
    if scores.is_empty() {
        scores.push(f64::NEG_INFINITY);
    }
    let per_threshold: Vec<(f64, BruteCounts)> = scores
        .iter()
        .map(|&t| {
            let mut total = BruteCounts::default();
            for s in seqs {
                add(&mut total, &brute_clear(s, t, gate));
            }
            (t, total)
        })
        .collect();
    let n = per_threshold[0].1.num_gt;
    let nf = n as f64;
    let any_preds = seqs.iter().any(|s| s.preds.values().any(|v| !v.is_empty()));

    let (mut s_sum, mut a_sum, mut p_sum) = (0.0, 0.0, 0.0);
    for k in 1..=recall_points {
        let r = k as f64 / recall_points as f64;
        let mut chosen: Option<&BruteCounts> = None;
        if any_preds {
            for (_, c) in &per_threshold {
                // recall = tp/n ≥ k/L, compared without rounding.
                if (c.tp as u128) * (recall_points as u128) >= (k as u128) * (n as u128)
                    && chosen.map_or(true, |b| c.tp < b.tp)
                {
                    chosen = Some(c);
                }
            }
        }
        if let Some(c) = chosen {
            let errors = (c.fp + c.fn_ + c.ids) as f64;
            let mota = 1.0 - errors / nf;
            let smota = 1.0 - (errors - (1.0 - r) * nf) / (r * nf);
            s_sum += smota.clamp(0.0, 1.0);
            a_sum += mota.max(0.0);
            p_sum += if c.tp == 0 {
                0.0
            } else {
                c.iou_sum / c.tp as f64
            };
        } else {
            s_sum += 0.0;
            a_sum += 0.0;
            p_sum += 0.0;
        }
    }
    let l = recall_points as f64;

    let mut best: Option<(f64, &BruteCounts)> = None;
    for (_, c) in &per_threshold {
        let mota = 1.0 - (c.fp + c.fn_ + c.ids) as f64 / nf;
        if best.map_or(true, |(m, _)| mota > m) {
            best = Some((mota, c));
        }
    }
    let (mota, bc) = best.unwrap();
    BruteReport {
        samota: s_sum / l,
        amota: a_sum / l,
        amotp: p_sum / l,
        mota,
        motp: if bc.tp == 0 {
            0.0
        } else {
            bc.iou_sum / bc.tp as f64
        },
        ids: bc.ids,
        frag: bc.frag,
        per_threshold,
    }
}

// ---------------------------------------------------------------------------
// Synthetic scored datasets for the evaluator.

pub struct ScoredDataset {
    pub gt: FrameGroups<GtObject>,
    pub preds: FrameGroups<TrackReport>,
}

pub fn gt_object(frame: u32, id: i64, b: Box3D) -> GtObject {
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

/// `objects` cars on nearby lanes over `frames` frames, with a tracker-like
/// output: position noise, dropouts, occasional id swaps, scored clutter and
/// a `DontCare` region.
pub fn scored_dataset(frames: u32, objects: usize, rng: &mut SmallRng) -> ScoredDataset {
    let mut gt: FrameGroups<GtObject> = BTreeMap::new();
    let mut preds: FrameGroups<TrackReport> = BTreeMap::new();
    let starts: Vec<(f64, f64, f64, f64)> = (0..objects)
        .map(|i| {
            (
                i as f64 * 2.5 + rng.gen_range(-0.5..0.5),
                rng.gen_range(10.0..20.0),
                rng.gen_range(-0.3..0.3),
                rng.gen_range(-0.5..0.5),
            )
        })
        .collect();
    let track_score: Vec<f64> = (0..objects).map(|_| rng.gen_range(0.0..10.0)).collect();
    let swap_at = rng.gen_range(0..frames);
    for f in 0..frames {
        let t = f as f64;
        for (i, &(x0, z0, vx, vz)) in starts.iter().enumerate() {
            let truth = Box3D::new(x0 + vx * t, 1.6, z0 + vz * t, 4.0, 1.8, 1.5, 0.0).unwrap();
            gt.entry(f).or_default().push(gt_object(f, i as i64, truth));
            if rng.gen_bool(0.15) {
                continue;
            }
            let mut id = i as u64 + 1;
            if f >= swap_at && objects >= 2 && i < 2 {
                id = 2 - i as u64;
            }
            let noisy = Box3D::new(
                truth.x() + rng.gen_range(-0.8..0.8),
                1.6 + rng.gen_range(-0.2..0.2),
                truth.z() + rng.gen_range(-0.8..0.8),
                4.0,
                1.8,
                1.5,
                rng.gen_range(-0.3..0.3),
            )
            .unwrap();
            let score = track_score[i] + rng.gen_range(0.0..1.0);
            preds.entry(f).or_default().push(TrackReport {
                frame: f,
                id,
                box3d: noisy,
                score,
            });
        }
        if rng.gen_bool(0.3) {
            let b = Box3D::new(
                rng.gen_range(-2.0..8.0),
                1.6,
                rng.gen_range(8.0..24.0),
                4.0,
                1.8,
                1.5,
                rng.gen_range(-PI..PI),
            )
            .unwrap();
            preds.entry(f).or_default().push(TrackReport {
                frame: f,
                id: 100 + u64::from(f),
                box3d: b,
                score: rng.gen_range(0.0..10.0),
            });
        }
        if f % 7 == 3 {
            let mut dc = gt_object(
                f,
                -1,
                Box3D::new(30.0, 1.6, 30.0, 4.0, 1.8, 1.5, 0.0).unwrap(),
            );
            dc.category = "DontCare".into();
            gt.entry(f).or_default().push(dc);
        }
    }
    ScoredDataset { gt, preds }
}
