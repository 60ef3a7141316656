//! Minimum-cost rectangular linear assignment (Kuhn–Munkres).
//!
//! The solver runs the shortest-augmenting-path Hungarian method with row and
//! column potentials on the orientation where rows ≤ cols. The resulting dual
//! potentials characterize every optimal assignment (complementary slackness),
//! which lets a second pass pick the lexicographically smallest optimum:
//! lowest row index first, each row taking its lowest feasible column.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AssignmentError {
    #[error("cost matrix has {len} entries, expected {rows}×{cols}")]
    Shape {
        rows: usize,
        cols: usize,
        len: usize,
    },
    #[error("cost[{row}][{col}] is not finite ({value})")]
    NonFinite { row: usize, col: usize, value: f64 },
    #[error("ragged cost matrix: row {row} has {found} columns, expected {expected}")]
    Ragged {
        row: usize,
        expected: usize,
        found: usize,
    },
}

/// Dense row-major matrix of finite costs. Lower is better.
#[derive(Debug, Clone, PartialEq)]
pub struct CostMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl CostMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self, AssignmentError> {
        if data.len() != rows * cols {
            return Err(AssignmentError::Shape {
                rows,
                cols,
                len: data.len(),
            });
        }
        if let Some(k) = data.iter().position(|c| !c.is_finite()) {
            return Err(AssignmentError::NonFinite {
                row: k / cols,
                col: k % cols,
                value: data[k],
            });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self, AssignmentError> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for (row, r) in rows.iter().enumerate() {
            let r = r.as_ref();
            if r.len() != cols {
                return Err(AssignmentError::Ragged {
                    row,
                    expected: cols,
                    found: r.len(),
                });
            }
            data.extend_from_slice(r);
        }
        Self::new(rows.len(), cols, data)
    }

    /// Fills a `rows × cols` matrix from `f(row, col)`.
    pub fn from_fn(
        rows: usize,
        cols: usize,
        mut f: impl FnMut(usize, usize) -> f64,
    ) -> Result<Self, AssignmentError> {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self::new(rows, cols, data)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.cols + col]
    }

    pub fn transpose(&self) -> CostMatrix {
        let mut data = Vec::with_capacity(self.data.len());
        for j in 0..self.cols {
            for i in 0..self.rows {
                data.push(self.get(i, j));
            }
        }
        CostMatrix {
            rows: self.cols,
            cols: self.rows,
            data,
        }
    }
}

/// Matched `(row, col)` pairs, sorted by row.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Assignment {
    pub pairs: Vec<(usize, usize)>,
}

impl Assignment {
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Sum of the matched entries, accumulated in row order.
    pub fn total_cost(&self, cost: &CostMatrix) -> f64 {
        self.pairs.iter().map(|&(i, j)| cost.get(i, j)).sum()
    }
}

/// Optimal assignment of `min(rows, cols)` pairs minimizing total cost.
///
/// Among equal-cost optima the lexicographically smallest pair list is
/// returned, so the output is a pure function of the input.
pub fn solve_min_cost(cost: &CostMatrix) -> Assignment {
    if cost.rows == 0 || cost.cols == 0 {
        return Assignment::default();
    }
    let transposed = cost.rows > cost.cols;
    let (u_small, v_large) = if transposed {
        hungarian(&cost.transpose())
    } else {
        hungarian(cost)
    };
    let (row_pot, col_pot) = if transposed {
        (v_large, u_small)
    } else {
        (u_small, v_large)
    };

    let scale = cost.data.iter().fold(1.0_f64, |m, c| m.max(c.abs()));
    let eps = 1e-9 * scale;
    let tight = |i: usize, j: usize| cost.get(i, j) - row_pot[i] - col_pot[j] <= eps;

    // Smaller side must be fully matched; a larger-side vertex with nonzero
    // potential must be matched by complementary slackness.
    let row_must: Vec<bool> = row_pot.iter().map(|&p| !transposed || p < -eps).collect();
    let col_must: Vec<bool> = col_pot.iter().map(|&p| transposed || p < -eps).collect();

    // Start from any optimum in the tight subgraph, then canonicalize.
    let witness = tight_matching(cost.rows, cost.cols, &tight, &row_must, &col_must);
    let pairs = lexicographic_optimum(cost.rows, cost.cols, &tight, &row_must, &col_must, witness);
    Assignment { pairs }
}

/// Shortest augmenting path Hungarian method for `rows ≤ cols`.
/// Returns dual potentials `(u, v)` with `cost[i][j] - u[i] - v[j] ≥ 0`,
/// equality on some optimal assignment, and `v[j] = 0` on unmatched columns.
fn hungarian(cost: &CostMatrix) -> (Vec<f64>, Vec<f64>) {
    let (n, m) = (cost.rows, cost.cols);
    debug_assert!(n <= m);
    // 1-based with a virtual column 0, as in the classic formulation.
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; m + 1];
    let mut row_of = vec![0usize; m + 1];
    let mut way = vec![0usize; m + 1];
    let mut minv = vec![0.0; m + 1];
    let mut used = vec![false; m + 1];

    for i in 1..=n {
        row_of[0] = i;
        let mut j0 = 0;
        minv.fill(f64::INFINITY);
        used.fill(false);
        loop {
            used[j0] = true;
            let i0 = row_of[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=m {
                if used[j] {
                    continue;
                }
                let cur = cost.get(i0 - 1, j - 1) - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=m {
                if used[j] {
                    u[row_of[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if row_of[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            row_of[j0] = row_of[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    (u[1..].to_vec(), v[1..].to_vec())
}

/// Kuhn augmenting-path search from `row` over tight edges to free or
/// re-routable columns. `col_owner[j]` is the row holding column `j`.
fn augment(
    row: usize,
    cols: usize,
    tight: &dyn Fn(usize, usize) -> bool,
    col_allowed: &[bool],
    row_allowed: &[bool],
    col_owner: &mut [Option<usize>],
    seen: &mut [bool],
) -> bool {
    for j in 0..cols {
        if seen[j] || !col_allowed[j] || !tight(row, j) {
            continue;
        }
        seen[j] = true;
        let free = match col_owner[j] {
            None => true,
            Some(r) => {
                row_allowed[r] && augment(r, cols, tight, col_allowed, row_allowed, col_owner, seen)
            }
        };
        if free {
            col_owner[j] = Some(row);
            return true;
        }
    }
    false
}

/// Whether the tight subgraph restricted to `row_allowed × col_allowed` has a
/// matching covering every must-row and every must-column among them.
/// Two one-sided matchings suffice (Mendelsohn–Dulmage).
fn coverable(
    rows: usize,
    cols: usize,
    tight: &dyn Fn(usize, usize) -> bool,
    row_allowed: &[bool],
    col_allowed: &[bool],
    row_must: &[bool],
    col_must: &[bool],
) -> bool {
    let mut col_owner = vec![None; cols];
    for i in (0..rows).filter(|&i| row_allowed[i] && row_must[i]) {
        let mut seen = vec![false; cols];
        if !augment(
            i,
            cols,
            tight,
            col_allowed,
            row_allowed,
            &mut col_owner,
            &mut seen,
        ) {
            return false;
        }
    }
    let tight_t = |j: usize, i: usize| tight(i, j);
    let mut row_owner = vec![None; rows];
    for j in (0..cols).filter(|&j| col_allowed[j] && col_must[j]) {
        let mut seen = vec![false; rows];
        if !augment(
            j,
            rows,
            &tight_t,
            row_allowed,
            col_allowed,
            &mut row_owner,
            &mut seen,
        ) {
            return false;
        }
    }
    true
}

/// Builds one optimal assignment from the tight subgraph: a matching that
/// covers all must-rows and must-columns.
fn tight_matching(
    rows: usize,
    cols: usize,
    tight: &dyn Fn(usize, usize) -> bool,
    row_must: &[bool],
    col_must: &[bool],
) -> Vec<Option<usize>> {
    let row_allowed = vec![true; rows];
    let col_allowed = vec![true; cols];
    // Cover must-rows first, then extend to must-columns by augmenting from
    // them in the reverse direction; augmenting paths never unmatch a vertex.
    let mut col_owner: Vec<Option<usize>> = vec![None; cols];
    for i in (0..rows).filter(|&i| row_must[i]) {
        let mut seen = vec![false; cols];
        augment(
            i,
            cols,
            tight,
            &col_allowed,
            &row_allowed,
            &mut col_owner,
            &mut seen,
        );
    }
    let mut row_owner: Vec<Option<usize>> = vec![None; rows];
    for (j, owner) in col_owner.iter().enumerate() {
        if let Some(i) = owner {
            row_owner[*i] = Some(j);
        }
    }
    let tight_t = |j: usize, i: usize| tight(i, j);
    for j in (0..cols).filter(|&j| col_must[j] && col_owner[j].is_none()) {
        let mut seen = vec![false; rows];
        augment_covering(j, rows, &tight_t, col_must, &mut row_owner, &mut seen);
    }
    row_owner
}

/// Augments from column `col` (acting as the left side) in the transposed
/// graph. Unlike [`augment`], a path may end at an already-matched row whose
/// current column is not required, which keeps the must-row cover intact.
fn augment_covering(
    col: usize,
    rows: usize,
    tight_t: &dyn Fn(usize, usize) -> bool,
    col_must: &[bool],
    row_owner: &mut [Option<usize>],
    seen: &mut [bool],
) -> bool {
    for i in 0..rows {
        if seen[i] || !tight_t(col, i) {
            continue;
        }
        seen[i] = true;
        let free = match row_owner[i] {
            None => true,
            Some(other) if !col_must[other] => true,
            Some(other) => augment_covering(other, rows, tight_t, col_must, row_owner, seen),
        };
        if free {
            row_owner[i] = Some(col);
            return true;
        }
    }
    false
}

fn lexicographic_optimum(
    rows: usize,
    cols: usize,
    tight: &dyn Fn(usize, usize) -> bool,
    row_must: &[bool],
    col_must: &[bool],
    witness: Vec<Option<usize>>,
) -> Vec<(usize, usize)> {
    let mut row_allowed = vec![true; rows];
    let mut col_allowed = vec![true; cols];
    let mut pairs = Vec::with_capacity(rows.min(cols));
    // While every fixed choice agrees with `witness`, the witness itself
    // proves feasibility of its own choice for the next row.
    let mut consistent = true;

    for i in 0..rows {
        row_allowed[i] = false;
        let mut chosen: Option<Option<usize>> = None;
        let candidates = (0..cols)
            .filter(|&j| col_allowed[j] && tight(i, j))
            .map(Some)
            .chain((!row_must[i]).then_some(None))
            .collect::<Vec<_>>();
        for cand in candidates {
            if consistent && cand == witness[i] {
                chosen = Some(cand);
                break;
            }
            if let Some(j) = cand {
                col_allowed[j] = false;
            }
            let ok = coverable(
                rows,
                cols,
                tight,
                &row_allowed,
                &col_allowed,
                row_must,
                col_must,
            );
            if ok {
                chosen = Some(cand);
                consistent = false;
                break;
            }
            if let Some(j) = cand {
                col_allowed[j] = true;
            }
        }
        match chosen {
            Some(Some(j)) => {
                col_allowed[j] = false;
                pairs.push((i, j));
            }
            Some(None) => {}
            // Unreachable with consistent potentials: the witness choice is
            // always feasible. Fall back to the witness.
            None => {
                if let Some(j) = witness[i].filter(|&j| col_allowed[j]) {
                    col_allowed[j] = false;
                    pairs.push((i, j));
                }
            }
        }
    }
    pairs
}
