//! Exact minimum-cost bipartite matching.
//!
//! Rectangular problems are padded to square with zero-cost dummy rows or
//! columns, solved with the O(n³) shortest-augmenting-path Hungarian method,
//! then canonicalized: among all optimal assignments the one whose column
//! sequence (row by row, dummies last) is lexicographically smallest is
//! returned. Canonicalization only walks edges that are tight under the final
//! dual potentials, which is exactly the set of edges any optimal assignment
//! may use.

use thiserror::Error;

/// Reduced costs at or below this (relative to the largest cost magnitude)
/// are treated as tight.
const TIGHT_EPS: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AssignmentError {
    #[error("row {row} has {len} columns, expected {expected}")]
    Ragged { row: usize, len: usize, expected: usize },
    #[error("cost at ({row}, {col}) is {value}, not finite")]
    NonFinite { row: usize, col: usize, value: f64 },
}

/// N×M grid of finite costs. The metrics only ever produce costs in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct CostMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl CostMatrix {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self, AssignmentError> {
        let n = rows.len();
        let m = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(n * m);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != m {
                return Err(AssignmentError::Ragged { row: i, len: row.len(), expected: m });
            }
            for (j, value) in row.into_iter().enumerate() {
                if !value.is_finite() {
                    return Err(AssignmentError::NonFinite { row: i, col: j, value });
                }
                data.push(value);
            }
        }
        // A 0×M or N×0 matrix is empty either way.
        let (rows, cols) = if n == 0 || m == 0 { (n, 0) } else { (n, m) };
        Ok(CostMatrix { rows, cols, data })
    }

    /// Builds the matrix from a cost function.
    ///
    /// # Panics
    ///
    /// If `f` returns a non-finite value.
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let cols = if rows == 0 { 0 } else { cols };
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                let v = f(i, j);
                assert!(v.is_finite(), "cost ({i}, {j}) is {v}");
                data.push(v);
            }
        }
        CostMatrix { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.cols + col]
    }
}

/// Set of `(row, col)` pairs, sorted by row; no row or column repeats.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Matching {
    pairs: Vec<(usize, usize)>,
}

impl Matching {
    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Sum of the matched costs, accumulated in row order.
    pub fn total_cost(&self, costs: &CostMatrix) -> f64 {
        self.pairs.iter().map(|&(i, j)| costs.get(i, j)).sum()
    }
}

/// Minimum-cost matching of size `min(N, M)`. Deterministic: ties resolve to
/// the lexicographically smallest assignment.
pub fn min_cost_matching(costs: &CostMatrix) -> Matching {
    let (n_rows, n_cols) = (costs.rows(), costs.cols());
    if n_rows == 0 || n_cols == 0 {
        return Matching::default();
    }
    let n = n_rows.max(n_cols);
    let cost = |i: usize, j: usize| -> f64 {
        if i < n_rows && j < n_cols {
            costs.get(i, j)
        } else {
            0.0
        }
    };

    let scale = costs.data.iter().fold(1.0f64, |acc, c| acc.max(c.abs()));
    let eps = TIGHT_EPS * scale;
    let (mut row_to_col, u, v) = hungarian(n, &cost);
    canonicalize(n, &mut row_to_col, |i, j| cost(i, j) - u[i] - v[j] <= eps);

    let pairs = row_to_col
        .into_iter()
        .enumerate()
        .filter(|&(i, j)| i < n_rows && j < n_cols)
        .collect();
    Matching { pairs }
}

/// Returns the row→column assignment and the row/column potentials, such that
/// `cost(i, j) - u[i] - v[j] >= 0` everywhere (up to rounding) with equality on
/// assigned edges.
fn hungarian(n: usize, cost: &impl Fn(usize, usize) -> f64) -> (Vec<usize>, Vec<f64>, Vec<f64>) {
    // 1-based internally; index 0 is the virtual source column/row.
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut col_owner = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    let mut min_slack = vec![0.0; n + 1];
    let mut used = vec![false; n + 1];

    for i in 1..=n {
        col_owner[0] = i;
        let mut j0 = 0;
        min_slack.iter_mut().for_each(|x| *x = f64::INFINITY);
        used.iter_mut().for_each(|x| *x = false);
        loop {
            used[j0] = true;
            let i0 = col_owner[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let reduced = cost(i0 - 1, j - 1) - u[i0] - v[j];
                if reduced < min_slack[j] {
                    min_slack[j] = reduced;
                    way[j] = j0;
                }
                if min_slack[j] < delta {
                    delta = min_slack[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[col_owner[j]] += delta;
                    v[j] -= delta;
                } else {
                    min_slack[j] -= delta;
                }
            }
            j0 = j1;
            if col_owner[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            col_owner[j0] = col_owner[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    let mut row_to_col = vec![0; n];
    for j in 1..=n {
        row_to_col[col_owner[j] - 1] = j - 1;
    }
    (row_to_col, u[1..].to_vec(), v[1..].to_vec())
}

/// Rewrites a perfect matching on the tight-edge graph into the
/// lexicographically smallest one, fixing rows in order.
fn canonicalize(n: usize, row_to_col: &mut [usize], tight: impl Fn(usize, usize) -> bool) {
    let mut col_to_row = vec![0; n];
    for (i, &j) in row_to_col.iter().enumerate() {
        col_to_row[j] = i;
    }
    let mut col_fixed = vec![false; n];
    // Scratch for the alternating-path search.
    let mut parent_col = vec![usize::MAX; n];
    let mut seen_row = vec![false; n];
    let mut queue = Vec::with_capacity(n);

    for i in 0..n {
        for j in 0..n {
            if col_fixed[j] || !tight(i, j) {
                continue;
            }
            if row_to_col[i] == j {
                break;
            }
            // Reassign i→j: the previous owner of j must reach i's old column
            // through an alternating path over unfixed rows and columns.
            let target = row_to_col[i];
            let start = col_to_row[j];
            seen_row.iter_mut().for_each(|x| *x = false);
            parent_col.iter_mut().for_each(|x| *x = usize::MAX);
            seen_row[i] = true;
            seen_row[start] = true;
            queue.clear();
            queue.push(start);
            let mut head = 0;
            let mut found = false;
            'search: while head < queue.len() {
                let r = queue[head];
                head += 1;
                for c in 0..n {
                    if col_fixed[c] || c == j || c == row_to_col[r] || !tight(r, c) {
                        continue;
                    }
                    if c == target {
                        parent_col[c] = r;
                        found = true;
                        break 'search;
                    }
                    let owner = col_to_row[c];
                    if !seen_row[owner] {
                        seen_row[owner] = true;
                        parent_col[c] = r;
                        queue.push(owner);
                    }
                }
            }
            if !found {
                continue;
            }
            // Walk back from the target column, shifting each row onto the
            // column it reached.
            let mut c = target;
            loop {
                let r = parent_col[c];
                let prev = row_to_col[r];
                row_to_col[r] = c;
                col_to_row[c] = r;
                if r == start {
                    break;
                }
                c = prev;
            }
            row_to_col[i] = j;
            col_to_row[j] = i;
            break;
        }
        col_fixed[row_to_col[i]] = true;
    }
}
