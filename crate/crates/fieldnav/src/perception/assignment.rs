//! Minimum-cost bipartite assignment (Kuhn–Munkres) via the shortest
//! augmenting path formulation with row/column potentials.

/// Cost stand-in for "forbidden pairing". Any matched pair whose cost is at
/// least [`FORBIDDEN`]`/2` should be treated as unmatched by callers.
pub const FORBIDDEN: f64 = 1e9;

/// Matrices up to this size are solved densely in one shot; larger ones are
/// first split into connected components of the affordable-pair graph.
const DECOMPOSE_ABOVE: usize = 16;

/// Solve the rectangular min-cost assignment over `cost[row][col]`.
///
/// Returns, per row, the matched column; rows whose every pairing is
/// forbidden may come back `None`, and callers filter any remaining matches
/// with cost ≥ [`FORBIDDEN`]`/2`. Among matchings of maximum affordable
/// cardinality the returned one has minimal total cost.
///
/// Large sparse programs (the common case under a tight association gate)
/// are decomposed into connected components of the bipartite graph whose
/// edges are the affordable pairs; each component is solved independently,
/// which leaves the optimum unchanged because no affordable matching can
/// cross components.
pub fn min_cost_assignment(cost: &[Vec<f64>]) -> Vec<Option<usize>> {
    let n_rows = cost.len();
    let n_cols = cost.first().map_or(0, Vec::len);
    if n_rows == 0 || n_cols == 0 {
        return vec![None; n_rows];
    }
    if n_rows.max(n_cols) <= DECOMPOSE_ABOVE {
        return solve_dense(&|i, j| cost[i][j], n_rows, n_cols);
    }

    // Union affordable pairs; forbidden entries carry no information.
    let mut dsu = DisjointSet::new(n_rows + n_cols);
    for (i, row) in cost.iter().enumerate() {
        for (j, &c) in row.iter().enumerate() {
            if c < FORBIDDEN / 2.0 {
                dsu.union(i, n_rows + j);
            }
        }
    }

    let mut members: std::collections::HashMap<usize, (Vec<usize>, Vec<usize>)> =
        std::collections::HashMap::new();
    for i in 0..n_rows {
        if cost[i].iter().any(|&c| c < FORBIDDEN / 2.0) {
            members.entry(dsu.find(i)).or_default().0.push(i);
        }
    }
    for j in 0..n_cols {
        if cost.iter().any(|row| row[j] < FORBIDDEN / 2.0) {
            members.entry(dsu.find(n_rows + j)).or_default().1.push(j);
        }
    }

    let mut row_to_col = vec![None; n_rows];
    let mut roots: Vec<usize> = members.keys().copied().collect();
    roots.sort_unstable();
    for root in roots {
        let (rows, cols) = &members[&root];
        let sub = solve_dense(&|i, j| cost[rows[i]][cols[j]], rows.len(), cols.len());
        for (i, matched) in sub.into_iter().enumerate() {
            row_to_col[rows[i]] = matched.map(|j| cols[j]);
        }
    }
    row_to_col
}

/// Plain union-find with path halving; no ranks needed at these sizes.
struct DisjointSet {
    parent: Vec<usize>,
}

impl DisjointSet {
    fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb);
        }
    }
}

/// Kuhn–Munkres over an `n_rows × n_cols` cost oracle, padded to square.
fn solve_dense(
    cost: &dyn Fn(usize, usize) -> f64,
    n_rows: usize,
    n_cols: usize,
) -> Vec<Option<usize>> {
    let n = n_rows.max(n_cols);
    // Pad to square with forbidden entries so every row/col can match.
    let a = |i: usize, j: usize| -> f64 {
        if i < n_rows && j < n_cols {
            cost(i, j)
        } else {
            FORBIDDEN
        }
    };

    // Potentials and matching arrays are 1-indexed; p[j] is the row matched
    // to column j (0 = free).
    let mut u = vec![0.0f64; n + 1];
    let mut v = vec![0.0f64; n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];

    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0usize;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0usize;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = a(i0 - 1, j - 1) - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        // Augment along the alternating path back to the free column.
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    let mut row_to_col = vec![None; n_rows];
    for j in 1..=n {
        let i = p[j];
        if i >= 1 && i - 1 < n_rows && j - 1 < n_cols {
            row_to_col[i - 1] = Some(j - 1);
        }
    }
    row_to_col
}
