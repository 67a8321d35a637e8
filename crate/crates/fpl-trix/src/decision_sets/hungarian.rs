//! Minimum-cost perfect matching on the n x n bipartite graph.
//!
//! The solver is the classic successive-shortest-augmenting-path algorithm
//! with row/column potentials (O(n^3)). It works for arbitrary signed real
//! costs and returns the dual potentials, whose reduced costs certify whether
//! the optimum is unique. When the certificate fails, a small search fixes
//! rows one at a time and re-solves the remaining subproblem to break ties
//! toward the lexicographically smallest incidence vector (for each row in
//! turn, the largest column index among exact minimizers). Tie comparisons
//! are exact float comparisons of identically-shaped sums, so they are exact
//! whenever the cost arithmetic is.

pub(crate) struct AssignmentSolution {
    /// Column assigned to each row.
    pub row_to_col: Vec<usize>,
    /// Row potentials `u` satisfying `cost[r][c] - u[r] - v[c] >= 0`.
    pub row_duals: Vec<f64>,
    /// Column potentials `v`; reduced cost vanishes on assigned pairs.
    pub col_duals: Vec<f64>,
}

/// Solves the assignment problem on a row-major `n x n` cost matrix.
pub(crate) fn solve_assignment(n: usize, cost: &[f64]) -> AssignmentSolution {
    debug_assert_eq!(cost.len(), n * n);
    // 1-indexed arrays with a virtual column 0 holding the row being inserted.
    let mut u = vec![0.0f64; n + 1];
    let mut v = vec![0.0f64; n + 1];
    let mut col_to_row = vec![0usize; n + 1]; // 0 = unassigned
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        col_to_row[0] = i;
        let mut j0 = 0usize;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = col_to_row[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0usize;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let reduced = cost[(i0 - 1) * n + (j - 1)] - u[i0] - v[j];
                if reduced < minv[j] {
                    minv[j] = reduced;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[col_to_row[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if col_to_row[j0] == 0 {
                break;
            }
        }
        // Augment along the recorded alternating path.
        loop {
            let j1 = way[j0];
            col_to_row[j0] = col_to_row[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut row_to_col = vec![0usize; n];
    for j in 1..=n {
        row_to_col[col_to_row[j] - 1] = j - 1;
    }
    AssignmentSolution {
        row_to_col,
        row_duals: u[1..].to_vec(),
        col_duals: v[1..].to_vec(),
    }
}

/// Finds the minimum-cost assignment, breaking exact-cost ties toward the
/// lexicographically smallest row-major incidence vector.
pub(crate) fn lexicographic_min_assignment(n: usize, cost: &[f64]) -> Vec<usize> {
    let base = solve_assignment(n, cost);
    if n <= 1 || certainly_unique(n, cost, &base) {
        return base.row_to_col;
    }
    // Fix rows one at a time. For row r, a candidate column c scores
    // prefix + cost[r][c] + (optimal completion on the remaining rows/cols);
    // among exact minimizers the largest column wins, which makes the
    // incidence vector lexicographically smallest.
    let mut remaining_cols: Vec<usize> = (0..n).collect();
    let mut assignment = vec![0usize; n];
    let mut prefix = 0.0f64;
    for r in 0..n {
        let rest = n - r - 1;
        let mut best_total = f64::INFINITY;
        let mut best_col = remaining_cols[0];
        for (slot, &c) in remaining_cols.iter().enumerate() {
            let completion = if rest == 0 {
                0.0
            } else {
                let mut sub = Vec::with_capacity(rest * rest);
                for rr in (r + 1)..n {
                    for (s2, &cc) in remaining_cols.iter().enumerate() {
                        if s2 != slot {
                            sub.push(cost[rr * n + cc]);
                        }
                    }
                }
                let sol = solve_assignment(rest, &sub);
                // Canonical value: sum assigned entries in row order.
                let mut total = 0.0;
                for (rr, &cc) in sol.row_to_col.iter().enumerate() {
                    total += sub[rr * rest + cc];
                }
                total
            };
            let total = prefix + cost[r * n + c] + completion;
            // `>=` so that among exact ties the last (largest) column wins.
            if total < best_total || (total == best_total && c >= best_col) {
                best_total = total;
                best_col = c;
            }
        }
        assignment[r] = best_col;
        prefix += cost[r * n + best_col];
        remaining_cols.retain(|&c| c != best_col);
    }
    assignment
}

/// Dual certificate: if every non-assigned pair has strictly positive reduced
/// cost (beyond float noise), the optimal assignment is unique and already
/// lexicographically minimal by default. False negatives only cost time.
fn certainly_unique(n: usize, cost: &[f64], sol: &AssignmentSolution) -> bool {
    let scale = cost.iter().fold(1.0f64, |m, &c| m.max(c.abs()));
    let tol = 1e-9 * scale;
    for r in 0..n {
        for c in 0..n {
            if c == sol.row_to_col[r] {
                continue;
            }
            let reduced = cost[r * n + c] - sol.row_duals[r] - sol.col_duals[c];
            if reduced <= tol {
                return false;
            }
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assignment_value(n: usize, cost: &[f64], asg: &[usize]) -> f64 {
        asg.iter()
            .enumerate()
            .fold(0.0, |acc, (r, &c)| acc + cost[r * n + c])
    }

    /// Every permutation of 0..n, for brute-force comparison.
    fn permutations(n: usize) -> Vec<Vec<usize>> {
        if n == 1 {
            return vec![vec![0]];
        }
        let mut out = Vec::new();
        for p in permutations(n - 1) {
            for slot in 0..n {
                let mut q: Vec<usize> = p.iter().map(|&x| if x >= slot { x + 1 } else { x }).collect();
                q.insert(0, slot);
                out.push(q);
            }
        }
        out
    }

    #[test]
    fn matches_brute_force_on_random_signed_costs() {
        use rand::Rng;
        let mut rng = crate::rng::stream_rng(99, &[1]);
        for n in 1..=4usize {
            for _ in 0..200 {
                let cost: Vec<f64> = (0..n * n).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let sol = solve_assignment(n, &cost);
                let got = assignment_value(n, &cost, &sol.row_to_col);
                let best = permutations(n)
                    .iter()
                    .map(|p| assignment_value(n, &cost, p))
                    .fold(f64::INFINITY, f64::min);
                assert!(
                    (got - best).abs() < 1e-9,
                    "n={n} got {got} best {best}"
                );
                // Dual feasibility: reduced costs nonnegative up to noise.
                for r in 0..n {
                    for c in 0..n {
                        let rc = cost[r * n + c] - sol.row_duals[r] - sol.col_duals[c];
                        assert!(rc > -1e-9, "negative reduced cost {rc}");
                    }
                }
            }
        }
    }

    #[test]
    fn tie_breaks_toward_largest_column_per_row() {
        // All-zero 2x2 matrix: both assignments cost 0. Incidence vectors in
        // row-major order: id = 1001, swap = 0110; swap is smaller, i.e. row 0
        // takes column 1.
        let asg = lexicographic_min_assignment(2, &[0.0; 4]);
        assert_eq!(asg, vec![1, 0]);
        // All-zero 3x3: rows take columns 2, 1, 0.
        let asg = lexicographic_min_assignment(3, &[0.0; 9]);
        assert_eq!(asg, vec![2, 1, 0]);
        // Partial tie: row 0 must take column 0 (cost gap), rows 1..2 tie.
        let cost = vec![
            0.0, 9.0, 9.0, //
            1.0, 2.0, 2.0, //
            1.0, 2.0, 2.0, //
        ];
        let asg = lexicographic_min_assignment(3, &cost);
        assert_eq!(asg, vec![0, 2, 1]);
    }

    #[test]
    fn unique_optimum_skips_refinement() {
        let cost = vec![
            0.0, 5.0, //
            5.0, 0.0, //
        ];
        let sol = solve_assignment(2, &cost);
        assert!(certainly_unique(2, &cost, &sol));
        assert_eq!(lexicographic_min_assignment(2, &cost), vec![0, 1]);
    }
}
