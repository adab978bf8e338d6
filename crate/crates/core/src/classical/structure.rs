//! Positivity-pattern structure tests: connectivity of A A^T and full
//! indecomposability via bipartite matchings.

use super::{RealMatrix, Structure};

pub(super) fn compute(a: &RealMatrix) -> Structure {
    let n = a.n_rows();
    let strictly_positive = a.entries().iter().all(|&e| e > 0.0);
    let has_zero_row = (0..n).any(|i| (0..n).all(|j| a[(i, j)] == 0.0));
    let has_zero_col = (0..n).any(|j| (0..n).all(|i| a[(i, j)] == 0.0));
    Structure {
        strictly_positive,
        has_zero_row,
        has_zero_col,
        aat_irreducible: aat_irreducible(a),
        fully_indecomposable: fully_indecomposable(a),
    }
}

/// A A^T is irreducible iff the graph joining rows that share a positive
/// column is connected (A A^T is symmetric, so strong connectivity reduces
/// to connectivity).
#[allow(clippy::needless_range_loop)]
fn aat_irreducible(a: &RealMatrix) -> bool {
    let n = a.n_rows();
    if n == 1 {
        return a[(0, 0)] > 0.0;
    }
    let support: Vec<Vec<bool>> = (0..n)
        .map(|i| (0..n).map(|j| a[(i, j)] > 0.0).collect())
        .collect();
    let overlap = |i: usize, j: usize| (0..n).any(|k| support[i][k] && support[j][k]);

    let mut seen = vec![false; n];
    let mut stack = vec![0usize];
    seen[0] = true;
    while let Some(i) = stack.pop() {
        for j in 0..n {
            if !seen[j] && overlap(i, j) {
                seen[j] = true;
                stack.push(j);
            }
        }
    }
    seen.into_iter().all(|s| s)
}

/// Full indecomposability: for every nonempty proper row subset S the
/// column support of S exceeds |S| (strict Hall condition). Equivalent to:
/// for every (i, j) the pattern with row i and column j deleted still has a
/// perfect matching, which is what gets tested here.
fn fully_indecomposable(a: &RealMatrix) -> bool {
    let n = a.n_rows();
    if n == 1 {
        return a[(0, 0)] > 0.0;
    }
    if a.entries().iter().all(|&e| e > 0.0) {
        return true;
    }
    let adjacency: Vec<Vec<usize>> = (0..n)
        .map(|i| (0..n).filter(|&j| a[(i, j)] > 0.0).collect())
        .collect();
    for skip_row in 0..n {
        for skip_col in 0..n {
            if !has_full_matching(&adjacency, n, skip_row, skip_col) {
                return false;
            }
        }
    }
    true
}

/// Kuhn's augmenting-path matching on the pattern with one row and one
/// column removed; true iff all remaining rows can be matched.
fn has_full_matching(adjacency: &[Vec<usize>], n: usize, skip_row: usize, skip_col: usize) -> bool {
    let mut match_of_col = vec![usize::MAX; n];
    for row in 0..n {
        if row == skip_row {
            continue;
        }
        let mut visited = vec![false; n];
        if !augment(adjacency, row, skip_col, &mut visited, &mut match_of_col) {
            return false;
        }
    }
    true
}

fn augment(
    adjacency: &[Vec<usize>],
    row: usize,
    skip_col: usize,
    visited: &mut [bool],
    match_of_col: &mut [usize],
) -> bool {
    for &col in &adjacency[row] {
        if col == skip_col || visited[col] {
            continue;
        }
        visited[col] = true;
        if match_of_col[col] == usize::MAX
            || augment(adjacency, match_of_col[col], skip_col, visited, match_of_col)
        {
            match_of_col[col] = row;
            return true;
        }
    }
    false
}
