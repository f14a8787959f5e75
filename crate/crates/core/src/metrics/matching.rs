use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::Clustering;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationError {
    /// `1 - matched_overlap / n`.
    pub error: f64,
    pub misclassified: usize,
    pub matched_overlap: usize,
    /// `(planted cluster, found cluster)` pairs with nonzero overlap.
    pub matching: Vec<(usize, usize)>,
}

/// Classification error under the best partial matching of planted clusters to
/// found clusters, weighting each pair by the size of their intersection.
pub fn classification_error(planted: &Clustering, found: &Clustering) -> Result<ClassificationError> {
    let n = planted.n();
    if found.n() != n {
        return Err(Error::param(format!(
            "planted has {n} vertices, found has {}",
            found.n()
        )));
    }
    if n == 0 {
        return Ok(ClassificationError {
            error: 0.0,
            misclassified: 0,
            matched_overlap: 0,
            matching: Vec::new(),
        });
    }
    let (k, t) = (planted.k(), found.k());
    let mut overlap = vec![vec![0i64; t]; k];
    for u in 0..n {
        overlap[planted.label(u)][found.label(u)] += 1;
    }

    // The assignment solver needs rows <= columns.
    let transpose = k > t;
    let (rows, cols) = if transpose { (t, k) } else { (k, t) };
    let weights: Vec<Vec<i64>> = (0..rows)
        .map(|i| {
            (0..cols)
                .map(|j| if transpose { overlap[j][i] } else { overlap[i][j] })
                .collect()
        })
        .collect();
    let assignment = max_weight_assignment(&weights);
    let mut matching: Vec<(usize, usize)> = assignment
        .into_iter()
        .enumerate()
        .map(|(i, j)| if transpose { (j, i) } else { (i, j) })
        .filter(|&(p, f)| overlap[p][f] > 0)
        .collect();
    matching.sort_unstable();
    let matched: i64 = matching.iter().map(|&(p, f)| overlap[p][f]).sum();
    let matched = matched as usize;
    Ok(ClassificationError {
        error: 1.0 - matched as f64 / n as f64,
        misclassified: n - matched,
        matched_overlap: matched,
        matching,
    })
}

/// Maximum-weight assignment of every row to a distinct column (`rows <= cols`),
/// via the O(rows^2 cols) shortest augmenting path method with potentials.
/// Returns the column of each row.
pub(crate) fn max_weight_assignment(weights: &[Vec<i64>]) -> Vec<usize> {
    let rows = weights.len();
    if rows == 0 {
        return Vec::new();
    }
    let cols = weights[0].len();
    assert!(rows <= cols, "more rows than columns");
    // Minimise negated weights. Index 0 is a sentinel in both dimensions.
    let cost = |i: usize, j: usize| -weights[i - 1][j - 1];
    let mut u = vec![0i64; rows + 1];
    let mut v = vec![0i64; cols + 1];
    let mut row_of = vec![0usize; cols + 1];
    let mut way = vec![0usize; cols + 1];
    for i in 1..=rows {
        row_of[0] = i;
        let mut j0 = 0;
        let mut min_to = vec![i64::MAX; cols + 1];
        let mut used = vec![false; cols + 1];
        loop {
            used[j0] = true;
            let i0 = row_of[j0];
            let mut delta = i64::MAX;
            let mut j1 = 0;
            for j in 1..=cols {
                if used[j] {
                    continue;
                }
                let reduced = cost(i0, j) - u[i0] - v[j];
                if reduced < min_to[j] {
                    min_to[j] = reduced;
                    way[j] = j0;
                }
                if min_to[j] < delta {
                    delta = min_to[j];
                    j1 = j;
                }
            }
            for j in 0..=cols {
                if used[j] {
                    u[row_of[j]] += delta;
                    v[j] -= delta;
                } else {
                    min_to[j] -= delta;
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
    let mut col_of = vec![0; rows];
    for j in 1..=cols {
        if row_of[j] != 0 {
            col_of[row_of[j] - 1] = j - 1;
        }
    }
    col_of
}
