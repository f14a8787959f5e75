//! Greedy rounding of relaxation vectors into clusters.
//!
//! Vertices whose vectors lie within `rho_core` of each other are joined in an
//! auxiliary graph. Repeatedly, the unassigned vertex of largest degree among
//! unassigned vertices takes all of its unassigned neighbours as a new cluster.
//! An optional cleanup then folds small clusters into large ones they are
//! aligned with.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::{Clustering, Instance};
use crate::sdp::{self, SdpSolution, SolverOptions};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecoveryParams {
    pub rho_core: f64,
    pub cleanup_enabled: bool,
    /// Clusters at or above this size are never merged away. `None` means no
    /// cap: every cluster may fold into a larger aligned one.
    pub cleanup_min_size: Option<usize>,
    /// Minimum average inner product for a merge.
    pub cleanup_merge_threshold: f64,
}

impl Default for RecoveryParams {
    fn default() -> Self {
        RecoveryParams {
            rho_core: 0.1,
            cleanup_enabled: true,
            cleanup_min_size: None,
            cleanup_merge_threshold: 0.5,
        }
    }
}

impl RecoveryParams {
    pub fn min_size_for(&self, n: usize) -> usize {
        self.cleanup_min_size.unwrap_or(n.max(1))
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rho_core > 0.0 && self.rho_core < 1.0) {
            return Err(Error::param(format!("rho_core {} outside (0, 1)", self.rho_core)));
        }
        if !(self.cleanup_merge_threshold > 0.0 && self.cleanup_merge_threshold < 1.0) {
            return Err(Error::param(format!(
                "cleanup_merge_threshold {} outside (0, 1)",
                self.cleanup_merge_threshold
            )));
        }
        Ok(())
    }
}

/// Sorted adjacency lists of the ball graph `||u - v|| <= rho_core`.
pub fn build_aux_graph(solution: &SdpSolution, rho_core: f64) -> Vec<Vec<usize>> {
    let n = solution.n();
    let mut adj = vec![Vec::new(); n];
    for u in 0..n {
        for v in u + 1..n {
            if solution.distance(u, v) <= rho_core {
                adj[u].push(v);
                adj[v].push(u);
            }
        }
    }
    for list in &mut adj {
        list.sort_unstable();
    }
    adj
}

/// Repeated max-degree extraction on the shrinking induced subgraph. Ties go
/// to the lowest vertex id; cluster ids follow extraction order.
pub fn greedy_cluster(aux: &[Vec<usize>]) -> Clustering {
    let n = aux.len();
    let mut degree: Vec<usize> = aux.iter().map(Vec::len).collect();
    let mut label = vec![usize::MAX; n];
    let mut remaining = n;
    let mut next_id = 0;
    while remaining > 0 {
        let mut center = usize::MAX;
        for u in 0..n {
            if label[u] == usize::MAX && (center == usize::MAX || degree[u] > degree[center]) {
                center = u;
            }
        }
        let mut cluster = vec![center];
        cluster.extend(aux[center].iter().copied().filter(|&v| label[v] == usize::MAX));
        for &v in &cluster {
            label[v] = next_id;
        }
        for &v in &cluster {
            for &w in &aux[v] {
                if label[w] == usize::MAX {
                    degree[w] -= 1;
                }
            }
        }
        remaining -= cluster.len();
        next_id += 1;
    }
    Clustering::new(label).expect("greedy extraction labels densely")
}

/// Folds clusters smaller than the minimum size into larger clusters.
///
/// Clusters are visited in increasing `(size, id)` order. A visited cluster
/// below the minimum size moves into the cluster ranked after it with the
/// highest average inner product, when that average reaches the threshold.
/// After every merge the visit restarts from the smallest cluster; it ends
/// when a full visit makes no merge. The result is relabelled densely.
pub fn cleanup_merge(clustering: &Clustering, solution: &SdpSolution, params: &RecoveryParams) -> Result<Clustering> {
    params.validate()?;
    let n = clustering.n();
    if solution.n() != n {
        return Err(Error::param("clustering and solution sizes differ"));
    }
    let min_size = params.min_size_for(n);
    let r = solution.rank();
    let k = clustering.k();
    let mut sizes = clustering.sizes();
    let mut sums = vec![vec![0.0; r]; k];
    for u in 0..n {
        let s = &mut sums[clustering.label(u)];
        s.iter_mut().zip(solution.row(u)).for_each(|(a, b)| *a += b);
    }

    let mut target_of: Vec<usize> = (0..k).collect();
    let mut alive: Vec<usize> = (0..k).collect();
    loop {
        alive.sort_by_key(|&c| (sizes[c], c));
        let mut merged = false;
        let mut i = 0;
        while i < alive.len() {
            let c = alive[i];
            if sizes[c] >= min_size {
                i += 1;
                continue;
            }
            let key = (sizes[c], c);
            let mut best: Option<(f64, usize)> = None;
            for &t in &alive {
                if (sizes[t], t) <= key {
                    continue;
                }
                let ip: f64 = sums[c].iter().zip(&sums[t]).map(|(a, b)| a * b).sum();
                let avg = ip / (sizes[c] * sizes[t]) as f64;
                if best.is_none_or(|(b, bt)| avg > b || (avg == b && t < bt)) {
                    best = Some((avg, t));
                }
            }
            match best {
                Some((avg, t)) if avg >= params.cleanup_merge_threshold => {
                    target_of[c] = t;
                    sizes[t] += sizes[c];
                    let moved = std::mem::take(&mut sums[c]);
                    sums[t].iter_mut().zip(&moved).for_each(|(a, b)| *a += b);
                    alive.remove(i);
                    merged = true;
                    break;
                }
                _ => i += 1,
            }
        }
        if !merged {
            break;
        }
    }
    let root = |mut c: usize| {
        while target_of[c] != c {
            c = target_of[c];
        }
        c
    };
    let raw: Vec<usize> = clustering.labels().iter().map(|&l| root(l)).collect();
    Ok(Clustering::from_raw(&raw))
}

/// Relaxation, ball graph, greedy extraction, optional cleanup.
pub fn recover(instance: &Instance, solver: &SolverOptions, params: &RecoveryParams) -> Result<(Clustering, SdpSolution)> {
    params.validate()?;
    let solution = sdp::solve(instance, solver)?;
    let clustering = round(&solution, params)?;
    Ok((clustering, solution))
}

/// The rounding half of [`recover`] on an existing solution.
pub fn round(solution: &SdpSolution, params: &RecoveryParams) -> Result<Clustering> {
    params.validate()?;
    let aux = build_aux_graph(solution, params.rho_core);
    let greedy = greedy_cluster(&aux);
    if params.cleanup_enabled {
        cleanup_merge(&greedy, solution, params)
    } else {
        Ok(greedy)
    }
}
