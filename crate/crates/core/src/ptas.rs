//! Prune-then-solve pipeline.
//!
//! Edges whose relaxation value exceeds `1 - delta` are removed; the residual
//! instance is clustered by single-vertex local search; the final clustering is
//! scored on the full instance so pruned edges still count.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::{Clustering, GroundTruth, Instance, Sign};
use crate::metrics::{clustering_cost, disagrees, schedule_delta};
use crate::sdp::{self, edge_values, SdpSolution, SolverOptions};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum DeltaMode {
    Fixed(f64),
    /// `(n ln n / c(E))^(1/6)` capped at 0.45.
    Schedule,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PtasConfig {
    pub delta: DeltaMode,
    pub max_passes: usize,
    pub solver: SolverOptions,
}

impl Default for PtasConfig {
    fn default() -> Self {
        PtasConfig {
            delta: DeltaMode::Fixed(0.1),
            max_passes: 50,
            solver: SolverOptions::default(),
        }
    }
}

impl PtasConfig {
    pub fn resolve_delta(&self, instance: &Instance) -> Result<f64> {
        let delta = match self.delta {
            DeltaMode::Fixed(d) => d,
            DeltaMode::Schedule => schedule_delta(instance.n(), instance.total_cost()),
        };
        check_delta(delta)?;
        Ok(delta)
    }
}

fn check_delta(delta: f64) -> Result<()> {
    if !(delta > 0.0 && delta < 0.5) {
        return Err(Error::param(format!("delta {delta} outside (0, 1/2)")));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PtasReport {
    pub delta: f64,
    pub sdp_objective: f64,
    pub pruned_count: usize,
    pub pruned_cost: f64,
    /// Cost of the pruned edges that the final clustering gets wrong.
    pub pruned_disagreement_cost: f64,
    pub residual_cost: f64,
    pub total_cost: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub planted_cost: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pruned_consistent_count: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pruned_inconsistent_count: Option<usize>,
    /// `(1 - 2 eps)^-4 delta^-3 n ln^3 n`, leading constant 1; context only.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub unnormalized_additive_bound: Option<f64>,
    pub converged: bool,
}

/// Removes every edge with relaxation value above `1 - delta`.
///
/// Returns the residual instance and the sorted indices of removed edges.
/// Fails if the removed cost exceeds `objective / (1 - delta)`, which no
/// feasible solution can produce.
pub fn prune_edges(instance: &Instance, solution: &SdpSolution, delta: f64) -> Result<(Instance, Vec<usize>)> {
    check_delta(delta)?;
    let values = edge_values(instance, solution)?;
    let removed: Vec<usize> = values
        .iter()
        .enumerate()
        .filter(|(_, &f)| f > 1.0 - delta)
        .map(|(i, _)| i)
        .collect();
    let removed_cost: f64 = removed.iter().map(|&i| instance.edges()[i].cost).sum();
    if removed_cost > solution.objective / (1.0 - delta) {
        return Err(Error::invariant(format!(
            "pruned cost {removed_cost} exceeds objective / (1 - delta) = {}",
            solution.objective / (1.0 - delta)
        )));
    }
    Ok((instance.without_edges(&removed), removed))
}

#[derive(Debug, Clone, PartialEq)]
pub struct LocalSearch {
    pub clustering: Clustering,
    /// Cost after each completed pass, starting with the initial cost.
    pub pass_costs: Vec<f64>,
}

/// Single-vertex-move local search.
///
/// Vertices are visited in increasing id. Each takes its best strictly
/// improving move: into an existing cluster (ties to the lowest id) or, last,
/// into a new singleton. Clusters holding none of the vertex's neighbours cost
/// the same as a new singleton and are not proposed separately. Stops after
/// `max_passes` or a pass without moves.
pub fn local_search_solve(instance: &Instance, init: Option<&Clustering>, max_passes: usize) -> Result<LocalSearch> {
    let n = instance.n();
    let mut labels: Vec<usize> = match init {
        Some(c) if c.n() != n => return Err(Error::param("initial clustering has wrong size")),
        Some(c) => c.labels().to_vec(),
        None => (0..n).collect(),
    };
    let mut sizes = vec![0usize; n.max(1)];
    for &l in &labels {
        sizes[l] += 1;
    }
    let adj = instance.adjacency();
    let edges = instance.edges();

    // Scratch: signed cost sums from the current vertex into each cluster.
    let mut plus_into = vec![0.0; n];
    let mut minus_into = vec![0.0; n];
    let mut touched: Vec<usize> = Vec::new();

    let cost_of = |labels: &[usize]| -> f64 {
        edges
            .iter()
            .filter(|e| match e.sign {
                Sign::Plus => labels[e.u] != labels[e.v],
                Sign::Minus => labels[e.u] == labels[e.v],
            })
            .map(|e| e.cost)
            .sum()
    };
    let mut pass_costs = vec![cost_of(&labels)];

    for _ in 0..max_passes {
        let mut moved = false;
        for v in 0..n {
            let current = labels[v];
            let mut plus_total = 0.0;
            let mut scale = 0.0;
            for &(w, i) in &adj[v] {
                let l = labels[w];
                if plus_into[l] == 0.0 && minus_into[l] == 0.0 {
                    touched.push(l);
                }
                let e = &edges[i];
                scale += e.cost;
                match e.sign {
                    Sign::Plus => {
                        plus_into[l] += e.cost;
                        plus_total += e.cost;
                    }
                    Sign::Minus => minus_into[l] += e.cost,
                }
            }
            let stay = plus_total - plus_into[current] + minus_into[current];
            let tol = 1e-12 * scale.max(1.0);
            let mut best_cost = stay;
            let mut best_target = None;
            touched.sort_unstable();
            touched.dedup();
            for &l in &touched {
                if l == current {
                    continue;
                }
                let c = plus_total - plus_into[l] + minus_into[l];
                if c < best_cost - tol {
                    best_cost = c;
                    best_target = Some(l);
                }
            }
            if sizes[current] > 1 && plus_total < best_cost - tol {
                let empty = sizes.iter().position(|&s| s == 0).expect("a free cluster slot");
                best_target = Some(empty);
            }
            for &l in &touched {
                plus_into[l] = 0.0;
                minus_into[l] = 0.0;
            }
            touched.clear();
            if let Some(target) = best_target {
                sizes[current] -= 1;
                sizes[target] += 1;
                labels[v] = target;
                moved = true;
            }
        }
        pass_costs.push(cost_of(&labels));
        if !moved {
            break;
        }
    }
    Ok(LocalSearch {
        clustering: Clustering::from_raw(&labels),
        pass_costs,
    })
}

/// Relaxation, pruning, residual local search, full-instance evaluation.
pub fn run_ptas(instance: &Instance, config: &PtasConfig, truth: Option<&GroundTruth>) -> Result<(Clustering, PtasReport)> {
    let solution = sdp::solve(instance, &config.solver)?;
    run_ptas_with(instance, &solution, config, truth)
}

/// The pipeline on an already computed relaxation solution.
pub fn run_ptas_with(
    instance: &Instance,
    solution: &SdpSolution,
    config: &PtasConfig,
    truth: Option<&GroundTruth>,
) -> Result<(Clustering, PtasReport)> {
    if let Some(t) = truth {
        t.validate(instance)?;
    }
    let delta = config.resolve_delta(instance)?;
    let (residual, removed) = prune_edges(instance, solution, delta)?;
    let found = local_search_solve(&residual, None, config.max_passes)?.clustering;

    let residual_cost = clustering_cost(&residual, &found)?;
    let total_cost = clustering_cost(instance, &found)?;
    let pruned_cost: f64 = removed.iter().map(|&i| instance.edges()[i].cost).sum();
    let pruned_disagreement_cost: f64 = removed
        .iter()
        .map(|&i| &instance.edges()[i])
        .filter(|e| disagrees(e, &found))
        .map(|e| e.cost)
        .sum();
    if (total_cost - (pruned_disagreement_cost + residual_cost)).abs() > 1e-9 * total_cost.max(1.0) {
        return Err(Error::invariant("total cost does not split into pruned and residual parts"));
    }

    let mut report = PtasReport {
        delta,
        sdp_objective: solution.objective,
        pruned_count: removed.len(),
        pruned_cost,
        pruned_disagreement_cost,
        residual_cost,
        total_cost,
        planted_cost: None,
        pruned_consistent_count: None,
        pruned_inconsistent_count: None,
        unnormalized_additive_bound: None,
        converged: solution.converged(),
    };
    if let Some(t) = truth {
        report.planted_cost = Some(clustering_cost(instance, &t.planted)?);
        let inconsistent = removed
            .iter()
            .filter(|&&i| disagrees(&instance.edges()[i], &t.planted))
            .count();
        report.pruned_inconsistent_count = Some(inconsistent);
        report.pruned_consistent_count = Some(removed.len() - inconsistent);
        let n = instance.n() as f64;
        let ln = n.max(1.0).ln();
        report.unnormalized_additive_bound =
            Some(n * ln.powi(3) / ((1.0 - 2.0 * t.epsilon).powi(4) * delta.powi(3)));
    }
    Ok((found, report))
}
