use serde::{Deserialize, Serialize};

use super::spectral::{fiedler_value, WeightedGraph};
use crate::error::{Error, Result};
use crate::instance::{GroundTruth, Instance};

/// Measured recovery conditions of a planted instance.
///
/// The thresholds that carry unspecified constants (`intercluster_density_threshold`
/// and `predicted_eta`) are evaluated with those constants set to 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssumptionsReport {
    pub lambda_gap_per_cluster: Vec<f64>,
    pub lambda_gap: f64,
    pub beta: f64,
    pub beta_matrix: Vec<Vec<f64>>,
    /// Smallest off-diagonal entry of `beta_matrix` (`None` with one cluster).
    pub min_intercluster_beta: Option<f64>,
    pub intercluster_density_threshold: Option<f64>,
    pub cluster_regularity_max_dev: f64,
    pub intercluster_regularity_max_dev: f64,
    pub predicted_eta: Option<f64>,
    pub normalization: String,
}

fn max_relative_deviation(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    if mean <= 0.0 {
        return 0.0;
    }
    values
        .iter()
        .map(|v| (v - mean).abs() / mean)
        .fold(0.0, f64::max)
}

/// Expansion, density and regularity of the planted clusters on the costed
/// graph (signs ignored).
pub fn check_assumptions(instance: &Instance, truth: &GroundTruth) -> Result<AssumptionsReport> {
    let planted = &truth.planted;
    if planted.n() != instance.n() {
        return Err(Error::param("ground truth does not match the instance"));
    }
    let members = planted.members();
    if members.is_empty() && instance.n() > 0 {
        return Err(Error::param("empty cluster"));
    }
    let k = planted.k();
    let n = instance.n();

    // Local index of each vertex inside its cluster.
    let mut local = vec![0; n];
    for group in &members {
        for (i, &u) in group.iter().enumerate() {
            local[u] = i;
        }
    }
    let mut graphs: Vec<WeightedGraph> = members.iter().map(|g| WeightedGraph::new(g.len())).collect();
    let mut pair_cost = vec![vec![0.0; k]; k];
    // Cost from each vertex into each cluster.
    let mut incident = vec![0.0; n * k];
    for e in instance.edges() {
        let (a, b) = (planted.label(e.u), planted.label(e.v));
        if a == b {
            graphs[a].add_edge(local[e.u], local[e.v], e.cost);
        }
        pair_cost[a][b] += e.cost;
        if a != b {
            pair_cost[b][a] += e.cost;
        }
        incident[e.u * k + b] += e.cost;
        incident[e.v * k + a] += e.cost;
    }

    let lambda_gap_per_cluster: Vec<f64> = graphs.iter().map(fiedler_value).collect();
    let lambda_gap = lambda_gap_per_cluster.iter().copied().fold(f64::INFINITY, f64::min);
    let lambda_gap = if lambda_gap.is_finite() { lambda_gap } else { 0.0 };

    let total = instance.total_cost();
    let within: f64 = (0..k).map(|i| pair_cost[i][i]).sum();
    let beta = if total > 0.0 { within / total } else { 0.0 };
    let beta_matrix: Vec<Vec<f64>> = (0..k)
        .map(|i| {
            (0..k)
                .map(|j| if i == j || total == 0.0 { 0.0 } else { pair_cost[i][j] / total })
                .collect()
        })
        .collect();
    let min_intercluster_beta = (0..k)
        .flat_map(|i| (0..k).filter(move |&j| j != i).map(move |j| (i, j)))
        .map(|(i, j)| beta_matrix[i][j])
        .reduce(f64::min);

    let mut cluster_dev: f64 = 0.0;
    let mut inter_dev: f64 = 0.0;
    for (i, group) in members.iter().enumerate() {
        for j in 0..k {
            let values: Vec<f64> = group.iter().map(|&u| incident[u * k + j]).collect();
            let dev = max_relative_deviation(&values);
            if i == j {
                cluster_dev = cluster_dev.max(dev);
            } else {
                inter_dev = inter_dev.max(dev);
            }
        }
    }

    let one_minus = 1.0 - 2.0 * truth.epsilon;
    let density_ratio = (total > 0.0).then(|| n as f64 * (n as f64).ln() / total);
    let intercluster_density_threshold = density_ratio.map(|r| r.powf(1.0 / 6.0) / (one_minus * one_minus));
    let predicted_eta = density_ratio
        .filter(|_| beta * lambda_gap > 0.0)
        .map(|r| r.powf(1.0 / 12.0) * (1.0 / (beta * lambda_gap)).sqrt() / one_minus);

    Ok(AssumptionsReport {
        lambda_gap_per_cluster,
        lambda_gap,
        beta,
        beta_matrix,
        min_intercluster_beta,
        intercluster_density_threshold,
        cluster_regularity_max_dev: cluster_dev,
        intercluster_regularity_max_dev: inter_dev,
        predicted_eta,
        normalization: "unnormalized: C1 = C2 = 1".into(),
    })
}
