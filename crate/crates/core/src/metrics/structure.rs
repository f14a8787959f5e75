use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::{GroundTruth, Instance};
use crate::sdp::{edge_values, sdp_cost, SdpSolution};

pub const RHO_CORE: f64 = 0.1;
pub const RHO_INTER: f64 = 0.8;

/// `(n ln n / c(E))^(1/6)`, capped at 0.45 and floored at 1e-3.
pub fn schedule_delta(n: usize, total_cost: f64) -> f64 {
    if total_cost <= 0.0 {
        return 0.45;
    }
    let n = n as f64;
    (n * n.ln() / total_cost).powf(1.0 / 6.0).clamp(1e-3, 0.45)
}

/// How the inconsistent random edges `Q` sit relative to the pruned set
/// `E_flip = {f > 1 - delta}` for one relaxation solution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StructuralStats {
    pub delta: f64,
    pub gamma: f64,
    /// `6 delta / (1 - 2 epsilon)`.
    pub sigma: f64,
    /// `(1 - 2 eps)^-2 gamma^-2 delta^-3 n ln n` with the leading constant set to 1.
    pub lambda_bound: f64,
    pub sdp_objective: f64,
    pub q_count: usize,
    pub q_cost: f64,
    pub q_surviving_cost: f64,
    pub e_flip_count: usize,
    pub e_flip_cost: f64,
    pub q_minus_flip_cost: f64,
    pub flip_minus_q_cost: f64,
    /// Relaxation cost of the same vectors on the instance with `E_flip` signs flipped.
    pub sdp_hat_cost: f64,
    pub normalization: String,
}

impl StructuralStats {
    /// Fraction of `c(Q)` left after pruning (0 when `Q` is empty).
    pub fn surviving_fraction(&self) -> f64 {
        if self.q_cost > 0.0 {
            self.q_surviving_cost / self.q_cost
        } else {
            0.0
        }
    }

    /// `c(E_flip) <= SDP / (1 - delta)`.
    pub fn flip_bound_holds(&self) -> bool {
        self.e_flip_cost <= self.sdp_objective / (1.0 - self.delta)
    }
}

pub fn structural_stats(
    instance: &Instance,
    truth: &GroundTruth,
    solution: &SdpSolution,
    delta: Option<f64>,
) -> Result<StructuralStats> {
    truth.validate(instance)?;
    if solution.n() != instance.n() {
        return Err(Error::param("solution and instance sizes differ"));
    }
    let delta = delta.unwrap_or_else(|| schedule_delta(instance.n(), instance.total_cost()));
    if !(delta > 0.0 && delta < 0.5) {
        return Err(Error::param(format!("delta {delta} outside (0, 1/2)")));
    }
    let values = edge_values(instance, solution)?;
    let edges = instance.edges();
    let threshold = 1.0 - delta;

    let q = truth.q_edges(instance);
    let mut in_q = vec![false; edges.len()];
    for &i in &q {
        in_q[i] = true;
    }
    let mut q_cost = 0.0;
    let mut q_surviving_cost = 0.0;
    let mut e_flip_cost = 0.0;
    let mut flip_minus_q_cost = 0.0;
    let mut flipped = Vec::new();
    for (i, e) in edges.iter().enumerate() {
        let pruned = values[i] > threshold;
        if pruned {
            flipped.push(i);
            e_flip_cost += e.cost;
            if !in_q[i] {
                flip_minus_q_cost += e.cost;
            }
        }
        if in_q[i] {
            q_cost += e.cost;
            if !pruned {
                q_surviving_cost += e.cost;
            }
        }
    }
    let sdp_hat_cost = sdp_cost(&instance.with_flipped(&flipped), solution)?;

    let n = instance.n() as f64;
    let one_minus = 1.0 - 2.0 * truth.epsilon;
    let gamma = delta;
    Ok(StructuralStats {
        delta,
        gamma,
        sigma: 6.0 * delta / one_minus,
        lambda_bound: n * n.max(1.0).ln() / (one_minus.powi(2) * gamma.powi(2) * delta.powi(3)),
        sdp_objective: solution.objective,
        q_count: q.len(),
        q_cost,
        q_surviving_cost,
        e_flip_count: flipped.len(),
        e_flip_cost,
        // Q \ E_flip is exactly the surviving part of Q.
        q_minus_flip_cost: q_surviving_cost,
        flip_minus_q_cost,
        sdp_hat_cost,
        normalization: "unnormalized: C = 1".into(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterCore {
    pub cluster: usize,
    pub size: usize,
    pub center: usize,
    pub core_size: usize,
    pub core_fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoreStructureReport {
    pub clusters: Vec<ClusterCore>,
    /// `center_distances[i][j]` between the centers of planted clusters `i` and `j`.
    pub center_distances: Vec<Vec<f64>>,
    pub min_center_distance: Option<f64>,
    pub min_core_fraction: f64,
    pub rho_core: f64,
    pub rho_inter: f64,
}

/// Per planted cluster: the member minimising mean squared distance to the
/// cluster's vectors, and the members within `rho_core` of it.
pub fn core_structure(
    solution: &SdpSolution,
    truth: &GroundTruth,
    rho_core: f64,
    rho_inter: f64,
) -> Result<CoreStructureReport> {
    if solution.n() != truth.planted.n() {
        return Err(Error::param("solution and ground truth sizes differ"));
    }
    let r = solution.rank();
    let mut clusters = Vec::new();
    for (id, group) in truth.planted.members().into_iter().enumerate() {
        // mean_v ||u - v||^2 = 2 - 2 <u, mean>, so maximise <u, sum>.
        let mut sum = vec![0.0; r];
        for &v in &group {
            sum.iter_mut().zip(solution.row(v)).for_each(|(s, x)| *s += x);
        }
        let mut center = group[0];
        let mut best = f64::NEG_INFINITY;
        for &u in &group {
            let score: f64 = solution.row(u).iter().zip(&sum).map(|(a, b)| a * b).sum();
            if score > best {
                best = score;
                center = u;
            }
        }
        let core_size = group
            .iter()
            .filter(|&&v| solution.distance(v, center) <= rho_core)
            .count();
        clusters.push(ClusterCore {
            cluster: id,
            size: group.len(),
            center,
            core_size,
            core_fraction: core_size as f64 / group.len() as f64,
        });
    }
    let k = clusters.len();
    let center_distances: Vec<Vec<f64>> = (0..k)
        .map(|i| {
            (0..k)
                .map(|j| {
                    if i == j {
                        0.0
                    } else {
                        solution.distance(clusters[i].center, clusters[j].center)
                    }
                })
                .collect()
        })
        .collect();
    let min_center_distance = (0..k)
        .flat_map(|i| (i + 1..k).map(move |j| (i, j)))
        .map(|(i, j)| center_distances[i][j])
        .reduce(f64::min);
    let min_core_fraction = clusters.iter().map(|c| c.core_fraction).fold(1.0, f64::min);
    Ok(CoreStructureReport {
        clusters,
        center_distances,
        min_center_distance,
        min_core_fraction,
        rho_core,
        rho_inter,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{generate_gnp_planted, Clustering};
    use crate::sdp::embed_clustering;

    #[test]
    fn zero_noise_has_empty_q() {
        let (inst, truth) = generate_gnp_planted(40, 0.4, 2, 0.0, 3).unwrap();
        let sol = embed_clustering(&inst, &truth.planted, 4).unwrap();
        let s = structural_stats(&inst, &truth, &sol, Some(0.2)).unwrap();
        assert_eq!(s.q_cost, 0.0);
        assert_eq!(s.q_surviving_cost, 0.0);
        assert_eq!(s.e_flip_cost, 0.0);
    }

    #[test]
    fn integral_solution_flips_exactly_the_inconsistent_edges() {
        let (inst, truth) = generate_gnp_planted(60, 0.3, 3, 0.25, 8).unwrap();
        let sol = embed_clustering(&inst, &truth.planted, 3).unwrap();
        let s = structural_stats(&inst, &truth, &sol, Some(0.1)).unwrap();
        assert_eq!(s.e_flip_count, truth.inconsistent_edges(&inst).len());
        assert_eq!(s.flip_minus_q_cost, 0.0);
        assert_eq!(s.q_surviving_cost, 0.0);
        assert_eq!(s.sdp_hat_cost, 0.0);
        assert!(s.flip_bound_holds());
        assert!((s.sigma - 0.6 / 0.5).abs() < 1e-12);
    }

    #[test]
    fn schedule_delta_is_capped() {
        assert_eq!(schedule_delta(500, 18_000.0), 0.45);
        let d = schedule_delta(2000, 2.0e7);
        assert!(d < 0.45 && d > 0.0);
        assert_eq!(schedule_delta(10, 0.0), 0.45);
    }

    #[test]
    fn integral_embedding_core_geometry() {
        let (inst, truth) = generate_gnp_planted(40, 0.3, 4, 0.2, 1).unwrap();
        let sol = embed_clustering(&inst, &truth.planted, 4).unwrap();
        let r = core_structure(&sol, &truth, RHO_CORE, RHO_INTER).unwrap();
        assert_eq!(r.min_core_fraction, 1.0);
        let d = r.min_center_distance.unwrap();
        assert!((d - 2f64.sqrt()).abs() < 1e-12);
        assert!(d >= RHO_INTER);
    }

    #[test]
    fn single_cluster_has_no_pairs() {
        let (inst, mut truth) = generate_gnp_planted(10, 0.5, 1, 0.0, 1).unwrap();
        truth.planted = Clustering::single(10);
        let sol = embed_clustering(&inst, &truth.planted, 1).unwrap();
        let r = core_structure(&sol, &truth, RHO_CORE, RHO_INTER).unwrap();
        assert!(r.min_center_distance.is_none());
        assert_eq!(r.clusters[0].core_fraction, 1.0);
    }
}
