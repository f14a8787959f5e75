//! Independent brute-force oracles shared by the integration tests.
#![allow(dead_code)]

use cclab::{Clustering, Edge, Instance, Sign};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Every partition of `0..n` as a restricted growth string.
pub fn partitions(n: usize) -> Vec<Vec<usize>> {
    fn rec(i: usize, n: usize, max: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if i == n {
            out.push(cur.clone());
            return;
        }
        for l in 0..=max {
            cur.push(l);
            rec(i + 1, n, max.max(l + 1), cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if n == 0 {
        out.push(Vec::new());
        return out;
    }
    let mut cur = vec![0];
    rec(1, n, 1, &mut cur, &mut out);
    out
}

/// Disagreement cost written out pair by pair.
pub fn cost_of_labels(instance: &Instance, labels: &[usize]) -> f64 {
    let mut total = 0.0;
    for e in instance.edges() {
        let same = labels[e.u] == labels[e.v];
        if (e.sign == Sign::Plus) != same {
            total += e.cost;
        }
    }
    total
}

/// Exhaustive integral optimum and one optimal labelling.
pub fn brute_opt(instance: &Instance) -> (f64, Vec<usize>) {
    let mut best = (f64::INFINITY, Vec::new());
    for p in partitions(instance.n()) {
        let c = cost_of_labels(instance, &p);
        if c < best.0 {
            best = (c, p);
        }
    }
    best
}

/// Per-cluster aggregation: within-cluster minus cost plus, for every cluster,
/// half of its outgoing plus cost.
pub fn cost_by_cluster(instance: &Instance, clustering: &Clustering) -> f64 {
    let k = clustering.k();
    let mut inside_minus = vec![0.0; k];
    let mut leaving_plus = vec![0.0; k];
    for e in instance.edges() {
        let (a, b) = (clustering.label(e.u), clustering.label(e.v));
        match (e.sign, a == b) {
            (Sign::Minus, true) => inside_minus[a] += e.cost,
            (Sign::Plus, false) => {
                leaving_plus[a] += e.cost;
                leaving_plus[b] += e.cost;
            }
            _ => {}
        }
    }
    (0..k).map(|c| inside_minus[c] + leaving_plus[c] / 2.0).sum()
}

/// Random instance on `n` vertices: each pair present with probability
/// `density`, random sign, cost either 1 or uniform.
pub fn random_instance(n: usize, density: f64, unit_costs: bool, seed: u64) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.random::<f64>() < density {
                let cost = if unit_costs { 1.0 } else { rng.random::<f64>() };
                let sign = if rng.random_bool(0.5) { Sign::Plus } else { Sign::Minus };
                edges.push(Edge::new(u, v, cost, sign));
            }
        }
    }
    Instance::new(n, edges).unwrap()
}

/// Largest total overlap over all injective maps between cluster ids, by
/// enumerating every partial matching.
pub fn brute_matching(planted: &Clustering, found: &Clustering) -> usize {
    let (k, t) = (planted.k(), found.k());
    let mut overlap = vec![vec![0usize; t]; k];
    for u in 0..planted.n() {
        overlap[planted.label(u)][found.label(u)] += 1;
    }
    fn rec(i: usize, overlap: &[Vec<usize>], used: &mut Vec<bool>) -> usize {
        if i == overlap.len() {
            return 0;
        }
        // Leave row i unmatched.
        let mut best = rec(i + 1, overlap, used);
        for j in 0..used.len() {
            if !used[j] {
                used[j] = true;
                best = best.max(overlap[i][j] + rec(i + 1, overlap, used));
                used[j] = false;
            }
        }
        best
    }
    rec(0, &overlap, &mut vec![false; t])
}

/// Cost after moving `v` to `target` (an existing id or a fresh one).
pub fn cost_after_move(instance: &Instance, labels: &[usize], v: usize, target: usize) -> f64 {
    let mut moved = labels.to_vec();
    moved[v] = target;
    cost_of_labels(instance, &moved)
}
