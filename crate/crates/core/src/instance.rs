//! Correlation clustering instances and the semi-random generators.

use std::collections::BTreeSet;
use std::fmt;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{self, streams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn flipped(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Sign::Plus => '+',
            Sign::Minus => '-',
        }
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.symbol())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub cost: f64,
    pub sign: Sign,
}

impl Edge {
    pub fn new(u: usize, v: usize, cost: f64, sign: Sign) -> Self {
        Edge { u, v, cost, sign }
    }
}

/// A signed, costed graph. Edges are stored with `u < v` and sorted by `(u, v)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Instance {
    n: usize,
    edges: Vec<Edge>,
}

impl Instance {
    /// Validates and canonicalises an edge list. Endpoints given as `(v, u)`
    /// with `v > u` are swapped; self loops, duplicates and costs outside
    /// `[0, 1]` are rejected.
    pub fn new(n: usize, edges: Vec<Edge>) -> Result<Self> {
        let mut edges: Vec<Edge> = edges
            .into_iter()
            .map(|e| {
                if e.u > e.v {
                    Edge { u: e.v, v: e.u, ..e }
                } else {
                    e
                }
            })
            .collect();
        for e in &edges {
            if e.u == e.v {
                return Err(Error::param(format!("self loop at vertex {}", e.u)));
            }
            if e.v >= n {
                return Err(Error::param(format!(
                    "edge ({}, {}) out of range for n = {n}",
                    e.u, e.v
                )));
            }
            if !(0.0..=1.0).contains(&e.cost) {
                return Err(Error::param(format!(
                    "edge ({}, {}) has cost {} outside [0, 1]",
                    e.u, e.v, e.cost
                )));
            }
        }
        edges.sort_by_key(|e| (e.u, e.v));
        if let Some(w) = edges.windows(2).find(|w| (w[0].u, w[0].v) == (w[1].u, w[1].v)) {
            return Err(Error::param(format!("duplicate edge ({}, {})", w[0].u, w[0].v)));
        }
        Ok(Instance { n, edges })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn total_cost(&self) -> f64 {
        self.edges.iter().map(|e| e.cost).sum()
    }

    /// Keeps the edges whose index is not in `removed` (which must be sorted).
    pub fn without_edges(&self, removed: &[usize]) -> Instance {
        let mut skip = removed.iter().peekable();
        let edges = self
            .edges
            .iter()
            .enumerate()
            .filter(|(i, _)| {
                if skip.peek() == Some(&i) {
                    skip.next();
                    false
                } else {
                    true
                }
            })
            .map(|(_, e)| *e)
            .collect();
        Instance { n: self.n, edges }
    }

    /// Same graph with the signs of the listed edges flipped.
    pub fn with_flipped(&self, flipped: &[usize]) -> Instance {
        let mut edges = self.edges.clone();
        for &i in flipped {
            edges[i].sign = edges[i].sign.flipped();
        }
        Instance { n: self.n, edges }
    }

    /// Per-vertex incidence lists of `(neighbor, edge index)`.
    pub fn adjacency(&self) -> Vec<Vec<(usize, usize)>> {
        let mut adj = vec![Vec::new(); self.n];
        for (i, e) in self.edges.iter().enumerate() {
            adj[e.u].push((e.v, i));
            adj[e.v].push((e.u, i));
        }
        adj
    }
}

/// A partition of `0..n` with dense labels `0..k`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Clustering {
    labels: Vec<usize>,
    k: usize,
}

impl Clustering {
    /// Accepts labels in dense form; every id in `0..k` must be used.
    pub fn new(labels: Vec<usize>) -> Result<Self> {
        let k = labels.iter().map(|&l| l + 1).max().unwrap_or(0);
        let mut used = vec![false; k];
        for &l in &labels {
            used[l] = true;
        }
        if let Some(missing) = used.iter().position(|&u| !u) {
            return Err(Error::param(format!("cluster id {missing} is empty")));
        }
        Ok(Clustering { labels, k })
    }

    /// Relabels arbitrary ids to dense ids in order of first appearance.
    pub fn from_raw(raw: &[usize]) -> Self {
        let mut map = std::collections::HashMap::new();
        let labels = raw
            .iter()
            .map(|&r| {
                let next = map.len();
                *map.entry(r).or_insert(next)
            })
            .collect();
        Clustering { labels, k: map.len() }
    }

    pub fn singletons(n: usize) -> Self {
        Clustering {
            labels: (0..n).collect(),
            k: n,
        }
    }

    pub fn single(n: usize) -> Self {
        Clustering {
            labels: vec![0; n],
            k: usize::from(n > 0),
        }
    }

    /// `k` clusters of near-equal size over `0..n` in contiguous blocks. Each
    /// block has `n / k` vertices; the `n % k` remainder vertices go one each to
    /// the last clusters.
    pub fn balanced(n: usize, k: usize) -> Result<Self> {
        if k == 0 || k > n {
            return Err(Error::param(format!("cannot split {n} vertices into {k} clusters")));
        }
        let base = n / k;
        let extra = n % k;
        let mut labels = Vec::with_capacity(n);
        for c in 0..k {
            let size = base + usize::from(c >= k - extra);
            labels.extend(std::iter::repeat_n(c, size));
        }
        Ok(Clustering { labels, k })
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn label(&self, u: usize) -> usize {
        self.labels[u]
    }

    pub fn same(&self, u: usize, v: usize) -> bool {
        self.labels[u] == self.labels[v]
    }

    pub fn members(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.k];
        for (u, &l) in self.labels.iter().enumerate() {
            out[l].push(u);
        }
        out
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut out = vec![0; self.k];
        for &l in &self.labels {
            out[l] += 1;
        }
        out
    }

    /// The sign an edge between `u` and `v` must carry to agree with this partition.
    pub fn consistent_sign(&self, u: usize, v: usize) -> Sign {
        if self.same(u, v) {
            Sign::Plus
        } else {
            Sign::Minus
        }
    }
}

/// Generator-side record of how an instance was produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub planted: Clustering,
    /// Indices into the instance's sorted edge list, ascending.
    pub random_edges: Vec<usize>,
    pub epsilon: f64,
}

impl GroundTruth {
    /// Indices of edges whose sign disagrees with the planted partition.
    pub fn inconsistent_edges(&self, instance: &Instance) -> Vec<usize> {
        instance
            .edges()
            .iter()
            .enumerate()
            .filter(|(_, e)| self.planted.consistent_sign(e.u, e.v) != e.sign)
            .map(|(i, _)| i)
            .collect()
    }

    /// Q: the random edges that are inconsistent with the planted partition.
    pub fn q_edges(&self, instance: &Instance) -> Vec<usize> {
        self.random_edges
            .iter()
            .copied()
            .filter(|&i| {
                let e = instance.edges()[i];
                self.planted.consistent_sign(e.u, e.v) != e.sign
            })
            .collect()
    }

    pub fn random_cost(&self, instance: &Instance) -> f64 {
        self.random_edges.iter().map(|&i| instance.edges()[i].cost).sum()
    }

    /// Checks the pairing with `instance`: matching vertex count, valid indices,
    /// and every non-random edge consistent with the planted partition.
    pub fn validate(&self, instance: &Instance) -> Result<()> {
        if self.planted.n() != instance.n() {
            return Err(Error::param(format!(
                "planted labels cover {} vertices, instance has {}",
                self.planted.n(),
                instance.n()
            )));
        }
        check_epsilon(self.epsilon)?;
        if self.random_edges.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::param("random edge indices must be strictly increasing"));
        }
        if let Some(&i) = self.random_edges.iter().find(|&&i| i >= instance.m()) {
            return Err(Error::param(format!("random edge index {i} out of range")));
        }
        let mut random = self.random_edges.iter().peekable();
        for (i, e) in instance.edges().iter().enumerate() {
            if random.peek() == Some(&&i) {
                random.next();
                continue;
            }
            if self.planted.consistent_sign(e.u, e.v) != e.sign {
                return Err(Error::invariant(format!(
                    "edge ({}, {}) is not random but disagrees with the planted partition",
                    e.u, e.v
                )));
            }
        }
        Ok(())
    }
}

/// How the adversary signs the edges that landed in the random set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum SignPolicy {
    /// Always the inconsistent sign.
    #[default]
    Flip,
    /// Always the consistent sign.
    Keep,
    /// Fair coin from the seeded sign stream.
    Random,
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if !(0.0..0.5).contains(&epsilon) {
        return Err(Error::param(format!("epsilon out of range: {epsilon} not in [0, 1/2)")));
    }
    Ok(())
}

/// Basic semi-random model on a fixed graph.
///
/// `pairs` are `(u, v, cost)` triples. Every edge joins `E_R` independently
/// with probability `epsilon`; edges outside `E_R` receive the sign consistent
/// with `planted`, edges in `E_R` the sign picked by `policy`.
pub fn generate_basic(
    n: usize,
    pairs: &[(usize, usize, f64)],
    planted: &Clustering,
    epsilon: f64,
    policy: SignPolicy,
    seed: u64,
) -> Result<(Instance, GroundTruth)> {
    let mut sign_rng = rng::stream(seed, streams::SIGNS);
    generate_basic_with(n, pairs, planted, epsilon, seed, |_, consistent| match policy {
        SignPolicy::Flip => consistent.flipped(),
        SignPolicy::Keep => consistent,
        SignPolicy::Random => {
            if sign_rng.random_bool(0.5) {
                consistent
            } else {
                consistent.flipped()
            }
        }
    })
}

/// Basic model with a caller-supplied sign chooser for the random edges. The
/// chooser sees the edge (canonical orientation) and its consistent sign.
pub fn generate_basic_with(
    n: usize,
    pairs: &[(usize, usize, f64)],
    planted: &Clustering,
    epsilon: f64,
    seed: u64,
    mut choose: impl FnMut(&Edge, Sign) -> Sign,
) -> Result<(Instance, GroundTruth)> {
    check_epsilon(epsilon)?;
    if planted.n() != n {
        return Err(Error::param(format!(
            "planted label array has length {}, expected {n}",
            planted.n()
        )));
    }
    let unsigned = Instance::new(
        n,
        pairs.iter().map(|&(u, v, c)| Edge::new(u, v, c, Sign::Plus)).collect(),
    )?;
    let mut coins = rng::stream(seed, streams::NOISE);
    let mut edges = Vec::with_capacity(unsigned.m());
    let mut random_edges = Vec::new();
    for (i, e) in unsigned.edges().iter().enumerate() {
        let consistent = planted.consistent_sign(e.u, e.v);
        let in_random = coins.random::<f64>() < epsilon;
        let sign = if in_random {
            random_edges.push(i);
            choose(e, consistent)
        } else {
            consistent
        };
        edges.push(Edge { sign, ..*e });
    }
    let instance = Instance { n, edges };
    let truth = GroundTruth {
        planted: planted.clone(),
        random_edges,
        epsilon,
    };
    Ok((instance, truth))
}

/// G(n, p) with unit costs, `k` near-equal contiguous planted clusters and the
/// flip adversary.
pub fn generate_gnp_planted(
    n: usize,
    p: f64,
    k: usize,
    epsilon: f64,
    seed: u64,
) -> Result<(Instance, GroundTruth)> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::param(format!("p out of range: {p} not in [0, 1]")));
    }
    let planted = Clustering::balanced(n, k)?;
    let mut graph_rng = rng::stream(seed, streams::GRAPH);
    let mut pairs = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if graph_rng.random::<f64>() < p {
                pairs.push((u, v, 1.0));
            }
        }
    }
    generate_basic(n, &pairs, &planted, epsilon, SignPolicy::Flip, seed)
}

/// One round of the adaptive process as seen by the adversary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdaptiveStep {
    pub u: usize,
    pub v: usize,
    pub cost: f64,
    pub in_random: bool,
}

/// An adversary for the adaptive model. The generator asks for edges one at a
/// time, revealing after each whether the noise coin put it in `E_R`.
pub trait AdversaryScript {
    fn planted(&self) -> &Clustering;

    /// Next `(u, v, cost)`, or `None` to stop.
    fn next_edge(&mut self, history: &[AdaptiveStep]) -> Option<(usize, usize, f64)>;

    /// After stopping: which random edges to delete (as history indices).
    fn delete_random(&mut self, _history: &[AdaptiveStep]) -> Vec<usize> {
        Vec::new()
    }

    /// Sign for a surviving random edge given its consistent sign.
    fn sign_random(&mut self, _step: &AdaptiveStep, consistent: Sign) -> Sign {
        consistent.flipped()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdaptiveConfig {
    pub epsilon: f64,
    pub seed: u64,
    pub max_steps: usize,
}

/// Adaptive semi-random model: replays the edge-by-edge process against `script`.
///
/// The coin for step `t` is the `t`-th draw of the noise stream, so it cannot
/// depend on anything the script does.
pub fn generate_adaptive(
    script: &mut dyn AdversaryScript,
    config: AdaptiveConfig,
) -> Result<(Instance, GroundTruth)> {
    check_epsilon(config.epsilon)?;
    let planted = script.planted().clone();
    let n = planted.n();
    let mut coins = rng::stream(config.seed, streams::NOISE);
    let mut history: Vec<AdaptiveStep> = Vec::new();
    let mut seen = BTreeSet::new();
    while let Some((a, b, cost)) = script.next_edge(&history) {
        if history.len() == config.max_steps {
            return Err(Error::Protocol(format!(
                "script exceeded the step budget of {}",
                config.max_steps
            )));
        }
        let (u, v) = (a.min(b), a.max(b));
        if u == v || v >= n {
            return Err(Error::Protocol(format!("illegal edge ({a}, {b})")));
        }
        if !(0.0..=1.0).contains(&cost) {
            return Err(Error::Protocol(format!("cost {cost} outside [0, 1]")));
        }
        if !seen.insert((u, v)) {
            return Err(Error::Protocol(format!("duplicate edge ({u}, {v})")));
        }
        let in_random = coins.random::<f64>() < config.epsilon;
        history.push(AdaptiveStep { u, v, cost, in_random });
    }

    let deleted: BTreeSet<usize> = script.delete_random(&history).into_iter().collect();
    if let Some(&t) = deleted.iter().find(|&&t| t >= history.len() || !history[t].in_random) {
        return Err(Error::Protocol(format!("step {t} is not a random edge and cannot be deleted")));
    }

    let mut edges = Vec::new();
    for (t, step) in history.iter().enumerate() {
        if deleted.contains(&t) {
            continue;
        }
        let consistent = planted.consistent_sign(step.u, step.v);
        let sign = if step.in_random {
            script.sign_random(step, consistent)
        } else {
            consistent
        };
        edges.push((Edge::new(step.u, step.v, step.cost, sign), step.in_random));
    }
    edges.sort_by_key(|(e, _)| (e.u, e.v));
    let random_edges = edges
        .iter()
        .enumerate()
        .filter(|(_, (_, r))| *r)
        .map(|(i, _)| i)
        .collect();
    let instance = Instance {
        n,
        edges: edges.into_iter().map(|(e, _)| e).collect(),
    };
    let truth = GroundTruth {
        planted,
        random_edges,
        epsilon: config.epsilon,
    };
    Ok((instance, truth))
}

/// Plays a fixed edge list in order, then stops.
#[derive(Debug, Clone)]
pub struct FixedScript {
    pub planted: Clustering,
    pub edges: Vec<(usize, usize, f64)>,
    pub delete_all_random: bool,
}

impl AdversaryScript for FixedScript {
    fn planted(&self) -> &Clustering {
        &self.planted
    }

    fn next_edge(&mut self, history: &[AdaptiveStep]) -> Option<(usize, usize, f64)> {
        self.edges.get(history.len()).copied()
    }

    fn delete_random(&mut self, history: &[AdaptiveStep]) -> Vec<usize> {
        if !self.delete_all_random {
            return Vec::new();
        }
        history
            .iter()
            .enumerate()
            .filter(|(_, s)| s.in_random)
            .map(|(t, _)| t)
            .collect()
    }
}

/// Concentrates new edges around vertices touched by earlier random edges:
/// while such a vertex has an unused partner, the next edge is drawn at it.
/// Otherwise edges are taken in lexicographic order.
#[derive(Debug, Clone)]
pub struct ConcentrationAttack {
    planted: Clustering,
    steps: usize,
    used: BTreeSet<(usize, usize)>,
    hot: Vec<usize>,
    cursor: (usize, usize),
}

impl ConcentrationAttack {
    pub fn new(planted: Clustering, steps: usize) -> Self {
        ConcentrationAttack {
            planted,
            steps,
            used: BTreeSet::new(),
            hot: Vec::new(),
            cursor: (0, 1),
        }
    }

    fn fresh_at(&self, x: usize) -> Option<(usize, usize)> {
        let n = self.planted.n();
        (0..n)
            .filter(|&y| y != x)
            .map(|y| (x.min(y), x.max(y)))
            .find(|pair| !self.used.contains(pair))
    }

    fn advance_cursor(&mut self) -> Option<(usize, usize)> {
        let n = self.planted.n();
        while self.cursor.0 + 1 < n {
            let pair = self.cursor;
            self.cursor.1 += 1;
            if self.cursor.1 == n {
                self.cursor = (self.cursor.0 + 1, self.cursor.0 + 2);
            }
            if !self.used.contains(&pair) {
                return Some(pair);
            }
        }
        None
    }
}

impl AdversaryScript for ConcentrationAttack {
    fn planted(&self) -> &Clustering {
        &self.planted
    }

    fn next_edge(&mut self, history: &[AdaptiveStep]) -> Option<(usize, usize, f64)> {
        if history.len() >= self.steps {
            return None;
        }
        if let Some(last) = history.last() {
            if last.in_random {
                self.hot.push(last.u);
                self.hot.push(last.v);
            }
        }
        while let Some(&x) = self.hot.last() {
            if let Some(pair) = self.fresh_at(x) {
                self.used.insert(pair);
                return Some((pair.0, pair.1, 1.0));
            }
            self.hot.pop();
        }
        let pair = self.advance_cursor()?;
        self.used.insert(pair);
        Some((pair.0, pair.1, 1.0))
    }
}
