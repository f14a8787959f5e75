//! The unit-vector relaxation and its low-rank solver.
//!
//! Every vertex gets a unit vector and the objective charges
//! `c(u,v) * (1 - <u,v>)` on plus edges and `c(u,v) * <u,v>` on minus edges.
//! We optimise an `n x r` factor whose rows live on the unit sphere inside the
//! nonnegative orthant. Nonnegative rows make every inner product land in
//! `[0, 1]` without pairwise constraints, and every clustering still embeds
//! (one coordinate per cluster), so the optimum over this set is never worse
//! than the best clustering.
//!
//! The optimiser is projected gradient descent with a Barzilai-Borwein step
//! and a halving line search that only accepts non-increasing objectives.

use rand::Rng as _;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::{Clustering, Edge, Instance, Sign};
use crate::rng::{self, streams};

/// Allowed deviation of a row norm from 1.
pub const NORM_TOL: f64 = 1e-6;
/// Inner products further than this outside `[0, 1]` are an error.
pub const INNER_PRODUCT_TOL: f64 = 1e-5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    /// Factor rank; `None` means `min(n, 2 * k_guess + 8, 40)`.
    pub rank: Option<usize>,
    pub k_guess: usize,
    pub max_iters: usize,
    pub restarts: usize,
    /// Relative objective change below which an iteration counts as flat.
    pub tol: f64,
    /// Consecutive flat iterations needed to declare convergence.
    pub patience: usize,
    /// Step-size bounds for the Barzilai-Borwein rule.
    pub step_min: f64,
    pub step_max: f64,
    /// Halvings allowed per line search.
    pub max_halvings: usize,
    /// A restart whose objective sits this fraction above the best restart
    /// without improving by 1% over `stall_window` iterations is abandoned.
    pub stall_ratio: f64,
    pub stall_window: usize,
    pub seed: u64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            rank: None,
            k_guess: 4,
            max_iters: 3000,
            restarts: 5,
            tol: 1e-7,
            patience: 50,
            step_min: 1e-10,
            step_max: 1e6,
            max_halvings: 60,
            stall_ratio: 0.05,
            stall_window: 200,
            seed: 0,
        }
    }
}

impl SolverOptions {
    pub fn with_seed(seed: u64) -> Self {
        SolverOptions {
            seed,
            ..Default::default()
        }
    }

    pub fn rank_for(&self, n: usize) -> usize {
        self.rank
            .unwrap_or_else(|| n.min(2 * self.k_guess + 8).min(40))
            .max(1)
    }

    fn validate(&self) -> Result<()> {
        if self.rank == Some(0) {
            return Err(Error::param("rank must be at least 1"));
        }
        if self.restarts == 0 {
            return Err(Error::param("restarts must be at least 1"));
        }
        if !(self.step_min > 0.0 && self.step_min <= self.step_max) {
            return Err(Error::param("step bounds must satisfy 0 < step_min <= step_max"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SolverTrace {
    /// Iterations spent on the returned restart.
    pub iterations: usize,
    /// Norm of the projected-gradient step at the returned point.
    pub final_grad_norm: f64,
    pub restarts_used: usize,
    pub converged: bool,
    /// Final objective of every restart, in order (abandoned ones included).
    pub restart_objectives: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SdpSolution {
    n: usize,
    rank: usize,
    /// Row-major `n x rank`.
    embedding: Vec<f64>,
    pub objective: f64,
    pub trace: SolverTrace,
}

impl SdpSolution {
    pub fn from_parts(n: usize, rank: usize, embedding: Vec<f64>, objective: f64) -> Self {
        assert_eq!(embedding.len(), n * rank, "embedding shape");
        SdpSolution {
            n,
            rank,
            embedding,
            objective,
            trace: SolverTrace::default(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn embedding(&self) -> &[f64] {
        &self.embedding
    }

    pub fn row(&self, u: usize) -> &[f64] {
        &self.embedding[u * self.rank..(u + 1) * self.rank]
    }

    pub fn inner(&self, u: usize, v: usize) -> f64 {
        dot(self.row(u), self.row(v))
    }

    /// `||u - v||` through the unit-norm identity `2 - 2<u,v>`.
    pub fn distance(&self, u: usize, v: usize) -> f64 {
        (2.0 - 2.0 * self.inner(u, v)).max(0.0).sqrt()
    }

    pub fn converged(&self) -> bool {
        self.trace.converged
    }

    /// Unit norms within [`NORM_TOL`] and no negative coordinate.
    pub fn check_feasible(&self) -> Result<()> {
        for u in 0..self.n {
            let row = self.row(u);
            let norm = dot(row, row).sqrt();
            if (norm - 1.0).abs() > NORM_TOL {
                return Err(Error::invariant(format!("row {u} has norm {norm}")));
            }
            if let Some(x) = row.iter().find(|&&x| x < 0.0) {
                return Err(Error::invariant(format!("row {u} has negative entry {x}")));
            }
        }
        Ok(())
    }
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Per-edge SDP value: `1 - <u,v>` on plus edges, `<u,v>` on minus edges.
pub fn edge_value(solution: &SdpSolution, edge: &Edge) -> Result<f64> {
    if edge.u >= solution.n || edge.v >= solution.n {
        return Err(Error::param(format!(
            "edge ({}, {}) outside a solution on {} vertices",
            edge.u, edge.v, solution.n
        )));
    }
    let ip = solution.inner(edge.u, edge.v);
    if !(-INNER_PRODUCT_TOL..=1.0 + INNER_PRODUCT_TOL).contains(&ip) {
        return Err(Error::invariant(format!(
            "inner product {ip} of ({}, {}) outside [0, 1]",
            edge.u, edge.v
        )));
    }
    let ip = ip.clamp(0.0, 1.0);
    Ok(match edge.sign {
        Sign::Plus => 1.0 - ip,
        Sign::Minus => ip,
    })
}

pub fn edge_values(instance: &Instance, solution: &SdpSolution) -> Result<Vec<f64>> {
    instance.edges().iter().map(|e| edge_value(solution, e)).collect()
}

/// `sum_e c(e) * f(e)` over all edges.
pub fn sdp_cost(instance: &Instance, solution: &SdpSolution) -> Result<f64> {
    let mut total = 0.0;
    for e in instance.edges() {
        total += e.cost * edge_value(solution, e)?;
    }
    Ok(total)
}

/// Indicator embedding of a clustering: vertex `u` maps to basis vector `label(u)`.
pub fn embed_clustering(instance: &Instance, clustering: &Clustering, rank: usize) -> Result<SdpSolution> {
    if clustering.n() != instance.n() {
        return Err(Error::param("clustering and instance sizes differ"));
    }
    if rank < clustering.k() {
        return Err(Error::param(format!(
            "rank {rank} too small for {} clusters",
            clustering.k()
        )));
    }
    let n = clustering.n();
    let mut embedding = vec![0.0; n * rank];
    for u in 0..n {
        embedding[u * rank + clustering.label(u)] = 1.0;
    }
    let mut sol = SdpSolution::from_parts(n, rank, embedding, 0.0);
    sol.objective = sdp_cost(instance, &sol)?;
    sol.trace.converged = true;
    Ok(sol)
}

/// Flattened view of the objective: `constant + sum_e w_e <x_u, x_v>` with
/// `w_e = -c` on plus edges and `+c` on minus edges.
pub struct Objective {
    n: usize,
    rank: usize,
    ends: Vec<(usize, usize)>,
    weights: Vec<f64>,
    constant: f64,
}

impl Objective {
    pub fn new(instance: &Instance, rank: usize) -> Self {
        let mut ends = Vec::with_capacity(instance.m());
        let mut weights = Vec::with_capacity(instance.m());
        let mut constant = 0.0;
        for e in instance.edges() {
            ends.push((e.u, e.v));
            match e.sign {
                Sign::Plus => {
                    constant += e.cost;
                    weights.push(-e.cost);
                }
                Sign::Minus => weights.push(e.cost),
            }
        }
        Objective {
            n: instance.n(),
            rank,
            ends,
            weights,
            constant,
        }
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        let r = self.rank;
        let mut total = self.constant;
        for (&(u, v), &w) in self.ends.iter().zip(&self.weights) {
            total += w * dot(&x[u * r..(u + 1) * r], &x[v * r..(v + 1) * r]);
        }
        total
    }

    /// Euclidean gradient with respect to the (unconstrained) factor.
    pub fn gradient(&self, x: &[f64], grad: &mut [f64]) {
        let r = self.rank;
        grad.fill(0.0);
        for (&(u, v), &w) in self.ends.iter().zip(&self.weights) {
            for j in 0..r {
                grad[u * r + j] += w * x[v * r + j];
                grad[v * r + j] += w * x[u * r + j];
            }
        }
    }

    fn max_weighted_degree(&self) -> f64 {
        let mut deg = vec![0.0; self.n];
        for (&(u, v), &w) in self.ends.iter().zip(&self.weights) {
            deg[u] += w.abs();
            deg[v] += w.abs();
        }
        deg.into_iter().fold(0.0, f64::max)
    }
}

/// Euclidean projection of each row onto the unit sphere intersected with the
/// nonnegative orthant. A row with no positive entry projects onto the basis
/// vector of its largest coordinate.
pub fn project_rows(x: &mut [f64], rank: usize) {
    for row in x.chunks_mut(rank) {
        let mut best = 0;
        let mut sq = 0.0;
        for j in 0..row.len() {
            if row[j] > row[best] {
                best = j;
            }
            sq += row[j].max(0.0).powi(2);
        }
        if sq > 0.0 {
            let inv = 1.0 / sq.sqrt();
            row.iter_mut().for_each(|v| *v = v.max(0.0) * inv);
        } else {
            // Every entry was <= 0; the projection picks the largest one.
            row.fill(0.0);
            row[best] = 1.0;
        }
    }
}

fn project_step(x: &[f64], grad: &[f64], alpha: f64, rank: usize, out: &mut [f64]) {
    for (row, (xr, gr)) in out
        .chunks_mut(rank)
        .zip(x.chunks(rank).zip(grad.chunks(rank)))
    {
        let mut best = 0;
        let mut sq = 0.0;
        for j in 0..rank {
            let y = xr[j] - alpha * gr[j];
            if y > xr[best] - alpha * gr[best] {
                best = j;
            }
            let c = y.max(0.0);
            row[j] = c;
            sq += c * c;
        }
        if sq > 0.0 {
            let inv = 1.0 / sq.sqrt();
            row.iter_mut().for_each(|v| *v *= inv);
        } else {
            row.fill(0.0);
            row[best] = 1.0;
        }
    }
}

fn random_start(n: usize, rank: usize, seed: u64, restart: usize) -> Vec<f64> {
    let mut rng = rng::stream(seed, streams::SOLVER_BASE + restart as u64);
    let mut x: Vec<f64> = (0..n * rank)
        .map(|_| rng.sample::<f64, _>(StandardNormal).abs())
        .collect();
    project_rows(&mut x, rank);
    x
}

struct RestartResult {
    x: Vec<f64>,
    objective: f64,
    iterations: usize,
    grad_norm: f64,
    converged: bool,
}

fn run_restart(obj: &Objective, mut x: Vec<f64>, opts: &SolverOptions, best_so_far: f64) -> RestartResult {
    let len = x.len();
    let r = obj.rank;
    let mut grad = vec![0.0; len];
    let mut next = vec![0.0; len];
    let mut next_grad = vec![0.0; len];
    obj.gradient(&x, &mut grad);
    let mut f = obj.value(&x);

    let lipschitz = obj.max_weighted_degree();
    let mut alpha = if lipschitz > 0.0 { 1.0 / lipschitz } else { 1.0 };
    alpha = alpha.clamp(opts.step_min, opts.step_max);

    let mut flat = 0;
    let mut converged = false;
    let mut iterations = 0;
    let mut window_start = f;
    let mut step_norm = 0.0;

    while iterations < opts.max_iters {
        iterations += 1;
        let mut accepted = None;
        let mut trial = alpha;
        for _ in 0..=opts.max_halvings {
            project_step(&x, &grad, trial, r, &mut next);
            let fn_ = obj.value(&next);
            if fn_ <= f {
                accepted = Some(fn_);
                break;
            }
            trial *= 0.5;
            if trial < opts.step_min {
                break;
            }
        }
        let Some(f_next) = accepted else {
            // No descent at any admissible step: a stationary point.
            converged = true;
            break;
        };

        obj.gradient(&next, &mut next_grad);
        let mut ss = 0.0;
        let mut sy = 0.0;
        for i in 0..len {
            let s = next[i] - x[i];
            ss += s * s;
            sy += s * (next_grad[i] - grad[i]);
        }
        step_norm = ss.sqrt() / trial;
        alpha = if sy > 0.0 { ss / sy } else { opts.step_max };
        alpha = alpha.clamp(opts.step_min, opts.step_max);

        let change = (f - f_next).abs() / f_next.abs().max(1.0);
        std::mem::swap(&mut x, &mut next);
        std::mem::swap(&mut grad, &mut next_grad);
        f = f_next;

        if change < opts.tol {
            flat += 1;
            if flat >= opts.patience {
                converged = true;
                break;
            }
        } else {
            flat = 0;
        }

        if opts.stall_window > 0 && iterations % opts.stall_window == 0 {
            let stalled = window_start - f < 0.01 * f.abs();
            if best_so_far.is_finite() && f > best_so_far * (1.0 + opts.stall_ratio) && stalled {
                break;
            }
            window_start = f;
        }
    }

    RestartResult {
        x,
        objective: f,
        iterations,
        grad_norm: step_norm,
        converged,
    }
}

/// Best of `opts.restarts` seeded projected-gradient runs.
///
/// Running out of iterations is not an error: the best point found is returned
/// with `trace.converged == false`.
pub fn solve(instance: &Instance, opts: &SolverOptions) -> Result<SdpSolution> {
    opts.validate()?;
    let n = instance.n();
    let rank = opts.rank_for(n);
    let obj = Objective::new(instance, rank);

    let mut best: Option<RestartResult> = None;
    let mut restart_objectives = Vec::with_capacity(opts.restarts);
    for restart in 0..opts.restarts {
        let start = random_start(n, rank, opts.seed, restart);
        let best_f = best.as_ref().map_or(f64::INFINITY, |b| b.objective);
        let res = run_restart(&obj, start, opts, best_f);
        restart_objectives.push(res.objective);
        if res.objective < best_f {
            best = Some(res);
        }
    }
    let best = best.expect("at least one restart");

    let mut sol = SdpSolution::from_parts(n, rank, best.x, 0.0);
    sol.objective = sdp_cost(instance, &sol)?;
    sol.trace = SolverTrace {
        iterations: best.iterations,
        final_grad_norm: best.grad_norm,
        restarts_used: opts.restarts,
        converged: best.converged,
        restart_objectives,
    };
    Ok(sol)
}
