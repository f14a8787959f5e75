//! Planted-partition recovery benchmark on G(n, p) with four clusters.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::instance::generate_gnp_planted;
use crate::metrics::classification_error;
use crate::recovery::{recover, RecoveryParams};
use crate::sdp::SolverOptions;

/// The `(n, p)` grid; the last row is slow.
pub const GRID: [(usize, f64); 4] = [(200, 0.25), (400, 0.19), (1000, 0.15), (2000, 0.13)];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchConfig {
    pub rows: Vec<(usize, f64)>,
    pub epsilon: f64,
    pub k: usize,
    pub runs: usize,
    /// Run `i` of every row uses seed `seed + i`.
    pub seed: u64,
    pub solver: SolverOptions,
    pub recovery: RecoveryParams,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            rows: GRID[..3].to_vec(),
            epsilon: 0.2,
            k: 4,
            runs: 4,
            seed: 1,
            solver: SolverOptions::default(),
            recovery: RecoveryParams::default(),
        }
    }
}

impl BenchConfig {
    /// Every `(n, p, seed)` the run will execute, in output order.
    pub fn plan(&self) -> Vec<(usize, f64, u64)> {
        let mut plan: Vec<(usize, f64, u64)> = self
            .rows
            .iter()
            .flat_map(|&(n, p)| (0..self.runs).map(move |i| (n, p, i as u64)))
            .map(|(n, p, i)| (n, p, self.seed + i))
            .collect();
        plan.sort_by(|a, b| (a.0, a.2).cmp(&(b.0, b.2)).then(a.1.total_cmp(&b.1)));
        plan
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRecord {
    pub n: usize,
    pub p: f64,
    pub epsilon: f64,
    pub seed: u64,
    pub misclassified: usize,
    pub error_pct: f64,
    pub clusters_found: usize,
    pub sdp_objective: f64,
    pub planted_cost: f64,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RowSummary {
    pub n: usize,
    pub p: f64,
    pub misclassified: Vec<usize>,
    pub average: f64,
    pub percent: f64,
}

/// One generate-recover-score run.
pub fn run_trial(
    n: usize,
    p: f64,
    k: usize,
    epsilon: f64,
    seed: u64,
    solver: &SolverOptions,
    params: &RecoveryParams,
) -> Result<BenchRecord> {
    let (instance, truth) = generate_gnp_planted(n, p, k, epsilon, seed)?;
    let opts = SolverOptions {
        seed,
        k_guess: k,
        ..solver.clone()
    };
    let (found, solution) = recover(&instance, &opts, params)?;
    let err = classification_error(&truth.planted, &found)?;
    Ok(BenchRecord {
        n,
        p,
        epsilon,
        seed,
        misclassified: err.misclassified,
        error_pct: 100.0 * err.error,
        clusters_found: found.k(),
        sdp_objective: solution.objective,
        planted_cost: crate::metrics::clustering_cost(&instance, &truth.planted)?,
        converged: solution.converged(),
    })
}

/// Runs the plan with trials in parallel; output is sorted by `(n, seed)`.
pub fn run_bench(config: &BenchConfig) -> Result<Vec<BenchRecord>> {
    config
        .plan()
        .into_par_iter()
        .map(|(n, p, seed)| run_trial(n, p, config.k, config.epsilon, seed, &config.solver, &config.recovery))
        .collect()
}

pub fn summarize(records: &[BenchRecord]) -> Vec<RowSummary> {
    let mut out: Vec<RowSummary> = Vec::new();
    for r in records {
        match out.iter_mut().find(|s| s.n == r.n && s.p == r.p) {
            Some(s) => s.misclassified.push(r.misclassified),
            None => out.push(RowSummary {
                n: r.n,
                p: r.p,
                misclassified: vec![r.misclassified],
                average: 0.0,
                percent: 0.0,
            }),
        }
    }
    for s in &mut out {
        s.average = s.misclassified.iter().sum::<usize>() as f64 / s.misclassified.len() as f64;
        s.percent = 100.0 * s.average / s.n as f64;
    }
    out
}

pub fn to_csv(records: &[BenchRecord]) -> String {
    let mut out = String::from("n,p,epsilon,seed,misclassified,error_pct\n");
    for r in records {
        out.push_str(&format!(
            "{},{},{},{},{},{:.4}\n",
            r.n, r.p, r.epsilon, r.seed, r.misclassified, r.error_pct
        ));
    }
    out
}

pub fn to_table(summaries: &[RowSummary]) -> String {
    let mut out = String::from("     n     p | runs                 |   avg |      %\n");
    for s in summaries {
        let runs: Vec<String> = s.misclassified.iter().map(|m| format!("{m:>4}")).collect();
        out.push_str(&format!(
            "{:>6} {:>5} | {:<20} | {:>5.2} | {:>5.2}%\n",
            s.n,
            s.p,
            runs.join(" "),
            s.average,
            s.percent
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plan_is_sorted_by_n_then_seed() {
        let cfg = BenchConfig {
            rows: vec![(400, 0.19), (200, 0.25)],
            runs: 2,
            seed: 10,
            ..Default::default()
        };
        assert_eq!(
            cfg.plan(),
            vec![(200, 0.25, 10), (200, 0.25, 11), (400, 0.19, 10), (400, 0.19, 11)]
        );
    }

    #[test]
    fn summary_and_csv() {
        let rec = |seed, m| BenchRecord {
            n: 200,
            p: 0.25,
            epsilon: 0.2,
            seed,
            misclassified: m,
            error_pct: 100.0 * m as f64 / 200.0,
            clusters_found: 4,
            sdp_objective: 0.0,
            planted_cost: 0.0,
            converged: true,
        };
        let records = vec![rec(1, 0), rec(2, 0), rec(3, 2), rec(4, 2)];
        let s = summarize(&records);
        assert_eq!(s.len(), 1);
        assert_eq!(s[0].average, 1.0);
        assert_eq!(s[0].percent, 0.5);
        let csv = to_csv(&records);
        assert!(csv.starts_with("n,p,epsilon,seed,misclassified,error_pct\n200,0.25,0.2,1,0,0.0000\n"));
    }
}
