//! Acceptance suite. Runs as a plain binary (`harness = false`) so every
//! criterion prints exactly one PASS/FAIL line; exits non-zero if any fails.

#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::path::Path;
use std::process::Command;

use cclab::game::{simulate_game, GameConfig, StrategyKind};
use cclab::instance::{generate_basic, generate_gnp_planted, SignPolicy};
use cclab::metrics::{classification_error, core_structure, structural_stats, RHO_CORE, RHO_INTER};
use cclab::ptas::{local_search_solve, run_ptas_with, DeltaMode, PtasConfig};
use cclab::recovery::greedy_cluster;
use cclab::sdp::{self, project_rows, Objective};
use cclab::{Clustering, Edge, Instance, Sign, SolverOptions};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::Value;
use statrs::distribution::{Binomial, DiscreteCDF};

/// Largest `q_surviving_cost / q_cost` seen in the calibration run (seeds
/// 1..=10, n=500, p=0.15, eps=0.2, delta=0.25) before the 0.1 threshold was
/// frozen.
const CALIBRATED_MAX_RATIO: f64 = 0.0201;

struct Verdict {
    ok: bool,
    detail: String,
}

impl Verdict {
    fn new(ok: bool, detail: impl Into<String>) -> Self {
        Verdict { ok, detail: detail.into() }
    }
}

/// Flip-bound checks gathered from every pipeline run below.
#[derive(Default)]
struct PruneLedger {
    runs: usize,
    violations: Vec<String>,
}

impl PruneLedger {
    fn record(&mut self, label: String, flip_cost: f64, objective: f64, delta: f64) {
        self.runs += 1;
        if flip_cost > objective / (1.0 - delta) {
            self.violations.push(format!("{label}: {flip_cost} > {objective}/(1-{delta})"));
        }
    }
}

fn criterion_1() -> Verdict {
    let out = cclab_cli::run(["cclab", "bench", "--format", "json"]);
    if out.code != 0 {
        return Verdict::new(false, format!("bench exited {}: {}", out.code, out.stderr.trim()));
    }
    let v: Value = serde_json::from_str(&out.stdout).expect("bench json");
    let mut ok = true;
    let mut parts = Vec::new();
    for row in v["summary"].as_array().expect("summary") {
        let n = row["n"].as_u64().unwrap() as f64;
        let avg = row["average"].as_f64().unwrap();
        let limit = if n >= 1000.0 { 0.005 * n } else { 0.02 * n };
        ok &= avg <= limit;
        parts.push(format!("n={} avg {avg:.2} (limit {limit:.1}) {}", n, row["misclassified"]));
    }
    ok &= parts.len() == 3;
    Verdict::new(ok, parts.join("; "))
}

fn random_pairs(n: usize, seed: u64) -> Vec<(usize, usize, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pairs = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.random::<f64>() < 0.7 {
                pairs.push((u, v, rng.random::<f64>()));
            }
        }
    }
    pairs
}

fn criterion_2(ledger: &mut PruneLedger) -> Verdict {
    let mut worst = f64::NEG_INFINITY;
    let mut failures = Vec::new();
    for seed in 0..100u64 {
        let n = 3 + (seed % 6) as usize;
        let eps = [0.0, 0.2, 0.49][(seed % 3) as usize];
        let planted = Clustering::balanced(n, 1 + (seed % 3) as usize).unwrap();
        let (inst, truth) =
            generate_basic(n, &random_pairs(n, seed), &planted, eps, SignPolicy::Flip, seed).unwrap();
        let (opt, _) = common::brute_opt(&inst);
        let sol = sdp::solve(&inst, &SolverOptions::with_seed(seed)).unwrap();
        worst = worst.max(sol.objective - opt);
        if sol.objective > opt + 1e-4 || sol.check_feasible().is_err() {
            failures.push(seed);
        }
        // The small instances double as pipeline runs for the prune ledger.
        let cfg = PtasConfig { solver: SolverOptions::with_seed(seed), ..Default::default() };
        let (_, report) = run_ptas_with(&inst, &sol, &cfg, Some(&truth)).unwrap();
        ledger.record(format!("ptas n={n} seed={seed}"), report.pruned_cost, report.sdp_objective, report.delta);
    }
    let triangle = Instance::new(
        3,
        vec![
            Edge::new(0, 1, 1.0, Sign::Plus),
            Edge::new(1, 2, 1.0, Sign::Plus),
            Edge::new(0, 2, 1.0, Sign::Minus),
        ],
    )
    .unwrap();
    let (tri_opt, _) = common::brute_opt(&triangle);
    let tri = sdp::solve(&triangle, &SolverOptions::with_seed(1)).unwrap().objective;
    let ok = failures.is_empty() && tri <= 0.59 && tri_opt == 1.0;
    Verdict::new(
        ok,
        format!(
            "max(sdp - OPT) over 100 instances = {worst:.2e}, failing seeds {failures:?}; triangle {tri:.4} (OPT {tri_opt})"
        ),
    )
}

fn criterion_3(ledger: &mut PruneLedger) -> Verdict {
    let delta = 0.25;
    let ratios: Vec<(u64, f64, f64, f64, f64)> = (1..=10u64)
        .into_par_iter()
        .map(|seed| {
            let (inst, truth) = generate_gnp_planted(500, 0.15, 4, 0.2, seed).unwrap();
            let sol = sdp::solve(&inst, &SolverOptions::with_seed(seed)).unwrap();
            let st = structural_stats(&inst, &truth, &sol, Some(delta)).unwrap();
            (seed, st.surviving_fraction(), st.e_flip_cost, st.sdp_objective, st.delta)
        })
        .collect();
    for &(seed, _, flip, obj, d) in &ratios {
        ledger.record(format!("structural n=500 seed={seed}"), flip, obj, d);
    }
    let max = ratios.iter().map(|r| r.1).fold(0.0, f64::max);
    let list: Vec<String> = ratios.iter().map(|r| format!("{:.4}", r.1)).collect();
    Verdict::new(
        max <= 0.1,
        format!("q_surviving/q ratios [{}], max {max:.4} <= 0.1 (calibrated max {CALIBRATED_MAX_RATIO})", list.join(", ")),
    )
}

fn criterion_4(ledger: &mut PruneLedger) -> Verdict {
    let runs: Vec<_> = (1..=4u64)
        .into_par_iter()
        .map(|seed| {
            let (inst, truth) = generate_gnp_planted(1000, 0.15, 4, 0.2, seed).unwrap();
            let sol = sdp::solve(&inst, &SolverOptions::with_seed(seed)).unwrap();
            let core = core_structure(&sol, &truth, RHO_CORE, RHO_INTER).unwrap();
            let stats: Vec<_> = [None, Some(0.1), Some(0.25)]
                .into_iter()
                .map(|d| structural_stats(&inst, &truth, &sol, d).unwrap())
                .collect();
            (seed, core.min_core_fraction, core.min_center_distance, stats)
        })
        .collect();
    let mut ok = true;
    let mut parts = Vec::new();
    for (seed, frac, dist, stats) in runs {
        for st in stats {
            ledger.record(format!("structural n=1000 seed={seed} delta={}", st.delta), st.e_flip_cost, st.sdp_objective, st.delta);
        }
        let d = dist.unwrap_or(f64::NAN);
        ok &= frac >= 0.95 && d >= 0.8;
        parts.push(format!("seed {seed}: core {frac:.3}, center dist {d:.3}"));
    }
    Verdict::new(ok, parts.join("; "))
}

fn criterion_5(ledger: &mut PruneLedger) -> Verdict {
    // Full pipelines on planted instances at both delta modes.
    for seed in 1..=4u64 {
        let (inst, truth) = generate_gnp_planted(200, 0.25, 4, 0.2, seed).unwrap();
        let sol = sdp::solve(&inst, &SolverOptions::with_seed(seed)).unwrap();
        for delta in [DeltaMode::Fixed(0.1), DeltaMode::Fixed(0.45), DeltaMode::Schedule] {
            let cfg = PtasConfig { delta, solver: SolverOptions::with_seed(seed), ..Default::default() };
            let (_, report) = run_ptas_with(&inst, &sol, &cfg, Some(&truth)).unwrap();
            ledger.record(format!("ptas n=200 seed={seed} {delta:?}"), report.pruned_cost, report.sdp_objective, report.delta);
            let st = structural_stats(&inst, &truth, &sol, Some(report.delta)).unwrap();
            ledger.record(format!("structural n=200 seed={seed}"), st.e_flip_cost, st.sdp_objective, st.delta);
        }
    }
    Verdict::new(
        ledger.violations.is_empty() && ledger.runs > 0,
        format!("{} pipeline runs checked, violations {:?}", ledger.runs, ledger.violations),
    )
}

/// Event probability of the all-ones strategy, from the binomial law of its
/// win count.
fn exact_fixed_order(m: u64, eps: f64, lambda: f64) -> f64 {
    if (m as f64) < lambda {
        return 0.0;
    }
    let need = ((m as f64 - (1.0 - 2.0 * eps) * m as f64 / 2.0) / 2.0).ceil() as u64;
    if need == 0 {
        return 1.0;
    }
    1.0 - Binomial::new(eps, m).unwrap().cdf(need - 1)
}

fn criterion_6() -> Verdict {
    let trials = 100_000;
    let cfg = GameConfig::new(2000, 0.4, StrategyKind::FixedOrder, trials, 400.0);
    let out = simulate_game(&cfg, 1).unwrap();
    let bound = 2.0 * (-3.2f64).exp();
    let exact = exact_fixed_order(2000, 0.4, 400.0);
    let exact_se = (exact * (1.0 - exact) / trials as f64).sqrt();
    let under = out.empirical_prob <= bound + 3.0 * out.std_err;
    let agrees = (out.empirical_prob - exact).abs() <= 4.0 * exact_se + 1.0 / trials as f64;
    // The same cross-check where the tail is not negligible.
    let small = GameConfig::new(100, 0.4, StrategyKind::FixedOrder, trials, 50.0);
    let small_out = simulate_game(&small, 2).unwrap();
    let small_exact = exact_fixed_order(100, 0.4, 50.0);
    let small_se = (small_exact * (1.0 - small_exact) / trials as f64).sqrt();
    let small_agrees = (small_out.empirical_prob - small_exact).abs() <= 4.0 * small_se;
    Verdict::new(
        under && agrees && small_agrees && (out.theoretical_bound - bound).abs() < 1e-12,
        format!(
            "empirical {:.2e} (se {:.1e}) vs bound {bound:.4}; exact tail {exact:.2e}; m=100 check empirical {:.4} vs exact {small_exact:.4}",
            out.empirical_prob, out.std_err, small_out.empirical_prob
        ),
    )
}

fn props_greedy() -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(71);
    for case in 0..300 {
        let n = rng.random_range(1..30);
        let p = rng.random::<f64>();
        let mut adj = vec![Vec::new(); n];
        for u in 0..n {
            for v in u + 1..n {
                if rng.random::<f64>() < p {
                    adj[u].push(v);
                    adj[v].push(u);
                }
            }
        }
        let c = greedy_cluster(&adj);
        let sizes = c.sizes();
        let star = c.members().iter().all(|m| m.iter().any(|&x| m.iter().all(|&v| v == x || adj[x].contains(&v))));
        if c.n() != n || sizes.iter().sum::<usize>() != n || sizes.contains(&0) || !star {
            return Err(format!("greedy case {case}"));
        }
    }
    Ok(())
}

fn props_matching() -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(72);
    for case in 0..500 {
        let n = rng.random_range(1..11);
        let kp = rng.random_range(1..5);
        let kf = rng.random_range(1..5);
        let planted = Clustering::from_raw(&(0..n).map(|_| rng.random_range(0..kp)).collect::<Vec<_>>());
        let found = Clustering::from_raw(&(0..n).map(|_| rng.random_range(0..kf)).collect::<Vec<_>>());
        let r = classification_error(&planted, &found).unwrap();
        let shift = rng.random_range(0..found.k());
        let permuted = Clustering::new(found.labels().iter().map(|&l| (l + shift) % found.k()).collect()).unwrap();
        let p = classification_error(&planted, &permuted).unwrap();
        if r.matched_overlap != common::brute_matching(&planted, &found) || p.matched_overlap != r.matched_overlap {
            return Err(format!("matching case {case}"));
        }
    }
    Ok(())
}

fn props_local_search() -> Result<(), String> {
    for seed in 0..150u64 {
        let n = 1 + (seed % 8) as usize;
        let inst = common::random_instance(n, 0.3 + 0.1 * (seed % 7) as f64, seed % 2 == 0, seed);
        let labels = local_search_solve(&inst, None, 1000).unwrap().clustering.labels().to_vec();
        let base = common::cost_of_labels(&inst, &labels);
        let k = labels.iter().max().map_or(0, |m| m + 1);
        for v in 0..n {
            for target in (0..=k).filter(|&t| t != labels[v]) {
                if common::cost_after_move(&inst, &labels, v, target) < base - 1e-9 {
                    return Err(format!("local search seed {seed}: moving {v} to {target} helps"));
                }
            }
        }
    }
    Ok(())
}

fn props_gradient() -> Result<(), String> {
    for seed in 0..60u64 {
        let n = 2 + (seed % 7) as usize;
        let r = 1 + (seed % 4) as usize;
        let inst = common::random_instance(n, 0.7, false, seed);
        let obj = Objective::new(&inst, r);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xabc);
        let mut x: Vec<f64> = (0..n * r).map(|_| rng.random::<f64>()).collect();
        project_rows(&mut x, r);
        let mut grad = vec![0.0; x.len()];
        obj.gradient(&x, &mut grad);
        let h = 1e-5;
        for i in 0..x.len() {
            let (mut plus, mut minus) = (x.clone(), x.clone());
            plus[i] += h;
            minus[i] -= h;
            let fd = (obj.value(&plus) - obj.value(&minus)) / (2.0 * h);
            let scale = grad[i].abs().max(fd.abs()).max(1.0);
            if (fd - grad[i]).abs() / scale > 1e-4 {
                return Err(format!("gradient seed {seed} coord {i}: fd {fd} vs {}", grad[i]));
            }
        }
    }
    Ok(())
}

/// Runs the binary and returns stdout plus the bytes of every output file.
fn run_cli(dir: &Path, args: &[&str], outputs: &[&str], threads: &str) -> Result<Vec<u8>, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_cclab"))
        .args(args)
        .current_dir(dir)
        .env("CC_THREADS", threads)
        .output()
        .map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(format!("{args:?} failed: {}", String::from_utf8_lossy(&out.stderr)));
    }
    let mut bytes = out.stdout;
    for f in outputs {
        bytes.extend(std::fs::read(dir.join(f)).map_err(|e| format!("{f}: {e}"))?);
    }
    Ok(bytes)
}

fn props_determinism() -> Result<usize, String> {
    let commands: Vec<(Vec<&str>, Vec<&str>)> = vec![
        (vec!["generate", "--n", "80", "--p", "0.3", "--seed", "5", "--out", "g.txt"], vec!["g.txt", "g.truth"]),
        (
            vec!["generate", "--model", "basic", "--costs", "uniform", "--sign-policy", "random", "--n", "50", "--seed", "5", "--out", "b.txt"],
            vec!["b.txt", "b.truth"],
        ),
        (vec!["generate", "--model", "adaptive", "--n", "50", "--epsilon", "0.3", "--seed", "5", "--out", "a.txt"], vec!["a.txt", "a.truth"]),
        (vec!["solve", "--input", "g.txt", "--seed", "2", "--out", "s.txt"], vec!["s.txt"]),
        (vec!["ptas", "--input", "b.txt", "--seed", "2", "--delta", "schedule", "--out", "p.txt"], vec!["p.txt"]),
        (vec!["recover", "--input", "g.txt", "--seed", "2", "--out", "r.txt"], vec!["r.txt"]),
        (vec!["evaluate", "--input", "g.txt", "--labels", "r.txt"], vec![]),
        (vec!["validate", "--input", "a.txt", "--seed", "2"], vec![]),
        (vec!["validate", "--input", "g.txt", "--seed", "2", "--solution", "s.txt"], vec![]),
        (vec!["game", "--m", "200", "--epsilon", "0.3", "--lambda", "40", "--strategy", "double-down", "--trials", "5000", "--seed", "9"], vec![]),
        (vec!["bench", "--rows", "60:0.3,80:0.3", "--runs", "2", "--format", "csv"], vec![]),
    ];
    let a = tempfile::tempdir().map_err(|e| e.to_string())?;
    let b = tempfile::tempdir().map_err(|e| e.to_string())?;
    for (args, outputs) in &commands {
        let first = run_cli(a.path(), args, outputs, "1")?;
        let second = run_cli(b.path(), args, outputs, "4")?;
        if first != second {
            return Err(format!("{:?} differs between runs", args));
        }
    }
    Ok(commands.len())
}

fn criterion_7() -> Verdict {
    let mut failures = Vec::new();
    for (name, result) in [
        ("greedy", props_greedy()),
        ("matching", props_matching()),
        ("local search", props_local_search()),
        ("gradient", props_gradient()),
    ] {
        if let Err(e) = result {
            failures.push(format!("{name}: {e}"));
        }
    }
    let det = match props_determinism() {
        Ok(count) => format!("{count} commands byte-identical across runs and thread counts"),
        Err(e) => {
            failures.push(e);
            String::from("determinism failed")
        }
    };
    Verdict::new(
        failures.is_empty(),
        format!("greedy/matching/local-search/gradient spot checks; {det}; failures {failures:?}"),
    )
}

fn main() {
    let mut ledger = PruneLedger::default();
    let results = [
        ("table reproduction", criterion_1()),
        ("relaxation dominance", criterion_2(&mut ledger)),
        ("structural near-integrality", criterion_3(&mut ledger)),
        ("core geometry", criterion_4(&mut ledger)),
        ("prune accounting", criterion_5(&mut ledger)),
        ("betting game bound", criterion_6()),
        ("property suites", criterion_7()),
    ];
    let mut all = true;
    for (i, (name, v)) in results.iter().enumerate() {
        all &= v.ok;
        println!("{} criterion {} ({name}): {}", if v.ok { "PASS" } else { "FAIL" }, i + 1, v.detail);
    }
    if !all {
        std::process::exit(1);
    }
}
