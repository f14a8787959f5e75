use std::fs;
use std::path::Path;

use cclab::bench::{self, BenchConfig, BenchRecord, GRID};
use cclab::game::{simulate_game, GameConfig, StrategyKind};
use cclab::instance::{generate_adaptive, generate_basic, generate_gnp_planted, AdaptiveConfig, ConcentrationAttack, SignPolicy};
use cclab::metrics::{
    check_assumptions, classification_error, clustering_cost, core_structure, structural_stats, RHO_CORE, RHO_INTER,
};
use cclab::ptas::{run_ptas_with, DeltaMode, PtasConfig};
use cclab::recovery::{self, RecoveryParams};
use cclab::{io, sdp, Clustering, GroundTruth, Instance, SdpSolution, SolverOptions};
use rand::Rng;
use serde_json::{json, Value};

use crate::args::*;
use crate::Failure;

type CmdResult = Result<String, (String, Failure)>;

fn fail<T>(f: Failure) -> Result<T, (String, Failure)> {
    Err((String::new(), f))
}

fn lift<T>(r: cclab::Result<T>) -> Result<T, (String, Failure)> {
    r.map_err(|e| (String::new(), e.into()))
}

fn render(v: &Value) -> String {
    serde_json::to_string_pretty(v).expect("json values serialize") + "\n"
}

pub fn dispatch(cli: &Cli) -> CmdResult {
    match &cli.command {
        Command::Generate(a) => generate(a),
        Command::Solve(a) => solve(a, cli.strict),
        Command::Ptas(a) => ptas(a, cli.strict),
        Command::Recover(a) => recover(a, cli.strict),
        Command::Evaluate(a) => evaluate(a),
        Command::Validate(a) => validate(a, cli.strict),
        Command::Game(a) => game(a),
        Command::Bench(a) => bench_cmd(a),
    }
}

fn load(path: &Path) -> Result<(Instance, Option<GroundTruth>), (String, Failure)> {
    io::load_instance(path).map_err(|e| (String::new(), Failure::Input(format!("{}: {e}", path.display()))))
}

fn write_file(path: &Path, text: &str) -> Result<(), (String, Failure)> {
    fs::write(path, text).map_err(|e| (String::new(), Failure::Input(format!("{}: {e}", path.display()))))
}

fn solver_options(a: &SolverArgs) -> SolverOptions {
    SolverOptions {
        rank: a.rank,
        k_guess: a.k_guess,
        max_iters: a.max_iters,
        restarts: a.restarts,
        tol: a.tol,
        seed: a.seed,
        ..Default::default()
    }
}

/// Prints `value`, then fails with code 5 under `--strict` if the solver did
/// not converge.
fn finish(value: Value, solution: &SdpSolution, strict: bool) -> CmdResult {
    let out = render(&value);
    if strict && !solution.converged() {
        return Err((
            out,
            Failure::NotConverged(format!(
                "solver stopped after {} iterations without converging",
                solution.trace.iterations
            )),
        ));
    }
    Ok(out)
}

fn generate(a: &GenerateArgs) -> CmdResult {
    let (instance, truth) = match a.model {
        Model::GnpPlanted => lift(generate_gnp_planted(a.n, a.p, a.k, a.epsilon, a.seed))?,
        Model::Basic => {
            if !(0.0..=1.0).contains(&a.p) {
                return fail(Failure::Usage(format!("p out of range: {} not in [0, 1]", a.p)));
            }
            let planted = lift(Clustering::balanced(a.n, a.k))?;
            let mut rng = cclab::rng::stream(a.seed, cclab::rng::streams::GRAPH);
            let mut pairs = Vec::new();
            for u in 0..a.n {
                for v in u + 1..a.n {
                    if rng.random::<f64>() < a.p {
                        let cost = match a.costs {
                            Costs::Unit => 1.0,
                            Costs::Uniform => rng.random::<f64>(),
                        };
                        pairs.push((u, v, cost));
                    }
                }
            }
            let policy = match a.sign_policy {
                Policy::Flip => SignPolicy::Flip,
                Policy::Keep => SignPolicy::Keep,
                Policy::Random => SignPolicy::Random,
            };
            lift(generate_basic(a.n, &pairs, &planted, a.epsilon, policy, a.seed))?
        }
        Model::Adaptive => {
            let planted = lift(Clustering::balanced(a.n, a.k))?;
            let pairs = a.n * a.n.saturating_sub(1) / 2;
            let steps = a.steps.unwrap_or((a.p * pairs as f64).round() as usize).min(pairs);
            let mut script = ConcentrationAttack::new(planted, steps);
            let cfg = AdaptiveConfig {
                epsilon: a.epsilon,
                seed: a.seed,
                max_steps: steps,
            };
            lift(generate_adaptive(&mut script, cfg))?
        }
    };
    lift(io::save_instance(&a.out, &instance, Some(&truth)))
        .map_err(|(s, _)| (s, Failure::Input(format!("cannot write {}", a.out.display()))))?;
    let model = match a.model {
        Model::GnpPlanted => "gnp-planted",
        Model::Basic => "basic",
        Model::Adaptive => "adaptive",
    };
    Ok(render(&json!({
        "model": model,
        "n": instance.n(),
        "m": instance.m(),
        "k": truth.planted.k(),
        "epsilon": truth.epsilon,
        "seed": a.seed,
        "random_edges": truth.random_edges.len(),
        "instance": a.out.display().to_string(),
        "truth": io::truth_path(&a.out).display().to_string(),
    })))
}

fn solve(a: &SolveArgs, strict: bool) -> CmdResult {
    let (instance, truth) = load(&a.input)?;
    let solution = lift(sdp::solve(&instance, &solver_options(&a.solver)))?;
    if let Some(out) = &a.out {
        write_file(out, &io::format_solution(&solution))?;
    }
    let mut v = json!({
        "n": instance.n(),
        "m": instance.m(),
        "rank": solution.rank(),
        "objective": solution.objective,
        "converged": solution.converged(),
        "trace": solution.trace,
    });
    if let Some(t) = &truth {
        let planted = lift(clustering_cost(&instance, &t.planted))?;
        v["planted_cost"] = json!(planted);
        if !solution.converged() && solution.objective > planted {
            v["warning"] = json!("solver did not converge and its objective exceeds the planted cost");
        }
    }
    finish(v, &solution, strict)
}

fn parse_delta(s: &str) -> Result<DeltaMode, (String, Failure)> {
    if s == "schedule" {
        return Ok(DeltaMode::Schedule);
    }
    match s.parse::<f64>() {
        Ok(d) => Ok(DeltaMode::Fixed(d)),
        Err(_) => fail(Failure::Usage(format!("--delta must be a number or `schedule`, got {s:?}"))),
    }
}

fn ptas(a: &PtasArgs, strict: bool) -> CmdResult {
    let (instance, truth) = load(&a.input)?;
    let config = PtasConfig {
        delta: parse_delta(&a.delta)?,
        max_passes: a.max_passes,
        solver: solver_options(&a.solver),
    };
    // Validate delta before the expensive solve.
    lift(config.resolve_delta(&instance))?;
    let solution = lift(sdp::solve(&instance, &config.solver))?;
    let (found, report) = lift(run_ptas_with(&instance, &solution, &config, truth.as_ref()))?;
    if let Some(out) = &a.out {
        write_file(out, &io::format_labels(&found))?;
    }
    let mut v = serde_json::to_value(&report).expect("report serializes");
    v["clusters"] = json!(found.k());
    if let Some(t) = &truth {
        let err = lift(classification_error(&t.planted, &found))?;
        v["classification_error"] = json!(err.error);
        v["misclassified"] = json!(err.misclassified);
    }
    finish(v, &solution, strict)
}

fn recover(a: &RecoverArgs, strict: bool) -> CmdResult {
    let (instance, truth) = load(&a.input)?;
    let params = RecoveryParams {
        rho_core: a.rho_core,
        cleanup_enabled: !a.no_cleanup,
        cleanup_min_size: a.cleanup_min_size,
        cleanup_merge_threshold: a.merge_threshold,
    };
    lift(params.validate())?;
    let (found, solution) = lift(recovery::recover(&instance, &solver_options(&a.solver), &params))?;
    if let Some(out) = &a.out {
        write_file(out, &io::format_labels(&found))?;
    }
    let mut v = json!({
        "n": instance.n(),
        "clusters": found.k(),
        "cluster_sizes": found.sizes(),
        "cost": lift(clustering_cost(&instance, &found))?,
        "sdp_objective": solution.objective,
        "converged": solution.converged(),
    });
    if let Some(t) = &truth {
        let err = lift(classification_error(&t.planted, &found))?;
        v["classification_error"] = json!(err.error);
        v["misclassified"] = json!(err.misclassified);
        v["planted_cost"] = json!(lift(clustering_cost(&instance, &t.planted))?);
    }
    finish(v, &solution, strict)
}

fn evaluate(a: &EvaluateArgs) -> CmdResult {
    let (instance, truth) = load(&a.input)?;
    let text = fs::read_to_string(&a.labels)
        .map_err(|e| (String::new(), Failure::Input(format!("{}: {e}", a.labels.display()))))?;
    let found = io::parse_labels(&text)
        .map_err(|e| (String::new(), Failure::Input(format!("{}: {e}", a.labels.display()))))?;
    if found.n() != instance.n() {
        return fail(Failure::Input(format!(
            "labels cover {} vertices, instance has {}",
            found.n(),
            instance.n()
        )));
    }
    let mut v = json!({
        "n": instance.n(),
        "clusters": found.k(),
        "cost": lift(clustering_cost(&instance, &found))?,
    });
    if let Some(t) = &truth {
        let err = lift(classification_error(&t.planted, &found))?;
        v["classification_error"] = json!(err.error);
        v["misclassified"] = json!(err.misclassified);
        v["matching"] = json!(err.matching);
        v["planted_cost"] = json!(lift(clustering_cost(&instance, &t.planted))?);
    }
    Ok(render(&v))
}

fn validate(a: &ValidateArgs, strict: bool) -> CmdResult {
    let (instance, truth) = load(&a.input)?;
    let Some(truth) = truth else {
        return fail(Failure::Input(format!(
            "validate needs the ground truth at {}",
            io::truth_path(&a.input).display()
        )));
    };
    let solution = match &a.solution {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| (String::new(), Failure::Input(format!("{}: {e}", path.display()))))?;
            let sol = io::parse_solution(&text)
                .map_err(|e| (String::new(), Failure::Input(format!("{}: {e}", path.display()))))?;
            if sol.n() != instance.n() {
                return fail(Failure::Input("solution and instance sizes differ".into()));
            }
            sol
        }
        None => lift(sdp::solve(&instance, &solver_options(&a.solver)))?,
    };
    let structural = lift(structural_stats(&instance, &truth, &solution, a.delta))?;
    if !structural.flip_bound_holds() {
        return fail(Failure::Invariant(format!(
            "c(E_flip) = {} exceeds objective / (1 - delta) = {}",
            structural.e_flip_cost,
            structural.sdp_objective / (1.0 - structural.delta)
        )));
    }
    let assumptions = lift(check_assumptions(&instance, &truth))?;
    let core = lift(core_structure(&solution, &truth, RHO_CORE, RHO_INTER))?;
    let v = json!({
        "structural": structural,
        "surviving_fraction": structural.surviving_fraction(),
        "assumptions": assumptions,
        "core": core,
        "converged": solution.converged(),
    });
    // A loaded solution has no trace to judge convergence by.
    if a.solution.is_some() {
        return Ok(render(&v));
    }
    finish(v, &solution, strict)
}

fn game(a: &GameArgs) -> CmdResult {
    let Some(kind) = StrategyKind::from_name(&a.strategy) else {
        let names: Vec<&str> = cclab::game::adversarial_strategy_library().iter().map(|s| s.0).collect();
        return fail(Failure::Usage(format!(
            "unknown strategy {:?}; expected one of {}",
            a.strategy,
            names.join(", ")
        )));
    };
    let config = GameConfig::new(a.m, a.epsilon, kind, a.trials, a.lambda);
    let out = lift(simulate_game(&config, a.seed))?;
    Ok(render(&json!({
        "m": out.m,
        "epsilon": out.epsilon,
        "lambda": out.lambda,
        "trials": out.trials,
        "empirical_prob": out.empirical_prob,
        "theoretical_bound": out.theoretical_bound,
        "std_err": out.std_err,
    })))
}

/// Parses `n:p` row specifications.
pub fn parse_rows(specs: &[String]) -> Result<Vec<(usize, f64)>, Failure> {
    specs
        .iter()
        .map(|s| {
            let bad = || Failure::Usage(format!("row {s:?} is not of the form n:p"));
            let (n, p) = s.split_once(':').ok_or_else(bad)?;
            Ok((n.trim().parse().map_err(|_| bad())?, p.trim().parse().map_err(|_| bad())?))
        })
        .collect()
}

fn bench_config(a: &BenchArgs) -> Result<BenchConfig, Failure> {
    let mut rows = if a.rows.is_empty() {
        GRID[..3].to_vec()
    } else {
        parse_rows(&a.rows)?
    };
    if a.slow && !rows.contains(&GRID[3]) {
        rows.push(GRID[3]);
    }
    if a.runs == 0 {
        return Err(Failure::Usage("--runs must be positive".into()));
    }
    Ok(BenchConfig {
        rows,
        epsilon: a.epsilon,
        k: a.k,
        runs: a.runs,
        seed: a.seed,
        ..Default::default()
    })
}

/// Runs the benchmark for `config`; exposed for the acceptance suite.
pub fn bench_records(config: &BenchConfig) -> Result<Vec<BenchRecord>, Failure> {
    bench::run_bench(config).map_err(Failure::from)
}

fn bench_cmd(a: &BenchArgs) -> CmdResult {
    let config = bench_config(a).map_err(|f| (String::new(), f))?;
    if a.dry_run {
        let plan = config.plan();
        return Ok(match a.format {
            Format::Json => render(&json!(plan
                .iter()
                .map(|&(n, p, seed)| json!({"n": n, "p": p, "seed": seed}))
                .collect::<Vec<_>>())),
            Format::Csv | Format::Table => {
                let mut out = String::from("n,p,epsilon,seed\n");
                for (n, p, seed) in plan {
                    out.push_str(&format!("{n},{p},{},{seed}\n", config.epsilon));
                }
                out
            }
        });
    }
    let records = bench_records(&config).map_err(|f| (String::new(), f))?;
    let summary = bench::summarize(&records);
    Ok(match a.format {
        Format::Json => render(&json!({ "records": records, "summary": summary })),
        Format::Csv => bench::to_csv(&records),
        Format::Table => bench::to_table(&summary),
    })
}
