//! Experiment specifications and the reports the CLI writes.
//!
//! A spec is validated completely before any computation starts. A run
//! produces one CSV file with columns `family,N,quantity,value,stderr,seed`
//! and one JSON summary; both are written to a temporary file in the output
//! directory and renamed into place, so a failed run leaves nothing behind.

use std::io::Write;
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::correlator::{build_vcm, Method, OracleConfig, DISCREPANCY_WARN};
use crate::decoherence::{
    gamma_montecarlo, gamma_perturbative_from, NoiseKind, NoiseModel, FRAGILE_THRESHOLD, SHORT_TIME_LIMIT,
};
use crate::error::{Error, Result};
use crate::scaling::{
    classify_with, fit_exponent, omega_range_from, sweep, violating_pairs, ClassThresholds, Quantity,
    ScalingSeries, SweepConfig, MIN_FIT_POINTS,
};
use crate::seeds::task_seed;
use crate::shor::{build_stage, noisy_stage_report, stage_index_p, success_probability, ShorInstance, Stage};
use crate::stability::{all_pairs, pair_table, iterated_reduction, ReductionPolicy, AXIS_TOLERANCE};
use crate::stategen::{StateFamily, ISING_MAX_QUBITS};
use crate::statevec::qubit_cap;
use crate::VERSION;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    #[default]
    IndexP,
    Cluster,
    Stability,
    Reduce,
    Decoherence,
    Shor,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::IndexP => "index-p",
            Command::Cluster => "cluster",
            Command::Stability => "stability",
            Command::Reduce => "reduce",
            Command::Decoherence => "decoherence",
            Command::Shor => "shor",
        }
    }
}

/// Everything a run needs. The JSON form uses the same names as the CLI flags.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize, clap::Args)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    #[arg(skip)]
    pub command: Command,
    /// State family: cat, w, bell_pair, plus_all, product_random, dicke,
    /// ising_ground, haar_random.
    #[arg(long)]
    #[serde(default)]
    pub family: Option<String>,
    /// Comma-separated system sizes.
    #[arg(long = "N", value_delimiter = ',')]
    #[serde(rename = "N", default)]
    pub n: Vec<usize>,
    /// Ising coupling.
    #[arg(long = "J")]
    #[serde(rename = "J", default)]
    pub j: Option<f64>,
    /// Ising transverse field.
    #[arg(long)]
    #[serde(default)]
    pub h: Option<f64>,
    /// Excitation number for Dicke states.
    #[arg(long)]
    #[serde(default)]
    pub k: Option<usize>,
    /// relaxed, oracle or both.
    #[arg(long)]
    #[serde(default)]
    pub method: Option<String>,
    /// white, collective or exponential.
    #[arg(long)]
    #[serde(default)]
    pub noise: Option<String>,
    #[arg(long)]
    #[serde(default)]
    pub gamma: Option<f64>,
    /// Correlation length of exponential noise.
    #[arg(long)]
    #[serde(default)]
    pub xi: Option<f64>,
    /// Evolution time; defaults to 1e-3/gamma.
    #[arg(long)]
    #[serde(default)]
    pub t: Option<f64>,
    /// Monte Carlo runs or reduction trajectories.
    #[arg(long)]
    #[serde(default)]
    pub runs: Option<usize>,
    #[arg(long)]
    #[serde(default)]
    pub epsilon: Option<f64>,
    /// `all` or a list such as `0:7,1:5`.
    #[arg(long)]
    #[serde(default)]
    pub pairs: Option<String>,
    /// argmax_pair or round_robin_z.
    #[arg(long)]
    #[serde(default)]
    pub policy: Option<String>,
    /// Number to factor.
    #[arg(long = "M")]
    #[serde(rename = "M", default)]
    pub m: Option<u64>,
    /// Base of the modular exponentiation.
    #[arg(long)]
    #[serde(default)]
    pub base: Option<u64>,
    #[arg(long, default_value_t = 0)]
    #[serde(default)]
    pub seed: u64,
    /// Worker threads; defaults to all cores.
    #[arg(long)]
    #[serde(default)]
    pub parallelism: Option<usize>,
    #[arg(long = "out-dir")]
    #[serde(default, skip_serializing)]
    pub out_dir: Option<PathBuf>,
}

impl ExperimentSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidArgument(format!("config: {e}")))
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Pairs {
    All,
    List(Vec<(usize, usize)>),
}

#[derive(Clone, Debug)]
enum Plan {
    IndexP { family: StateFamily, ns: Vec<usize>, method: Method },
    Cluster { family: StateFamily, ns: Vec<usize>, epsilon: f64 },
    Stability { family: StateFamily, ns: Vec<usize>, epsilon: f64, pairs: Pairs },
    Reduce { family: StateFamily, ns: Vec<usize>, epsilon: f64, policy: ReductionPolicy, runs: usize },
    Decoherence { family: StateFamily, ns: Vec<usize>, noise: NoiseModel, t: f64, runs: usize },
    Shor { instance: ShorInstance, noise: Option<NoiseModel>, t: f64, runs: usize },
}

fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidArgument(msg.into()))
}

fn parse_family(spec: &ExperimentSpec) -> Result<StateFamily> {
    let Some(name) = spec.family.as_deref() else {
        return invalid("--family is required");
    };
    let family = match name.replace('-', "_").as_str() {
        "cat" | "ghz" => StateFamily::Cat,
        "w" => StateFamily::W,
        "bell_pair" => StateFamily::BellPair,
        "plus_all" => StateFamily::PlusAll,
        "product_random" | "product" => StateFamily::ProductRandom { seed: spec.seed },
        "haar_random" => StateFamily::HaarRandom { seed: spec.seed },
        "dicke" => match spec.k {
            Some(k) => StateFamily::Dicke { k },
            None => return invalid("dicke needs --k"),
        },
        "ising_ground" | "ising" => {
            let j = spec.j.unwrap_or(1.0);
            let Some(h) = spec.h else { return invalid("ising_ground needs --h") };
            if !(j > 0.0 && h > 0.0) {
                return invalid("ising_ground needs J > 0 and h > 0");
            }
            StateFamily::IsingGround { j, h }
        }
        other => return invalid(format!("unknown family '{other}'")),
    };
    Ok(family)
}

fn parse_sizes(spec: &ExperimentSpec, family: &StateFamily) -> Result<Vec<usize>> {
    if spec.n.is_empty() {
        return invalid("--N needs at least one size");
    }
    if spec.n.windows(2).any(|w| w[1] <= w[0]) {
        return invalid("--N values must be strictly increasing");
    }
    let cap = match family {
        StateFamily::IsingGround { .. } => ISING_MAX_QUBITS.min(qubit_cap()),
        _ => qubit_cap(),
    };
    for &n in &spec.n {
        if n < family.min_qubits() {
            return invalid(format!("{} needs N ≥ {}, got {n}", family.name(), family.min_qubits()));
        }
        if n > cap {
            return Err(Error::QubitCap { requested: n, cap });
        }
        if let StateFamily::Dicke { k } = family {
            if *k > n {
                return invalid(format!("dicke k = {k} exceeds N = {n}"));
            }
        }
    }
    Ok(spec.n.clone())
}

fn parse_epsilon(spec: &ExperimentSpec, default: f64) -> Result<f64> {
    let eps = spec.epsilon.unwrap_or(default);
    if !(eps > 0.0) {
        return invalid(format!("--epsilon must be > 0, got {eps}"));
    }
    Ok(eps)
}

fn parse_noise(spec: &ExperimentSpec) -> Result<Option<NoiseModel>> {
    let Some(kind) = spec.noise.as_deref() else {
        if spec.gamma.is_some() || spec.xi.is_some() {
            return invalid("--gamma/--xi given without --noise");
        }
        return Ok(None);
    };
    let kind = match kind {
        "white" => NoiseKind::White,
        "collective" => NoiseKind::Collective,
        "exponential" => NoiseKind::Exponential,
        other => return invalid(format!("unknown noise '{other}'")),
    };
    if kind == NoiseKind::Exponential && spec.xi.is_none() {
        return invalid("exponential noise needs --xi");
    }
    NoiseModel::new(kind, spec.gamma.unwrap_or(1.0), spec.xi.unwrap_or(1.0), [0.0, 0.0, 1.0]).map(Some)
}

fn parse_time(spec: &ExperimentSpec, noise: &NoiseModel) -> Result<f64> {
    let t = spec.t.unwrap_or(1e-3 / noise.gamma);
    if !(t > 0.0) || !t.is_finite() {
        return invalid(format!("--t must be > 0, got {t}"));
    }
    Ok(t)
}

fn parse_pairs(text: Option<&str>) -> Result<Pairs> {
    match text {
        None | Some("all") => Ok(Pairs::All),
        Some(list) => list
            .split(',')
            .map(|p| {
                let (a, b) = p.split_once(':').ok_or_else(|| Error::InvalidArgument(format!("bad pair '{p}'")))?;
                let parse = |s: &str| {
                    s.trim()
                        .parse::<usize>()
                        .map_err(|_| Error::InvalidArgument(format!("bad pair '{p}'")))
                };
                let (x, y) = (parse(a)?, parse(b)?);
                if x == y {
                    return invalid(format!("pair '{p}' repeats a site"));
                }
                Ok((x, y))
            })
            .collect::<Result<_>>()
            .map(Pairs::List),
    }
}

fn validate(spec: &ExperimentSpec) -> Result<Plan> {
    if spec.parallelism == Some(0) {
        return invalid("--parallelism must be ≥ 1");
    }
    let method = match spec.method.as_deref() {
        None | Some("relaxed") => Method::Relaxed,
        Some("oracle") => Method::Oracle,
        Some("both") => Method::Both,
        Some(other) => return invalid(format!("unknown method '{other}'")),
    };
    if spec.command == Command::Shor {
        let (Some(m), Some(x)) = (spec.m, spec.base) else {
            return invalid("shor needs --M and --base");
        };
        let instance = ShorInstance::new(m, x)?;
        let noise = parse_noise(spec)?;
        let t = match &noise {
            Some(nm) => parse_time(spec, nm)?,
            None => 0.0,
        };
        if let Some(nm) = &noise {
            crate::decoherence::check_short_time(nm, t, instance.n_total())?;
        }
        let runs = spec.runs.unwrap_or(200);
        if noise.is_some() && runs < 2 {
            return invalid("--runs must be ≥ 2");
        }
        return Ok(Plan::Shor { instance, noise, t, runs });
    }
    let family = parse_family(spec)?;
    let ns = parse_sizes(spec, &family)?;
    let plan = match spec.command {
        Command::IndexP => Plan::IndexP { family, ns, method },
        Command::Cluster => Plan::Cluster {
            family,
            ns,
            epsilon: parse_epsilon(spec, 0.05)?,
        },
        Command::Stability => {
            let pairs = parse_pairs(spec.pairs.as_deref())?;
            if let Pairs::List(list) = &pairs {
                let n_min = ns[0];
                if let Some(&(x, y)) = list.iter().find(|&&(x, y)| x.max(y) >= n_min) {
                    return invalid(format!("pair {x}:{y} out of range for N = {n_min}"));
                }
            }
            Plan::Stability {
                family,
                ns,
                epsilon: parse_epsilon(spec, 0.01)?,
                pairs,
            }
        }
        Command::Reduce => {
            let policy = match spec.policy.as_deref() {
                None | Some("argmax_pair") => ReductionPolicy::ArgmaxPair,
                Some("round_robin_z") => ReductionPolicy::RoundRobinZ,
                Some(other) => return invalid(format!("unknown policy '{other}'")),
            };
            let runs = spec.runs.unwrap_or(100);
            if runs == 0 {
                return invalid("--runs must be ≥ 1");
            }
            Plan::Reduce {
                family,
                ns,
                epsilon: parse_epsilon(spec, 0.01)?,
                policy,
                runs,
            }
        }
        Command::Decoherence => {
            let Some(noise) = parse_noise(spec)? else {
                return invalid("decoherence needs --noise");
            };
            let t = parse_time(spec, &noise)?;
            let runs = spec.runs.unwrap_or(0);
            if runs == 1 {
                return invalid("--runs must be 0 (perturbative only) or ≥ 2");
            }
            if runs > 0 {
                for &n in &ns {
                    crate::decoherence::check_short_time(&noise, t, n)?;
                }
            }
            Plan::Decoherence { family, ns, noise, t, runs }
        }
        Command::Shor => unreachable!(),
    };
    Ok(plan)
}

/// One CSV row.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Row {
    pub family: String,
    #[serde(rename = "N")]
    pub n: usize,
    pub quantity: String,
    pub value: f64,
    pub stderr: Option<f64>,
    pub seed: u64,
}

#[derive(Clone, Debug)]
pub struct Report {
    pub rows: Vec<Row>,
    pub summary: Value,
}

fn tolerances() -> Value {
    json!({
        "state_norm": 1e-10,
        "site_operator_norm": 1e-12,
        "unitarity": 1e-10,
        "lanczos_residual": crate::eigen::LanczosConfig::default().tol,
        "oracle_rel_tol": OracleConfig::default().rel_tol,
        "discrepancy_warn": DISCREPANCY_WARN,
        "disturbance_axis": AXIS_TOLERANCE,
        "short_time_limit": SHORT_TIME_LIMIT,
        "fragile_threshold": FRAGILE_THRESHOLD,
        "class_thresholds": ClassThresholds::default(),
        "min_fit_points": MIN_FIT_POINTS,
    })
}

/// Validates `spec` and computes its report without touching the filesystem.
pub fn execute(spec: &ExperimentSpec) -> Result<Report> {
    let plan = validate(spec)?;
    let run = || compute(&plan, spec.seed);
    let (rows, results) = match spec.parallelism {
        Some(threads) => rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?
            .install(run)?,
        None => run()?,
    };
    let summary = json!({
        "command": spec.command.name(),
        "version": VERSION,
        "seed": spec.seed,
        "spec": spec,
        "tolerances": tolerances(),
        "results": results,
    });
    Ok(Report { rows, summary })
}

fn compute(plan: &Plan, seed: u64) -> Result<(Vec<Row>, Value)> {
    match plan {
        Plan::IndexP { family, ns, method } => index_p(family, ns, *method, seed),
        Plan::Cluster { family, ns, epsilon } => cluster(family, ns, *epsilon, seed),
        Plan::Stability { family, ns, epsilon, pairs } => stability(family, ns, *epsilon, pairs, seed),
        Plan::Reduce { family, ns, epsilon, policy, runs } => reduce(family, ns, *epsilon, *policy, *runs, seed),
        Plan::Decoherence { family, ns, noise, t, runs } => decoherence(family, ns, noise, *t, *runs, seed),
        Plan::Shor { instance, noise, t, runs } => shor(instance, noise.as_ref(), *t, *runs, seed),
    }
}

fn series_rows(series: &ScalingSeries, quantity: &str, seed: u64) -> Vec<Row> {
    series
        .points
        .iter()
        .map(|p| Row {
            family: series.family.clone(),
            n: p.n,
            quantity: quantity.to_string(),
            value: p.value,
            stderr: p.stderr,
            seed,
        })
        .collect()
}

fn fit_summary(series: &ScalingSeries) -> Result<Value> {
    if series.points.len() < MIN_FIT_POINTS {
        return Ok(json!({ "fit": null, "classification": null, "note": "fewer than 4 sizes; no fit" }));
    }
    let fit = fit_exponent(series)?;
    let class = classify_with(&fit, &ClassThresholds::default());
    let sizes = series.sizes();
    Ok(json!({
        "fit": fit,
        "classification": class.to_string(),
        "note": format!(
            "finite-size fit over N = {}..={}; subleading terms bias the slope",
            sizes[0],
            sizes[sizes.len() - 1]
        ),
    }))
}

fn index_p(family: &StateFamily, ns: &[usize], method: Method, seed: u64) -> Result<(Vec<Row>, Value)> {
    let cfg = SweepConfig {
        seed,
        method: if method == Method::Oracle { Method::Oracle } else { Method::Relaxed },
        ..SweepConfig::default()
    };
    let main = sweep(family, Quantity::MaxFluctuation, ns, &cfg)?;
    let mut rows = series_rows(&main, "max_fluctuation", seed);
    let mut results = fit_summary(&main)?;
    results["family"] = json!(main.family);
    results["method"] = json!(method);
    results["points"] = json!(main.points);
    if method == Method::Both {
        let oracle = sweep(family, Quantity::MaxFluctuation, ns, &SweepConfig { method: Method::Oracle, ..cfg })?;
        rows.extend(series_rows(&oracle, "max_fluctuation_oracle", seed));
        let warn: Vec<usize> = main
            .points
            .iter()
            .zip(&oracle.points)
            .filter(|(r, o)| o.value > 0.0 && r.value / o.value - 1.0 > DISCREPANCY_WARN)
            .map(|(r, _)| r.n)
            .collect();
        results["oracle_points"] = json!(oracle.points);
        results["discrepancy_warning_at_N"] = json!(warn);
    }
    rows.sort_by(|a, b| (a.n, &a.quantity).cmp(&(b.n, &b.quantity)));
    Ok((rows, results))
}

fn cluster(family: &StateFamily, ns: &[usize], epsilon: f64, seed: u64) -> Result<(Vec<Row>, Value)> {
    let per_n: Vec<(usize, usize, f64)> = ns
        .par_iter()
        .map(|&n| {
            let state = family.generate(n).map_err(|e| e.at_size(n))?;
            let vcm = build_vcm(&state);
            let omega = omega_range_from(&vcm, &state, epsilon)?;
            let strongest = violating_pairs(&vcm, 0.0).iter().map(|p| p.2).fold(0.0, f64::max);
            Ok((n, omega, strongest))
        })
        .collect::<Result<_>>()?;
    let label = family.label();
    let mut rows = Vec::new();
    for &(n, omega, strongest) in &per_n {
        rows.push(Row { family: label.clone(), n, quantity: "max_pair_strength".into(), value: strongest, stderr: None, seed });
        rows.push(Row { family: label.clone(), n, quantity: "omega".into(), value: omega as f64, stderr: None, seed });
    }
    let omegas: Vec<usize> = per_n.iter().map(|p| p.1).collect();
    let bounded = per_n.iter().all(|&(n, omega, _)| omega < n);
    let stable = omegas.windows(2).all(|w| w[0] == w[1]);
    let results = json!({
        "family": label,
        "epsilon": epsilon,
        "omega": per_n.iter().map(|p| json!({"N": p.0, "omega": p.1})).collect::<Vec<_>>(),
        "bounded_at_every_N": bounded,
        "same_omega_at_every_N": stable,
        "checked_N": ns,
    });
    Ok((rows, results))
}

fn stability(
    family: &StateFamily,
    ns: &[usize],
    epsilon: f64,
    pairs: &Pairs,
    seed: u64,
) -> Result<(Vec<Row>, Value)> {
    let label = family.label();
    let mut rows = Vec::new();
    let mut per_n = Vec::new();
    for &n in ns {
        let state = family.generate(n).map_err(|e| e.at_size(n))?;
        let vcm = build_vcm(&state);
        let list = match pairs {
            Pairs::All => all_pairs(&state, 1),
            Pairs::List(l) => l.clone(),
        };
        let table = pair_table(&state, &vcm, &list).map_err(|e| e.at_size(n))?;
        for r in &table {
            for (q, v) in [("pair_strength", r.pair_strength), ("disturbance", r.disturbance)] {
                rows.push(Row {
                    family: label.clone(),
                    n,
                    quantity: format!("{q}@{}:{}", r.x, r.y),
                    value: v,
                    stderr: None,
                    seed,
                });
            }
        }
        let violations = table
            .iter()
            .filter(|r| r.pair_strength <= epsilon && r.disturbance > epsilon.sqrt())
            .count();
        let c_hat = table
            .iter()
            .filter(|r| r.pair_strength > 1e-12)
            .map(|r| r.disturbance / r.pair_strength.sqrt())
            .reduce(f64::max);
        per_n.push(json!({ "N": n, "pairs": table.len(), "c_hat": c_hat, "violations_of_sqrt_eps_bound": violations }));
    }
    Ok((rows, json!({ "family": label, "epsilon": epsilon, "sizes": per_n })))
}

fn median(sorted: &[usize]) -> f64 {
    let m = sorted.len();
    if m % 2 == 1 {
        sorted[m / 2] as f64
    } else {
        0.5 * (sorted[m / 2 - 1] + sorted[m / 2]) as f64
    }
}

fn reduce(
    family: &StateFamily,
    ns: &[usize],
    epsilon: f64,
    policy: ReductionPolicy,
    runs: usize,
    seed: u64,
) -> Result<(Vec<Row>, Value)> {
    let label = family.label();
    let mut rows = Vec::new();
    let mut per_n = Vec::new();
    for &n in ns {
        let state = family.generate(n).map_err(|e| e.at_size(n))?;
        let base = task_seed(seed, n as u64);
        let mut counts: Vec<usize> = (0..runs)
            .into_par_iter()
            .map(|i| {
                let mut rng = ChaCha8Rng::seed_from_u64(base);
                rng.set_stream(i as u64);
                iterated_reduction(&state, epsilon, policy, &mut rng).map(|o| o.count)
            })
            .collect::<Result<_>>()
            .map_err(|e| e.at_size(n))?;
        let mean = counts.iter().sum::<usize>() as f64 / runs as f64;
        let stderr = if runs > 1 {
            let var = counts.iter().map(|&c| (c as f64 - mean).powi(2)).sum::<f64>() / (runs - 1) as f64;
            Some((var / runs as f64).sqrt())
        } else {
            None
        };
        counts.sort_unstable();
        let med = median(&counts);
        rows.push(Row { family: label.clone(), n, quantity: "mean_count".into(), value: mean, stderr, seed });
        rows.push(Row { family: label.clone(), n, quantity: "median_count".into(), value: med, stderr: None, seed });
        per_n.push(json!({ "N": n, "median": med, "mean": mean, "max": counts[counts.len() - 1], "runs": runs }));
    }
    Ok((rows, json!({ "family": label, "epsilon": epsilon, "policy": policy, "sizes": per_n })))
}

fn decoherence(
    family: &StateFamily,
    ns: &[usize],
    noise: &NoiseModel,
    t: f64,
    runs: usize,
    seed: u64,
) -> Result<(Vec<Row>, Value)> {
    let label = family.label();
    let per_n: Vec<(usize, f64, Option<(f64, f64)>)> = ns
        .par_iter()
        .map(|&n| {
            let run = || -> Result<_> {
                let state = family.generate(n)?;
                let pert = gamma_perturbative_from(&build_vcm(&state), noise, state.geometry())?;
                let mc = if runs > 0 {
                    Some(gamma_montecarlo(&state, noise, t, runs, task_seed(seed, n as u64))?)
                } else {
                    None
                };
                Ok((n, pert, mc))
            };
            run().map_err(|e| e.at_size(n))
        })
        .collect::<Result<_>>()?;
    let mut rows = Vec::new();
    for &(n, pert, mc) in &per_n {
        rows.push(Row { family: label.clone(), n, quantity: "gamma".into(), value: pert, stderr: None, seed });
        if let Some((g, err)) = mc {
            rows.push(Row { family: label.clone(), n, quantity: "gamma_mc".into(), value: g, stderr: Some(err), seed });
        }
    }
    let points: Vec<(usize, f64)> = per_n.iter().map(|p| (p.0, p.1)).collect();
    let mut results = json!({ "family": label, "noise": noise, "t": t, "runs": runs });
    if points.len() >= MIN_FIT_POINTS {
        let fit = crate::scaling::fit_power_law(&points)?;
        let delta = fit.exponent - 1.0;
        results["fit"] = json!(fit);
        results["delta"] = json!(delta);
        results["fragile"] = json!(delta > FRAGILE_THRESHOLD);
    } else {
        results["fit"] = Value::Null;
    }
    Ok((rows, results))
}

fn shor(instance: &ShorInstance, noise: Option<&NoiseModel>, t: f64, runs: usize, seed: u64) -> Result<(Vec<Row>, Value)> {
    let label = format!("shor(M={},x={})", instance.m, instance.x);
    let n = instance.n_total();
    let mut rows = Vec::new();
    let mut stages = Vec::new();
    let t_clean = success_probability(&build_stage(instance, Stage::Final)?.state, instance)?;
    for (i, stage) in Stage::ALL.into_iter().enumerate() {
        let idx = stage_index_p(instance, stage)?;
        let name = stage.name();
        rows.push(Row {
            family: label.clone(),
            n,
            quantity: format!("max_fluctuation@{name}"),
            value: idx.fluctuation.relaxed_max,
            stderr: None,
            seed,
        });
        let mut entry = json!({
            "stage": name,
            "max_fluctuation": idx.fluctuation.relaxed_max,
            "ratio_to_N": idx.ratio,
            "classification": idx.class.to_string(),
        });
        if let Some(nm) = noise {
            let rep = noisy_stage_report(instance, stage, nm, t, runs, task_seed(seed, i as u64))?;
            rows.push(Row {
                family: label.clone(),
                n,
                quantity: format!("one_minus_F@{name}"),
                value: rep.one_minus_f,
                stderr: Some(rep.one_minus_f_stderr),
                seed,
            });
            rows.push(Row {
                family: label.clone(),
                n,
                quantity: format!("delta_T@{name}"),
                value: rep.delta_t,
                stderr: Some(rep.delta_t_stderr),
                seed,
            });
            entry["noisy"] = json!(rep);
        }
        stages.push(entry);
    }
    let results = json!({
        "instance": instance,
        "t_clean": t_clean,
        "noise": noise,
        "t": t,
        "runs": runs,
        "stages": stages,
    });
    Ok((rows, results))
}

/// Writes `contents` to `dir/name` through a temporary file and a rename.
fn write_atomic(dir: &Path, name: &str, contents: &[u8]) -> std::io::Result<PathBuf> {
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents)?;
    tmp.flush()?;
    let path = dir.join(name);
    tmp.persist(&path).map_err(|e| e.error)?;
    Ok(path)
}

pub fn csv_bytes(rows: &[Row]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| Error::InvalidArgument(format!("csv: {e}")))?;
    }
    w.into_inner().map_err(|e| Error::InvalidArgument(format!("csv: {e}")))
}

/// Paths of the files written by [`run`].
#[derive(Clone, Debug)]
pub struct Outputs {
    pub csv: PathBuf,
    pub summary: PathBuf,
}

/// Exit code for a run that produced `err`: 2 for invalid input, 3 for a
/// numerical failure.
pub fn exit_code(err: &Error) -> i32 {
    if err.is_validation() {
        2
    } else {
        3
    }
}

/// Validates, computes, then writes `<command>.csv` and
/// `<command>_summary.json` into the output directory.
pub fn run(spec: &ExperimentSpec) -> std::result::Result<Outputs, (i32, String)> {
    let report = execute(spec).map_err(|e| (exit_code(&e), e.to_string()))?;
    let dir = spec.out_dir.clone().unwrap_or_else(|| PathBuf::from("."));
    let io_err = |e: std::io::Error| (3, format!("writing {}: {e}", dir.display()));
    std::fs::create_dir_all(&dir).map_err(io_err)?;
    let csv = csv_bytes(&report.rows).map_err(|e| (3, e.to_string()))?;
    let mut json = serde_json::to_vec_pretty(&report.summary).map_err(|e| (3, e.to_string()))?;
    json.push(b'\n');
    let name = spec.command.name();
    let csv_path = write_atomic(&dir, &format!("{name}.csv"), &csv).map_err(io_err)?;
    let summary_path = write_atomic(&dir, &format!("{name}_summary.json"), &json).map_err(io_err)?;
    Ok(Outputs {
        csv: csv_path,
        summary: summary_path,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(command: Command, family: &str, n: &[usize]) -> ExperimentSpec {
        ExperimentSpec {
            command,
            family: Some(family.into()),
            n: n.to_vec(),
            ..Default::default()
        }
    }

    #[test]
    fn cat_index_p_is_afs() {
        let r = execute(&spec(Command::IndexP, "cat", &[4, 6, 8, 10, 12])).unwrap();
        assert_eq!(r.summary["results"]["classification"], "AFS");
        let e = r.summary["results"]["fit"]["exponent"].as_f64().unwrap();
        assert!((e - 2.0).abs() < 1e-9);
        assert_eq!(r.rows.len(), 5);
        assert_eq!(r.summary["seed"], 0);
        assert_eq!(r.summary["version"], VERSION);
    }

    #[test]
    fn json_rejects_unknown_fields() {
        assert!(ExperimentSpec::from_json(r#"{"command":"index-p","family":"cat","N":[4],"bogus":1}"#).is_err());
        let s = ExperimentSpec::from_json(r#"{"command":"cluster","family":"cat","N":[4,6],"epsilon":0.1}"#).unwrap();
        assert_eq!(s.command, Command::Cluster);
        assert_eq!(s.n, vec![4, 6]);
    }

    #[test]
    fn validation_errors_map_to_exit_two() {
        for bad in [
            spec(Command::IndexP, "nope", &[4]),
            spec(Command::IndexP, "cat", &[]),
            spec(Command::IndexP, "cat", &[6, 4]),
            spec(Command::Decoherence, "cat", &[4]),
            spec(Command::IndexP, "ising_ground", &[4]),
            spec(Command::Shor, "cat", &[4]),
        ] {
            let err = execute(&bad).unwrap_err();
            assert_eq!(exit_code(&err), 2, "{err}");
        }
    }

    #[test]
    fn pair_list_parsing() {
        assert_eq!(parse_pairs(Some("0:7, 1:5")).unwrap(), Pairs::List(vec![(0, 7), (1, 5)]));
        assert_eq!(parse_pairs(None).unwrap(), Pairs::All);
        assert!(parse_pairs(Some("3:3")).is_err());
        assert!(parse_pairs(Some("3-4")).is_err());
    }
}
