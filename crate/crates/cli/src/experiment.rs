//! Runs every (algorithm, budget, metric) task of a config.

use std::io::Write;
use std::path::Path;

use epimit_core::dsir::{greedy_dsir, greedy_dsir_grouped, sigma_hat, DEFAULT_TOL, DEFAULT_T_MAX};
use epimit_core::gsir::estimate_infections;
use epimit_core::icsir::{estimate_sigma, greedy_icsir, EstimatorConfig, Objective};
use epimit_core::optimize::{max_degree_order, random_order};
use epimit_core::{rng, EdgeId};
use rayon::prelude::*;
use thiserror::Error;

use crate::config::{Algorithm, ConfigIssue, Directions, ExperimentConfig, Metric};
use crate::scenario::{build_scenario, Scenario};
use crate::seeds::derive_seed;

pub const CSV_HEADER: [&str; 7] = ["experiment_id", "algorithm", "k", "metric", "value", "half_width", "seed"];

#[derive(Debug, Error)]
pub enum RunError {
    #[error("invalid configuration:\n{}", format_issues(.0))]
    Config(Vec<ConfigIssue>),
    #[error("{0}")]
    Runtime(String),
}

fn format_issues(issues: &[ConfigIssue]) -> String {
    issues.iter().map(|i| format!("  {i}")).collect::<Vec<_>>().join("\n")
}

impl RunError {
    /// Process exit code: 2 for configuration problems, 3 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => 2,
            RunError::Runtime(_) => 3,
        }
    }
}

/// One CSV row. `value` holds the failure message when the algorithm or the
/// evaluation could not produce a number.
#[derive(Clone, Debug, PartialEq)]
pub struct Row {
    pub experiment_id: String,
    pub algorithm: Algorithm,
    pub k: usize,
    pub metric: Metric,
    pub value: Result<f64, String>,
    pub half_width: Option<f64>,
    pub seed: Option<u64>,
}

impl Row {
    pub fn failed(&self) -> bool {
        self.value.is_err()
    }
}

fn estimator_config(cfg: &ExperimentConfig, seed: u64) -> EstimatorConfig {
    EstimatorConfig {
        epsilon: cfg.estimator.epsilon,
        rounds: cfg.estimator.rounds,
        seed,
        d_end: cfg.estimator.d_end,
    }
}

/// Deletion units in the order `alg` picks them, `k` of them.
fn deletion_order(
    alg: Algorithm,
    cfg: &ExperimentConfig,
    sc: &Scenario,
    k: usize,
) -> Result<Vec<EdgeId>, String> {
    let seed = derive_seed(cfg.seed, &format!("opt/{}", alg.name()));
    let q = sc.candidate_units();
    match alg {
        Algorithm::GreedyDsir => {
            let sys = sc.dsir.as_ref().expect("validated: rates present");
            match sc.directions {
                Directions::Both => {
                    let groups: Vec<Vec<EdgeId>> = sc.candidates.iter().map(|&c| vec![2 * c, 2 * c + 1]).collect();
                    let trace = greedy_dsir_grouped(sys, &groups, k).map_err(|e| e.to_string())?;
                    Ok(trace.chosen.iter().map(|&g| sc.candidates[g]).collect())
                }
                Directions::Single => Ok(greedy_dsir(sys, &q, k).map_err(|e| e.to_string())?.chosen),
            }
        }
        Algorithm::GreedyIcSigma | Algorithm::GreedyIcSigmaPrime => {
            let objective = if alg == Algorithm::GreedyIcSigma {
                Objective::Sigma
            } else {
                Objective::SigmaPrime
            };
            let inst = sc.ic.as_ref().expect("IC instance built for IC algorithms");
            let trace = greedy_icsir(inst, k, &estimator_config(cfg, seed), objective).map_err(|e| e.to_string())?;
            Ok(trace.chosen)
        }
        Algorithm::MaxDegree => max_degree_order(sc.unit_graph(), &q, k).map_err(|e| e.to_string()),
        Algorithm::Random => random_order(&q, k, &mut rng::seeded(seed)).map_err(|e| e.to_string()),
    }
}

fn evaluate(
    metric: Metric,
    cfg: &ExperimentConfig,
    sc: &Scenario,
    units: &[EdgeId],
) -> (Result<f64, String>, Option<f64>, Option<u64>) {
    let seed = derive_seed(cfg.seed, &format!("eval/{}", metric.name()));
    match metric {
        Metric::DsirSigma => {
            let sys = sc.dsir.as_ref().expect("validated: rates present");
            let v = sys.simulate_sigma(&sc.directed(units), DEFAULT_TOL, DEFAULT_T_MAX);
            (v.map_err(|e| e.to_string()), None, None)
        }
        Metric::DsirSigmaHat => {
            let sys = sc.dsir.as_ref().expect("validated: rates present");
            (sigma_hat(sys, &sc.directed(units)).map_err(|e| e.to_string()), None, None)
        }
        Metric::IcEstimate => {
            let inst = sc.ic.as_ref().expect("IC instance built for IC metrics");
            match estimate_sigma(inst, &sc.contacts_of(units), &estimator_config(cfg, seed)) {
                Ok(e) => (Ok(e.mean), Some(e.half_width), Some(seed)),
                Err(e) => (Err(e.to_string()), None, Some(seed)),
            }
        }
        Metric::GsirEstimate => {
            let params = sc.gsir.as_ref().expect("validated: rates present");
            match estimate_infections(params, &sc.directed(units), cfg.replication.gsir, seed) {
                Ok(e) => (Ok(e.mean), Some(e.half_width), Some(seed)),
                Err(e) => (Err(e.to_string()), None, Some(seed)),
            }
        }
    }
}

/// Builds the scenario and evaluates every task. Rows come out in config
/// order (algorithm, then budget, then metric) whatever the thread count.
pub fn run_experiment(cfg: &ExperimentConfig, base_dir: &Path) -> Result<Vec<Row>, RunError> {
    let needs_ic = cfg
        .algorithms
        .iter()
        .any(|a| matches!(a, Algorithm::GreedyIcSigma | Algorithm::GreedyIcSigmaPrime))
        || cfg.metrics.contains(&Metric::IcEstimate);
    let sc = build_scenario(cfg, base_dir, needs_ic).map_err(RunError::Config)?;
    let k_max = cfg.budgets.iter().copied().max().unwrap_or(0);

    // every algorithm here is prefix-consistent, so one run at k_max serves all budgets
    let orders: Vec<Result<Vec<EdgeId>, String>> = cfg
        .algorithms
        .par_iter()
        .map(|&alg| deletion_order(alg, cfg, &sc, k_max))
        .collect();

    let tasks: Vec<(usize, usize, Metric)> = (0..cfg.algorithms.len())
        .flat_map(|a| {
            cfg.budgets
                .iter()
                .flat_map(move |&k| cfg.metrics.iter().map(move |&m| (a, k, m)))
        })
        .collect();
    let rows = tasks
        .par_iter()
        .map(|&(a, k, metric)| {
            let (value, half_width, seed) = match &orders[a] {
                Ok(order) => evaluate(metric, cfg, &sc, &order[..k]),
                Err(e) => (Err(format!("{} failed: {e}", cfg.algorithms[a])), None, None),
            };
            Row {
                experiment_id: cfg.id.clone(),
                algorithm: cfg.algorithms[a],
                k,
                metric,
                value,
                half_width,
                seed,
            }
        })
        .collect();
    Ok(rows)
}

/// Writes the header and one record per row. Failed rows carry `NA` as the
/// value; the failure itself goes to the caller's log.
pub fn write_csv<W: Write>(rows: &[Row], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in rows {
        let value = match &r.value {
            Ok(v) => v.to_string(),
            Err(_) => "NA".to_string(),
        };
        w.write_record([
            r.experiment_id.clone(),
            r.algorithm.name().to_string(),
            r.k.to_string(),
            r.metric.name().to_string(),
            value,
            r.half_width.map(|h| h.to_string()).unwrap_or_default(),
            r.seed.map(|s| s.to_string()).unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
