//! Monte-Carlo sweeps over flow counts and random instances, with per-run
//! metrics, per-(game, flow count) aggregates and their CSV forms.

use std::io::{Read, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::games::{flow_active, run_game_with, GameConfig, GameKind, Trajectory};
use crate::radio::{NetworkState, RadioModel};
use crate::scenario::{generate_scenario, Scenario, ScenarioParams};

/// Outcome of one game on one instance. Field order is the results CSV column order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMetrics {
    pub instance_id: usize,
    pub game: GameKind,
    pub flows_requested: usize,
    pub flows_active: usize,
    /// Empty when no flow is established.
    pub mean_links_per_active_flow: Option<f64>,
    pub normalized_flow_steps: f64,
    pub converged: bool,
}

impl RunMetrics {
    pub fn from_run(
        instance_id: usize,
        scenario: &Scenario,
        model: &RadioModel,
        state: &NetworkState,
        trajectory: &Trajectory,
    ) -> Self {
        let active: Vec<usize> = scenario
            .flows()
            .iter()
            .filter(|f| flow_active(model, state, f))
            .map(|f| f.links.len())
            .collect();
        let mean_links =
            (!active.is_empty()).then(|| active.iter().sum::<usize>() as f64 / active.len() as f64);
        RunMetrics {
            instance_id,
            game: trajectory.game,
            flows_requested: scenario.flows().len(),
            flows_active: active.len(),
            mean_links_per_active_flow: mean_links,
            normalized_flow_steps: trajectory.flow_steps,
            converged: trajectory.converged,
        }
    }
}

/// Seed of instance `instance` at `flow_count` flows: three rounds of the
/// SplitMix64 finalizer, folding in the master seed, the flow count and the
/// instance index in turn. Any cell of a sweep can be regenerated alone.
pub fn instance_seed(master: u64, flow_count: usize, instance: usize) -> u64 {
    fn mix(mut z: u64) -> u64 {
        z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }
    mix(mix(mix(master) ^ flow_count as u64) ^ instance as u64)
}

#[derive(Debug, Clone)]
pub struct BatchSpec {
    /// Template; `n_flows` and `seed` are set per cell.
    pub params: ScenarioParams,
    pub flow_counts: Vec<usize>,
    pub n_instances: usize,
    pub games: Vec<GameKind>,
    pub max_cycles: usize,
    pub search_node_cap: u64,
    pub master_seed: u64,
    /// Worker threads; `None` uses rayon's default.
    pub jobs: Option<usize>,
}

impl BatchSpec {
    pub fn new(
        params: ScenarioParams,
        flow_counts: Vec<usize>,
        n_instances: usize,
        games: Vec<GameKind>,
    ) -> Self {
        let defaults = GameConfig::new(GameKind::Pfg);
        BatchSpec {
            master_seed: params.seed,
            params,
            flow_counts,
            n_instances,
            games,
            max_cycles: defaults.max_cycles,
            search_node_cap: defaults.search_node_cap,
            jobs: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InstanceFailure {
    pub flow_count: usize,
    pub instance: usize,
    pub message: String,
}

#[derive(Debug, Clone, Default)]
pub struct BatchOutcome {
    /// Sorted by flow count, instance, then the requested game order.
    pub rows: Vec<RunMetrics>,
    pub failures: Vec<InstanceFailure>,
}

fn run_cell(spec: &BatchSpec, flow_count: usize, instance: usize) -> Result<Vec<RunMetrics>> {
    let params = ScenarioParams {
        n_flows: flow_count,
        seed: instance_seed(spec.master_seed, flow_count, instance),
        ..spec.params.clone()
    };
    let scenario = generate_scenario(&params)?;
    let model = RadioModel::new(&scenario);
    spec.games
        .iter()
        .map(|&game| {
            let config = GameConfig {
                game,
                max_cycles: spec.max_cycles,
                search_node_cap: spec.search_node_cap,
                seed: params.seed,
            };
            let run = run_game_with(&scenario, &model, &config)?;
            Ok(RunMetrics {
                instance_id: instance,
                ..run.metrics
            })
        })
        .collect()
}

/// Runs every game on every (flow count, instance) cell. All games of a cell
/// share one scenario. A cell whose scenario cannot be generated is reported
/// in `failures` and the rest of the batch continues.
pub fn run_batch(spec: &BatchSpec) -> Result<BatchOutcome> {
    spec.params.validate()?;
    if spec.games.is_empty() {
        return Err(Error::invalid("games", "at least one game is required"));
    }
    for &game in &spec.games {
        GameConfig {
            game,
            max_cycles: spec.max_cycles,
            search_node_cap: spec.search_node_cap,
            seed: 0,
        }
        .validate()?;
    }
    let cells: Vec<(usize, usize)> = spec
        .flow_counts
        .iter()
        .flat_map(|&f| (0..spec.n_instances).map(move |i| (f, i)))
        .collect();
    let work = || -> Vec<_> {
        cells
            .par_iter()
            .map(|&(f, i)| (f, i, run_cell(spec, f, i)))
            .collect()
    };
    let results = match spec.jobs {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::invalid("jobs", e.to_string()))?
            .install(work),
        None => work(),
    };

    let mut outcome = BatchOutcome::default();
    for (flow_count, instance, result) in results {
        match result {
            Ok(rows) => outcome.rows.extend(rows),
            Err(e) => outcome.failures.push(InstanceFailure {
                flow_count,
                instance,
                message: e.to_string(),
            }),
        }
    }
    let game_rank = |g: GameKind| {
        spec.games
            .iter()
            .position(|&x| x == g)
            .unwrap_or(usize::MAX)
    };
    outcome
        .rows
        .sort_by_key(|r| (r.flows_requested, r.instance_id, game_rank(r.game)));
    Ok(outcome)
}

pub const METRICS: [&str; 4] = [
    "flows_active",
    "mean_links_per_active_flow",
    "normalized_flow_steps",
    "converged",
];

/// Mean and population standard deviation of one metric over one
/// (game, flow count) group. For `converged` the mean is the converged fraction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateRow {
    pub game: GameKind,
    pub flows_requested: usize,
    pub metric: String,
    pub mean: f64,
    pub std: f64,
    pub n: usize,
}

fn metric_value(row: &RunMetrics, metric: &str) -> Option<f64> {
    match metric {
        "flows_active" => Some(row.flows_active as f64),
        "mean_links_per_active_flow" => row.mean_links_per_active_flow,
        "normalized_flow_steps" => Some(row.normalized_flow_steps),
        "converged" => Some(if row.converged { 1.0 } else { 0.0 }),
        _ => None,
    }
}

pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Groups by (game, flow count), ordered by game then flow count. Rows with
/// an undefined metric are left out of that metric only; a metric with no
/// defined value in a group produces no row.
pub fn aggregate(rows: &[RunMetrics]) -> Result<Vec<AggregateRow>> {
    if rows.is_empty() {
        return Err(Error::invalid("rows", "cannot aggregate an empty table"));
    }
    let mut keys: Vec<(GameKind, usize)> =
        rows.iter().map(|r| (r.game, r.flows_requested)).collect();
    keys.sort();
    keys.dedup();

    let mut out = Vec::new();
    for (game, flows) in keys {
        let group: Vec<&RunMetrics> = rows
            .iter()
            .filter(|r| r.game == game && r.flows_requested == flows)
            .collect();
        for metric in METRICS {
            let values: Vec<f64> = group
                .iter()
                .filter_map(|r| metric_value(r, metric))
                .collect();
            if values.is_empty() {
                continue;
            }
            let (mean, std) = mean_std(&values);
            out.push(AggregateRow {
                game,
                flows_requested: flows,
                metric: metric.to_string(),
                mean,
                std,
                n: values.len(),
            });
        }
    }
    Ok(out)
}

/// Looks up one aggregate.
pub fn find_aggregate<'a>(
    table: &'a [AggregateRow],
    game: GameKind,
    flows_requested: usize,
    metric: &str,
) -> Option<&'a AggregateRow> {
    table
        .iter()
        .find(|r| r.game == game && r.flows_requested == flows_requested && r.metric == metric)
}

fn write_csv<T: Serialize>(rows: &[T], out: impl Write) -> Result<()> {
    let mut writer = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    for row in rows {
        writer.serialize(row)?;
    }
    writer.flush().map_err(|e| Error::io("<csv output>", e))?;
    Ok(())
}

/// Header: `instance_id,game,flows_requested,flows_active,mean_links_per_active_flow,normalized_flow_steps,converged`.
pub fn write_results(rows: &[RunMetrics], out: impl Write) -> Result<()> {
    if rows.is_empty() {
        // Serde only emits the header alongside the first record.
        let mut out = out;
        return out
            .write_all(b"instance_id,game,flows_requested,flows_active,mean_links_per_active_flow,normalized_flow_steps,converged\n")
            .map_err(|e| Error::io("<csv output>", e));
    }
    write_csv(rows, out)
}

pub fn read_results(input: impl Read) -> Result<Vec<RunMetrics>> {
    csv::Reader::from_reader(input)
        .deserialize()
        .map(|r| r.map_err(Error::from))
        .collect()
}

/// Header: `game,flows_requested,metric,mean,std,n`.
pub fn write_aggregate(rows: &[AggregateRow], out: impl Write) -> Result<()> {
    write_csv(rows, out)
}

pub fn read_aggregate(input: impl Read) -> Result<Vec<AggregateRow>> {
    csv::Reader::from_reader(input)
        .deserialize()
        .map(|r| r.map_err(Error::from))
        .collect()
}
