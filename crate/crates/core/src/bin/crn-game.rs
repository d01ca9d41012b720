//! Command-line front end: scenario generation, single runs, sweeps and
//! oracle checks on tiny instances.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crn_game::experiments::{aggregate, run_batch, write_aggregate, write_results, BatchSpec};
use crn_game::games::{DEFAULT_MAX_CYCLES, DEFAULT_SEARCH_NODE_CAP};
use crn_game::oracle::{tiny_scenario, verify_instance};
use crn_game::{
    generate_scenario, load_scenario, run_game, save_scenario, Error, GameConfig, GameKind,
    ScenarioParams,
};

#[derive(Parser)]
#[command(
    name = "crn-game",
    version,
    about = "Joint channel and power allocation games for multihop cognitive radio networks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a random scenario and write it as JSON.
    Gen {
        #[command(flatten)]
        scenario: ScenarioArgs,
        /// Number of flows.
        #[arg(long, default_value_t = 10)]
        flows: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Play one or more games on one scenario and print their metrics as CSV.
    Run {
        /// Scenario file; generated from the scenario flags when absent.
        #[arg(long, conflicts_with = "flows")]
        scenario: Option<PathBuf>,
        #[command(flatten)]
        params: ScenarioArgs,
        #[arg(long)]
        flows: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_delimiter = ',', default_value = "pfg")]
        games: Vec<GameKind>,
        #[command(flatten)]
        game: GameArgs,
        /// Write the move records (JSON, one per line). Needs a single game.
        #[arg(long)]
        trajectory: Option<PathBuf>,
        /// Metrics CSV destination; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Monte-Carlo sweep over flow counts and random instances.
    Sweep {
        #[command(flatten)]
        scenario: ScenarioArgs,
        #[arg(long, value_delimiter = ',', default_value = "10,20,30,40")]
        flows: Vec<usize>,
        #[arg(long, default_value_t = 100)]
        instances: usize,
        #[arg(long, value_delimiter = ',', default_value = "llg,clg,lfg,pfg")]
        games: Vec<GameKind>,
        /// Master seed; each instance seed is derived from it.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        game: GameArgs,
        /// Parallel worker threads.
        #[arg(long)]
        jobs: Option<usize>,
        /// Per-run results CSV.
        #[arg(long)]
        out: PathBuf,
        /// Aggregate CSV (mean, std per game and flow count).
        #[arg(long)]
        aggregate: Option<PathBuf>,
    },
    /// Cross-check the dynamics against exhaustive enumeration on tiny instances.
    Verify {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 10)]
        instances: usize,
    },
}

#[derive(Args)]
struct ScenarioArgs {
    #[arg(long, default_value_t = 200)]
    nodes: usize,
    /// Side of the square area, meters.
    #[arg(long, default_value_t = 1000.0)]
    side: f64,
    #[arg(long, default_value_t = 10)]
    channels: usize,
    /// Side of a channel-availability region, meters.
    #[arg(long, default_value_t = 100.0)]
    region: f64,
    #[arg(long, default_value_t = 3)]
    subset_min: usize,
    #[arg(long, default_value_t = 8)]
    subset_max: usize,
    #[arg(long, default_value_t = 20.0, allow_hyphen_values = true)]
    pmax_dbm: f64,
    /// Power levels including OFF.
    #[arg(long, default_value_t = 16)]
    levels: usize,
    #[arg(long, default_value_t = 4.0)]
    gamma: f64,
    #[arg(long, default_value_t = 10.0, allow_hyphen_values = true)]
    alpha_db: f64,
    #[arg(long, default_value_t = -70.0, allow_hyphen_values = true)]
    noise_dbm: f64,
    #[arg(long, default_value_t = 6)]
    max_hops: usize,
}

impl ScenarioArgs {
    fn params(&self, n_flows: usize, seed: u64) -> ScenarioParams {
        ScenarioParams {
            n_nodes: self.nodes,
            side_length: self.side,
            n_channels: self.channels,
            region_size: self.region,
            channel_subset_min: self.subset_min,
            channel_subset_max: self.subset_max,
            q_levels: self.levels,
            path_loss_exp: self.gamma,
            max_hops: self.max_hops,
            n_flows,
            seed,
            ..ScenarioParams::default()
        }
        .with_db(self.pmax_dbm, self.alpha_db, self.noise_dbm)
    }
}

#[derive(Args)]
struct GameArgs {
    #[arg(long, default_value_t = DEFAULT_MAX_CYCLES)]
    max_cycles: usize,
    /// Search expansions allowed per move before giving up.
    #[arg(long, default_value_t = DEFAULT_SEARCH_NODE_CAP)]
    search_cap: u64,
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Run(#[from] Error),
    #[error("{0}")]
    Failed(String),
    #[error("{path}: {source}")]
    Io { path: String, source: io::Error },
}

fn create(path: &PathBuf) -> Result<BufWriter<File>, CliError> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|source| CliError::Io {
            path: path.display().to_string(),
            source,
        })
}

fn output(path: &Option<PathBuf>) -> Result<Box<dyn Write>, CliError> {
    Ok(match path {
        Some(p) => Box::new(create(p)?),
        None => Box::new(io::stdout().lock()),
    })
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Gen {
            scenario,
            flows,
            seed,
            out,
        } => {
            let s = generate_scenario(&scenario.params(flows, seed))?;
            save_scenario(&s, &out)?;
            eprintln!(
                "wrote {}: {} nodes, {} flows, {} links",
                out.display(),
                s.nodes().len(),
                s.flows().len(),
                s.links().len()
            );
        }
        Command::Run {
            scenario,
            params,
            flows,
            seed,
            games,
            game,
            trajectory,
            out,
        } => {
            if trajectory.is_some() && games.len() != 1 {
                return Err(CliError::Usage(
                    "--trajectory needs exactly one game in --games".into(),
                ));
            }
            let scenario = match scenario {
                Some(path) => load_scenario(path)?,
                None => generate_scenario(&params.params(flows.unwrap_or(10), seed))?,
            };
            let mut rows = Vec::new();
            for kind in games {
                let config = GameConfig {
                    game: kind,
                    max_cycles: game.max_cycles,
                    search_node_cap: game.search_cap,
                    seed,
                };
                let run = run_game(&scenario, &config)?;
                if let Some(path) = &trajectory {
                    let mut w = create(path)?;
                    for record in &run.trajectory.records {
                        let line = serde_json::to_string(record).expect("records serialize");
                        writeln!(w, "{line}").map_err(|source| CliError::Io {
                            path: path.display().to_string(),
                            source,
                        })?;
                    }
                    w.flush().map_err(|source| CliError::Io {
                        path: path.display().to_string(),
                        source,
                    })?;
                }
                rows.push(run.metrics);
            }
            write_results(&rows, output(&out)?)?;
        }
        Command::Sweep {
            scenario,
            flows,
            instances,
            games,
            seed,
            game,
            jobs,
            out,
            aggregate: aggregate_out,
        } => {
            if flows.is_empty() || games.is_empty() {
                return Err(CliError::Usage(
                    "--flows and --games must not be empty".into(),
                ));
            }
            let spec = BatchSpec {
                max_cycles: game.max_cycles,
                search_node_cap: game.search_cap,
                jobs,
                ..BatchSpec::new(scenario.params(0, seed), flows, instances, games)
            };
            let outcome = run_batch(&spec)?;
            for f in &outcome.failures {
                eprintln!(
                    "instance {} at {} flows skipped: {}",
                    f.instance, f.flow_count, f.message
                );
            }
            write_results(&outcome.rows, create(&out)?)?;
            if let Some(path) = aggregate_out {
                if !outcome.rows.is_empty() {
                    write_aggregate(&aggregate(&outcome.rows)?, create(&path)?)?;
                }
            }
            eprintln!("wrote {} rows to {}", outcome.rows.len(), out.display());
        }
        Command::Verify { seed, instances } => {
            let mut failed = 0;
            for i in 0..instances {
                let scenario = tiny_scenario(seed.wrapping_add(i as u64));
                for c in verify_instance(&scenario)? {
                    println!(
                        "{} instance {i}: {} ({})",
                        if c.passed { "PASS" } else { "FAIL" },
                        c.name,
                        c.detail
                    );
                    failed += usize::from(!c.passed);
                }
            }
            if failed > 0 {
                return Err(CliError::Failed(format!("{failed} oracle check(s) failed")));
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                // Parameter validation failures come from flag values.
                CliError::Usage(_) | CliError::Run(Error::InvalidParams { .. }) => {
                    ExitCode::from(2)
                }
                _ => ExitCode::FAILURE,
            }
        }
    }
}
