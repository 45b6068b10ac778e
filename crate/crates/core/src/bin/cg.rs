//! `cg`: command-line front end for runs, sweeps, oracles and scenarios.
//!
//! Exit codes: 0 success, 1 usage or internal error, 2 invalid input,
//! 3 scale bound exceeded.

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use coalition_dynamics::error::{Error, Result};
use coalition_dynamics::harness::{
    report, run_experiment, steer, sweep, witness_json, write_report, Algorithm, ExperimentSpec, GameSource,
    RunSettings, SweepFilter, SweepSpec,
};
use coalition_dynamics::oracle::{core_witness, max_welfare};
use coalition_dynamics::task_alloc::{generate_seeded, ScenarioParams};
use coalition_dynamics::TUGame;

#[derive(Parser)]
#[command(name = "cg", version, about = "Coalition Proposal dynamics for TU games")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one algorithm on a game or scenario.
    Run(RunArgs),
    /// Run algorithms over random task-allocation configurations.
    Sweep(SweepArgs),
    /// Print K_v, an optimal partition and a core witness.
    Oracle(OracleArgs),
    /// Task-allocation scenario files.
    #[command(subcommand)]
    Scenario(ScenarioCommand),
    /// Build and verify a steering sequence into the core.
    Steer(SteerArgs),
    /// Summarise a sweep directory or finals.csv.
    Report { path: PathBuf },
}

#[derive(Args)]
#[group(id = "source", required = true, multiple = false)]
struct Source {
    #[arg(long, group = "source")]
    game: Option<PathBuf>,
    #[arg(long, group = "source")]
    scenario: Option<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    source: Source,
    #[arg(long, default_value = "CP")]
    alg: Algorithm,
    #[arg(long, default_value_t = 1_000_000)]
    rounds: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0.0)]
    drop_prob: f64,
    #[arg(long, default_value_t = 1)]
    replications: u32,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long, default_value_t = 50)]
    configs: usize,
    #[arg(long, default_value = "core")]
    filter: SweepFilter,
    #[arg(long, default_value = "CP,BR,BRExp-A,BRExp-B")]
    algs: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "sweep")]
    out: PathBuf,
    #[arg(long, default_value_t = 1_000_000)]
    rounds: u64,
    #[arg(long, default_value_t = 0.0)]
    drop_prob: f64,
    #[arg(long, default_value_t = 100)]
    sample_every: u64,
    /// Use the 10 agent / 20 task / 5 feature / 9×9 parameters.
    #[arg(long)]
    full_scale: bool,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    tasks: Option<usize>,
    #[arg(long)]
    features: Option<usize>,
    #[arg(long)]
    grid: Option<i64>,
}

#[derive(Args)]
struct OracleArgs {
    #[arg(long)]
    game: PathBuf,
    /// Only the core witness.
    #[arg(long)]
    witness: bool,
    /// Only K_v and the optimal partition.
    #[arg(long)]
    kv: bool,
}

#[derive(Subcommand)]
enum ScenarioCommand {
    /// Generate a random scenario.
    Gen {
        #[arg(long, default_value_t = 10)]
        m: usize,
        #[arg(long, default_value_t = 20)]
        tasks: usize,
        #[arg(long, default_value_t = 5)]
        features: usize,
        #[arg(long, default_value_t = 9)]
        grid: i64,
        #[arg(long, default_value_t = 3)]
        worth_scale: i64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output file; standard output if absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct SteerArgs {
    #[arg(long)]
    game: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

/// Writes to standard output; a closed pipe is not an error.
fn emit(text: &str) {
    let _ = std::io::stdout().lock().write_all(text.as_bytes());
}

fn print_json(v: &serde_json::Value) {
    emit(&format!(
        "{}\n",
        serde_json::to_string_pretty(v).expect("JSON values serialise")
    ));
}

fn dispatch(command: Command) -> Result<()> {
    match command {
        Command::Run(a) => {
            let source = match (a.source.game, a.source.scenario) {
                (Some(g), None) => GameSource::GameFile(g),
                (None, Some(s)) => GameSource::ScenarioFile(s),
                _ => unreachable!("clap enforces exactly one source"),
            };
            let spec = ExperimentSpec {
                source,
                algorithm: a.alg,
                seed: a.seed,
                replications: a.replications,
                settings: RunSettings {
                    horizon: a.rounds,
                    drop_probability: a.drop_prob,
                    ..RunSettings::default()
                },
                out_dir: a.out,
            };
            let summary = run_experiment(&spec)?;
            print_json(&serde_json::to_value(&summary).map_err(|e| Error::Internal(e.to_string()))?);
        }
        Command::Sweep(a) => {
            let base = if a.full_scale {
                ScenarioParams::FULL
            } else {
                ScenarioParams::REDUCED
            };
            let params = ScenarioParams {
                m: a.m.unwrap_or(base.m),
                n_tasks: a.tasks.unwrap_or(base.n_tasks),
                k: a.features.unwrap_or(base.k),
                grid_size: a.grid.unwrap_or(base.grid_size),
                ..base
            };
            let spec = SweepSpec {
                params,
                n_configs: a.configs,
                filter: a.filter,
                algorithms: Algorithm::parse_list(&a.algs)?,
                seed: a.seed,
                settings: RunSettings {
                    horizon: a.rounds,
                    drop_probability: a.drop_prob,
                    ..RunSettings::default()
                },
                sample_every: a.sample_every,
                ..SweepSpec::default()
            };
            let rep = sweep(&spec)?;
            write_report(&spec, &rep, &a.out)?;
            emit(&rep.summaries.iter().map(|s| format!("{s}\n")).collect::<String>());
        }
        Command::Oracle(a) => {
            let game = TUGame::load(&a.game)?;
            let delta = game.delta();
            let both = a.witness == a.kv;
            let mut out = serde_json::Map::new();
            if a.kv || both {
                let (k, rho) = max_welfare(&game)?;
                out.insert("k_v".into(), delta.to_json(k));
                out.insert(
                    "partition".into(),
                    rho.blocks()
                        .iter()
                        .map(|c| c.players().map(|i| i + 1).collect::<Vec<_>>())
                        .collect::<Vec<_>>()
                        .into(),
                );
            }
            if a.witness || both {
                let w = match core_witness(&game)? {
                    Some(w) => witness_json(&game, &w),
                    None => "EMPTY CORE".into(),
                };
                out.insert("witness".into(), w);
            }
            print_json(&out.into());
        }
        Command::Scenario(ScenarioCommand::Gen {
            m,
            tasks,
            features,
            grid,
            worth_scale,
            seed,
            out,
        }) => {
            let params = ScenarioParams {
                m,
                n_tasks: tasks,
                k: features,
                grid_size: grid,
                worth_scale,
            };
            let config = generate_seeded(seed, params)?;
            match out {
                Some(path) => config.save(path)?,
                None => {
                    print_json(&serde_json::to_value(config.to_file()).map_err(|e| Error::Internal(e.to_string()))?)
                }
            }
        }
        Command::Steer(a) => print_json(&steer(&TUGame::load(&a.game)?, a.seed)?),
        Command::Report { path } => emit(&report(&path)?),
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("cg: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
