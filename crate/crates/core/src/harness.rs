//! Experiment orchestration: single runs, configuration sweeps and the
//! aggregate report.
//!
//! Seeds: replication `r` of a run with seed `s` uses `s + r`. A sweep with
//! master seed `M` draws candidate configuration `j` from
//! `split_seed(M, j)` and runs every algorithm on it with
//! `split_seed(config_seed, 0)`, so algorithms see identical activations.
//!
//! Sweep outputs (all deterministic for a fixed master seed):
//! - `curves.csv`: `round` plus one mean relative-welfare column per algorithm
//! - `finals.csv`: one row per configuration and algorithm
//! - `report.json`: parameters and per-algorithm summaries

use std::collections::BTreeMap;
use std::fmt;
use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baselines::{
    relative_welfare, run_baseline, write_baseline_trace_csv, BaselineOutcome, BestReplyConfig, BestReplyVariant,
};
use crate::coalition::Coalition;
use crate::dynamics::{
    apply_proposal_exact, init_state, run_with_sampler, sample_uniform, write_trace_csv, DynamicsConfig,
    FinalStateFile, ProposalSampler, RunOutcome, UniformProposals,
};
use crate::error::{Error, Result};
use crate::game::{is_core_solution, EnvironmentState, TUGame};
use crate::grid::GridValue;
use crate::oracle::{build_steering_sequence, core_witness, max_welfare, CoreWitness};
use crate::rng::{split_seed, RunRng};
use crate::task_alloc::{
    generate_seeded, optimal_welfare, restricted_core_witness, to_game, PositiveProposals, ScenarioParams, TaskConfig,
    DEFAULT_MAX_AGENTS_PER_PROPOSAL,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Algorithm {
    CoalitionProposal,
    BestReply(BestReplyVariant),
}

impl Algorithm {
    pub const ALL: [Algorithm; 4] = [
        Algorithm::CoalitionProposal,
        Algorithm::BestReply(BestReplyVariant::Plain),
        Algorithm::BestReply(BestReplyVariant::ExperimentA),
        Algorithm::BestReply(BestReplyVariant::ExperimentB),
    ];

    pub fn label(self) -> &'static str {
        match self {
            Algorithm::CoalitionProposal => "CP",
            Algorithm::BestReply(v) => v.label(),
        }
    }

    /// Parses a comma-separated list such as `CP,BR,BRExp-A`.
    pub fn parse_list(s: &str) -> Result<Vec<Algorithm>> {
        let algs = s
            .split(',')
            .map(str::trim)
            .filter(|t| !t.is_empty())
            .map(str::parse)
            .collect::<Result<Vec<Algorithm>>>()?;
        if algs.is_empty() {
            return Err(Error::validation("no algorithms given"));
        }
        Ok(algs)
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Algorithm {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "CP" => Ok(Algorithm::CoalitionProposal),
            other => other
                .parse()
                .map(Algorithm::BestReply)
                .map_err(|_| Error::validation(format!("unknown algorithm {other:?} (CP, BR, BRExp-A, BRExp-B)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum GameSource {
    GameFile(PathBuf),
    ScenarioFile(PathBuf),
    Generated { params: ScenarioParams, seed: u64 },
}

/// A loaded game, with its scenario when it came from one.
#[derive(Debug, Clone)]
pub struct LoadedGame {
    pub game: TUGame,
    pub scenario: Option<TaskConfig>,
}

impl LoadedGame {
    pub fn from_scenario(config: TaskConfig) -> Result<LoadedGame> {
        Ok(LoadedGame {
            game: to_game(&config)?,
            scenario: Some(config),
        })
    }

    /// Optimal welfare: the task DP for scenarios, partition search otherwise.
    pub fn optimal_welfare(&self) -> Result<GridValue> {
        match &self.scenario {
            Some(config) => optimal_welfare(config),
            None => max_welfare(&self.game).map(|(k, _)| k),
        }
    }

    /// Players that act: agents in a scenario, everyone otherwise.
    pub fn movers(&self) -> Coalition {
        match &self.scenario {
            Some(config) => config.agents(),
            None => self.game.grand(),
        }
    }
}

impl GameSource {
    pub fn load(&self) -> Result<LoadedGame> {
        match self {
            GameSource::GameFile(path) => Ok(LoadedGame {
                game: TUGame::load(path)?,
                scenario: None,
            }),
            GameSource::ScenarioFile(path) => LoadedGame::from_scenario(TaskConfig::load(path)?),
            GameSource::Generated { params, seed } => LoadedGame::from_scenario(generate_seeded(*seed, *params)?),
        }
    }
}

/// Settings shared by every algorithm run.
#[derive(Debug, Clone)]
pub struct RunSettings {
    pub horizon: u64,
    pub drop_probability: f64,
    pub best_reply: BestReplyConfig,
    pub max_agents_per_proposal: usize,
    /// Rounds between absorption / rest-point checks; `None` uses the
    /// dynamics default.
    pub check_every: Option<u64>,
}

impl Default for RunSettings {
    fn default() -> Self {
        RunSettings {
            horizon: 1_000_000,
            drop_probability: 0.0,
            best_reply: BestReplyConfig::default(),
            max_agents_per_proposal: DEFAULT_MAX_AGENTS_PER_PROPOSAL,
            check_every: None,
        }
    }
}

/// Result of one algorithm run, in a shape common to CP and the baselines.
#[derive(Debug, Clone)]
pub enum AlgorithmRun {
    Dynamics(RunOutcome),
    Baseline(BaselineOutcome),
}

impl AlgorithmRun {
    /// Total aspiration (CP) or realised payoff (baselines) at the end.
    pub fn final_total(&self, game: &TUGame) -> GridValue {
        match self {
            AlgorithmRun::Dynamics(o) => o.final_state.aspirations().total(),
            AlgorithmRun::Baseline(o) => o.final_state.total_payoff(game),
        }
    }

    /// Absorbed (CP) or at a rest point (plain best reply).
    pub fn absorbed(&self) -> bool {
        match self {
            AlgorithmRun::Dynamics(o) => o.absorbed,
            AlgorithmRun::Baseline(o) => o.rest_round.is_some(),
        }
    }

    pub fn rounds(&self) -> u64 {
        match self {
            AlgorithmRun::Dynamics(o) => o.rounds,
            AlgorithmRun::Baseline(o) => o.totals.len() as u64 - 1,
        }
    }

    /// Total at round `r`, holding the last value after the run stopped.
    pub fn total_at(&self, r: u64) -> GridValue {
        match self {
            AlgorithmRun::Dynamics(o) => {
                if r == 0 || o.trace.is_empty() {
                    o.initial.aspirations().total()
                } else {
                    let idx = (r as usize).min(o.trace.len()) - 1;
                    o.trace[idx].total_aspiration
                }
            }
            AlgorithmRun::Baseline(o) => o.totals[(r as usize).min(o.totals.len() - 1)],
        }
    }

    pub fn final_file(&self, game: &TUGame) -> FinalStateFile {
        match self {
            AlgorithmRun::Dynamics(o) => FinalStateFile::from_outcome(game, o),
            AlgorithmRun::Baseline(o) => FinalStateFile {
                aspirations: o
                    .final_state
                    .demands()
                    .as_slice()
                    .iter()
                    .map(|v| game.delta().to_json(*v))
                    .collect(),
                structure: o
                    .final_state
                    .structure()
                    .coalitions()
                    .into_iter()
                    .map(|c| c.players().map(|i| i + 1).collect())
                    .collect(),
                absorbed: self.absorbed(),
                rounds: self.rounds(),
            },
        }
    }

    pub fn write_trace(&self, game: &TUGame, algorithm: Algorithm, path: &Path) -> Result<()> {
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let out = BufWriter::new(file);
        match (self, algorithm) {
            (AlgorithmRun::Dynamics(o), _) => write_trace_csv(game, &o.trace, out),
            (AlgorithmRun::Baseline(o), Algorithm::BestReply(v)) => write_baseline_trace_csv(game, v, &o.events, out),
            (AlgorithmRun::Baseline(_), Algorithm::CoalitionProposal) => {
                Err(Error::Internal("baseline outcome labelled CP".into()))
            }
        }
    }
}

/// Runs one algorithm on a loaded game with the given seed.
pub fn run_algorithm(
    loaded: &LoadedGame,
    algorithm: Algorithm,
    settings: &RunSettings,
    seed: u64,
) -> Result<AlgorithmRun> {
    let game = &loaded.game;
    match algorithm {
        Algorithm::CoalitionProposal => {
            let config = DynamicsConfig {
                horizon: settings.horizon,
                seed,
                drop_probability: settings.drop_probability,
                // scenarios match the baselines' rest-point check
                absorption_check_every: settings.check_every.or(loaded.scenario.as_ref().map(|_| 10)),
                ..DynamicsConfig::default()
            };
            let sampler: Box<dyn ProposalSampler> = match &loaded.scenario {
                Some(c) => Box::new(PositiveProposals::new(c, settings.max_agents_per_proposal)?),
                None => Box::new(UniformProposals::new(game.n_players())),
            };
            run_with_sampler(game, &config, sampler.as_ref()).map(AlgorithmRun::Dynamics)
        }
        Algorithm::BestReply(variant) => {
            let config = BestReplyConfig {
                variant,
                rng_seed: seed,
                ..settings.best_reply.clone()
            };
            let every = settings.check_every.unwrap_or(10);
            run_baseline(game, &config, loaded.movers(), settings.horizon, every).map(AlgorithmRun::Baseline)
        }
    }
}

/// `ExperimentSpec`.
#[derive(Debug, Clone)]
pub struct ExperimentSpec {
    pub source: GameSource,
    pub algorithm: Algorithm,
    pub seed: u64,
    pub replications: u32,
    pub settings: RunSettings,
    pub out_dir: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReplicationSummary {
    pub replication: u32,
    pub seed: u64,
    pub final_total: f64,
    pub relative_welfare: Option<f64>,
    pub absorbed: bool,
    pub rounds: u64,
    pub trace: PathBuf,
    pub final_state: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentSummary {
    pub algorithm: String,
    pub optimal_welfare: f64,
    pub replications: Vec<ReplicationSummary>,
}

fn create_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).map_err(|e| Error::io(path, e))
}

/// `run_experiment`: writes `trace_{alg}_{r}.csv` and `final_{alg}_{r}.json`
/// per replication. Relative welfare is left out when the optimum is zero.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentSummary> {
    let loaded = spec.source.load()?;
    let optimal = loaded.optimal_welfare()?;
    create_dir(&spec.out_dir)?;
    let delta = loaded.game.delta();
    let label = spec.algorithm.label();
    let replications = (0..spec.replications)
        .into_par_iter()
        .map(|r| {
            let seed = spec.seed.wrapping_add(u64::from(r));
            let run = run_algorithm(&loaded, spec.algorithm, &spec.settings, seed)?;
            let trace = spec.out_dir.join(format!("trace_{label}_{r}.csv"));
            let final_state = spec.out_dir.join(format!("final_{label}_{r}.json"));
            run.write_trace(&loaded.game, spec.algorithm, &trace)?;
            run.final_file(&loaded.game).write(&final_state)?;
            let total = run.final_total(&loaded.game);
            Ok(ReplicationSummary {
                replication: r,
                seed,
                final_total: delta.to_f64(total),
                relative_welfare: relative_welfare(total, optimal).ok(),
                absorbed: run.absorbed(),
                rounds: run.rounds(),
                trace,
                final_state,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ExperimentSummary {
        algorithm: label.to_string(),
        optimal_welfare: delta.to_f64(optimal),
        replications,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SweepFilter {
    /// Keep configurations with a core solution paying tasks zero.
    #[serde(rename = "core")]
    RestrictedCore,
    #[serde(rename = "any")]
    Any,
}

impl FromStr for SweepFilter {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "core" | "nonempty-restricted-core" => Ok(SweepFilter::RestrictedCore),
            "any" => Ok(SweepFilter::Any),
            _ => Err(Error::validation(format!("unknown filter {s:?} (core, any)"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub params: ScenarioParams,
    pub n_configs: usize,
    pub filter: SweepFilter,
    pub algorithms: Vec<Algorithm>,
    pub seed: u64,
    pub settings: RunSettings,
    /// Curve sampling interval in rounds.
    pub sample_every: u64,
    /// Candidate configurations drawn per requested configuration before
    /// giving up.
    pub retry_factor: usize,
    pub parallel: bool,
}

impl Default for SweepSpec {
    fn default() -> Self {
        SweepSpec {
            params: ScenarioParams::REDUCED,
            n_configs: 50,
            filter: SweepFilter::RestrictedCore,
            algorithms: Algorithm::ALL.to_vec(),
            seed: 0,
            settings: RunSettings::default(),
            sample_every: 100,
            retry_factor: 50,
            parallel: true,
        }
    }
}

/// One row of `finals.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FinalRow {
    pub config: usize,
    pub seed: u64,
    pub algorithm: String,
    pub optimal: i64,
    pub final_total: i64,
    pub final_relative_welfare: f64,
    pub absorbed: bool,
    pub rounds: u64,
}

/// Per-algorithm summary of a set of final rows.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AlgorithmSummary {
    pub algorithm: String,
    pub configs: usize,
    pub mean_final_relative_welfare: f64,
    pub fraction_absorbed: f64,
    /// Mean rounds over the absorbed runs only.
    pub mean_rounds_to_absorption: Option<f64>,
}

impl fmt::Display for AlgorithmSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{:<8} configs={:<4} mean_final_relative_welfare={:.6} absorbed={:.3}",
            self.algorithm, self.configs, self.mean_final_relative_welfare, self.fraction_absorbed
        )?;
        match self.mean_rounds_to_absorption {
            Some(r) => write!(f, " mean_rounds_to_absorption={r:.1}"),
            None => write!(f, " mean_rounds_to_absorption=n/a"),
        }
    }
}

/// Summaries in order of first appearance of each algorithm.
pub fn summarize(rows: &[FinalRow]) -> Vec<AlgorithmSummary> {
    let mut order: Vec<&str> = Vec::new();
    let mut groups: BTreeMap<&str, Vec<&FinalRow>> = BTreeMap::new();
    for r in rows {
        if !groups.contains_key(r.algorithm.as_str()) {
            order.push(&r.algorithm);
        }
        groups.entry(&r.algorithm).or_default().push(r);
    }
    order
        .into_iter()
        .map(|alg| {
            let g = &groups[alg];
            let n = g.len() as f64;
            let absorbed: Vec<&&FinalRow> = g.iter().filter(|r| r.absorbed).collect();
            AlgorithmSummary {
                algorithm: alg.to_string(),
                configs: g.len(),
                mean_final_relative_welfare: g.iter().map(|r| r.final_relative_welfare).sum::<f64>() / n,
                fraction_absorbed: absorbed.len() as f64 / n,
                mean_rounds_to_absorption: (!absorbed.is_empty())
                    .then(|| absorbed.iter().map(|r| r.rounds as f64).sum::<f64>() / absorbed.len() as f64),
            }
        })
        .collect()
}

/// `AggregateReport`.
#[derive(Debug, Clone, PartialEq)]
pub struct AggregateReport {
    pub algorithms: Vec<Algorithm>,
    /// Sampled rounds.
    pub rounds: Vec<u64>,
    /// Mean relative welfare per algorithm at each sampled round.
    pub curves: Vec<Vec<f64>>,
    pub finals: Vec<FinalRow>,
    pub summaries: Vec<AlgorithmSummary>,
    /// Candidate configurations drawn, including rejected ones.
    pub candidates_drawn: usize,
}

impl AggregateReport {
    pub fn summary(&self, algorithm: Algorithm) -> Option<&AlgorithmSummary> {
        self.summaries.iter().find(|s| s.algorithm == algorithm.label())
    }

    pub fn curve(&self, algorithm: Algorithm) -> Option<&[f64]> {
        self.algorithms
            .iter()
            .position(|a| *a == algorithm)
            .map(|i| self.curves[i].as_slice())
    }
}

#[derive(Debug, Clone)]
struct Candidate {
    index: usize,
    seed: u64,
    loaded: LoadedGame,
    optimal: GridValue,
}

fn select_configs(spec: &SweepSpec) -> Result<(Vec<Candidate>, usize)> {
    let cap = spec.n_configs.saturating_mul(spec.retry_factor).max(1);
    let mut chosen = Vec::with_capacity(spec.n_configs);
    let mut drawn = 0;
    while chosen.len() < spec.n_configs {
        if drawn >= cap {
            return Err(Error::validation(format!(
                "only {} of {} configurations passed the filter after {cap} candidates",
                chosen.len(),
                spec.n_configs
            )));
        }
        let seed = split_seed(spec.seed, drawn as u64);
        drawn += 1;
        let config = generate_seeded(seed, spec.params)?;
        let optimal = optimal_welfare(&config)?;
        if optimal == GridValue::ZERO {
            continue;
        }
        if spec.filter == SweepFilter::RestrictedCore && restricted_core_witness(&config)?.is_none() {
            continue;
        }
        chosen.push(Candidate {
            index: chosen.len(),
            seed,
            loaded: LoadedGame::from_scenario(config)?,
            optimal,
        });
    }
    Ok((chosen, drawn))
}

struct ConfigRuns {
    finals: Vec<FinalRow>,
    curves: Vec<Vec<f64>>,
}

fn run_config(spec: &SweepSpec, c: &Candidate, rounds: &[u64]) -> Result<ConfigRuns> {
    let run_seed = split_seed(c.seed, 0);
    let mut finals = Vec::new();
    let mut curves = Vec::new();
    for &alg in &spec.algorithms {
        let run = run_algorithm(&c.loaded, alg, &spec.settings, run_seed)?;
        let total = run.final_total(&c.loaded.game);
        finals.push(FinalRow {
            config: c.index,
            seed: c.seed,
            algorithm: alg.label().to_string(),
            optimal: c.optimal.steps(),
            final_total: total.steps(),
            final_relative_welfare: relative_welfare(total, c.optimal)?,
            absorbed: run.absorbed(),
            rounds: run.rounds(),
        });
        curves.push(
            rounds
                .iter()
                .map(|&r| relative_welfare(run.total_at(r), c.optimal))
                .collect::<Result<Vec<_>>>()?,
        );
    }
    Ok(ConfigRuns { finals, curves })
}

/// `sweep`: draws configurations until `n_configs` pass the filter, runs each
/// algorithm on each and averages relative welfare per sampled round.
pub fn sweep(spec: &SweepSpec) -> Result<AggregateReport> {
    if spec.algorithms.is_empty() || spec.n_configs == 0 || spec.sample_every == 0 {
        return Err(Error::validation(
            "sweep needs algorithms, configurations and a positive sampling interval",
        ));
    }
    let (chosen, drawn) = select_configs(spec)?;
    let mut rounds: Vec<u64> = (0..=spec.settings.horizon)
        .step_by(spec.sample_every as usize)
        .collect();
    if rounds.last() != Some(&spec.settings.horizon) {
        rounds.push(spec.settings.horizon);
    }
    let runs: Vec<ConfigRuns> = if spec.parallel {
        chosen
            .par_iter()
            .map(|c| run_config(spec, c, &rounds))
            .collect::<Result<_>>()?
    } else {
        chosen
            .iter()
            .map(|c| run_config(spec, c, &rounds))
            .collect::<Result<_>>()?
    };
    let n = runs.len() as f64;
    let curves = (0..spec.algorithms.len())
        .map(|a| {
            (0..rounds.len())
                .map(|k| runs.iter().map(|r| r.curves[a][k]).sum::<f64>() / n)
                .collect()
        })
        .collect();
    let finals: Vec<FinalRow> = runs.into_iter().flat_map(|r| r.finals).collect();
    let summaries = summarize(&finals);
    Ok(AggregateReport {
        algorithms: spec.algorithms.clone(),
        rounds,
        curves,
        finals,
        summaries,
        candidates_drawn: drawn,
    })
}

fn csv_err(path: &Path) -> impl Fn(csv::Error) -> Error + '_ {
    move |e| Error::parse(path, e)
}

/// Writes `curves.csv`, `finals.csv` and `report.json` into `dir`.
pub fn write_report(spec: &SweepSpec, report: &AggregateReport, dir: &Path) -> Result<()> {
    create_dir(dir)?;
    let curves_path = dir.join("curves.csv");
    let mut w = csv::Writer::from_path(&curves_path).map_err(csv_err(&curves_path))?;
    let mut header = vec!["round".to_string()];
    header.extend(report.algorithms.iter().map(|a| a.label().to_string()));
    w.write_record(&header).map_err(csv_err(&curves_path))?;
    for (k, r) in report.rounds.iter().enumerate() {
        let mut row = vec![r.to_string()];
        row.extend(report.curves.iter().map(|c| format!("{:.6}", c[k])));
        w.write_record(&row).map_err(csv_err(&curves_path))?;
    }
    w.flush().map_err(|e| Error::io(&curves_path, e))?;

    let finals_path = dir.join("finals.csv");
    let mut w = csv::Writer::from_path(&finals_path).map_err(csv_err(&finals_path))?;
    for row in &report.finals {
        w.serialize(row).map_err(csv_err(&finals_path))?;
    }
    w.flush().map_err(|e| Error::io(&finals_path, e))?;

    let meta = serde_json::json!({
        "params": {
            "m": spec.params.m,
            "n_tasks": spec.params.n_tasks,
            "k": spec.params.k,
            "grid_size": spec.params.grid_size,
            "worth_scale": spec.params.worth_scale,
        },
        "n_configs": spec.n_configs,
        "filter": spec.filter,
        "algorithms": report.algorithms.iter().map(|a| a.label()).collect::<Vec<_>>(),
        "master_seed": spec.seed,
        "horizon": spec.settings.horizon,
        "stopping_rule": "CP stops at the first absorbing state found, plain BR at the first rest point; otherwise the horizon",
        "drop_probability": spec.settings.drop_probability,
        "experimentation_probability": spec.settings.best_reply.experimentation_probability,
        "activation_probability": spec.settings.best_reply.activation_probability,
        "max_agents_per_proposal": spec.settings.max_agents_per_proposal,
        "sample_every": spec.sample_every,
        "candidates_drawn": report.candidates_drawn,
        "summaries": report.summaries,
    });
    let path = dir.join("report.json");
    let text = serde_json::to_string_pretty(&meta).map_err(|e| Error::Internal(e.to_string()))?;
    fs::write(&path, text + "\n").map_err(|e| Error::io(&path, e))
}

/// Reads final rows from a sweep directory or a `finals.csv` path.
pub fn read_finals(path: &Path) -> Result<Vec<FinalRow>> {
    let file = if path.is_dir() {
        path.join("finals.csv")
    } else {
        path.to_path_buf()
    };
    let text = fs::read_to_string(&file).map_err(|e| Error::io(&file, e))?;
    if text.trim().is_empty() {
        return Ok(Vec::new());
    }
    let mut r = csv::Reader::from_reader(text.as_bytes());
    r.deserialize()
        .collect::<std::result::Result<Vec<FinalRow>, _>>()
        .map_err(csv_err(&file))
}

/// `report`: the text printed by `cg report`.
pub fn report(path: &Path) -> Result<String> {
    let rows = read_finals(path)?;
    if rows.is_empty() {
        return Ok("no data\n".to_string());
    }
    Ok(summarize(&rows).iter().map(|s| format!("{s}\n")).collect())
}

/// A state reached from the initial state by up to `4n` uniform random
/// proposals; feasible and singleton-closed by construction.
pub fn random_reachable_state(game: &TUGame, seed: u64) -> Result<EnvironmentState> {
    let config = DynamicsConfig::default().with_seed(seed);
    let mut state = init_state(game, &config)?;
    let mut rng = RunRng::new(seed);
    let steps = rng.activation.gen_range(0..=4 * game.n_players());
    for _ in 0..steps {
        let p = sample_uniform(game.n_players(), &mut rng);
        apply_proposal_exact(game, &mut state, p)?;
    }
    Ok(state)
}

/// State as JSON with 1-based coalitions.
pub fn state_json(game: &TUGame, state: &EnvironmentState) -> serde_json::Value {
    let delta = game.delta();
    serde_json::json!({
        "aspirations": state.aspirations().as_slice().iter().map(|v| delta.to_json(*v)).collect::<Vec<_>>(),
        "structure": state.structure().coalitions().iter().map(|c| c.players().map(|i| i + 1).collect::<Vec<_>>()).collect::<Vec<_>>(),
    })
}

/// Witness as JSON: allocation and partition blocks (1-based).
pub fn witness_json(game: &TUGame, witness: &CoreWitness) -> serde_json::Value {
    let delta = game.delta();
    serde_json::json!({
        "allocation": witness.allocation.as_slice().iter().map(|v| delta.to_json(*v)).collect::<Vec<_>>(),
        "partition": witness.partition.blocks().iter().map(|c| c.players().map(|i| i + 1).collect::<Vec<_>>()).collect::<Vec<_>>(),
    })
}

/// Builds a steering sequence from a random reachable state and replays it
/// through the dynamics. Any disagreement between the replay and the
/// predicted states is an internal error.
pub fn steer(game: &TUGame, seed: u64) -> Result<serde_json::Value> {
    let start = random_reachable_state(game, seed)?;
    let Some(witness) = core_witness(game)? else {
        return Ok(serde_json::json!({ "start": state_json(game, &start), "core": "EMPTY CORE" }));
    };
    let seq = build_steering_sequence(game, &start, &witness)?;
    let mut state = start.clone();
    for (k, p) in seq.proposals.iter().enumerate() {
        apply_proposal_exact(game, &mut state, *p)?;
        if state != seq.states[k] {
            return Err(Error::Internal(format!(
                "replay diverged from the prediction at step {}",
                k + 1
            )));
        }
    }
    let partition = state
        .structure()
        .to_partition()
        .ok_or_else(|| Error::Internal("steered state is not a partition".into()))?;
    if !is_core_solution(game, state.aspirations(), &partition)? {
        return Err(Error::Internal("steered state is not a core solution".into()));
    }
    Ok(serde_json::json!({
        "start": state_json(game, &start),
        "witness": witness_json(game, &witness),
        "proposals": seq.proposals.iter().map(|p| serde_json::json!({
            "proposer": p.proposer() + 1,
            "coalition": p.coalition().players().map(|i| i + 1).collect::<Vec<_>>(),
        })).collect::<Vec<_>>(),
        "stage_boundary": seq.stage_boundary,
        "final": state_json(game, &state),
        "verified": true,
    }))
}
