//! The Coalition Proposal dynamics.
//!
//! Each round one player is activated and proposes a coalition `J ∋ i`. The
//! proposal succeeds when `Σ_{j∈J} a_j + δ ≤ v(J)`: the proposer raises its
//! aspiration by δ, every coalition that shared a member with `J` is broken,
//! and `J` is formed. On failure a free proposer above its singleton value
//! lowers its aspiration by δ. Afterwards any free player sitting at its
//! singleton value is bound to its own singleton coalition.
//!
//! Message drops only affect *beliefs*: the ground-truth structure is always
//! exact, but a player whose dissolution notice was lost still believes it is
//! in its old coalition and therefore does not lower its aspiration after a
//! failed proposal. Membership notices for a newly formed coalition are
//! reliable, so joining a coalition corrects a stale belief.

use std::io::Write;
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::coalition::{Coalition, Player};
use crate::error::{Error, Result};
use crate::game::{
    first_blocking_coalition, is_feasible_state, Allocation, CoalitionStructure, EnvironmentState, TUGame,
};
use crate::grid::GridValue;
use crate::rng::RunRng;

/// Player `proposer` proposes to form `coalition` (which contains it).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Proposal {
    proposer: Player,
    coalition: Coalition,
}

impl Proposal {
    pub fn new(proposer: Player, coalition: Coalition) -> Result<Proposal> {
        if !coalition.contains(proposer) {
            return Err(Error::validation(format!(
                "proposer {} not in proposed coalition {coalition}",
                proposer + 1
            )));
        }
        Ok(Proposal { proposer, coalition })
    }

    /// `J = S ∪ {i}`.
    pub fn with_partners(proposer: Player, partners: Coalition) -> Proposal {
        Proposal {
            proposer,
            coalition: partners.with(proposer),
        }
    }

    pub fn proposer(&self) -> Player {
        self.proposer
    }

    pub fn coalition(&self) -> Coalition {
        self.coalition
    }
}

/// Draws the proposal made in one round.
pub trait ProposalSampler {
    fn sample(&self, state: &EnvironmentState, rng: &mut RunRng) -> Proposal;
}

/// Activates a player uniformly and proposes a uniformly random subset of the
/// other players (the empty subset yields the self-proposal `{i}`).
#[derive(Debug, Clone, Copy)]
pub struct UniformProposals {
    n: usize,
}

impl UniformProposals {
    pub fn new(n: usize) -> UniformProposals {
        UniformProposals { n }
    }
}

impl ProposalSampler for UniformProposals {
    fn sample(&self, _state: &EnvironmentState, rng: &mut RunRng) -> Proposal {
        sample_uniform(self.n, rng)
    }
}

/// `sample_proposal` under the uniform policy.
pub fn sample_uniform(n: usize, rng: &mut RunRng) -> Proposal {
    let i = rng.activation.gen_range(0..n);
    let bits: u64 = rng.subset.gen();
    let others = if n == 1 { 0 } else { bits & (u64::MAX >> (64 - (n - 1))) };
    // spread n-1 random bits over every position except i
    let low = others & ((1u64 << i) - 1);
    let high = if i + 1 >= 64 { 0 } else { (others >> i) << (i + 1) };
    Proposal::with_partners(i, Coalition::from_mask(low | high))
}

/// Initial aspiration vector.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum InitialAspirations {
    /// `a_i⁰ = v({i})`.
    #[default]
    SingletonValues,
    Explicit(Allocation),
}

#[derive(Debug, Clone)]
pub struct DynamicsConfig {
    pub horizon: u64,
    pub initial: InitialAspirations,
    pub seed: u64,
    /// Probability that a dissolution notice is lost.
    pub drop_probability: f64,
    pub stop_on_absorption: bool,
    /// Rounds between absorption checks; `None` picks 1 for `n ≤ 12` and 100
    /// otherwise.
    pub absorption_check_every: Option<u64>,
}

impl Default for DynamicsConfig {
    fn default() -> Self {
        DynamicsConfig {
            horizon: 100_000,
            initial: InitialAspirations::SingletonValues,
            seed: 0,
            drop_probability: 0.0,
            stop_on_absorption: true,
            absorption_check_every: None,
        }
    }
}

impl DynamicsConfig {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_horizon(mut self, horizon: u64) -> Self {
        self.horizon = horizon;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.drop_probability) {
            return Err(Error::validation(format!(
                "drop probability {} outside [0, 1]",
                self.drop_probability
            )));
        }
        if self.absorption_check_every == Some(0) {
            return Err(Error::validation("absorption check interval must be positive"));
        }
        Ok(())
    }

    fn check_interval(&self, n: usize) -> u64 {
        self.absorption_check_every.unwrap_or(if n <= 12 { 1 } else { 100 })
    }
}

/// One round of the dynamics.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StepRecord {
    pub round: u64,
    pub proposal: Proposal,
    pub success: bool,
    /// Change of the proposer's aspiration: `+δ`, `−δ` or 0.
    pub aspiration_delta: GridValue,
    pub total_aspiration: GridValue,
    /// Previously formed coalitions replaced by the new one.
    pub dissolved: Vec<Coalition>,
    /// Players whose dissolution notice was lost this round.
    pub dropped_notices: Vec<Player>,
    pub num_formed_coalitions: usize,
}

/// Ground truth plus each player's belief about its own coalition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BeliefState {
    true_state: EnvironmentState,
    believed: Vec<Option<Coalition>>,
}

impl BeliefState {
    /// Beliefs initialised to the true structure.
    pub fn new(state: EnvironmentState) -> BeliefState {
        let believed = state.structure().as_slice().to_vec();
        BeliefState {
            true_state: state,
            believed,
        }
    }

    pub fn state(&self) -> &EnvironmentState {
        &self.true_state
    }

    pub fn into_state(self) -> EnvironmentState {
        self.true_state
    }

    pub fn believed(&self, i: Player) -> Option<Coalition> {
        self.believed[i]
    }

    /// Players whose belief differs from the truth.
    pub fn stale_players(&self) -> Coalition {
        (0..self.believed.len())
            .filter(|&i| self.believed[i] != self.true_state.structure().of(i))
            .collect()
    }
}

/// `init_state`: initial aspirations (default `v({i})`), everyone free, then
/// the singleton rule.
pub fn init_state(game: &TUGame, config: &DynamicsConfig) -> Result<EnvironmentState> {
    config.validate()?;
    let n = game.n_players();
    let a = match &config.initial {
        InitialAspirations::SingletonValues => Allocation::singleton_values(game),
        InitialAspirations::Explicit(a) => {
            if a.len() != n {
                return Err(Error::validation(format!(
                    "initial aspirations have length {}, game has {n} players",
                    a.len()
                )));
            }
            if let Some(i) = (0..n).find(|&i| a.get(i) < game.singleton_value(i)) {
                return Err(Error::validation(format!(
                    "initial aspiration of player {} is below v({{{}}})",
                    i + 1,
                    i + 1
                )));
            }
            a.clone()
        }
    };
    let mut state = EnvironmentState::new(a, CoalitionStructure::empty(n))?;
    state.close_singletons(game);
    Ok(state)
}

/// Initial aspirations given as real numbers; fails if any is off the grid.
pub fn aspirations_from_reals(game: &TUGame, reals: &[num_rational::Ratio<i64>]) -> Result<Allocation> {
    reals
        .iter()
        .enumerate()
        .map(|(i, r)| {
            game.delta().to_grid(*r).ok_or_else(|| {
                Error::validation(format!("initial aspiration {r} of player {} is off the δ-grid", i + 1))
            })
        })
        .collect::<Result<Vec<_>>>()
        .map(Allocation::new)
}

/// `apply_proposal`: one round of the dynamics on a belief state.
pub fn apply_proposal<R: Rng + ?Sized>(
    game: &TUGame,
    belief: &mut BeliefState,
    proposal: Proposal,
    drops: &mut R,
    drop_probability: f64,
    round: u64,
) -> Result<StepRecord> {
    if !proposal.coalition.is_subset_of(game.grand()) {
        return Err(Error::validation(format!(
            "proposal {} outside the player set",
            proposal.coalition
        )));
    }
    if !is_feasible_state(game, &belief.true_state)? {
        return Err(Error::validation("apply_proposal requires a feasible state"));
    }
    let i = proposal.proposer;
    let joint = proposal.coalition;
    let state = &mut belief.true_state;
    let before = state.aspirations().get(i);

    let sum = state.aspirations().sum_over(joint);
    let success = sum + GridValue::STEP <= game.value(joint);
    let mut dissolved = Vec::new();
    let mut dropped = Vec::new();

    if success {
        state.aspirations_mut().set(i, before + GridValue::STEP);
        // break old coalitions of everyone in J
        for j in joint.players() {
            let Some(old) = state.structure().of(j) else { continue };
            if old == joint {
                continue;
            }
            if !dissolved.contains(&old) {
                dissolved.push(old);
            }
            for k in old.difference(joint).players() {
                if state.structure().of(k).is_none() {
                    continue;
                }
                state.structure_mut().set(k, None);
                if drop_probability > 0.0 && drops.gen_bool(drop_probability) {
                    dropped.push(k);
                } else {
                    belief.believed[k] = None;
                }
            }
        }
        for j in joint.players() {
            state.structure_mut().set(j, Some(joint));
            belief.believed[j] = Some(joint);
        }
    } else if belief.believed[i].is_none() && before > game.singleton_value(i) {
        state.aspirations_mut().set(i, before - GridValue::STEP);
    }

    let bound = state.close_singletons(game);
    for k in bound.players() {
        if belief.believed[k].is_none() {
            belief.believed[k] = Some(Coalition::singleton(k));
        }
    }

    dissolved.sort();
    dropped.sort_unstable();
    Ok(StepRecord {
        round,
        proposal,
        success,
        aspiration_delta: state.aspirations().get(i) - before,
        total_aspiration: state.aspirations().total(),
        dissolved,
        dropped_notices: dropped,
        num_formed_coalitions: state.structure().coalitions().len(),
    })
}

/// One round with reliable messages, applied directly to a state.
pub fn apply_proposal_exact(game: &TUGame, state: &mut EnvironmentState, proposal: Proposal) -> Result<StepRecord> {
    let mut belief = BeliefState::new(state.clone());
    let record = apply_proposal(
        game,
        &mut belief,
        proposal,
        &mut rand::rngs::mock::StepRng::new(0, 0),
        0.0,
        0,
    )?;
    *state = belief.into_state();
    Ok(record)
}

/// `is_absorbing`: no coalition can be formed (`Σ a_S + δ > v(S)` for all
/// `S`) and every free player already sits at its singleton value.
pub fn is_absorbing(game: &TUGame, state: &EnvironmentState) -> Result<bool> {
    let structure = state.structure();
    let a = state.aspirations();
    if (0..game.n_players()).any(|i| structure.of(i).is_none() && a.get(i) != game.singleton_value(i)) {
        return Ok(false);
    }
    Ok(first_blocking_coalition(game, a)?.is_none())
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub initial: EnvironmentState,
    pub final_state: EnvironmentState,
    pub trace: Vec<StepRecord>,
    /// Whether the final state is absorbing.
    pub absorbed: bool,
    /// Rounds actually executed.
    pub rounds: u64,
    /// Players holding a stale coalition belief at the end.
    pub stale_beliefs: Coalition,
}

/// `run` with the uniform proposal policy.
pub fn run(game: &TUGame, config: &DynamicsConfig) -> Result<RunOutcome> {
    run_with_sampler(game, config, &UniformProposals::new(game.n_players()))
}

/// Executes up to `config.horizon` rounds, stopping early at an absorbing
/// state when configured to. Deterministic given the seed.
pub fn run_with_sampler<P: ProposalSampler + ?Sized>(
    game: &TUGame,
    config: &DynamicsConfig,
    sampler: &P,
) -> Result<RunOutcome> {
    let initial = init_state(game, config)?;
    let mut rng = RunRng::new(config.seed);
    let mut belief = BeliefState::new(initial.clone());
    let mut trace = Vec::new();
    let every = config.check_interval(game.n_players());
    let mut absorbed = false;
    let mut round = 0;
    while round < config.horizon {
        if config.stop_on_absorption && round % every == 0 && is_absorbing(game, belief.state())? {
            absorbed = true;
            break;
        }
        round += 1;
        let p = sampler.sample(belief.state(), &mut rng);
        let rec = apply_proposal(game, &mut belief, p, &mut rng.drops, config.drop_probability, round)?;
        trace.push(rec);
    }
    if !absorbed {
        absorbed = is_absorbing(game, belief.state())?;
    }
    let stale_beliefs = belief.stale_players();
    Ok(RunOutcome {
        initial,
        final_state: belief.into_state(),
        trace,
        absorbed,
        rounds: round,
        stale_beliefs,
    })
}

/// Header of the trace CSV.
pub const TRACE_HEADER: [&str; 7] = [
    "round",
    "proposer",
    "coalition",
    "success",
    "aspiration_delta",
    "total_aspiration",
    "num_formed_coalitions",
];

/// Writes the trace CSV (1-based players, `|`-separated coalition lists,
/// real-valued aspirations).
pub fn write_trace_csv<W: Write>(game: &TUGame, trace: &[StepRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let delta = game.delta();
    let io = |e: csv::Error| Error::Internal(format!("writing trace: {e}"));
    w.write_record(TRACE_HEADER).map_err(io)?;
    for r in trace {
        w.write_record([
            r.round.to_string(),
            (r.proposal.proposer + 1).to_string(),
            r.proposal.coalition.to_one_based("|"),
            r.success.to_string(),
            delta.format(r.aspiration_delta),
            delta.format(r.total_aspiration),
            r.num_formed_coalitions.to_string(),
        ])
        .map_err(io)?;
    }
    w.flush().map_err(|e| Error::Internal(format!("writing trace: {e}")))?;
    Ok(())
}

/// Final-state file contents.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FinalStateFile {
    pub aspirations: Vec<serde_json::Value>,
    pub structure: Vec<Vec<usize>>,
    pub absorbed: bool,
    pub rounds: u64,
}

impl FinalStateFile {
    pub fn from_outcome(game: &TUGame, outcome: &RunOutcome) -> FinalStateFile {
        let delta = game.delta();
        FinalStateFile {
            aspirations: outcome
                .final_state
                .aspirations()
                .as_slice()
                .iter()
                .map(|v| delta.to_json(*v))
                .collect(),
            structure: outcome
                .final_state
                .structure()
                .coalitions()
                .into_iter()
                .map(|c| c.players().map(|i| i + 1).collect())
                .collect(),
            absorbed: outcome.absorbed,
            rounds: outcome.rounds,
        }
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self).map_err(|e| Error::Internal(e.to_string()))?;
        std::fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
    }
}
