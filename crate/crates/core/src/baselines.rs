//! Best-reply baselines (reconstructed).
//!
//! Agents keep a public demand and see the global coalition structure. Each
//! round every mover activates independently; an activated agent looks for
//! the coalition `S ∋ i` (other than its current one) maximising its residual
//! `v(S) − Σ_{j∈S∖{i}} d_j` and joins it when that strictly beats its current
//! payoff. The experimentation variants let an agent with no improving move
//! nudge its demand by ±δ instead.
//!
//! These follow a prose description of the published algorithms, not their
//! original code, and exist for comparison sweeps only.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rand::Rng;

use crate::coalition::{all_coalitions, Coalition, Player};
use crate::error::{Error, Result};
use crate::game::{Allocation, CoalitionStructure, TUGame};
use crate::grid::GridValue;
use crate::rng::RunRng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BestReplyVariant {
    /// No experimentation.
    Plain,
    /// Experiment with ±δ, clamped at the singleton value.
    ExperimentA,
    /// Experiment only towards demands some coalition can still meet.
    ExperimentB,
}

impl BestReplyVariant {
    pub fn label(self) -> &'static str {
        match self {
            BestReplyVariant::Plain => "BR",
            BestReplyVariant::ExperimentA => "BRExp-A",
            BestReplyVariant::ExperimentB => "BRExp-B",
        }
    }
}

impl fmt::Display for BestReplyVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for BestReplyVariant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "BR" => Ok(BestReplyVariant::Plain),
            "BRExp-A" => Ok(BestReplyVariant::ExperimentA),
            "BRExp-B" => Ok(BestReplyVariant::ExperimentB),
            _ => Err(Error::validation(format!("unknown best-reply variant {s:?}"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct BestReplyConfig {
    pub experimentation_probability: f64,
    pub activation_probability: f64,
    pub variant: BestReplyVariant,
    pub rng_seed: u64,
}

impl Default for BestReplyConfig {
    fn default() -> Self {
        BestReplyConfig {
            experimentation_probability: 0.05,
            activation_probability: 0.1,
            variant: BestReplyVariant::Plain,
            rng_seed: 0,
        }
    }
}

impl BestReplyConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, p) in [
            ("experimentation", self.experimentation_probability),
            ("activation", self.activation_probability),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::validation(format!("{name} probability {p} outside [0, 1]")));
            }
        }
        Ok(())
    }
}

/// Demands plus the global coalition structure.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DemandState {
    demands: Allocation,
    structure: CoalitionStructure,
}

impl DemandState {
    /// Demands at the singleton values, nobody in a coalition.
    pub fn initial(game: &TUGame) -> DemandState {
        DemandState {
            demands: Allocation::singleton_values(game),
            structure: CoalitionStructure::empty(game.n_players()),
        }
    }

    pub fn new(demands: Allocation, structure: CoalitionStructure) -> Result<DemandState> {
        if demands.len() != structure.len() {
            return Err(Error::validation("demand vector and structure differ in length"));
        }
        Ok(DemandState { demands, structure })
    }

    pub fn demands(&self) -> &Allocation {
        &self.demands
    }

    pub fn structure(&self) -> &CoalitionStructure {
        &self.structure
    }

    /// Realised payoff: the demand inside a formed coalition, the singleton
    /// value otherwise.
    pub fn payoff(&self, game: &TUGame, i: Player) -> GridValue {
        match self.structure.of(i) {
            Some(_) => self.demands.get(i),
            None => game.singleton_value(i),
        }
    }

    /// Sum of realised payoffs; this is what the relative-welfare curves
    /// report for the baselines.
    pub fn total_payoff(&self, game: &TUGame) -> GridValue {
        (0..game.n_players()).map(|i| self.payoff(game, i)).sum()
    }

    fn free_members(&mut self, c: Coalition) {
        for k in c.players() {
            self.structure.set(k, None);
        }
    }

    /// Forms `s` with `i`'s demand set to `demand`, freeing members of any
    /// coalition that overlaps `s`.
    fn form(&mut self, i: Player, s: Coalition, demand: GridValue) {
        for j in s.players() {
            if let Some(old) = self.structure.of(j) {
                self.free_members(old.difference(s));
            }
        }
        for j in s.players() {
            self.structure.set(j, Some(s));
        }
        self.demands.set(i, demand);
    }
}

/// Whether the worthless coalitions can be skipped when scanning for an
/// improvement of agent `i` (they can when nobody demands below zero and
/// `i`'s current payoff is nonnegative).
fn support_suffices(state: &DemandState, floor: GridValue) -> bool {
    state.demands.min_payoff() >= GridValue::ZERO && floor >= GridValue::ZERO
}

/// Best response of `i`: the coalition with the largest residual strictly
/// above `i`'s current payoff (smallest mask on ties).
pub fn best_response(game: &TUGame, state: &DemandState, i: Player) -> Result<Option<(Coalition, GridValue)>> {
    let current = state.payoff(game, i);
    let formed = state.structure.of(i);
    let residual = |s: Coalition| game.value(s) - state.demands.sum_over(s.without(i));
    let mut best: Option<(Coalition, GridValue)> = None;
    let mut consider = |s: Coalition| {
        if Some(s) == formed {
            return;
        }
        let r = residual(s);
        if r > current && best.is_none_or(|(_, br)| r > br) {
            best = Some((s, r));
        }
    };
    if support_suffices(state, current) {
        let single = Coalition::singleton(i);
        let mut singleton_seen = false;
        for (s, _) in game.support().filter(|(s, _)| s.contains(i)) {
            if !singleton_seen && s > single {
                consider(single);
            }
            singleton_seen |= s >= single;
            consider(s);
        }
        if !singleton_seen {
            consider(single);
        }
    } else {
        game.require_exhaustive("best-response search")?;
        for s in all_coalitions(game.n_players()).filter(|s| s.contains(i)) {
            consider(s);
        }
    }
    Ok(best)
}

/// Whether some coalition containing `i` stays within its value when `i`
/// demands `demand`.
fn feasible_coalition_exists(game: &TUGame, state: &DemandState, i: Player, demand: GridValue) -> Result<bool> {
    if demand <= game.singleton_value(i) {
        return Ok(true);
    }
    let fits = |s: Coalition| state.demands.sum_over(s.without(i)) + demand <= game.value(s);
    let singles_nonneg = (0..game.n_players()).all(|j| game.singleton_value(j) >= GridValue::ZERO);
    if state.demands.min_payoff() >= GridValue::ZERO && singles_nonneg {
        Ok(game.support().any(|(s, _)| s.contains(i) && fits(s)))
    } else {
        game.require_exhaustive("feasible-demand search")?;
        Ok(all_coalitions(game.n_players()).any(|s| s.contains(i) && fits(s)))
    }
}

/// What one activated agent did.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Activation {
    pub round: u64,
    pub agent: Player,
    /// Coalition joined, if any.
    pub joined: Option<Coalition>,
    pub experimented: bool,
    pub demand_delta: GridValue,
    pub total_payoff: GridValue,
    pub num_formed_coalitions: usize,
}

/// Processes agent `i`'s activation. Experimentation only happens when
/// `experiment` is set and no improving coalition exists.
pub fn activate<R: Rng + ?Sized>(
    game: &TUGame,
    state: &mut DemandState,
    config: &BestReplyConfig,
    i: Player,
    experiment: bool,
    rng: &mut R,
) -> Result<Activation> {
    let before = state.demands.get(i);
    let mut joined = None;
    let mut experimented = false;
    if let Some((s, r)) = best_response(game, state, i)? {
        state.form(i, s, r);
        joined = Some(s);
    } else if experiment
        && config.variant != BestReplyVariant::Plain
        && rng.gen_bool(config.experimentation_probability)
    {
        let floor = game.singleton_value(i);
        let up = before + GridValue::STEP;
        let down = (before - GridValue::STEP).max(floor);
        let target = match config.variant {
            BestReplyVariant::ExperimentA => Some(if rng.gen_bool(0.5) { up } else { down }),
            _ => {
                let mut options = Vec::with_capacity(2);
                for d in [up, down] {
                    if d != before && feasible_coalition_exists(game, state, i, d)? {
                        options.push(d);
                    }
                }
                match options.len() {
                    0 => None,
                    1 => Some(options[0]),
                    _ => Some(options[usize::from(rng.gen_bool(0.5))]),
                }
            }
        };
        if let Some(d) = target {
            experimented = true;
            state.demands.set(i, d);
            if let Some(c) = state.structure.of(i) {
                if state.demands.sum_over(c) > game.value(c) {
                    state.free_members(c);
                }
            }
        }
    }
    Ok(Activation {
        round: 0,
        agent: i,
        joined,
        experimented,
        demand_delta: state.demands.get(i) - before,
        total_payoff: state.total_payoff(game),
        num_formed_coalitions: state.structure.coalitions().len(),
    })
}

fn round<R: Rng + ?Sized>(
    game: &TUGame,
    state: &mut DemandState,
    config: &BestReplyConfig,
    movers: Coalition,
    experiment: bool,
    activation: &mut R,
    experimentation: &mut R,
) -> Result<Vec<Activation>> {
    config.validate()?;
    // draw every activation first, then process in ascending index order
    let active: Vec<Player> = movers
        .players()
        .filter(|_| activation.gen_bool(config.activation_probability))
        .collect();
    active
        .into_iter()
        .map(|i| activate(game, state, config, i, experiment, experimentation))
        .collect()
}

/// `best_reply_step`: one round of plain best reply (experimentation off
/// regardless of the configured variant).
pub fn best_reply_step(
    game: &TUGame,
    state: &mut DemandState,
    config: &BestReplyConfig,
    movers: Coalition,
    rng: &mut RunRng,
) -> Result<Vec<Activation>> {
    round(game, state, config, movers, false, &mut rng.activation, &mut rng.subset)
}

/// `best_reply_experimentation_step`: one round with the configured variant's
/// experimentation rule.
pub fn best_reply_experimentation_step(
    game: &TUGame,
    state: &mut DemandState,
    config: &BestReplyConfig,
    movers: Coalition,
    rng: &mut RunRng,
) -> Result<Vec<Activation>> {
    round(game, state, config, movers, true, &mut rng.activation, &mut rng.subset)
}

/// Whether no mover has an improving coalition.
pub fn is_rest_point(game: &TUGame, state: &DemandState, movers: Coalition) -> Result<bool> {
    for i in movers.players() {
        if best_response(game, state, i)?.is_some() {
            return Ok(false);
        }
    }
    Ok(true)
}

#[derive(Debug, Clone)]
pub struct BaselineOutcome {
    pub final_state: DemandState,
    /// Total realised payoff after each round, starting with round 0.
    pub totals: Vec<GridValue>,
    pub events: Vec<Activation>,
    /// Round at which a plain run was found at rest.
    pub rest_round: Option<u64>,
}

/// Runs a baseline for `horizon` rounds. Plain best reply stops once a rest
/// point is detected (checked every `check_every` rounds).
pub fn run_baseline(
    game: &TUGame,
    config: &BestReplyConfig,
    movers: Coalition,
    horizon: u64,
    check_every: u64,
) -> Result<BaselineOutcome> {
    config.validate()?;
    let mut rng = RunRng::new(config.rng_seed);
    let mut state = DemandState::initial(game);
    let mut totals = vec![state.total_payoff(game)];
    let mut events = Vec::new();
    let mut rest_round = None;
    let plain = config.variant == BestReplyVariant::Plain;
    for r in 1..=horizon {
        if plain && (r - 1) % check_every.max(1) == 0 && is_rest_point(game, &state, movers)? {
            rest_round = Some(r - 1);
            break;
        }
        let acts = if plain {
            best_reply_step(game, &mut state, config, movers, &mut rng)?
        } else {
            best_reply_experimentation_step(game, &mut state, config, movers, &mut rng)?
        };
        events.extend(acts.into_iter().map(|mut a| {
            a.round = r;
            a
        }));
        totals.push(state.total_payoff(game));
    }
    Ok(BaselineOutcome {
        final_state: state,
        totals,
        events,
        rest_round,
    })
}

/// `relative_welfare`: total aspirations (or payoffs) over the optimum.
pub fn relative_welfare(total: GridValue, optimal: GridValue) -> Result<f64> {
    if optimal == GridValue::ZERO {
        return Err(Error::UndefinedRatio);
    }
    Ok(total.steps() as f64 / optimal.steps() as f64)
}

/// Baseline trace CSV, same columns as the dynamics trace plus a leading
/// `algorithm` column. One row per activation.
pub fn write_baseline_trace_csv<W: Write>(
    game: &TUGame,
    variant: BestReplyVariant,
    events: &[Activation],
    out: W,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| Error::Internal(format!("writing trace: {e}"));
    let delta = game.delta();
    w.write_record([
        "algorithm",
        "round",
        "proposer",
        "coalition",
        "success",
        "aspiration_delta",
        "total_aspiration",
        "num_formed_coalitions",
    ])
    .map_err(io)?;
    for e in events {
        w.write_record([
            variant.label().to_string(),
            e.round.to_string(),
            (e.agent + 1).to_string(),
            e.joined.map(|c| c.to_one_based("|")).unwrap_or_default(),
            e.joined.is_some().to_string(),
            delta.format(e.demand_delta),
            delta.format(e.total_payoff),
            e.num_formed_coalitions.to_string(),
        ])
        .map_err(io)?;
    }
    w.flush().map_err(|e| Error::Internal(format!("writing trace: {e}")))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::g3c;
    use rand::rngs::mock::StepRng;

    fn c(ps: &[Player]) -> Coalition {
        Coalition::from_players(ps.iter().copied())
    }

    #[test]
    fn single_activation_picks_largest_residual() {
        let g = g3c();
        let mut s = DemandState::initial(&g);
        let cfg = BestReplyConfig::default();
        let a = activate(&g, &mut s, &cfg, 0, false, &mut StepRng::new(0, 1)).unwrap();
        assert_eq!(a.joined, Some(c(&[0, 1, 2])));
        assert_eq!(s.demands().get(0), GridValue(3));
        assert_eq!(s.structure().of(2), Some(c(&[0, 1, 2])));
    }

    #[test]
    fn no_improvement_leaves_state_unchanged() {
        let g = g3c();
        let s0 = DemandState::new(
            Allocation::from_steps(&[1, 1, 1]),
            CoalitionStructure::from_coalitions(3, &[c(&[0, 1, 2])]).unwrap(),
        )
        .unwrap();
        let mut s = s0.clone();
        let cfg = BestReplyConfig::default();
        for i in 0..3 {
            activate(&g, &mut s, &cfg, i, false, &mut StepRng::new(0, 1)).unwrap();
        }
        assert_eq!(s, s0);
    }

    #[test]
    fn simultaneous_activations_run_in_index_order() {
        let g = g3c();
        let mut s = DemandState::initial(&g);
        let cfg = BestReplyConfig {
            activation_probability: 1.0,
            ..Default::default()
        };
        let mut rng = RunRng::new(0);
        let acts = best_reply_step(&g, &mut s, &cfg, c(&[0, 1]), &mut rng).unwrap();
        assert_eq!(acts.iter().map(|a| a.agent).collect::<Vec<_>>(), vec![0, 1]);
        // agent 1 grabs N with demand 3; agent 2 then takes {2,3} with residual 2 > 0
        assert_eq!(acts[0].joined, Some(c(&[0, 1, 2])));
        assert_eq!(acts[1].joined, Some(c(&[1, 2])));
        assert_eq!(s.structure().of(0), None);
    }

    #[test]
    fn variant_a_experiment_moves_by_one_step() {
        let g = g3c();
        let start = DemandState::new(
            Allocation::from_steps(&[1, 1, 1]),
            CoalitionStructure::from_coalitions(3, &[c(&[0, 1, 2])]).unwrap(),
        )
        .unwrap();
        let cfg = BestReplyConfig {
            experimentation_probability: 1.0,
            variant: BestReplyVariant::ExperimentA,
            ..Default::default()
        };
        let mut rng = RunRng::new(9);
        for _ in 0..20 {
            let mut s = start.clone();
            let a = activate(&g, &mut s, &cfg, 0, true, &mut rng.subset).unwrap();
            assert!(a.experimented);
            assert_eq!(a.demand_delta.abs(), GridValue(1));
        }
    }

    #[test]
    fn variant_b_skips_when_no_feasible_demand() {
        // v({1}) = 0, v({1,2}) = 1, partner demands 5: raising 1's demand fits nowhere
        let g = TUGame::from_integers(2, &[(&[0, 1], 1)]).unwrap();
        let s0 = DemandState::new(Allocation::from_steps(&[0, 5]), CoalitionStructure::empty(2)).unwrap();
        let cfg = BestReplyConfig {
            experimentation_probability: 1.0,
            variant: BestReplyVariant::ExperimentB,
            ..Default::default()
        };
        let mut s = s0.clone();
        let a = activate(&g, &mut s, &cfg, 0, true, &mut RunRng::new(1).subset).unwrap();
        assert!(!a.experimented);
        assert_eq!(s, s0);
    }

    #[test]
    fn experimentation_gated_by_improvement() {
        let g = g3c();
        let cfg = BestReplyConfig {
            experimentation_probability: 1.0,
            variant: BestReplyVariant::ExperimentA,
            ..Default::default()
        };
        let mut with = DemandState::initial(&g);
        let mut without = DemandState::initial(&g);
        let a = activate(&g, &mut with, &cfg, 0, true, &mut RunRng::new(1).subset).unwrap();
        activate(
            &g,
            &mut without,
            &BestReplyConfig::default(),
            0,
            false,
            &mut RunRng::new(1).subset,
        )
        .unwrap();
        assert!(!a.experimented);
        assert_eq!(with, without);
    }

    #[test]
    fn relative_welfare_examples() {
        assert_eq!(relative_welfare(GridValue(3), GridValue(3)).unwrap(), 1.0);
        assert_eq!(relative_welfare(GridValue(0), GridValue(3)).unwrap(), 0.0);
        assert!(matches!(
            relative_welfare(GridValue(1), GridValue(0)),
            Err(Error::UndefinedRatio)
        ));
    }

    #[test]
    fn variant_labels_round_trip() {
        for v in [
            BestReplyVariant::Plain,
            BestReplyVariant::ExperimentA,
            BestReplyVariant::ExperimentB,
        ] {
            assert_eq!(v.label().parse::<BestReplyVariant>().unwrap(), v);
        }
        assert!("BRExp-C".parse::<BestReplyVariant>().is_err());
    }
}
