//! Multi-agent task allocation as a TU game.
//!
//! Players are `m` agents followed by `n_tasks` tasks. A coalition has value
//! only if it holds exactly one task `t`, at least one agent, and the agents'
//! features cover `t`'s requirements; the value is then
//! `max(0, W(t) − Σ_a ‖L_a − L_t‖₁)`. Tasks never propose and keep
//! aspiration 0.
//!
//! Feature sets are bitmasks (`k ≤ 32`). All values are integers, so the
//! game lives on the unit grid.

use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::coalition::{Coalition, Player};
use crate::dynamics::{Proposal, ProposalSampler};
use crate::error::{Error, Result};
use crate::game::{is_core_solution, Allocation, EnvironmentState, PlayerPartition, TUGame};
use crate::grid::{Delta, GridValue};
use crate::oracle::CoreWitness;
use crate::rng::RunRng;

/// Largest agent count for the subset-mask solvers.
pub const MAX_DP_AGENTS: usize = 16;
/// Largest agent count for building the explicit game.
pub const MAX_GAME_AGENTS: usize = 20;
pub const MAX_FEATURES: usize = 32;
pub const DEFAULT_MAX_AGENTS_PER_PROPOSAL: usize = 4;

/// Generator parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ScenarioParams {
    pub m: usize,
    pub n_tasks: usize,
    pub k: usize,
    pub grid_size: i64,
    pub worth_scale: i64,
}

impl ScenarioParams {
    /// 10 agents, 20 tasks, 5 features on a 9×9 grid.
    pub const FULL: ScenarioParams = ScenarioParams {
        m: 10,
        n_tasks: 20,
        k: 5,
        grid_size: 9,
        worth_scale: 3,
    };

    /// 6 agents, 8 tasks, 4 features on a 7×7 grid; small enough for exact
    /// welfare and restricted-core checks in milliseconds.
    pub const REDUCED: ScenarioParams = ScenarioParams {
        m: 6,
        n_tasks: 8,
        k: 4,
        grid_size: 7,
        worth_scale: 3,
    };

    pub fn validate(&self) -> Result<()> {
        if self.m == 0 || self.n_tasks == 0 || self.k == 0 || self.grid_size <= 0 || self.worth_scale <= 0 {
            return Err(Error::validation("scenario parameters must be positive"));
        }
        if self.k > MAX_FEATURES {
            return Err(Error::validation(format!("at most {MAX_FEATURES} features supported")));
        }
        if self.m + self.n_tasks > crate::coalition::MAX_PLAYERS {
            return Err(Error::ScaleBound {
                what: "task game",
                n: self.m + self.n_tasks,
                cap: crate::coalition::MAX_PLAYERS,
            });
        }
        Ok(())
    }
}

impl Default for ScenarioParams {
    fn default() -> Self {
        ScenarioParams::FULL
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlayerRole {
    Agent(usize),
    Task(usize),
}

/// A task-allocation instance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TaskConfig {
    pub m: usize,
    pub n_tasks: usize,
    pub k: usize,
    pub grid_size: i64,
    pub worth_scale: i64,
    /// Agent feature sets.
    pub features: Vec<u32>,
    /// Task requirement sets.
    pub requirements: Vec<u32>,
    /// Agent locations, then task locations.
    pub locations: Vec<[i64; 2]>,
    pub seed: Option<u64>,
}

/// On-disk scenario layout with 0/1 matrices.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScenarioFile {
    pub m: usize,
    pub n_tasks: usize,
    pub k: usize,
    pub grid_size: i64,
    pub worth_scale: i64,
    #[serde(rename = "Q")]
    pub q: Vec<Vec<u8>>,
    #[serde(rename = "R")]
    pub r: Vec<Vec<u8>>,
    #[serde(rename = "L")]
    pub l: Vec<[i64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

fn row_to_mask(row: &[u8], k: usize, what: &str) -> Result<u32> {
    if row.len() != k {
        return Err(Error::validation(format!(
            "{what} row has {} entries, expected {k}",
            row.len()
        )));
    }
    row.iter().enumerate().try_fold(0u32, |acc, (f, &b)| match b {
        0 => Ok(acc),
        1 => Ok(acc | (1 << f)),
        _ => Err(Error::validation(format!("{what} entries must be 0 or 1"))),
    })
}

fn mask_to_row(mask: u32, k: usize) -> Vec<u8> {
    (0..k).map(|f| ((mask >> f) & 1) as u8).collect()
}

impl TaskConfig {
    pub fn params(&self) -> ScenarioParams {
        ScenarioParams {
            m: self.m,
            n_tasks: self.n_tasks,
            k: self.k,
            grid_size: self.grid_size,
            worth_scale: self.worth_scale,
        }
    }

    pub fn n_players(&self) -> usize {
        self.m + self.n_tasks
    }

    pub fn role(&self, p: Player) -> PlayerRole {
        if p < self.m {
            PlayerRole::Agent(p)
        } else {
            PlayerRole::Task(p - self.m)
        }
    }

    pub fn agents(&self) -> Coalition {
        Coalition::grand(self.m)
    }

    pub fn tasks(&self) -> Coalition {
        Coalition::grand(self.n_players()).difference(self.agents())
    }

    pub fn task_player(&self, t: usize) -> Player {
        self.m + t
    }

    /// `W(t) = worth_scale · |R_t|`.
    pub fn worth(&self, t: usize) -> i64 {
        self.worth_scale * i64::from(self.requirements[t].count_ones())
    }

    pub fn distance(&self, agent: usize, t: usize) -> i64 {
        let [ax, ay] = self.locations[agent];
        let [tx, ty] = self.locations[self.m + t];
        (ax - tx).abs() + (ay - ty).abs()
    }

    pub fn validate(&self) -> Result<()> {
        self.params().validate()?;
        let n = self.n_players();
        if self.features.len() != self.m || self.requirements.len() != self.n_tasks || self.locations.len() != n {
            return Err(Error::validation("matrix dimensions do not match m, n_tasks"));
        }
        let all = if self.k == 32 { u32::MAX } else { (1u32 << self.k) - 1 };
        if let Some(a) = self.features.iter().position(|&q| q == 0 || q & !all != 0) {
            return Err(Error::validation(format!(
                "agent {} needs a nonempty feature set within k",
                a + 1
            )));
        }
        if self.requirements.iter().any(|&r| r & !all != 0) {
            return Err(Error::validation("requirement outside the k features"));
        }
        if let Some(p) = self
            .locations
            .iter()
            .position(|l| l.iter().any(|&c| c < 0 || c >= self.grid_size))
        {
            return Err(Error::validation(format!(
                "location of player {} outside the grid",
                p + 1
            )));
        }
        Ok(())
    }

    pub fn to_file(&self) -> ScenarioFile {
        ScenarioFile {
            m: self.m,
            n_tasks: self.n_tasks,
            k: self.k,
            grid_size: self.grid_size,
            worth_scale: self.worth_scale,
            q: self.features.iter().map(|&q| mask_to_row(q, self.k)).collect(),
            r: self.requirements.iter().map(|&r| mask_to_row(r, self.k)).collect(),
            l: self.locations.clone(),
            seed: self.seed,
        }
    }

    pub fn from_file(file: ScenarioFile) -> Result<TaskConfig> {
        let features = file
            .q
            .iter()
            .map(|r| row_to_mask(r, file.k, "Q"))
            .collect::<Result<_>>()?;
        let requirements = file
            .r
            .iter()
            .map(|r| row_to_mask(r, file.k, "R"))
            .collect::<Result<_>>()?;
        let config = TaskConfig {
            m: file.m,
            n_tasks: file.n_tasks,
            k: file.k,
            grid_size: file.grid_size,
            worth_scale: file.worth_scale,
            features,
            requirements,
            locations: file.l,
            seed: file.seed,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<TaskConfig> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let file: ScenarioFile = serde_json::from_str(&text).map_err(|e| Error::parse(path, e))?;
        TaskConfig::from_file(file).map_err(|e| match e {
            Error::Validation(msg) => Error::parse(path, msg),
            other => other,
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let text = serde_json::to_string_pretty(&self.to_file()).map_err(|e| Error::Internal(e.to_string()))?;
        std::fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
    }
}

/// `generate_config`: uniform nonempty feature and requirement sets, uniform
/// grid locations.
pub fn generate_config<R: Rng + ?Sized>(rng: &mut R, params: ScenarioParams) -> Result<TaskConfig> {
    params.validate()?;
    let sets = 1u64 << params.k;
    let draw_set = |rng: &mut R| rng.gen_range(1..sets) as u32;
    let features = (0..params.m).map(|_| draw_set(rng)).collect();
    let requirements = (0..params.n_tasks).map(|_| draw_set(rng)).collect();
    let locations = (0..params.m + params.n_tasks)
        .map(|_| [rng.gen_range(0..params.grid_size), rng.gen_range(0..params.grid_size)])
        .collect();
    Ok(TaskConfig {
        m: params.m,
        n_tasks: params.n_tasks,
        k: params.k,
        grid_size: params.grid_size,
        worth_scale: params.worth_scale,
        features,
        requirements,
        locations,
        seed: None,
    })
}

/// Deterministic generation from a seed (recorded in the config).
pub fn generate_seeded(seed: u64, params: ScenarioParams) -> Result<TaskConfig> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut config = generate_config(&mut rng, params)?;
    config.seed = Some(seed);
    Ok(config)
}

/// Value of task `t` served by the agent set `agents` (an agent mask).
pub fn assignment_value(config: &TaskConfig, t: usize, agents: Coalition) -> GridValue {
    if agents.is_empty() {
        return GridValue::ZERO;
    }
    let covered = agents.players().fold(0u32, |acc, a| acc | config.features[a]);
    if config.requirements[t] & !covered != 0 {
        return GridValue::ZERO;
    }
    let cost: i64 = agents.players().map(|a| config.distance(a, t)).sum();
    GridValue((config.worth(t) - cost).max(0))
}

/// `task_value`: value of an arbitrary player set.
pub fn task_value(config: &TaskConfig, s: Coalition) -> GridValue {
    if s.len() <= 1 {
        return GridValue::ZERO;
    }
    let tasks = s.difference(config.agents());
    if tasks.len() != 1 {
        return GridValue::ZERO;
    }
    let t = tasks.first().expect("one task") - config.m;
    assignment_value(config, t, s.intersection(config.agents()))
}

/// The explicit game (positive values only, δ = 1).
pub fn to_game(config: &TaskConfig) -> Result<TUGame> {
    config.validate()?;
    if config.m > MAX_GAME_AGENTS {
        return Err(Error::ScaleBound {
            what: "task game construction",
            n: config.m,
            cap: MAX_GAME_AGENTS,
        });
    }
    let mut values = Vec::new();
    for t in 0..config.n_tasks {
        let task = Coalition::singleton(config.task_player(t));
        for g in config.agents().subsets() {
            let v = assignment_value(config, t, g);
            if v > GridValue::ZERO {
                values.push((g.union(task), v));
            }
        }
    }
    TUGame::new(config.n_players(), Delta::ONE, values)
}

/// Positive-value proposals: an agent is activated uniformly and proposes a
/// uniformly drawn positive coalition containing it (at most `max_agents`
/// agents, exactly one task), or itself alone if it has none.
#[derive(Debug, Clone)]
pub struct PositiveProposals {
    options: Vec<Vec<Coalition>>,
}

impl PositiveProposals {
    pub fn new(config: &TaskConfig, max_agents: usize) -> Result<PositiveProposals> {
        config.validate()?;
        if config.m > MAX_GAME_AGENTS {
            return Err(Error::ScaleBound {
                what: "proposal enumeration",
                n: config.m,
                cap: MAX_GAME_AGENTS,
            });
        }
        let mut options = vec![Vec::new(); config.m];
        for g in config.agents().subsets().filter(|g| g.len() <= max_agents) {
            for t in 0..config.n_tasks {
                if assignment_value(config, t, g) > GridValue::ZERO {
                    let j = g.with(config.task_player(t));
                    for a in g.players() {
                        options[a].push(j);
                    }
                }
            }
        }
        Ok(PositiveProposals { options })
    }

    /// Qualifying coalitions of agent `i`.
    pub fn options(&self, i: Player) -> &[Coalition] {
        &self.options[i]
    }

    /// `positive_proposal_sampler` for a fixed agent.
    pub fn sample_for<R: Rng + ?Sized>(&self, i: Player, rng: &mut R) -> Proposal {
        match self.options[i].choose(rng) {
            Some(&j) => Proposal::new(i, j).expect("options contain their agent"),
            None => Proposal::with_partners(i, Coalition::EMPTY),
        }
    }
}

impl ProposalSampler for PositiveProposals {
    fn sample(&self, _state: &EnvironmentState, rng: &mut RunRng) -> Proposal {
        let i = rng.activation.gen_range(0..self.options.len());
        self.sample_for(i, &mut rng.subset)
    }
}

/// An optimal assignment of disjoint agent groups to distinct tasks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OptimalAssignment {
    pub welfare: GridValue,
    /// `(task, agents)` pairs with positive value.
    pub groups: Vec<(usize, Coalition)>,
}

impl OptimalAssignment {
    /// The matching partition of all players: each group with its task, all
    /// other players alone.
    pub fn partition(&self, config: &TaskConfig) -> PlayerPartition {
        let mut blocks: Vec<Coalition> = self
            .groups
            .iter()
            .map(|&(t, g)| g.with(config.task_player(t)))
            .collect();
        let used = blocks.iter().fold(Coalition::EMPTY, |acc, b| acc.union(*b));
        blocks.extend(
            Coalition::grand(config.n_players())
                .difference(used)
                .players()
                .map(Coalition::singleton),
        );
        PlayerPartition::new(config.n_players(), blocks).expect("groups are disjoint")
    }
}

fn require_dp_scale(config: &TaskConfig, what: &'static str) -> Result<()> {
    config.validate()?;
    if config.m > MAX_DP_AGENTS {
        return Err(Error::ScaleBound {
            what,
            n: config.m,
            cap: MAX_DP_AGENTS,
        });
    }
    Ok(())
}

/// Exact optimum by DP over tasks and agent masks:
/// `f_{t+1}(mask) = max(f_t(mask), max_{g ⊆ mask} f_t(mask∖g) + value(t, g))`.
pub fn optimal_assignment(config: &TaskConfig) -> Result<OptimalAssignment> {
    require_dp_scale(config, "optimal welfare")?;
    let size = 1usize << config.m;
    let mut tables: Vec<Vec<i64>> = vec![vec![0; size]];
    let mut positive: Vec<Vec<(u64, i64)>> = Vec::with_capacity(config.n_tasks);
    for t in 0..config.n_tasks {
        let opts: Vec<(u64, i64)> = config
            .agents()
            .subsets()
            .map(|g| (g.mask(), assignment_value(config, t, g).steps()))
            .filter(|&(_, v)| v > 0)
            .collect();
        let prev = tables.last().expect("base table");
        let mut next = prev.clone();
        for (mask, best) in next.iter_mut().enumerate() {
            let mask = mask as u64;
            for &(g, v) in &opts {
                if g & !mask == 0 {
                    *best = (*best).max(prev[(mask & !g) as usize] + v);
                }
            }
        }
        tables.push(next);
        positive.push(opts);
    }
    let full = (size - 1) as u64;
    let welfare = tables[config.n_tasks][full as usize];
    let mut groups = Vec::new();
    let mut mask = full;
    for t in (0..config.n_tasks).rev() {
        let here = tables[t + 1][mask as usize];
        if here == tables[t][mask as usize] {
            continue;
        }
        let &(g, _) = positive[t]
            .iter()
            .find(|&&(g, v)| g & !mask == 0 && tables[t][(mask & !g) as usize] + v == here)
            .ok_or_else(|| Error::Internal("optimal assignment backtrack failed".into()))?;
        groups.push((t, Coalition::from_mask(g)));
        mask &= !g;
    }
    groups.reverse();
    Ok(OptimalAssignment {
        welfare: GridValue(welfare),
        groups,
    })
}

/// `optimal_welfare`.
pub fn optimal_welfare(config: &TaskConfig) -> Result<GridValue> {
    optimal_assignment(config).map(|a| a.welfare)
}

/// `restricted_core_witness`: a core solution paying every task zero, if one
/// exists on the unit grid.
///
/// Any such solution pays each group of an optimal assignment exactly its
/// value and unassigned agents zero, so the search fixes one optimal
/// assignment and enumerates splits within its groups.
pub fn restricted_core_witness(config: &TaskConfig) -> Result<Option<CoreWitness>> {
    let best = optimal_assignment(config)?;
    // positive coalitions as (agent mask, value)
    let mut constraints: Vec<(u64, i64)> = Vec::new();
    for t in 0..config.n_tasks {
        for g in config.agents().subsets() {
            let v = assignment_value(config, t, g).steps();
            if v > 0 {
                constraints.push((g.mask(), v));
            }
        }
    }
    let order: Vec<Player> = best.groups.iter().flat_map(|(_, g)| g.players()).collect();
    let mut position = vec![usize::MAX; config.m];
    for (p, &a) in order.iter().enumerate() {
        position[a] = p;
    }
    // each constraint is checked once its last agent (in search order) is set
    let mut due: Vec<Vec<(u64, i64)>> = vec![Vec::new(); order.len()];
    for &(g, v) in &constraints {
        // unassigned agents are paid zero and never searched
        let last = Coalition::from_mask(g)
            .players()
            .map(|a| position[a])
            .filter(|&p| p != usize::MAX)
            .max();
        match last {
            Some(last) => due[last].push((g, v)),
            None => return Ok(None),
        }
    }
    let mut group_end = vec![false; order.len()];
    let mut group_value = vec![0i64; order.len()];
    let mut p = 0;
    for (t, g) in &best.groups {
        let v = assignment_value(config, *t, *g).steps();
        for _ in 0..g.len() {
            group_value[p] = v;
            p += 1;
        }
        group_end[p - 1] = true;
    }

    struct Search<'a> {
        order: &'a [Player],
        due: &'a [Vec<(u64, i64)>],
        group_end: &'a [bool],
        group_value: &'a [i64],
        x: Vec<i64>,
    }
    impl Search<'_> {
        fn satisfied(&self, p: usize) -> bool {
            self.due[p]
                .iter()
                .all(|&(g, v)| Coalition::from_mask(g).players().map(|a| self.x[a]).sum::<i64>() >= v)
        }
        fn go(&mut self, p: usize, spent: i64) -> bool {
            if p == self.order.len() {
                return true;
            }
            let a = self.order[p];
            let left = self.group_value[p] - spent;
            let (lo, hi) = if self.group_end[p] { (left, left) } else { (0, left) };
            for xa in lo..=hi {
                self.x[a] = xa;
                if self.satisfied(p) {
                    let next_spent = if self.group_end[p] { 0 } else { spent + xa };
                    if self.go(p + 1, next_spent) {
                        return true;
                    }
                }
            }
            self.x[a] = 0;
            false
        }
    }

    let mut search = Search {
        order: &order,
        due: &due,
        group_end: &group_end,
        group_value: &group_value,
        x: vec![0; config.n_players()],
    };
    if !search.go(0, 0) {
        return Ok(None);
    }
    let allocation = Allocation::new(search.x.into_iter().map(GridValue).collect());
    let partition = best.partition(config);
    let game = to_game(config)?;
    if !is_core_solution(&game, &allocation, &partition)? {
        return Err(Error::Internal("restricted witness fails the core check".into()));
    }
    Ok(Some(CoreWitness { allocation, partition }))
}

/// Positions and coalitions as JSON, for plotting a final assignment.
pub fn layout_json(config: &TaskConfig, state: &EnvironmentState) -> serde_json::Value {
    let point = |p: Player| {
        let [x, y] = config.locations[p];
        serde_json::json!({ "player": p + 1, "x": x, "y": y })
    };
    let coalitions: Vec<Vec<usize>> = state
        .structure()
        .coalitions()
        .into_iter()
        .filter(|c| c.len() > 1)
        .map(|c| c.players().map(|p| p + 1).collect())
        .collect();
    serde_json::json!({
        "grid_size": config.grid_size,
        "agents": (0..config.m).map(point).collect::<Vec<_>>(),
        "tasks": (config.m..config.n_players()).map(point).collect::<Vec<_>>(),
        "coalitions": coalitions,
    })
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    /// Hand-built config: `agents` as (features, location), `tasks` as
    /// (requirements, location), worth scale 1 unless overridden.
    pub(crate) fn crafted(
        agents: &[(u32, [i64; 2])],
        tasks: &[(u32, [i64; 2])],
        k: usize,
        worth_scale: i64,
    ) -> TaskConfig {
        TaskConfig {
            m: agents.len(),
            n_tasks: tasks.len(),
            k,
            grid_size: 10,
            worth_scale,
            features: agents.iter().map(|a| a.0).collect(),
            requirements: tasks.iter().map(|t| t.0).collect(),
            locations: agents.iter().map(|a| a.1).chain(tasks.iter().map(|t| t.1)).collect(),
            seed: None,
        }
    }

    /// Every assignment of agents to a task or to nothing.
    fn brute_force_optimum(config: &TaskConfig) -> GridValue {
        let choices = config.n_tasks + 1;
        let total = choices.pow(config.m as u32);
        (0..total)
            .map(|mut code| {
                let mut groups = vec![Coalition::EMPTY; config.n_tasks];
                for a in 0..config.m {
                    let c = code % choices;
                    code /= choices;
                    if c > 0 {
                        groups[c - 1] = groups[c - 1].with(a);
                    }
                }
                (0..config.n_tasks)
                    .map(|t| task_value(config, groups[t].with(config.task_player(t))))
                    .sum::<GridValue>()
            })
            .max()
            .unwrap_or_default()
    }

    #[test]
    fn value_examples() {
        // W = 10 via worth_scale 10 and one requirement
        let c = crafted(&[(1, [0, 0]), (1, [5, 5])], &[(1, [2, 1]), (1, [9, 9])], 1, 10);
        assert_eq!(task_value(&c, Coalition::singleton(0)), GridValue::ZERO);
        assert_eq!(task_value(&c, Coalition::from_players([0, 2])), GridValue(7));
        assert_eq!(task_value(&c, Coalition::from_players([0, 2, 3])), GridValue::ZERO);
        let uncovered = crafted(&[(1, [0, 0])], &[(0b11, [2, 1])], 2, 10);
        assert_eq!(task_value(&uncovered, Coalition::from_players([0, 1])), GridValue::ZERO);
    }

    #[test]
    fn generation_is_seeded_and_shaped() {
        let a = generate_seeded(5, ScenarioParams::FULL).unwrap();
        let b = generate_seeded(5, ScenarioParams::FULL).unwrap();
        assert_eq!(a, b);
        assert_eq!((a.m, a.n_tasks, a.k, a.grid_size), (10, 20, 5, 9));
        assert_eq!(a.locations.len(), 30);
        a.validate().unwrap();
        let one = generate_seeded(
            1,
            ScenarioParams {
                k: 1,
                ..ScenarioParams::REDUCED
            },
        )
        .unwrap();
        assert!(one.features.iter().chain(&one.requirements).all(|&f| f == 1));
    }

    #[test]
    fn scenario_file_round_trip() {
        let c = generate_seeded(3, ScenarioParams::REDUCED).unwrap();
        let text = serde_json::to_string(&c.to_file()).unwrap();
        let back = TaskConfig::from_file(serde_json::from_str(&text).unwrap()).unwrap();
        assert_eq!(back, c);
        assert!(text.contains("\"Q\"") && text.contains("\"L\""));
    }

    #[test]
    fn optimum_examples() {
        // worth 7, distance 3
        let single = crafted(&[(1, [0, 0])], &[(1, [2, 1])], 1, 7);
        assert_eq!(optimal_welfare(&single).unwrap(), GridValue(4));
        let none = crafted(&[(1, [0, 0])], &[(0b10, [2, 1])], 2, 7);
        assert_eq!(optimal_welfare(&none).unwrap(), GridValue::ZERO);
        let small = crafted(
            &[(0b01, [0, 0]), (0b10, [1, 0]), (0b11, [4, 4])],
            &[(0b11, [0, 1]), (0b01, [4, 3])],
            2,
            4,
        );
        assert_eq!(optimal_welfare(&small).unwrap(), brute_force_optimum(&small));
    }

    #[test]
    fn optimum_matches_brute_force_on_random_configs() {
        let params = ScenarioParams {
            m: 4,
            n_tasks: 3,
            k: 3,
            grid_size: 5,
            worth_scale: 3,
        };
        for seed in 0..30 {
            let c = generate_seeded(seed, params).unwrap();
            let best = optimal_assignment(&c).unwrap();
            assert_eq!(best.welfare, brute_force_optimum(&c), "seed {seed}");
            let p = best.partition(&c);
            assert_eq!(p.welfare(&to_game(&c).unwrap()), best.welfare);
        }
    }

    #[test]
    fn restricted_witness_examples() {
        let single = crafted(&[(1, [0, 0])], &[(1, [2, 1])], 1, 7);
        let w = restricted_core_witness(&single).unwrap().unwrap();
        assert_eq!(w.allocation.steps(), vec![4, 0]);
        assert_eq!(w.partition.blocks(), &[Coalition::from_players([0, 1])]);

        // two agents at distance 1 from one task worth 5: each pair nets 4,
        // the pair with both agents nets 3; the core would need x1, x2 ≥ 4
        // with x1 + x2 = 4
        let rival = crafted(&[(1, [0, 0]), (1, [2, 0])], &[(1, [1, 0])], 1, 5);
        assert!(restricted_core_witness(&rival).unwrap().is_none());

        // a second task at the same spot restores the core: (4, 4)
        let two = crafted(&[(1, [0, 0]), (1, [2, 0])], &[(1, [1, 0]), (1, [1, 0])], 1, 5);
        let w = restricted_core_witness(&two).unwrap().unwrap();
        assert_eq!(w.allocation.steps(), vec![4, 4, 0, 0]);

        // a positive coalition mixing the served agent with an idle one
        let helper = crafted(&[(0b11, [0, 0]), (0b01, [3, 0])], &[(0b11, [0, 0])], 2, 3);
        let w = restricted_core_witness(&helper).unwrap().unwrap();
        assert_eq!(w.allocation.steps(), vec![6, 0, 0]);
    }

    #[test]
    fn proposals_are_positive_and_uniform() {
        let c = generate_seeded(11, ScenarioParams::REDUCED).unwrap();
        let sampler = PositiveProposals::new(&c, DEFAULT_MAX_AGENTS_PER_PROPOSAL).unwrap();
        let i = (0..c.m).max_by_key(|&i| sampler.options(i).len()).unwrap();
        let opts = sampler.options(i);
        assert!(opts.len() >= 3);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let draws = 2000 * opts.len();
        let mut counts = vec![0usize; opts.len()];
        for _ in 0..draws {
            let p = sampler.sample_for(i, &mut rng);
            let j = p.coalition();
            assert!(task_value(&c, j) > GridValue::ZERO);
            assert_eq!(j.difference(c.agents()).len(), 1);
            counts[opts.iter().position(|&o| o == j).unwrap()] += 1;
        }
        let expected = draws as f64 / opts.len() as f64;
        let chi2: f64 = counts.iter().map(|&k| (k as f64 - expected).powi(2) / expected).sum();
        let df = (opts.len() - 1) as f64;
        // far tail of the χ² distribution
        assert!(chi2 < df + 6.0 * (2.0 * df).sqrt(), "χ² = {chi2}, df = {df}");
    }

    #[test]
    fn agent_without_options_proposes_alone() {
        let c = crafted(&[(1, [0, 0]), (0b10, [9, 9])], &[(1, [0, 1])], 2, 3);
        let sampler = PositiveProposals::new(&c, 4).unwrap();
        assert!(sampler.options(1).is_empty());
        let p = sampler.sample_for(1, &mut ChaCha8Rng::seed_from_u64(0));
        assert_eq!(p.coalition(), Coalition::singleton(1));
    }

    #[test]
    fn value_non_increasing_when_adding_agents() {
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let all_covering = ScenarioParams {
            k: 1,
            ..ScenarioParams::REDUCED
        };
        for seed in 0..20 {
            let c = generate_seeded(seed, all_covering).unwrap();
            for _ in 0..20 {
                let t = rng.gen_range(0..c.n_tasks);
                let g = Coalition::from_mask(rng.gen_range(1..(1u64 << c.m)));
                let a = rng.gen_range(0..c.m);
                assert!(assignment_value(&c, t, g.with(a)) <= assignment_value(&c, t, g));
            }
        }
    }
}
