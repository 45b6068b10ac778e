//! Transferable-utility games, environment states and their classification.
//!
//! A [`TUGame`] stores its characteristic function sparsely: only nonzero
//! values are kept, every other coalition is worth zero. Dense toy games and
//! the task-allocation games (where almost every coalition is worthless) share
//! the same representation.
//!
//! Checks that quantify over *every* coalition ("no blocking coalition") run
//! over the stored support whenever the aspiration vector is nonnegative,
//! since an unlisted coalition can only block when some members demand less
//! than zero. Otherwise they fall back to exhaustive enumeration, which is
//! limited by [`TUGame::exhaustive_cap`].

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::coalition::{all_coalitions, Coalition, Player, MAX_PLAYERS};
use crate::error::{Error, Result};
use crate::grid::{parse_rational, Delta, GridValue};

/// Default cap for exhaustive enumeration over all 2^n − 1 coalitions.
pub const DEFAULT_EXHAUSTIVE_CAP: usize = 24;

/// A TU game `(N, v)` with values on a δ-grid.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TUGame {
    n: usize,
    delta: Delta,
    values: BTreeMap<Coalition, GridValue>,
    singles: Vec<GridValue>,
    exhaustive_cap: usize,
}

impl TUGame {
    /// Builds a game from `(coalition, value)` pairs; unlisted coalitions are
    /// worth zero. Fails on out-of-range players or an empty coalition with a
    /// nonzero value.
    pub fn new<I>(n: usize, delta: Delta, values: I) -> Result<TUGame>
    where
        I: IntoIterator<Item = (Coalition, GridValue)>,
    {
        if n == 0 || n > MAX_PLAYERS {
            return Err(Error::validation(format!(
                "player count must be in 1..={MAX_PLAYERS}, got {n}"
            )));
        }
        let grand = Coalition::grand(n);
        let mut map = BTreeMap::new();
        for (s, v) in values {
            if !s.is_subset_of(grand) {
                return Err(Error::validation(format!("coalition {s} has players outside 1..={n}")));
            }
            if s.is_empty() {
                if v != GridValue::ZERO {
                    return Err(Error::validation("v(∅) must be 0"));
                }
                continue;
            }
            if v == GridValue::ZERO {
                map.remove(&s);
            } else {
                map.insert(s, v);
            }
        }
        let singles = (0..n)
            .map(|i| map.get(&Coalition::singleton(i)).copied().unwrap_or_default())
            .collect();
        Ok(TUGame {
            n,
            delta,
            values: map,
            singles,
            exhaustive_cap: DEFAULT_EXHAUSTIVE_CAP,
        })
    }

    /// Integer-valued game on the unit grid, values given as `(players, v)`
    /// with 0-based player lists.
    pub fn from_integers(n: usize, values: &[(&[Player], i64)]) -> Result<TUGame> {
        TUGame::new(
            n,
            Delta::ONE,
            values
                .iter()
                .map(|(ps, v)| (Coalition::from_players(ps.iter().copied()), GridValue(*v))),
        )
    }

    /// Dense construction from a function over every nonempty coalition.
    pub fn from_fn(n: usize, delta: Delta, f: impl Fn(Coalition) -> GridValue) -> Result<TUGame> {
        if n > DEFAULT_EXHAUSTIVE_CAP {
            return Err(Error::ScaleBound {
                what: "dense game construction",
                n,
                cap: DEFAULT_EXHAUSTIVE_CAP,
            });
        }
        TUGame::new(n, delta, all_coalitions(n).map(|s| (s, f(s))))
    }

    pub fn with_exhaustive_cap(mut self, cap: usize) -> TUGame {
        self.exhaustive_cap = cap.min(MAX_PLAYERS);
        self
    }

    /// Same game on the grid refined by `factor` (δ/factor); every value is
    /// multiplied by `factor` in grid units so real values are unchanged.
    pub fn refined(&self, factor: i64) -> TUGame {
        TUGame {
            n: self.n,
            delta: self.delta.refined(factor),
            values: self.values.iter().map(|(s, v)| (*s, GridValue(v.0 * factor))).collect(),
            singles: self.singles.iter().map(|v| GridValue(v.0 * factor)).collect(),
            exhaustive_cap: self.exhaustive_cap,
        }
    }

    #[inline]
    pub fn n_players(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn delta(&self) -> Delta {
        self.delta
    }

    #[inline]
    pub fn exhaustive_cap(&self) -> usize {
        self.exhaustive_cap
    }

    #[inline]
    pub fn grand(&self) -> Coalition {
        Coalition::grand(self.n)
    }

    /// `v(S)` without range checks; `v(∅) = 0`.
    #[inline]
    pub fn value(&self, s: Coalition) -> GridValue {
        self.values.get(&s).copied().unwrap_or_default()
    }

    /// `v({i})`.
    #[inline]
    pub fn singleton_value(&self, i: Player) -> GridValue {
        self.singles[i]
    }

    /// Nonzero entries of the characteristic function, ascending by mask.
    pub fn support(&self) -> impl Iterator<Item = (Coalition, GridValue)> + '_ {
        self.values.iter().map(|(s, v)| (*s, *v))
    }

    pub fn support_len(&self) -> usize {
        self.values.len()
    }

    /// Largest coalition value, including `v(∅) = 0`.
    pub fn max_value(&self) -> GridValue {
        self.values
            .values()
            .copied()
            .max()
            .unwrap_or_default()
            .max(GridValue::ZERO)
    }

    pub(crate) fn require_exhaustive(&self, what: &'static str) -> Result<()> {
        if self.n > self.exhaustive_cap {
            Err(Error::ScaleBound {
                what,
                n: self.n,
                cap: self.exhaustive_cap,
            })
        } else {
            Ok(())
        }
    }

    /// Reads and validates a game file.
    pub fn load(path: impl AsRef<Path>) -> Result<TUGame> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let raw: GameFile = serde_json::from_str(&text).map_err(|e| Error::parse(path, e))?;
        raw.into_game()
    }

    /// Game file representation of this game (1-based coalition keys).
    pub fn to_file(&self) -> GameFile {
        GameFile {
            n: self.n,
            delta: self.delta.to_string(),
            values: self
                .values
                .iter()
                .map(|(s, v)| {
                    let real = self.delta.value_of(*v);
                    let val = if real.is_integer() {
                        serde_json::Value::from(real.to_integer())
                    } else {
                        serde_json::Value::from(real.to_string())
                    };
                    (s.to_one_based(","), val)
                })
                .collect(),
        }
    }
}

/// `coalition_value`: `v(S)` with a range check on `S`.
pub fn coalition_value(game: &TUGame, s: Coalition) -> Result<GridValue> {
    if !s.is_subset_of(game.grand()) {
        return Err(Error::validation(format!(
            "coalition {s} has players outside 1..={}",
            game.n_players()
        )));
    }
    Ok(game.value(s))
}

/// Game file: `{"n": 3, "delta": "1/2", "values": {"1,2": 1.5, ...}}`.
///
/// Values may be JSON numbers or rational strings. Coalition keys are
/// comma-separated 1-based player lists; unlisted coalitions are worth zero.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct GameFile {
    pub n: usize,
    #[serde(default = "default_delta")]
    pub delta: String,
    #[serde(default)]
    pub values: BTreeMap<String, serde_json::Value>,
}

fn default_delta() -> String {
    "1".to_string()
}

/// Outcome of [`validate_game`]. A valid game has an empty report.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    /// Coalitions whose value is not an integer multiple of δ.
    pub off_grid: Vec<Coalition>,
    /// Keys or values that could not be interpreted at all.
    pub malformed: Vec<String>,
}

impl ValidationReport {
    pub fn is_empty(&self) -> bool {
        self.off_grid.is_empty() && self.malformed.is_empty()
    }
}

impl GameFile {
    pub fn parse(text: &str) -> Result<GameFile> {
        serde_json::from_str(text).map_err(|e| Error::validation(format!("game file: {e}")))
    }

    fn parse_value(v: &serde_json::Value) -> Option<Ratio<i64>> {
        match v {
            serde_json::Value::Number(num) => parse_rational(&num.to_string()).ok(),
            serde_json::Value::String(s) => parse_rational(s).ok(),
            _ => None,
        }
    }

    fn entries(&self) -> (Vec<(Coalition, Ratio<i64>)>, Vec<String>) {
        let mut ok = Vec::new();
        let mut bad = Vec::new();
        for (key, val) in &self.values {
            match (Coalition::parse_one_based(key, self.n), GameFile::parse_value(val)) {
                (Ok(s), Some(r)) if !s.is_empty() => ok.push((s, r)),
                (Ok(s), Some(r)) if s.is_empty() && r == Ratio::from_integer(0) => {}
                _ => bad.push(format!("{key}: {val}")),
            }
        }
        (ok, bad)
    }

    /// Converts to a [`TUGame`], failing with the validation report's
    /// contents when any value is off-grid or malformed.
    pub fn into_game(self) -> Result<TUGame> {
        let delta: Delta = self.delta.parse()?;
        let report = validate_game(&self)?;
        if !report.is_empty() {
            let mut parts: Vec<String> = report.off_grid.iter().map(|s| format!("{s} off grid")).collect();
            parts.extend(report.malformed.iter().map(|m| format!("malformed entry {m}")));
            return Err(Error::validation(parts.join("; ")));
        }
        let (entries, _) = self.entries();
        let values = entries
            .into_iter()
            .map(|(s, r)| (s, delta.to_grid(r).expect("checked by validate_game")));
        TUGame::new(self.n, delta, values)
    }
}

/// Reports every coalition of a parsed game file whose value is off the
/// δ-grid. Fails only if δ itself or `n` is unusable.
pub fn validate_game(file: &GameFile) -> Result<ValidationReport> {
    let delta: Delta = file.delta.parse()?;
    if file.n == 0 || file.n > MAX_PLAYERS {
        return Err(Error::validation(format!("player count {} out of range", file.n)));
    }
    let (entries, malformed) = file.entries();
    let mut off_grid: Vec<Coalition> = entries
        .into_iter()
        .filter(|(_, r)| delta.to_grid(*r).is_none())
        .map(|(s, _)| s)
        .collect();
    off_grid.sort();
    Ok(ValidationReport { off_grid, malformed })
}

/// A payoff vector (allocation `x` or aspiration vector `a`).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Allocation(Vec<GridValue>);

impl Allocation {
    pub fn new(payoffs: Vec<GridValue>) -> Allocation {
        Allocation(payoffs)
    }

    pub fn from_steps(steps: &[i64]) -> Allocation {
        Allocation(steps.iter().map(|&s| GridValue(s)).collect())
    }

    /// `a_i = v({i})` for every player.
    pub fn singleton_values(game: &TUGame) -> Allocation {
        Allocation((0..game.n_players()).map(|i| game.singleton_value(i)).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[GridValue] {
        &self.0
    }

    pub fn steps(&self) -> Vec<i64> {
        self.0.iter().map(|v| v.0).collect()
    }

    #[inline]
    pub fn get(&self, i: Player) -> GridValue {
        self.0[i]
    }

    #[inline]
    pub(crate) fn set(&mut self, i: Player, v: GridValue) {
        self.0[i] = v;
    }

    pub fn total(&self) -> GridValue {
        self.0.iter().sum()
    }

    /// `Σ_{i∈S} x_i`.
    #[inline]
    pub fn sum_over(&self, s: Coalition) -> GridValue {
        s.players().map(|i| self.0[i]).sum()
    }

    /// ℓ₁ distance in grid steps.
    pub fn l1_distance(&self, other: &Allocation) -> GridValue {
        self.0.iter().zip(&other.0).map(|(a, b)| (*a - *b).abs()).sum()
    }

    pub fn min_payoff(&self) -> GridValue {
        self.0.iter().copied().min().unwrap_or_default()
    }
}

impl From<Vec<GridValue>> for Allocation {
    fn from(v: Vec<GridValue>) -> Self {
        Allocation(v)
    }
}

/// A partition of the player set into disjoint nonempty blocks.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PlayerPartition {
    blocks: Vec<Coalition>,
}

impl PlayerPartition {
    /// Validates disjointness and coverage of `0..n`. Blocks are kept sorted
    /// by their lowest member.
    pub fn new(n: usize, mut blocks: Vec<Coalition>) -> Result<PlayerPartition> {
        let mut seen = Coalition::EMPTY;
        for b in &blocks {
            if b.is_empty() {
                return Err(Error::validation("partition block is empty"));
            }
            if !b.is_disjoint(seen) {
                return Err(Error::validation(format!("partition block {b} overlaps another block")));
            }
            seen = seen.union(*b);
        }
        if seen != Coalition::grand(n) {
            return Err(Error::validation(format!("blocks do not cover all {n} players")));
        }
        blocks.sort_by_key(|b| b.first());
        Ok(PlayerPartition { blocks })
    }

    pub fn blocks(&self) -> &[Coalition] {
        &self.blocks
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    /// Block containing player `i`.
    pub fn block_of(&self, i: Player) -> Coalition {
        *self
            .blocks
            .iter()
            .find(|b| b.contains(i))
            .expect("partition covers all players")
    }

    pub fn welfare(&self, game: &TUGame) -> GridValue {
        self.blocks.iter().map(|b| game.value(*b)).sum()
    }

    pub(crate) fn from_blocks_unchecked(blocks: Vec<Coalition>) -> PlayerPartition {
        PlayerPartition { blocks }
    }
}

/// Per-player coalition membership `C_i` (`None` encodes `C_i = ∅`).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CoalitionStructure {
    members: Vec<Option<Coalition>>,
}

impl CoalitionStructure {
    /// Everyone free.
    pub fn empty(n: usize) -> CoalitionStructure {
        CoalitionStructure { members: vec![None; n] }
    }

    /// Validates that every formed coalition contains its member and that all
    /// members agree on it.
    pub fn new(members: Vec<Option<Coalition>>) -> Result<CoalitionStructure> {
        let s = CoalitionStructure { members };
        s.check()?;
        Ok(s)
    }

    /// Structure in which exactly the given disjoint coalitions are formed.
    pub fn from_coalitions(n: usize, coalitions: &[Coalition]) -> Result<CoalitionStructure> {
        let mut members = vec![None; n];
        for &c in coalitions {
            if c.is_empty() || !c.is_subset_of(Coalition::grand(n)) {
                return Err(Error::validation(format!("coalition {c} invalid for {n} players")));
            }
            for i in c.players() {
                if members[i].is_some() {
                    return Err(Error::validation(format!("player {} in two coalitions", i + 1)));
                }
                members[i] = Some(c);
            }
        }
        Ok(CoalitionStructure { members })
    }

    fn check(&self) -> Result<()> {
        let n = self.members.len();
        for (i, c) in self.members.iter().enumerate() {
            if let Some(c) = c {
                if !c.contains(i) {
                    return Err(Error::validation(format!(
                        "C_{} = {c} does not contain player {}",
                        i + 1,
                        i + 1
                    )));
                }
                if !c.is_subset_of(Coalition::grand(n)) {
                    return Err(Error::validation(format!("C_{} = {c} out of range", i + 1)));
                }
                for j in c.players() {
                    if self.members[j] != Some(*c) {
                        return Err(Error::validation(format!(
                            "players {} and {} disagree on coalition {c}",
                            i + 1,
                            j + 1
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    #[inline]
    pub fn of(&self, i: Player) -> Option<Coalition> {
        self.members[i]
    }

    #[inline]
    pub(crate) fn set(&mut self, i: Player, c: Option<Coalition>) {
        self.members[i] = c;
    }

    pub fn as_slice(&self) -> &[Option<Coalition>] {
        &self.members
    }

    /// Distinct formed coalitions, ascending by mask.
    pub fn coalitions(&self) -> Vec<Coalition> {
        self.members
            .iter()
            .flatten()
            .copied()
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect()
    }

    /// Union of formed coalitions, `B(C)`.
    pub fn banded(&self) -> Coalition {
        self.members
            .iter()
            .enumerate()
            .filter(|(_, c)| c.is_some())
            .map(|(i, _)| i)
            .collect()
    }

    /// `F(C) = N \ B(C)`.
    pub fn free(&self) -> Coalition {
        Coalition::grand(self.members.len()).difference(self.banded())
    }

    /// Whether the formed coalitions cover every player (`C ∈ P(N)`).
    pub fn is_partition(&self) -> bool {
        self.members.iter().all(Option::is_some)
    }

    pub fn to_partition(&self) -> Option<PlayerPartition> {
        self.is_partition()
            .then(|| PlayerPartition::from_blocks_unchecked(self.coalitions_by_first_member()))
    }

    fn coalitions_by_first_member(&self) -> Vec<Coalition> {
        let mut v = self.coalitions();
        v.sort_by_key(|c| c.first());
        v
    }
}

/// Environment state `(a, C)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct EnvironmentState {
    aspirations: Allocation,
    structure: CoalitionStructure,
}

impl EnvironmentState {
    pub fn new(aspirations: Allocation, structure: CoalitionStructure) -> Result<EnvironmentState> {
        if aspirations.len() != structure.len() {
            return Err(Error::validation(format!(
                "aspiration vector has {} entries but structure has {}",
                aspirations.len(),
                structure.len()
            )));
        }
        Ok(EnvironmentState { aspirations, structure })
    }

    /// State `(x, ρ)` for a candidate core solution.
    pub fn from_solution(x: &Allocation, rho: &PlayerPartition) -> Result<EnvironmentState> {
        let structure = CoalitionStructure::from_coalitions(x.len(), rho.blocks())?;
        EnvironmentState::new(x.clone(), structure)
    }

    pub fn aspirations(&self) -> &Allocation {
        &self.aspirations
    }

    pub fn structure(&self) -> &CoalitionStructure {
        &self.structure
    }

    pub fn n_players(&self) -> usize {
        self.aspirations.len()
    }

    pub(crate) fn aspirations_mut(&mut self) -> &mut Allocation {
        &mut self.aspirations
    }

    pub(crate) fn structure_mut(&mut self) -> &mut CoalitionStructure {
        &mut self.structure
    }

    /// Applies the singleton rule to every player: `C_i ← {i}` wherever
    /// `C_i = ∅` and `a_i = v({i})`. Returns the players it bound.
    pub fn close_singletons(&mut self, game: &TUGame) -> Coalition {
        let mut bound = Coalition::EMPTY;
        for i in 0..self.n_players() {
            if self.structure.of(i).is_none() && self.aspirations.get(i) == game.singleton_value(i) {
                self.structure.set(i, Some(Coalition::singleton(i)));
                bound = bound.with(i);
            }
        }
        bound
    }
}

fn check_dims(game: &TUGame, len: usize) -> Result<()> {
    if len != game.n_players() {
        return Err(Error::validation(format!(
            "dimension mismatch: game has {} players, got vector of length {len}",
            game.n_players()
        )));
    }
    Ok(())
}

/// Smallest-mask coalition `S` with `Σ_{i∈S} a_i < v(S)`, if any.
///
/// On the grid this is also the set of coalitions a proposal could form:
/// `Σ a_S < v(S)` iff `Σ a_S + δ ≤ v(S)`.
pub fn first_blocking_coalition(game: &TUGame, a: &Allocation) -> Result<Option<Coalition>> {
    check_dims(game, a.len())?;
    if a.min_payoff() >= GridValue::ZERO {
        // unlisted coalitions are worth 0 and Σ a_S ≥ 0 there
        return Ok(game.support().find(|(s, v)| a.sum_over(*s) < *v).map(|(s, _)| s));
    }
    game.require_exhaustive("blocking-coalition search")?;
    Ok(all_coalitions(game.n_players()).find(|s| a.sum_over(*s) < game.value(*s)))
}

/// Coalitional rationality: `Σ_{i∈S} x_i ≥ v(S)` for every `S ⊆ N`.
pub fn is_coalitionally_rational(game: &TUGame, x: &Allocation) -> Result<bool> {
    Ok(first_blocking_coalition(game, x)?.is_none())
}

/// `is_feasible_state`: `a_i ≥ v({i})` for all `i`, `Σ_{i∈S} a_i ≤ v(S)` for
/// every formed `S`, and structure consistency.
pub fn is_feasible_state(game: &TUGame, state: &EnvironmentState) -> Result<bool> {
    check_dims(game, state.n_players())?;
    if state.structure.check().is_err() {
        return Ok(false);
    }
    let a = &state.aspirations;
    if (0..game.n_players()).any(|i| a.get(i) < game.singleton_value(i)) {
        return Ok(false);
    }
    Ok(state
        .structure
        .coalitions()
        .into_iter()
        .all(|s| a.sum_over(s) <= game.value(s)))
}

/// `is_core_solution`: `x` coalitionally rational and `Σ_{i∈S} x_i = v(S)` for
/// every block of `ρ`.
pub fn is_core_solution(game: &TUGame, x: &Allocation, rho: &PlayerPartition) -> Result<bool> {
    check_dims(game, x.len())?;
    if rho.blocks().iter().fold(Coalition::EMPTY, |u, b| u.union(*b)) != game.grand() {
        return Err(Error::validation("partition does not cover the game's players"));
    }
    if rho.blocks().iter().any(|b| x.sum_over(*b) != game.value(*b)) {
        return Ok(false);
    }
    is_coalitionally_rational(game, x)
}

/// `C′ = C ∪ {{i} : C_i = ∅ and a_i = v({i})}`.
pub fn effective_structure(game: &TUGame, state: &EnvironmentState) -> CoalitionStructure {
    let mut s = state.clone();
    s.close_singletons(game);
    s.structure
}

/// Banded players `B(C)` and free players `F(C)`.
pub fn banded_and_free(state: &EnvironmentState) -> (Coalition, Coalition) {
    (state.structure.banded(), state.structure.free())
}

/// Which structure the Π/Γ split is evaluated on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum StructureView {
    /// The raw structure `C`, including algorithm-inserted singletons.
    #[default]
    Raw,
    /// The closed structure `C′` (see [`effective_structure`]).
    Effective,
}

/// One of the four disjoint classes of feasible states.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StateClass {
    /// Π(v): a core solution.
    Core,
    /// Γ(v): optimal total, no blocking coalition, structure not a partition.
    Gamma,
    /// Υ(v): no blocking coalition but total above `K_v`.
    Upsilon,
    /// Ψ(v): some coalition blocks; `blocking` is the smallest-mask one.
    Psi { blocking: Coalition },
}

impl StateClass {
    pub fn label(&self) -> &'static str {
        match self {
            StateClass::Core => "core",
            StateClass::Gamma => "gamma",
            StateClass::Upsilon => "upsilon",
            StateClass::Psi { .. } => "psi",
        }
    }
}

/// `classify_state` on the raw structure.
pub fn classify_state(game: &TUGame, state: &EnvironmentState, k_v: GridValue) -> Result<StateClass> {
    classify_state_with(game, state, k_v, StructureView::Raw)
}

/// Classifies a feasible state into Π/Γ/Υ/Ψ, checking `C ∈ P(N)` on the
/// chosen structure view.
///
/// Any coalitionally rational `a` has `Σ a ≥ K_v`, so with no blocking
/// coalition the total is either above `K_v` (Υ) or equal to it; a total
/// below `K_v` means `k_v` is not the game's maximum welfare.
pub fn classify_state_with(
    game: &TUGame,
    state: &EnvironmentState,
    k_v: GridValue,
    view: StructureView,
) -> Result<StateClass> {
    if !is_feasible_state(game, state)? {
        return Err(Error::validation("classify_state requires a feasible state"));
    }
    let a = state.aspirations();
    if let Some(s) = first_blocking_coalition(game, a)? {
        return Ok(StateClass::Psi { blocking: s });
    }
    let total = a.total();
    if total > k_v {
        return Ok(StateClass::Upsilon);
    }
    if total < k_v {
        return Err(Error::validation(format!(
            "K_v = {k_v} exceeds the total {total} of a coalitionally rational state"
        )));
    }
    let partition = match view {
        StructureView::Raw => state.structure.is_partition(),
        StructureView::Effective => effective_structure(game, state).is_partition(),
    };
    Ok(if partition { StateClass::Core } else { StateClass::Gamma })
}
