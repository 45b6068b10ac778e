//! Exact exponential-time ground truth: partition enumeration, maximum
//! welfare `K_v`, core witnesses on the δ-grid and the steering sequences
//! that drive any feasible state into the core.

use crate::coalition::{all_coalitions, Coalition, Player};
use crate::dynamics::Proposal;
use crate::error::{Error, Result};
use crate::game::{
    classify_state, first_blocking_coalition, is_core_solution, is_feasible_state, Allocation, EnvironmentState,
    PlayerPartition, StateClass, TUGame, DEFAULT_EXHAUSTIVE_CAP,
};
use crate::grid::GridValue;

/// A core solution `(x*, ρ*)` on the δ-grid.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoreWitness {
    pub allocation: Allocation,
    pub partition: PlayerPartition,
}

impl CoreWitness {
    pub fn state(&self) -> EnvironmentState {
        EnvironmentState::from_solution(&self.allocation, &self.partition)
            .expect("witness partition matches allocation length")
    }
}

/// Restricted-growth-string enumeration of set partitions.
///
/// Partitions come out in lexicographic order of their growth strings, so
/// the grand coalition is first and the all-singletons partition last.
pub struct Partitions {
    n: usize,
    labels: Vec<usize>,
    maxes: Vec<usize>,
    done: bool,
}

impl Iterator for Partitions {
    type Item = PlayerPartition;

    fn next(&mut self) -> Option<PlayerPartition> {
        if self.done {
            return None;
        }
        let blocks_count = self.maxes.last().map_or(0, |m| m + 1);
        let mut blocks = vec![Coalition::EMPTY; blocks_count];
        for (i, &l) in self.labels.iter().enumerate() {
            blocks[l] = blocks[l].with(i);
        }
        let out = PlayerPartition::from_blocks_unchecked(blocks);

        // advance: rightmost position that can still grow
        let mut k = self.n;
        loop {
            if k <= 1 {
                self.done = true;
                break;
            }
            k -= 1;
            let cap = self.maxes[k - 1] + 1;
            if self.labels[k] < cap {
                self.labels[k] += 1;
                self.maxes[k] = self.maxes[k - 1].max(self.labels[k]);
                for j in k + 1..self.n {
                    self.labels[j] = 0;
                    self.maxes[j] = self.maxes[k];
                }
                break;
            }
        }
        Some(out)
    }
}

/// `enumerate_partitions`: every partition of `n` players exactly once.
pub fn enumerate_partitions(n: usize) -> Result<Partitions> {
    if n == 0 || n > DEFAULT_EXHAUSTIVE_CAP {
        return Err(Error::ScaleBound {
            what: "partition enumeration",
            n,
            cap: DEFAULT_EXHAUSTIVE_CAP,
        });
    }
    Ok(Partitions {
        n,
        labels: vec![0; n],
        maxes: vec![0; n],
        done: false,
    })
}

/// `max_welfare`: `K_v` and the first partition (in enumeration order)
/// achieving it.
pub fn max_welfare(game: &TUGame) -> Result<(GridValue, PlayerPartition)> {
    let n = game.n_players();
    if n > game.exhaustive_cap() {
        return Err(Error::ScaleBound {
            what: "maximum welfare",
            n,
            cap: game.exhaustive_cap(),
        });
    }
    let mut best: Option<(GridValue, PlayerPartition)> = None;
    for p in enumerate_partitions(n)? {
        let w = p.welfare(game);
        if best.as_ref().is_none_or(|(bw, _)| w > *bw) {
            best = Some((w, p));
        }
    }
    let (k, p) = best.expect("at least one partition");
    let p = PlayerPartition::new(n, p.blocks().to_vec())?;
    Ok((k, p))
}

/// Depth-first search over grid allocations with `Σ x = K_v` and
/// `lower_i ≤ x_i ≤ upper_i`, checking each coalition constraint as soon as
/// its highest-indexed member is assigned.
struct GridSearch<'a> {
    game: &'a TUGame,
    total: GridValue,
    lower: Vec<GridValue>,
    upper: Vec<GridValue>,
    /// constraints grouped by highest member
    constraints: Vec<Vec<(Coalition, GridValue)>>,
    suffix_lower: Vec<GridValue>,
    suffix_upper: Vec<GridValue>,
}

impl<'a> GridSearch<'a> {
    fn new(game: &'a TUGame, total: GridValue, bound: GridValue) -> Result<GridSearch<'a>> {
        let n = game.n_players();
        let singles: Vec<GridValue> = (0..n).map(|i| game.singleton_value(i)).collect();
        let single_sum: GridValue = singles.iter().sum();
        let lower = singles.clone();
        let upper: Vec<GridValue> = (0..n).map(|i| bound.min(total - (single_sum - singles[i]))).collect();

        let mut constraints = vec![Vec::new(); n];
        if singles.iter().all(|v| *v >= GridValue::ZERO) {
            // x ≥ 0 makes every worthless coalition satisfied
            for (s, v) in game.support() {
                constraints[s.last().expect("nonempty")].push((s, v));
            }
        } else {
            game.require_exhaustive("core witness search")?;
            for s in all_coalitions(n) {
                constraints[s.last().expect("nonempty")].push((s, game.value(s)));
            }
        }
        let mut suffix_lower = vec![GridValue::ZERO; n + 1];
        let mut suffix_upper = vec![GridValue::ZERO; n + 1];
        for i in (0..n).rev() {
            suffix_lower[i] = suffix_lower[i + 1] + lower[i];
            suffix_upper[i] = suffix_upper[i + 1] + upper[i];
        }
        Ok(GridSearch {
            game,
            total,
            lower,
            upper,
            constraints,
            suffix_lower,
            suffix_upper,
        })
    }

    /// Visits solutions in lexicographic order; `visit` returns `false` to
    /// stop the search.
    fn search(&self, visit: &mut dyn FnMut(&[GridValue]) -> bool) {
        let n = self.game.n_players();
        let mut x = vec![GridValue::ZERO; n];
        self.descend(0, GridValue::ZERO, &mut x, visit);
    }

    fn descend(
        &self,
        i: usize,
        assigned: GridValue,
        x: &mut Vec<GridValue>,
        visit: &mut dyn FnMut(&[GridValue]) -> bool,
    ) -> bool {
        let n = x.len();
        if i == n {
            return visit(x);
        }
        let remaining = self.total - assigned;
        // x_i must leave a reachable remainder for players i+1..n
        let lo = self.lower[i].max(remaining - self.suffix_upper[i + 1]);
        let hi = self.upper[i].min(remaining - self.suffix_lower[i + 1]);
        let mut xi = lo;
        while xi <= hi {
            x[i] = xi;
            let ok = self.constraints[i]
                .iter()
                .all(|(s, v)| s.players().map(|j| x[j]).sum::<GridValue>() >= *v);
            if ok && !self.descend(i + 1, assigned + xi, x, visit) {
                return false;
            }
            xi += GridValue::STEP;
        }
        true
    }
}

fn check_bound(game: &TUGame, bound: GridValue) -> Result<()> {
    if bound < game.max_value() {
        return Err(Error::validation(format!(
            "search bound {bound} is below max_S v(S) = {}",
            game.max_value()
        )));
    }
    Ok(())
}

/// `find_core_witness`: the first grid allocation (lexicographic order) in
/// the core, paired with the welfare-maximising partition. `None` means no
/// core point exists *on this grid*; refine δ to search further.
pub fn find_core_witness(game: &TUGame, bound: GridValue) -> Result<Option<CoreWitness>> {
    check_bound(game, bound)?;
    let (k, rho) = max_welfare(game)?;
    let search = GridSearch::new(game, k, bound)?;
    let mut found = None;
    search.search(&mut |x| {
        found = Some(Allocation::new(x.to_vec()));
        false
    });
    Ok(found.map(|allocation| CoreWitness {
        allocation,
        partition: rho,
    }))
}

/// [`find_core_witness`] with no bound beyond the per-player caps
/// `x_i ≤ K_v − Σ_{j≠i} v({j})`.
pub fn core_witness(game: &TUGame) -> Result<Option<CoreWitness>> {
    find_core_witness(game, UNBOUNDED)
}

const UNBOUNDED: GridValue = GridValue(i64::MAX / 4);

/// Every core allocation on the grid, up to `limit` of them.
pub fn core_grid_points(game: &TUGame, limit: usize) -> Result<Vec<Allocation>> {
    let (k, _) = max_welfare(game)?;
    let search = GridSearch::new(game, k, UNBOUNDED)?;
    let mut out = Vec::new();
    search.search(&mut |x| {
        out.push(Allocation::new(x.to_vec()));
        out.len() < limit
    });
    Ok(out)
}

/// `L_{a,x}`, `U_{a,x}`, `E_{a,x}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IndexSets {
    pub lower: Coalition,
    pub upper: Coalition,
    pub equal: Coalition,
}

/// `index_sets`: componentwise comparison of `a` against `x`.
pub fn index_sets(a: &Allocation, x: &Allocation) -> Result<IndexSets> {
    if a.len() != x.len() {
        return Err(Error::validation(format!(
            "length mismatch: {} vs {}",
            a.len(),
            x.len()
        )));
    }
    let mut sets = IndexSets {
        lower: Coalition::EMPTY,
        upper: Coalition::EMPTY,
        equal: Coalition::EMPTY,
    };
    for i in 0..a.len() {
        let slot = match a.get(i).cmp(&x.get(i)) {
            std::cmp::Ordering::Less => &mut sets.lower,
            std::cmp::Ordering::Greater => &mut sets.upper,
            std::cmp::Ordering::Equal => &mut sets.equal,
        };
        *slot = slot.with(i);
    }
    Ok(sets)
}

/// One move of a steering sequence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SteeringStep {
    /// Class of the state the move was chosen for.
    pub class: StateClass,
    /// One proposal for Ψ and Υ states; a repeated pair for Γ states. A Γ
    /// state whose free players all sit at their singleton value gets a
    /// single binding self-proposal instead.
    pub proposals: Vec<Proposal>,
}

fn validate_witness(game: &TUGame, witness: &CoreWitness) -> Result<()> {
    if !is_core_solution(game, &witness.allocation, &witness.partition)? {
        return Err(Error::validation("steering witness is not a core solution"));
    }
    Ok(())
}

/// `steering_step`: the move the convergence argument prescribes for a
/// feasible non-core state, with lowest-index player and smallest-mask
/// coalition tie-breaks.
pub fn steering_step(game: &TUGame, state: &EnvironmentState, witness: &CoreWitness) -> Result<SteeringStep> {
    validate_witness(game, witness)?;
    if !is_feasible_state(game, state)? {
        return Err(Error::validation("steering requires a feasible state"));
    }
    choose_step(game, state, witness)
}

fn choose_step(game: &TUGame, state: &EnvironmentState, witness: &CoreWitness) -> Result<SteeringStep> {
    let k_v = witness.allocation.total();
    let class = classify_state(game, state, k_v)?;
    let a = state.aspirations();
    let x = &witness.allocation;
    let sets = index_sets(a, x)?;
    let free = state.structure().free();
    let proposals =
        match class {
            StateClass::Core => {
                return Err(Error::validation("state is already a core solution"));
            }
            StateClass::Psi { blocking } => {
                let i = sets.lower.intersection(blocking).first().ok_or_else(|| {
                    Error::Internal(format!("blocking coalition {blocking} has no lower-valued member"))
                })?;
                vec![Proposal::new(i, blocking)?]
            }
            StateClass::Upsilon => {
                let i =
                    sets.upper.intersection(free).first().ok_or_else(|| {
                        Error::Internal("over-demanding state has no free upper-valued player".into())
                    })?;
                // a_i > x*_i ≥ v({i}), so {i} certainly fails
                vec![Proposal::new(i, Coalition::singleton(i))?]
            }
            StateClass::Gamma => {
                let above_floor = free.players().find(|&i| a.get(i) > game.singleton_value(i));
                match above_floor {
                    Some(i) => {
                        let block = witness.partition.block_of(i);
                        let p = Proposal::new(i, block)?;
                        vec![p, p]
                    }
                    None => {
                        let i = free
                            .first()
                            .ok_or_else(|| Error::Internal("Γ state without free players".into()))?;
                        vec![Proposal::new(i, Coalition::singleton(i))?]
                    }
                }
            }
        };
    Ok(SteeringStep { class, proposals })
}

/// The state a steering proposal leads to, derived from the rules the
/// convergence argument relies on (used to cross-check the dynamics).
fn predict(game: &TUGame, state: &EnvironmentState, p: Proposal) -> EnvironmentState {
    let mut next = state.clone();
    let i = p.proposer();
    let joint = p.coalition();
    let a_i = state.aspirations().get(i);
    if state.aspirations().sum_over(joint) + GridValue::STEP <= game.value(joint) {
        next.aspirations_mut().set(i, a_i + GridValue::STEP);
        let touched: Coalition = joint
            .players()
            .filter_map(|j| state.structure().of(j))
            .fold(Coalition::EMPTY, Coalition::union);
        for k in touched.difference(joint).players() {
            next.structure_mut().set(k, None);
        }
        for j in joint.players() {
            next.structure_mut().set(j, Some(joint));
        }
    } else if state.structure().of(i).is_none() && a_i > game.singleton_value(i) {
        next.aspirations_mut().set(i, a_i - GridValue::STEP);
    }
    next.close_singletons(game);
    next
}

/// A positive-probability proposal sequence from a start state into Π(v).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SteeringSequence {
    pub proposals: Vec<Proposal>,
    /// Number of leading proposals that belong to the first stage.
    pub stage_boundary: usize,
    /// Predicted state after each proposal.
    pub states: Vec<EnvironmentState>,
}

impl SteeringSequence {
    pub fn final_state<'a>(&'a self, start: &'a EnvironmentState) -> &'a EnvironmentState {
        self.states.last().unwrap_or(start)
    }

    pub fn stage_two(&self) -> &[Proposal] {
        &self.proposals[self.stage_boundary..]
    }
}

/// `build_steering_sequence`: iterates [`steering_step`] until the predicted
/// state is a core solution.
///
/// The first stage lowers `‖a − x*‖₁` by exactly δ per proposal; anything
/// else is reported as an internal error, as is exceeding
/// `‖a₀ − x*‖₁/δ + 2n` steering steps.
pub fn build_steering_sequence(
    game: &TUGame,
    start: &EnvironmentState,
    witness: &CoreWitness,
) -> Result<SteeringSequence> {
    validate_witness(game, witness)?;
    if !is_feasible_state(game, start)? {
        return Err(Error::validation("steering requires a feasible start state"));
    }
    let x = &witness.allocation;
    let k_v = x.total();
    let guard = start.aspirations().l1_distance(x).steps() as usize + 2 * game.n_players();

    let mut seq = SteeringSequence {
        proposals: Vec::new(),
        stage_boundary: 0,
        states: Vec::new(),
    };
    let mut state = start.clone();
    let mut in_stage_two = false;
    for _ in 0..=guard {
        if classify_state(game, &state, k_v)? == StateClass::Core {
            if !in_stage_two {
                seq.stage_boundary = seq.proposals.len();
            }
            return Ok(seq);
        }
        let step = choose_step(game, &state, witness)?;
        let stage_one = matches!(step.class, StateClass::Psi { .. } | StateClass::Upsilon);
        if stage_one && in_stage_two {
            return Err(Error::Internal("steering re-entered the first stage".into()));
        }
        if !stage_one && !in_stage_two {
            in_stage_two = true;
            seq.stage_boundary = seq.proposals.len();
        }
        let before = state.aspirations().l1_distance(x);
        for p in step.proposals {
            state = predict(game, &state, p);
            seq.proposals.push(p);
            seq.states.push(state.clone());
        }
        if stage_one {
            let after = state.aspirations().l1_distance(x);
            if before - after != GridValue::STEP {
                return Err(Error::Internal(format!(
                    "first-stage move changed the distance to x* from {before} to {after}"
                )));
            }
        } else if state.aspirations() != start_aspirations_at_stage_two(&seq, start) {
            return Err(Error::Internal("second-stage move changed the aspirations".into()));
        }
    }
    Err(Error::Internal(format!(
        "steering did not reach the core within {guard} steps"
    )))
}

fn start_aspirations_at_stage_two<'a>(seq: &'a SteeringSequence, start: &'a EnvironmentState) -> &'a Allocation {
    if seq.stage_boundary == 0 {
        start.aspirations()
    } else {
        seq.states[seq.stage_boundary - 1].aspirations()
    }
}

/// Smallest-mask blocking coalition of an aspiration vector (re-exported for
/// oracle users).
pub fn blocking_coalition(game: &TUGame, a: &Allocation) -> Result<Option<Coalition>> {
    first_blocking_coalition(game, a)
}

/// All `n · 2^(n−1)` proposals of an `n`-player game, ordered by proposer
/// then by coalition mask.
pub fn all_proposals(n: usize) -> impl Iterator<Item = Proposal> {
    (0..n as Player).flat_map(move |i| {
        all_coalitions(n)
            .filter(move |c| c.contains(i))
            .map(move |c| Proposal::new(i, c).expect("contains proposer"))
    })
}
