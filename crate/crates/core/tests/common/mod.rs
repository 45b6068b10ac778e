//! Independent reference checks for integration tests. Nothing here calls the
//! library's feasibility, core, welfare or classification code.

#![allow(dead_code)]

use coalition_dynamics::coalition::{Coalition, Player};
use coalition_dynamics::game::{Allocation, CoalitionStructure, EnvironmentState};
use coalition_dynamics::oracle::core_witness;
use coalition_dynamics::{GridValue, TUGame};
use rand::Rng;

pub fn c(ps: &[Player]) -> Coalition {
    Coalition::from_players(ps.iter().copied())
}

fn v(game: &TUGame, mask: u64) -> i64 {
    game.value(Coalition::from_mask(mask)).steps()
}

fn sum(a: &[i64], mask: u64) -> i64 {
    (0..a.len()).filter(|&i| mask >> i & 1 == 1).map(|i| a[i]).sum()
}

/// Maximum welfare by DP over submasks: `best(M) = max_{S ⊆ M, low(M) ∈ S} v(S) + best(M∖S)`.
pub fn kv_dp(game: &TUGame) -> i64 {
    let n = game.n_players();
    let full = (1u64 << n) - 1;
    let mut best = vec![0i64; 1 << n];
    for mask in 1..=full {
        let low = mask & mask.wrapping_neg();
        let rest = mask ^ low;
        let mut sub = rest;
        let mut b = i64::MIN;
        loop {
            let s = sub | low;
            b = b.max(v(game, s) + best[(mask ^ s) as usize]);
            if sub == 0 {
                break;
            }
            sub = (sub - 1) & rest;
        }
        best[mask as usize] = b;
    }
    best[full as usize]
}

/// `Σ_S a ≥ v(S)` for every nonempty `S`.
pub fn rational(game: &TUGame, a: &[i64]) -> bool {
    (1..1u64 << game.n_players()).all(|s| sum(a, s) >= v(game, s))
}

/// Core solution check against a list of blocks.
pub fn core_solution(game: &TUGame, a: &[i64], blocks: &[Coalition]) -> bool {
    let n = game.n_players();
    let mut seen = 0u64;
    for b in blocks {
        if b.mask() & seen != 0 || b.mask() == 0 {
            return false;
        }
        seen |= b.mask();
    }
    seen == (1u64 << n) - 1 && blocks.iter().all(|b| sum(a, b.mask()) == v(game, b.mask())) && rational(game, a)
}

/// Coalitions of a structure as masks, validating consistency.
pub fn structure_blocks(s: &CoalitionStructure) -> Option<Vec<Coalition>> {
    let mut out: Vec<Coalition> = Vec::new();
    for i in 0..s.len() {
        if let Some(ci) = s.of(i) {
            if !ci.contains(i) || ci.players().any(|j| s.of(j) != Some(ci)) {
                return None;
            }
            if !out.contains(&ci) {
                out.push(ci);
            }
        }
    }
    Some(out)
}

pub fn feasible(game: &TUGame, state: &EnvironmentState) -> bool {
    let a = state.aspirations().steps();
    let Some(blocks) = structure_blocks(state.structure()) else {
        return false;
    };
    (0..a.len()).all(|i| a[i] >= v(game, 1 << i)) && blocks.iter().all(|b| sum(&a, b.mask()) <= v(game, b.mask()))
}

pub fn is_partition(game: &TUGame, state: &EnvironmentState) -> bool {
    (0..game.n_players()).all(|i| state.structure().of(i).is_some())
}

pub fn in_core(game: &TUGame, state: &EnvironmentState) -> bool {
    is_partition(game, state)
        && core_solution(
            game,
            &state.aspirations().steps(),
            &structure_blocks(state.structure()).unwrap_or_default(),
        )
}

/// No coalition can form and every free player sits at its singleton value.
pub fn absorbing(game: &TUGame, state: &EnvironmentState) -> bool {
    let a = state.aspirations().steps();
    (1..1u64 << game.n_players()).all(|s| sum(&a, s) + 1 > v(game, s))
        && (0..a.len()).all(|i| state.structure().of(i).is_some() || a[i] == v(game, 1 << i))
}

/// Random integer game; singletons in `0..=1`, larger coalitions in `0..=max`.
pub fn random_game<R: Rng>(rng: &mut R, n: usize, max: i64) -> TUGame {
    let values: Vec<(Coalition, GridValue)> = (1..1u64 << n)
        .map(|m| {
            let s = Coalition::from_mask(m);
            let val = if s.len() == 1 {
                rng.gen_range(0..=1)
            } else {
                rng.gen_range(0..=max)
            };
            (s, GridValue(val))
        })
        .collect();
    TUGame::new(n, Default::default(), values).expect("valid random game")
}

/// Random games whose core the oracle finds nonempty; each witness is checked
/// here independently.
pub fn random_core_games<R: Rng>(rng: &mut R, n: usize, count: usize) -> Vec<TUGame> {
    let mut out = Vec::new();
    while out.len() < count {
        let g = random_game(rng, n, 6);
        if let Some(w) = core_witness(&g).expect("oracle runs") {
            assert!(core_solution(&g, &w.allocation.steps(), w.partition.blocks()));
            assert_eq!(w.allocation.steps().iter().sum::<i64>(), kv_dp(&g));
            out.push(g);
        }
    }
    out
}

/// Every consistent coalition structure on `n` players (each player free or
/// in one of a set of disjoint coalitions).
pub fn all_structures(n: usize) -> Vec<CoalitionStructure> {
    fn go(n: usize, i: usize, cur: &mut Vec<Option<Coalition>>, out: &mut Vec<CoalitionStructure>) {
        if i == n {
            out.push(CoalitionStructure::new(cur.clone()).expect("consistent"));
            return;
        }
        if cur[i].is_some() {
            go(n, i + 1, cur, out);
            return;
        }
        cur[i] = None;
        go(n, i + 1, cur, out);
        // coalitions whose lowest member is i, among still-unassigned players
        let free: Vec<Player> = (i + 1..n).filter(|&j| cur[j].is_none()).collect();
        for bits in 0..1u64 << free.len() {
            let members = Coalition::from_players(
                std::iter::once(i).chain((0..free.len()).filter(|k| bits >> k & 1 == 1).map(|k| free[k])),
            );
            for j in members.players() {
                cur[j] = Some(members);
            }
            go(n, i + 1, cur, out);
            for j in members.players() {
                cur[j] = None;
            }
        }
    }
    let mut out = Vec::new();
    go(n, 0, &mut vec![None; n], &mut out);
    out
}

/// Every aspiration vector with `a_i ∈ [lo_i, hi]`.
pub fn grid_box(lo: &[i64], hi: i64) -> Vec<Allocation> {
    let mut out = vec![Vec::new()];
    for &l in lo {
        out = out
            .into_iter()
            .flat_map(|p: Vec<i64>| {
                (l..=hi).map(move |x| {
                    let mut q = p.clone();
                    q.push(x);
                    q
                })
            })
            .collect();
    }
    out.into_iter().map(|s| Allocation::from_steps(&s)).collect()
}
