//! Acceptance gate. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any fails. Tolerances are exact unless a criterion states a
//! band.

mod common;

use std::collections::{HashSet, VecDeque};
use std::time::Instant;

use coalition_dynamics::dynamics::{
    apply_proposal_exact, init_state, is_absorbing, run, write_trace_csv, DynamicsConfig,
};
use coalition_dynamics::game::{classify_state, is_feasible_state, Allocation, EnvironmentState, StateClass};
use coalition_dynamics::harness::{sweep, write_report, Algorithm, RunSettings, SweepFilter, SweepSpec};
use coalition_dynamics::oracle::{
    all_proposals, build_steering_sequence, core_grid_points, core_witness, enumerate_partitions, max_welfare,
};
use coalition_dynamics::task_alloc::{generate_seeded, optimal_welfare, ScenarioParams, TaskConfig};
use coalition_dynamics::TUGame;
use common::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const HORIZON: u64 = 100_000;
/// Hard cap for sweep runs; Coalition Proposal stops at absorption.
const SWEEP_HORIZON: u64 = 1_000_000;
const RUNS_PER_GAME: u64 = 100;

fn g2() -> TUGame {
    TUGame::from_integers(2, &[(&[0, 1], 2)]).unwrap()
}

fn g3c() -> TUGame {
    TUGame::from_integers(3, &[(&[0, 1], 2), (&[0, 2], 2), (&[1, 2], 2), (&[0, 1, 2], 3)]).unwrap()
}

fn g3e() -> TUGame {
    TUGame::from_integers(3, &[(&[0, 1], 2), (&[0, 2], 2), (&[1, 2], 2), (&[0, 1, 2], 2)]).unwrap()
}

/// G2, G3C and 20 random 4-player games with a nonempty core.
fn convergence_games() -> Vec<(String, TUGame)> {
    let mut games = vec![("G2".to_string(), g2()), ("G3C".to_string(), g3c())];
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for (k, g) in random_core_games(&mut rng, 4, 20).into_iter().enumerate() {
        games.push((format!("R4-{k}"), g));
    }
    games
}

type Outcome = Result<String, String>;

struct Runs {
    /// (game index, seed, final state, absorbed, rounds, trace csv)
    finals: Vec<(usize, u64, EnvironmentState, bool, u64, Vec<u8>)>,
}

fn run_all(games: &[(String, TUGame)]) -> Runs {
    let mut finals = Vec::new();
    for (gi, (_, g)) in games.iter().enumerate() {
        for seed in 0..RUNS_PER_GAME {
            let cfg = DynamicsConfig::default().with_seed(seed).with_horizon(HORIZON);
            let out = run(g, &cfg).unwrap();
            let mut csv = Vec::new();
            write_trace_csv(g, &out.trace, &mut csv).unwrap();
            finals.push((gi, seed, out.final_state, out.absorbed, out.rounds, csv));
        }
    }
    Runs { finals }
}

fn criterion_1(games: &[(String, TUGame)], runs: &Runs) -> Outcome {
    let mut worst = 0;
    for (gi, seed, state, absorbed, rounds, _) in &runs.finals {
        let g = &games[*gi].1;
        if !absorbed || !absorbing(g, state) || !in_core(g, state) || *rounds > HORIZON {
            return Err(format!("{} seed {seed}: not absorbed in the core", games[*gi].0));
        }
        worst = worst.max(*rounds);
    }
    Ok(format!(
        "{} runs on {} games absorbed in the core; slowest {worst} rounds",
        runs.finals.len(),
        games.len()
    ))
}

fn criterion_2(games: &[(String, TUGame)], runs: &Runs) -> Outcome {
    let kv: Vec<i64> = games.iter().map(|(_, g)| kv_dp(g)).collect();
    for (gi, (name, g)) in games.iter().enumerate() {
        let (k, _) = max_welfare(g).map_err(|e| e.to_string())?;
        if k.steps() != kv[gi] {
            return Err(format!("{name}: oracle K_v {} vs submask DP {}", k.steps(), kv[gi]));
        }
    }
    for (gi, seed, state, ..) in &runs.finals {
        let total = state.aspirations().total().steps();
        if total != kv[*gi] {
            return Err(format!("{} seed {seed}: Σa = {total}, K_v = {}", games[*gi].0, kv[*gi]));
        }
    }
    Ok(format!("Σa = K_v on all {} absorbed states", runs.finals.len()))
}

/// Replays every trace proposal by proposal and checks each state.
fn criterion_3(games: &[(String, TUGame)]) -> Outcome {
    let mut states = 0u64;
    for (name, g) in games {
        for seed in 0..RUNS_PER_GAME {
            let cfg = DynamicsConfig::default().with_seed(seed).with_horizon(HORIZON);
            let out = run(g, &cfg).unwrap();
            let mut s = out.initial.clone();
            if !feasible(g, &s) {
                return Err(format!("{name} seed {seed}: initial state infeasible"));
            }
            for rec in &out.trace {
                apply_proposal_exact(g, &mut s, rec.proposal).unwrap();
                states += 1;
                if !feasible(g, &s) || s.aspirations().total() != rec.total_aspiration {
                    return Err(format!("{name} seed {seed} round {}: infeasible state", rec.round));
                }
            }
            if s != out.final_state {
                return Err(format!("{name} seed {seed}: replay diverged"));
            }
        }
    }
    Ok(format!("{states} visited states feasible"))
}

fn criterion_4(games: &[(String, TUGame)]) -> Outcome {
    let mut checked = 0;
    for (name, g) in games {
        let k = kv_dp(g);
        let optimal: Vec<_> = enumerate_partitions(g.n_players())
            .unwrap()
            .filter(|p| p.welfare(g).steps() == k)
            .collect();
        for x in core_grid_points(g, 10_000).unwrap() {
            for rho in &optimal {
                if !core_solution(g, &x.steps(), rho.blocks()) {
                    continue;
                }
                let start = EnvironmentState::from_solution(&x, rho).unwrap();
                for p in all_proposals(g.n_players()) {
                    let mut s = start.clone();
                    apply_proposal_exact(g, &mut s, p).unwrap();
                    if s != start {
                        return Err(format!("{name}: proposal {p:?} moves core state {x:?}"));
                    }
                }
                checked += 1;
            }
        }
    }
    Ok(format!("{checked} core solutions unchanged under every proposal"))
}

fn criterion_5() -> Outcome {
    let g = g3e();
    let start = init_state(&g, &DynamicsConfig::default()).unwrap();
    let mut seen = HashSet::new();
    let mut queue = VecDeque::from([start.clone()]);
    seen.insert(start);
    while let Some(s) = queue.pop_front() {
        let mut moves = false;
        for p in all_proposals(3) {
            let mut t = s.clone();
            apply_proposal_exact(&g, &mut t, p).unwrap();
            if t != s {
                moves = true;
            }
            if seen.insert(t.clone()) {
                queue.push_back(t);
            }
        }
        if !moves || absorbing(&g, &s) || is_absorbing(&g, &s).unwrap() {
            return Err(format!("reachable state {s:?} admits no change"));
        }
    }
    let out = run(&g, &DynamicsConfig::default().with_seed(1).with_horizon(HORIZON)).unwrap();
    if out.absorbed || out.rounds != HORIZON {
        return Err("seeded run absorbed on the empty-core game".into());
    }
    Ok(format!(
        "{} reachable states all movable; {HORIZON}-round run never absorbed",
        seen.len()
    ))
}

fn random_feasible_state<R: Rng>(
    rng: &mut R,
    g: &TUGame,
    structures: &[coalition_dynamics::game::CoalitionStructure],
) -> EnvironmentState {
    let kv = kv_dp(g);
    loop {
        let a: Vec<i64> = (0..g.n_players())
            .map(|i| rng.gen_range(g.singleton_value(i).steps()..=kv + 2))
            .collect();
        let st = structures[rng.gen_range(0..structures.len())].clone();
        let s = EnvironmentState::new(Allocation::from_steps(&a), st).unwrap();
        if feasible(g, &s) {
            return s;
        }
    }
}

fn criterion_6() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(66);
    let mut games = vec![g3c()];
    games.extend(random_core_games(&mut rng, 4, 10));
    let mut total = 0;
    for g in &games {
        let w = core_witness(g).unwrap().expect("nonempty core");
        let structures = all_structures(g.n_players());
        for _ in 0..50 {
            let start = random_feasible_state(&mut rng, g, &structures);
            let seq = build_steering_sequence(g, &start, &w).map_err(|e| format!("{e} from {start:?}"))?;
            let x = w.allocation.steps();
            let dist = |s: &EnvironmentState| -> i64 {
                s.aspirations().steps().iter().zip(&x).map(|(a, b)| (a - b).abs()).sum()
            };
            let mut prev = dist(&start);
            for k in 0..seq.stage_boundary {
                let d = dist(&seq.states[k]);
                if prev - d != 1 {
                    return Err(format!("stage 1 step {k} changed ‖a − x*‖₁ from {prev} to {d}"));
                }
                prev = d;
            }
            let stage_two = seq.proposals.len() - seq.stage_boundary;
            if stage_two > 2 * w.partition.len() {
                return Err(format!(
                    "stage 2 used {stage_two} proposals, |ρ*| = {}",
                    w.partition.len()
                ));
            }
            let mut s = start.clone();
            for p in &seq.proposals {
                apply_proposal_exact(g, &mut s, *p).unwrap();
            }
            if !in_core(g, &s) {
                return Err(format!("replay from {start:?} ended outside the core"));
            }
            total += 1;
        }
    }
    Ok(format!(
        "{total} sequences terminate, shrink ‖a − x*‖₁ by δ per stage-1 step and end in the core"
    ))
}

fn criterion_7() -> Outcome {
    let mut states = 0;
    for (name, g) in [("G3C", g3c()), ("G3E", g3e())] {
        let k = kv_dp(&g);
        let (oracle_k, _) = max_welfare(&g).unwrap();
        let lo: Vec<i64> = (0..3).map(|i| g.singleton_value(i).steps()).collect();
        for a in grid_box(&lo, k + 2) {
            for st in all_structures(3) {
                let s = EnvironmentState::new(a.clone(), st).unwrap();
                if !feasible(&g, &s) {
                    continue;
                }
                let steps = a.steps();
                let psi = !rational(&g, &steps);
                let total: i64 = steps.iter().sum();
                let upsilon = !psi && total > k;
                let pi = !psi && total == k && in_core(&g, &s);
                let gamma = !psi && total == k && !is_partition(&g, &s);
                let hits = [pi, gamma, upsilon, psi].iter().filter(|b| **b).count();
                if hits != 1 {
                    return Err(format!("{name} {s:?}: {hits} classes hold"));
                }
                let got = classify_state(&g, &s, oracle_k).map_err(|e| e.to_string())?;
                let agrees = match got {
                    StateClass::Core => pi,
                    StateClass::Gamma => gamma,
                    StateClass::Upsilon => upsilon,
                    StateClass::Psi { blocking } => psi && a.sum_over(blocking) < g.value(blocking),
                };
                if !agrees || !is_feasible_state(&g, &s).unwrap() {
                    return Err(format!("{name} {s:?}: classified {got:?}"));
                }
                states += 1;
            }
        }
    }
    Ok(format!("{states} feasible states, exactly one class each"))
}

/// Task value straight from the matrices.
fn reference_task_value(c: &TaskConfig, t: usize, agents: &[usize]) -> i64 {
    if agents.is_empty() {
        return 0;
    }
    for f in 0..c.k {
        let have: u32 = agents.iter().map(|&a| (c.features[a] >> f) & 1).sum();
        let need = (c.requirements[t] >> f) & 1;
        if have < need {
            return 0;
        }
    }
    let worth = c.worth_scale * (0..c.k).map(|f| i64::from((c.requirements[t] >> f) & 1)).sum::<i64>();
    let lt = c.locations[c.m + t];
    let cost: i64 = agents
        .iter()
        .map(|&a| (c.locations[a][0] - lt[0]).abs() + (c.locations[a][1] - lt[1]).abs())
        .sum();
    (worth - cost).max(0)
}

fn exhaustive_assignment(c: &TaskConfig) -> i64 {
    let choices = c.n_tasks + 1;
    let mut best = 0;
    let mut code = vec![0usize; c.m];
    loop {
        let mut total = 0;
        for t in 0..c.n_tasks {
            let group: Vec<usize> = (0..c.m).filter(|&a| code[a] == t + 1).collect();
            total += reference_task_value(c, t, &group);
        }
        best = best.max(total);
        let mut i = 0;
        while i < c.m {
            code[i] += 1;
            if code[i] < choices {
                break;
            }
            code[i] = 0;
            i += 1;
        }
        if i == c.m {
            return best;
        }
    }
}

fn criterion_8() -> Outcome {
    let mut nonzero = 0;
    for seed in 0..20 {
        let c = generate_seeded(seed, ScenarioParams::REDUCED).unwrap();
        let dp = optimal_welfare(&c).unwrap().steps();
        let brute = exhaustive_assignment(&c);
        if dp != brute {
            return Err(format!("seed {seed}: DP {dp}, exhaustive {brute}"));
        }
        nonzero += usize::from(dp > 0);
    }
    Ok(format!(
        "20 configs (m = 6) match exhaustive enumeration; {nonzero} with positive optimum"
    ))
}

fn sweep_spec(drop: f64) -> SweepSpec {
    SweepSpec {
        params: ScenarioParams::REDUCED,
        n_configs: 50,
        filter: SweepFilter::RestrictedCore,
        // drops only affect Coalition Proposal
        algorithms: if drop > 0.0 {
            vec![Algorithm::CoalitionProposal]
        } else {
            Algorithm::ALL.to_vec()
        },
        seed: 1,
        settings: RunSettings {
            horizon: SWEEP_HORIZON,
            drop_probability: drop,
            ..RunSettings::default()
        },
        parallel: false,
        ..SweepSpec::default()
    }
}

fn criterion_9(dir: &std::path::Path) -> Outcome {
    let t = Instant::now();
    let spec = sweep_spec(0.0);
    let rep = sweep(&spec).map_err(|e| e.to_string())?;
    let secs = t.elapsed().as_secs_f64();
    write_report(&spec, &rep, dir).map_err(|e| e.to_string())?;
    let header = std::fs::read_to_string(dir.join("curves.csv")).unwrap();
    if !header.starts_with("round,CP,BR,BRExp-A,BRExp-B\n") {
        return Err("curve columns differ from CP,BR,BRExp-A,BRExp-B".into());
    }
    for row in rep.finals.iter().filter(|r| r.algorithm == "CP") {
        if !row.absorbed || row.final_total != row.optimal {
            return Err(format!(
                "config {}: CP ended at {}/{}",
                row.config, row.final_total, row.optimal
            ));
        }
    }
    let cp = rep.summary(Algorithm::CoalitionProposal).unwrap();
    let br = rep.summary("BR".parse().unwrap()).unwrap();
    if cp.mean_final_relative_welfare != 1.0 || br.mean_final_relative_welfare > cp.mean_final_relative_welfare {
        return Err(format!(
            "CP mean {}, BR mean {}",
            cp.mean_final_relative_welfare, br.mean_final_relative_welfare
        ));
    }
    if secs > 600.0 {
        return Err(format!("sweep took {secs:.0}s single-threaded"));
    }
    let mean = |a: &str| rep.summary(a.parse().unwrap()).unwrap().mean_final_relative_welfare;
    Ok(format!(
        "CP 1.000000 (all absorbed), BR {:.6}, BRExp-A {:.6}, BRExp-B {:.6}; {secs:.1}s single-threaded",
        mean("BR"),
        mean("BRExp-A"),
        mean("BRExp-B")
    ))
}

fn criterion_10() -> Outcome {
    let spec = SweepSpec {
        algorithms: vec![Algorithm::CoalitionProposal],
        ..sweep_spec(0.05)
    };
    let rep = sweep(&spec).map_err(|e| e.to_string())?;
    let cp = rep.summary(Algorithm::CoalitionProposal).unwrap();
    if cp.mean_final_relative_welfare < 0.9 {
        return Err(format!("CP mean {:.6} < 0.9", cp.mean_final_relative_welfare));
    }
    Ok(format!(
        "CP mean {:.6} ≥ 0.9 with drop probability 0.05 ({:.0}% absorbed)",
        cp.mean_final_relative_welfare,
        100.0 * cp.fraction_absorbed
    ))
}

fn criterion_11(games: &[(String, TUGame)], runs: &Runs, first: &std::path::Path, second: &std::path::Path) -> Outcome {
    let again = run_all(games);
    for (a, b) in runs.finals.iter().zip(&again.finals) {
        if a.5 != b.5 {
            return Err(format!("{} seed {}: trace differs", games[a.0].0, a.1));
        }
    }
    let spec = sweep_spec(0.0);
    let rep = sweep(&spec).map_err(|e| e.to_string())?;
    write_report(&spec, &rep, second).map_err(|e| e.to_string())?;
    for f in ["curves.csv", "finals.csv", "report.json"] {
        if std::fs::read(first.join(f)).unwrap() != std::fs::read(second.join(f)).unwrap() {
            return Err(format!("{f} differs between sweeps"));
        }
    }
    Ok(format!(
        "{} traces and 3 sweep report files byte-identical",
        runs.finals.len()
    ))
}

type Criterion<'a> = Box<dyn Fn() -> Outcome + 'a>;

fn main() {
    let dir = tempfile::tempdir().unwrap();
    let (first, second) = (dir.path().join("a"), dir.path().join("b"));
    let games = convergence_games();
    let runs = run_all(&games);
    let criteria: Vec<(&str, Criterion<'_>)> = vec![
        ("convergence to the core", Box::new(|| criterion_1(&games, &runs))),
        ("absorbed total equals K_v", Box::new(|| criterion_2(&games, &runs))),
        ("feasibility along traces", Box::new(|| criterion_3(&games))),
        ("core solutions absorb", Box::new(|| criterion_4(&games))),
        ("empty core never absorbs", Box::new(criterion_5)),
        ("steering sequences", Box::new(criterion_6)),
        ("classification partitions states", Box::new(criterion_7)),
        ("task optimum matches enumeration", Box::new(criterion_8)),
        ("sweep: CP reaches optimum, BR ≤ CP", Box::new(|| criterion_9(&first))),
        ("sweep with 5% drops", Box::new(criterion_10)),
        ("determinism", Box::new(|| criterion_11(&games, &runs, &first, &second))),
    ];
    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let result = std::panic::catch_unwind(std::panic::AssertUnwindSafe(check))
            .unwrap_or_else(|_| Err("panicked".to_string()));
        let secs = t.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("PASS  {:>2}. {name}: {detail} [{secs:.1}s]", k + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL  {:>2}. {name}: {detail} [{secs:.1}s]", k + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
