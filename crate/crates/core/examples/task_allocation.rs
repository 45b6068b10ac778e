//! The agents-and-tasks scenario: agents carry features, tasks require them,
//! and a coalition of agents with one task is worth the task's worth less the
//! agents' travel distance. Agents only propose positive coalitions.
//!
//! `cargo run --release --example task_allocation -- [seed] [full]`
//!
//! The reduced scale (6 agents, 8 tasks) absorbs within a few thousand
//! rounds. At 10 agents and 20 tasks, runs typically need millions of rounds.

use coalition_dynamics::dynamics::{run_with_sampler, DynamicsConfig};
use coalition_dynamics::task_alloc::{
    generate_seeded, layout_json, optimal_assignment, restricted_core_witness, to_game, PositiveProposals,
    ScenarioParams, DEFAULT_MAX_AGENTS_PER_PROPOSAL,
};

fn main() -> coalition_dynamics::Result<()> {
    let seed = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(0);
    let full = std::env::args().nth(2).is_some_and(|s| s == "full");
    let params = if full {
        ScenarioParams::FULL
    } else {
        ScenarioParams::REDUCED
    };
    let config = generate_seeded(seed, params)?;
    let game = to_game(&config)?;
    println!(
        "{} agents, {} tasks, {} features; {} positive coalitions",
        config.m,
        config.n_tasks,
        config.k,
        game.support_len()
    );

    let best = optimal_assignment(&config)?;
    println!("optimal welfare {}", best.welfare.steps());
    for (t, agents) in &best.groups {
        let names: Vec<String> = agents.players().map(|a| format!("a{}", a + 1)).collect();
        println!("  task {} <- {}", t + 1, names.join(" "));
    }
    match restricted_core_witness(&config)? {
        Some(w) => println!("restricted core witness {:?}", &w.allocation.steps()[..config.m]),
        None => println!("no restricted core solution; the run below may cycle"),
    }

    let sampler = PositiveProposals::new(&config, DEFAULT_MAX_AGENTS_PER_PROPOSAL)?;
    let out = run_with_sampler(
        &game,
        &DynamicsConfig::default().with_seed(seed).with_horizon(100_000),
        &sampler,
    )?;
    let total = out.final_state.aspirations().total();
    println!(
        "Coalition Proposal: total {} after {} rounds (absorbed: {}), relative welfare {:.3}",
        total.steps(),
        out.rounds,
        out.absorbed,
        total.steps() as f64 / best.welfare.steps() as f64
    );
    println!(
        "{}",
        serde_json::to_string(&layout_json(&config, &out.final_state)).unwrap()
    );
    Ok(())
}
