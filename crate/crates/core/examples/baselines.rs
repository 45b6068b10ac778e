//! Coalition Proposal against best-reply dynamics on one scenario. Best
//! reply sees every demand and the whole structure; plain best reply often
//! stops early, the experimentation variants keep perturbing demands.
//!
//! `cargo run --release --example baselines -- [seed]`

use coalition_dynamics::harness::{run_algorithm, Algorithm, LoadedGame, RunSettings};
use coalition_dynamics::task_alloc::{generate_seeded, ScenarioParams};

fn main() -> coalition_dynamics::Result<()> {
    let seed = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(4);
    let loaded = LoadedGame::from_scenario(generate_seeded(seed, ScenarioParams::REDUCED)?)?;
    let optimal = loaded.optimal_welfare()?;
    println!("optimal welfare {}", optimal.steps());

    let settings = RunSettings::default();
    for alg in Algorithm::ALL {
        let run = run_algorithm(&loaded, alg, &settings, seed)?;
        let total = run.final_total(&loaded.game);
        // welfare at a few checkpoints
        let checkpoints: Vec<String> = [10, 100, 1_000, 10_000]
            .iter()
            .map(|&r| format!("{:.2}", run.total_at(r).steps() as f64 / optimal.steps() as f64))
            .collect();
        println!(
            "{:<8} final {:.3}  stopped: {:<5} rounds {:>6}  at 10/100/1k/10k: {}",
            alg.label(),
            total.steps() as f64 / optimal.steps() as f64,
            run.absorbed(),
            run.rounds(),
            checkpoints.join(" ")
        );
    }
    Ok(())
}
