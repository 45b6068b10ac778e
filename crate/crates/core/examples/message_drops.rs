//! Dissolution notices can be lost. A player who missed one still believes
//! it belongs to a coalition, which blocks its aspiration decrease after a
//! failed proposal, so totals can stick above the optimum.
//!
//! `cargo run --release --example message_drops`

use coalition_dynamics::dynamics::{run_with_sampler, DynamicsConfig};
use coalition_dynamics::task_alloc::{
    generate_seeded, optimal_welfare, to_game, PositiveProposals, ScenarioParams, DEFAULT_MAX_AGENTS_PER_PROPOSAL,
};

fn main() -> coalition_dynamics::Result<()> {
    let config = generate_seeded(0, ScenarioParams::REDUCED)?;
    let game = to_game(&config)?;
    let optimal = optimal_welfare(&config)?.steps() as f64;
    let sampler = PositiveProposals::new(&config, DEFAULT_MAX_AGENTS_PER_PROPOSAL)?;

    println!("drop   seed  relative  absorbed  stale  lost notices");
    for drop in [0.0, 0.01, 0.05, 0.2] {
        for seed in 0..3 {
            let cfg = DynamicsConfig {
                drop_probability: drop,
                ..DynamicsConfig::default().with_seed(seed).with_horizon(200_000)
            };
            let out = run_with_sampler(&game, &cfg, &sampler)?;
            let lost: usize = out.trace.iter().map(|s| s.dropped_notices.len()).sum();
            println!(
                "{drop:<5}  {seed:>4}  {:>8.3}  {:>8}  {:>5}  {lost:>12}",
                out.final_state.aspirations().total().steps() as f64 / optimal,
                out.absorbed,
                out.stale_beliefs.len(),
            );
        }
    }
    Ok(())
}
