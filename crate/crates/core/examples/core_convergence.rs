//! A three-player game with a unique core point. Every pair is worth 2 and the
//! grand coalition 3, so the only core solution is (1, 1, 1) in the grand
//! coalition. The dynamics find it and stop.
//!
//! `cargo run --example core_convergence`

use coalition_dynamics::dynamics::{run, DynamicsConfig};
use coalition_dynamics::game::{classify_state, is_core_solution};
use coalition_dynamics::oracle::{core_witness, max_welfare};
use coalition_dynamics::TUGame;

fn main() -> coalition_dynamics::Result<()> {
    let game = TUGame::from_integers(3, &[(&[0, 1], 2), (&[0, 2], 2), (&[1, 2], 2), (&[0, 1, 2], 3)])?;
    let (k_v, rho) = max_welfare(&game)?;
    let witness = core_witness(&game)?.expect("core is nonempty");
    println!("K_v = {}, optimal partition {rho:?}", game.delta().format(k_v));
    println!("core witness {:?}", witness.allocation.steps());

    for seed in [1, 42, 7] {
        let out = run(&game, &DynamicsConfig::default().with_seed(seed).with_horizon(10_000))?;
        let last = &out.final_state;
        let partition = last
            .structure()
            .to_partition()
            .expect("absorbed states partition the players");
        println!(
            "seed {seed:>2}: absorbed after {:>3} rounds at {:?} {:?} ({:?}); core solution: {}",
            out.rounds,
            last.aspirations().steps(),
            partition,
            classify_state(&game, last, k_v)?,
            is_core_solution(&game, last.aspirations(), &partition)?,
        );
    }
    Ok(())
}
