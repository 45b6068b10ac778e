//! Lowering the grand coalition to 2 empties the core: the three pair
//! constraints need a total of at least 3 but only 2 is available. The
//! dynamics never absorb and keep cycling through feasible states.
//!
//! `cargo run --release --example empty_core_cycling`

use std::collections::BTreeMap;

use coalition_dynamics::dynamics::{is_absorbing, run, DynamicsConfig};
use coalition_dynamics::game::is_feasible_state;
use coalition_dynamics::oracle::core_witness;
use coalition_dynamics::TUGame;

fn main() -> coalition_dynamics::Result<()> {
    let game = TUGame::from_integers(3, &[(&[0, 1], 2), (&[0, 2], 2), (&[1, 2], 2), (&[0, 1, 2], 2)])?;
    assert!(core_witness(&game)?.is_none());
    println!("core: empty");

    let out = run(&game, &DynamicsConfig::default().with_seed(5).with_horizon(100_000))?;
    println!("absorbed: {} after {} rounds", out.absorbed, out.rounds);
    println!("final state feasible: {}", is_feasible_state(&game, &out.final_state)?);
    println!("final state absorbing: {}", is_absorbing(&game, &out.final_state)?);

    // how often each total aspiration level was visited
    let mut visits: BTreeMap<i64, u64> = BTreeMap::new();
    for step in &out.trace {
        *visits.entry(step.total_aspiration.steps()).or_default() += 1;
    }
    println!("total aspiration histogram:");
    for (total, n) in visits {
        println!("  {total}: {n}");
    }
    let formed = out.trace.iter().filter(|s| s.success).count();
    let dissolved: usize = out.trace.iter().map(|s| s.dissolved.len()).sum();
    println!("{formed} coalitions formed, {dissolved} dissolved");
    Ok(())
}
