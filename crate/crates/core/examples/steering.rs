//! From any feasible state there is a finite proposal sequence into the
//! core. This builds one from a random reachable state, replays it through
//! the transition function and checks where it lands.
//!
//! `cargo run --example steering -- [seed]`

use coalition_dynamics::dynamics::apply_proposal_exact;
use coalition_dynamics::game::classify_state;
use coalition_dynamics::harness::random_reachable_state;
use coalition_dynamics::oracle::{build_steering_sequence, core_witness};
use coalition_dynamics::TUGame;

fn main() -> coalition_dynamics::Result<()> {
    let seed = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(3);
    let game = TUGame::from_integers(
        4,
        &[
            (&[0, 1], 4),
            (&[2, 3], 3),
            (&[0, 2], 2),
            (&[1, 2, 3], 5),
            (&[0, 1, 2, 3], 6),
        ],
    )?;
    let witness = core_witness(&game)?.expect("core is nonempty");
    let k_v = witness.allocation.total();
    println!("target {:?} in {:?}", witness.allocation.steps(), witness.partition);

    let start = random_reachable_state(&game, seed)?;
    println!(
        "start  {:?} {:?}",
        start.aspirations().steps(),
        start.structure().coalitions()
    );
    let seq = build_steering_sequence(&game, &start, &witness)?;

    let mut state = start.clone();
    for (k, p) in seq.proposals.iter().enumerate() {
        let stage = if k < seq.stage_boundary { 1 } else { 2 };
        let before = classify_state(&game, &state, k_v)?;
        apply_proposal_exact(&game, &mut state, *p)?;
        println!(
            "  stage {stage}: {before:?} -> player {} proposes {} -> {:?}",
            p.proposer() + 1,
            p.coalition(),
            state.aspirations().steps()
        );
    }
    assert_eq!(&state, seq.final_state(&start));
    println!(
        "end    {:?} {:?} ({:?})",
        state.aspirations().steps(),
        state.structure().coalitions(),
        classify_state(&game, &state, k_v)?
    );
    Ok(())
}
