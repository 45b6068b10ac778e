//! Games can be written as JSON with fractional values on a δ-grid. This
//! parses one, runs the exact oracles, and shows that a finer grid can turn
//! up core points the coarse grid misses.
//!
//! `cargo run --example game_file_oracle`

use coalition_dynamics::game::{validate_game, GameFile};
use coalition_dynamics::oracle::{core_grid_points, core_witness, max_welfare};

fn main() -> coalition_dynamics::Result<()> {
    let file: GameFile = serde_json::from_str(
        r#"{
            "n": 3,
            "delta": "1/2",
            "values": { "1": 0.5, "1,2": 2, "1,3": "5/2", "2,3": 2, "1,2,3": 3.5 }
        }"#,
    )
    .expect("well-formed JSON");
    assert!(validate_game(&file)?.is_empty());
    let game = file.into_game()?;
    let delta = game.delta();

    let (k_v, rho) = max_welfare(&game)?;
    println!("δ = {delta}, K_v = {}, optimal partition {rho:?}", delta.format(k_v));

    match core_witness(&game)? {
        Some(w) => {
            let x: Vec<String> = w.allocation.as_slice().iter().map(|&v| delta.format(v)).collect();
            println!("core witness ({}) with {:?}", x.join(", "), w.partition);
        }
        None => println!("no core point on this grid"),
    }
    for factor in [1, 2, 4] {
        let fine = game.refined(factor);
        let points = core_grid_points(&fine, 10_000)?;
        println!("δ = {}: {} core grid points", fine.delta(), points.len());
    }

    // values off the grid are rejected with the offending coalitions listed
    let bad: GameFile = serde_json::from_str(r#"{"n": 2, "delta": "1/2", "values": {"1,2": 0.3}}"#).unwrap();
    println!("off-grid coalitions: {:?}", validate_game(&bad)?.off_grid);
    Ok(())
}
