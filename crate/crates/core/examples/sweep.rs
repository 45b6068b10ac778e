//! A reduced sweep: random scenarios with a nonempty restricted core, every
//! algorithm on each, mean relative welfare curves and final summaries.
//!
//! `cargo run --release --example sweep -- [n_configs] [out_dir]`

use std::path::PathBuf;

use coalition_dynamics::harness::{sweep, write_report, SweepSpec};

fn main() -> coalition_dynamics::Result<()> {
    let mut args = std::env::args().skip(1);
    let n_configs = args.next().and_then(|s| s.parse().ok()).unwrap_or(10);
    let out: Option<PathBuf> = args.next().map(PathBuf::from);

    let spec = SweepSpec {
        n_configs,
        ..SweepSpec::default()
    };
    let report = sweep(&spec)?;
    for s in &report.summaries {
        println!("{s}");
    }
    let step = (report.rounds.len() / 8).max(1);
    print!("{:>8}", "round");
    for alg in &report.algorithms {
        print!("  {:>8}", alg.label());
    }
    println!();
    for k in (0..report.rounds.len()).step_by(step) {
        print!("{:>8}", report.rounds[k]);
        for alg in &report.algorithms {
            print!("  {:>8.3}", report.curve(*alg).map_or(f64::NAN, |c| c[k]));
        }
        println!();
    }
    if let Some(dir) = out {
        write_report(&spec, &report, &dir)?;
        println!("wrote {}", dir.display());
    }
    Ok(())
}
