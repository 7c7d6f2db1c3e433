//! Persistence of the Rosenblatt process through the lattice scheme.
//!
//! `cargo run --release --example rosenblatt_persistence -- [n_paths]`

use ltpersist::generators::{ProcessSpec, RosenblattGenerator};
use ltpersist::orchestration::{run_ensemble, ExperimentConfig};

fn main() -> ltpersist::Result<()> {
    let n_paths: u64 = std::env::args().nth(1).map_or(1000, |s| s.parse().expect("n_paths"));
    let spec = ProcessSpec::rosenblatt(0.75, 4096.0, 1 << 13, 16);
    println!("normalization {:.6}", RosenblattGenerator::new(&spec)?.normalization());
    let mut cfg = ExperimentConfig::new(spec, n_paths, 13);
    cfg.tests.power_checks = false;
    let s = run_ensemble(&cfg)?.summarize(&cfg)?;
    for (t, p) in s.curve.t_grid.iter().zip(&s.curve.survival) {
        println!("{t:>10.2} {p:>9.5}");
    }
    if let Some(f) = s.fit.ok() {
        println!("kappa_hat = {:.4} ± {:.4} (1 - H = 0.25)", f.kappa_hat, f.stderr_kappa);
    }
    Ok(())
}
