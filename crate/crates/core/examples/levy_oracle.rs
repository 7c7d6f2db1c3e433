//! Brownian persistence against Lévy's law `P(l(0, T] <= 1) = erf(1/sqrt(2T))`.
//!
//! `cargo run --release --example levy_oracle -- [n_paths]`

use ltpersist::generators::ProcessSpec;
use ltpersist::orchestration::{run_ensemble, ExperimentConfig};

fn main() -> ltpersist::Result<()> {
    let n_paths: u64 = std::env::args().nth(1).map_or(10_000, |s| s.parse().expect("n_paths"));
    let mut cfg = ExperimentConfig::new(ProcessSpec::bm(64.0, 1 << 16), n_paths, 1);
    cfg.tests.power_checks = false;
    let summary = run_ensemble(&cfg)?.summarize(&cfg)?;
    println!("{:>8} {:>9} {:>9} {:>9} {:>5}", "T", "survival", "exact", "tol", "ok");
    for r in summary.oracle.iter().step_by(2) {
        println!("{:>8.3} {:>9.5} {:>9.5} {:>9.5} {:>5}", r.t, r.survival, r.exact, r.tolerance, r.pass);
    }
    Ok(())
}
