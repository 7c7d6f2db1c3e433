//! Self-similarity, bi-scale invariance and increment stationarity, each a
//! two-sample KS test on split halves, plus the mis-specified power checks.
//!
//! `cargo run --release --example invariance_battery -- [hurst] [n_paths]`

use ltpersist::generators::ProcessSpec;
use ltpersist::orchestration::{run_ensemble, ExperimentConfig};

fn main() -> ltpersist::Result<()> {
    let mut args = std::env::args().skip(1);
    let hurst: f64 = args.next().map_or(0.5, |s| s.parse().expect("hurst"));
    let n_paths: u64 = args.next().map_or(4000, |s| s.parse().expect("n_paths"));
    let spec = if hurst == 0.5 {
        ProcessSpec::bm(64.0, 1 << 16)
    } else {
        ProcessSpec::fbm(hurst, 64.0, 1 << 16)
    };
    let mut cfg = ExperimentConfig::new(spec, n_paths, 9);
    // a wider window resolves more occupied cells per unit of local time
    cfg.epsilon_rule.scale = 2.0;
    cfg.tests.stationarity_x0 = 0.5;
    cfg.tests.stationarity_h = 0.5;
    cfg.tests.bi_scale_window = 0.125;
    let battery = run_ensemble(&cfg)?.battery(&cfg)?;
    print!("{}", battery.summary_table());
    println!("battery {}", if battery.passed() { "passed" } else { "failed" });
    Ok(())
}
