//! Tail of the excursion marks of the inverse local time: Hill estimators
//! (with and without the censored last excursion), a log-log count fit and
//! the `N(> r) / N(> 4r)` intensity ratio, all targeting `1 - H`.
//!
//! `cargo run --release --example excursion_tail -- [hurst] [n_paths]`

use ltpersist::generators::ProcessSpec;
use ltpersist::orchestration::{run_ensemble, ExperimentConfig};

fn main() -> ltpersist::Result<()> {
    let mut args = std::env::args().skip(1);
    let hurst: f64 = args.next().map_or(0.7, |s| s.parse().expect("hurst"));
    let n_paths: u64 = args.next().map_or(2000, |s| s.parse().expect("n_paths"));
    let cfg = ExperimentConfig::new(ProcessSpec::fbm(hurst, 4096.0, 1 << 16), n_paths, 5);
    let t = run_ensemble(&cfg)?.summarize(&cfg)?.tail;

    println!("target 1 - H = {:.3}, marks above {:.4}", 1.0 - hurst, t.floor);
    for (name, fit) in [("censored Hill", &t.censored_hill), ("Hill", &t.hill), ("log-log", &t.loglog)] {
        match fit.ok() {
            Some(f) => println!("{name:<14} alpha = {:.4} ± {:.4} (k = {})", f.exponent, f.stderr, f.k_used),
            None => println!("{name:<14} unavailable"),
        }
    }
    if let Some(r) = t.ratio.ok() {
        println!("ratio N(>r)/N(>4r) = {:.4} ± {:.4}, expected {:.4}", r.ratio, r.stderr, t.ratio_target);
    }
    println!("{:>12} {:>9} {:>14}", "threshold", "count", "per unit l");
    for (m, c, d) in &t.loglog_rows {
        println!("{m:>12.5} {c:>9} {d:>14.5}");
    }
    Ok(())
}
