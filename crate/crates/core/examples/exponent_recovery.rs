//! Persistence exponent of FBM: weighted log-log fit of the survival curve
//! over `[T_max / 64, T_max / 4]`, alongside the maximum-based cross-check.
//!
//! `cargo run --release --example exponent_recovery -- [hurst] [T_max] [n_paths]`

use ltpersist::generators::ProcessSpec;
use ltpersist::orchestration::{run_ensemble, ExperimentConfig};

fn main() -> ltpersist::Result<()> {
    let mut args = std::env::args().skip(1);
    let hurst: f64 = args.next().map_or(0.3, |s| s.parse().expect("hurst"));
    let horizon: f64 = args.next().map_or(1024.0, |s| s.parse().expect("T_max"));
    let n_paths: u64 = args.next().map_or(2000, |s| s.parse().expect("n_paths"));
    let spec = if hurst == 0.5 {
        ProcessSpec::bm(horizon, 1 << 16)
    } else {
        ProcessSpec::fbm(hurst, horizon, 1 << 16)
    };
    let cfg = ExperimentConfig::new(spec, n_paths, 3);
    let s = run_ensemble(&cfg)?.summarize(&cfg)?;

    println!("{:>10} {:>10} {:>10}", "T", "P(l<=1)", "P(max<=1)");
    for ((t, p), q) in s.curve.t_grid.iter().zip(&s.curve.survival).zip(&s.max_curve.survival) {
        println!("{t:>10.2} {p:>10.5} {q:>10.5}");
    }
    match s.fit.ok() {
        Some(f) => println!(
            "local time: kappa_hat = {:.4} ± {:.4} (1 - H = {:.2}), R^2 = {:.4}",
            f.kappa_hat, f.stderr_kappa, s.kappa_target, f.r_squared
        ),
        None => println!("local time: no fit ({:?})", s.fit),
    }
    if let Some(f) = s.max_fit.ok() {
        println!("maximum:    kappa_hat = {:.4} ± {:.4}", f.kappa_hat, f.stderr_kappa);
    }
    Ok(())
}
