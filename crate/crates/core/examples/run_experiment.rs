//! End to end: a JSON config, a run directory with checksummed artifacts,
//! and the Markdown report built from its manifest.
//!
//! `cargo run --release --example run_experiment -- [out_dir]`

use std::path::PathBuf;

use ltpersist::orchestration::{report_dirs, run_experiment, ExperimentConfig};

const CONFIG: &str = r#"{
  "schema_version": 1,
  "process": {"family": "FBM", "hurst": 0.7, "horizon": 1024.0, "grid_size": 16384},
  "n_paths": 500,
  "master_seed": 17,
  "excursions": {"dump_paths": 3}
}"#;

fn main() -> ltpersist::Result<()> {
    let out = std::env::args()
        .nth(1)
        .map_or_else(|| std::env::temp_dir().join("ltpersist_run"), PathBuf::from);
    let mut cfg = ExperimentConfig::from_json_str(CONFIG)?;
    cfg.output_dir = Some(out.clone());
    let manifest = run_experiment(&cfg)?;
    println!("config {}", manifest.config_hash);
    for (file, sum) in &manifest.outputs {
        println!("  {file:<22} {}", &sum[..16]);
    }
    let report = report_dirs(&[out]);
    print!("{}", report.markdown);
    Ok(())
}
