//! Samples one path of each family and prints a few summary numbers.
//!
//! `cargo run --release --example simulate_paths -- [grid_size] [out_dir]`
//! writes `t,x` CSVs when an output directory is given.

use std::fs::File;
use std::path::PathBuf;

use ltpersist::generators::{derive_path_seed, sample_path, ProcessSpec};

fn main() -> ltpersist::Result<()> {
    let mut args = std::env::args().skip(1);
    let n: usize = args.next().map_or(1 << 12, |s| s.parse().expect("grid size"));
    let out = args.next().map(PathBuf::from);

    let specs = [
        ("bm", ProcessSpec::bm(1.0, n)),
        ("fbm_h03", ProcessSpec::fbm(0.3, 1.0, n)),
        ("fbm_h07", ProcessSpec::fbm(0.7, 1.0, n)),
        ("rosenblatt_h075", ProcessSpec::rosenblatt(0.75, 1.0, n, 16)),
    ];
    let seed = derive_path_seed(2024, 0);
    println!("{:<16} {:>10} {:>10} {:>12}", "family", "X_1", "max |X|", "sum dX^2");
    for (name, spec) in &specs {
        let path = sample_path(spec, seed)?;
        let max = path.values.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let qv: f64 = path.values.windows(2).map(|w| (w[1] - w[0]).powi(2)).sum();
        println!("{name:<16} {:>10.4} {max:>10.4} {qv:>12.5}", path.values[n]);
        if let Some(dir) = &out {
            std::fs::create_dir_all(dir)?;
            path.write_csv(File::create(dir.join(format!("{name}.csv")))?)?;
        }
    }
    Ok(())
}
