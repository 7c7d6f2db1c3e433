//! The counting identity: the number of subintervals `((k-1)/n, k/n]` over
//! which `L` grows by more than `r` equals the number of jumps above `r`
//! once `1/n` separates the jumps.

use ltpersist::generators::{derive_path_seed, sample_path, ProcessSpec};
use ltpersist::localtime::{estimate_local_time, invert_profile, EpsilonRule, Jump, JumpFunction};
use ltpersist::pointprocess::count_heavy_subintervals;

fn main() -> ltpersist::Result<()> {
    let jumps = vec![
        Jump { location: 0.1, size: 2.0 },
        Jump { location: 0.13, size: 0.2 },
        Jump { location: 0.5, size: 1.5 },
        Jump { location: 0.52, size: 3.0 },
        Jump { location: 0.9, size: 0.7 },
    ];
    let f = JumpFunction::new(jumps, 0.0, 1.0)?;
    println!("synthetic: 3 jumps above r = 1, minimum gap 0.02");
    for n in [4, 16, 64, 256, 1024] {
        println!("  n = {n:>5}: {}", count_heavy_subintervals(&f, n, 1.0)?);
    }

    let spec = ProcessSpec::fbm(0.7, 4096.0, 1 << 16);
    let r = 50.0 * spec.delta();
    println!("FBM H = 0.7, r = 50 delta:");
    for i in 0..5 {
        let path = sample_path(&spec, derive_path_seed(8, i))?;
        let inv = invert_profile(&estimate_local_time(&path, EpsilonRule::default().for_path(&path))?);
        let counts: Vec<String> = [1 << 8, 1 << 10, 1 << 12]
            .iter()
            .map(|&n| count_heavy_subintervals(&inv, n, r).map_or("-".into(), |c| c.to_string()))
            .collect();
        println!("  path {i}: n = 2^8, 2^10, 2^12 -> {}", counts.join(", "));
    }
    Ok(())
}
