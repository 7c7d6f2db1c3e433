//! Local time of FBM paths: the occupation-density profile, its
//! right-continuous inverse, and the two encodings of the persistence event.
//!
//! `cargo run --release --example local_time_profile -- [hurst]`

use ltpersist::generators::{derive_path_seed, sample_path, ProcessSpec};
use ltpersist::localtime::{
    atom_diagnostic, estimate_local_time, invert_profile, persistence_indicator,
    persistence_indicator_inverse, support_diagnostic, EpsilonRule,
};

fn main() -> ltpersist::Result<()> {
    let hurst: f64 = std::env::args().nth(1).map_or(0.7, |s| s.parse().expect("hurst"));
    let spec = ProcessSpec::fbm(hurst, 4096.0, 1 << 16);
    let times = [16.0, 64.0, 256.0, 1024.0, 4096.0];
    let threshold = 4.0;

    for i in 0..4 {
        let path = sample_path(&spec, derive_path_seed(11, i))?;
        let eps = EpsilonRule::default().for_path(&path);
        let profile = estimate_local_time(&path, eps)?;
        let inverse = invert_profile(&profile);
        let longest = inverse.jumps().iter().fold(0.0f64, |m, j| m.max(j.size));
        println!(
            "path {i}: epsilon {eps:.3e}, largest cell {:.3e}, occupied {:.4}, {} excursions (longest {longest:.1}), open tail {:?}",
            atom_diagnostic(&profile),
            support_diagnostic(&profile),
            inverse.jumps().len(),
            inverse.open_tail(),
        );
        for t in times {
            let direct = persistence_indicator(&profile, t, threshold)?;
            let via_inverse = persistence_indicator_inverse(&inverse, profile.horizon(), t, threshold)?;
            assert_eq!(direct, via_inverse);
            println!("  T = {t:>6}: l(0,T] = {:>8.4}, l <= {threshold}: {direct}", profile.at(t));
        }
    }
    Ok(())
}
