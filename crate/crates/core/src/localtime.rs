//! Occupation-density local time at level 0, its cumulative profile and
//! the right-continuous inverse.
//!
//! The profile is stored on the path grid and read between grid points by
//! linear interpolation, so `t -> l(0, t]` is continuous and non-decreasing.
//! Its inverse `L_x = inf { t : l(0, t] > x }` is then exactly
//! `drift * x + (sum of jumps located at or before x)`, where each maximal
//! run of grid cells without occupation is one jump and `drift` is the
//! time spent in occupied cells per unit of local time.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::generators::SamplePath;

/// How the space window `epsilon` is tied to the grid step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EpsilonRule {
    pub scale: f64,
    /// `epsilon = scale * delta^H` when set, otherwise `epsilon = scale`.
    pub exponent_is_hurst: bool,
}

impl Default for EpsilonRule {
    fn default() -> Self {
        Self {
            scale: 0.5,
            exponent_is_hurst: true,
        }
    }
}

impl EpsilonRule {
    pub fn epsilon(&self, delta: f64, hurst: f64) -> f64 {
        if self.exponent_is_hurst {
            self.scale * delta.powf(hurst)
        } else {
            self.scale
        }
    }

    pub fn for_path(&self, path: &SamplePath) -> f64 {
        self.epsilon(path.delta(), path.hurst())
    }
}

/// Cumulative local time `l(0, k delta]` on the grid, `k = 0..=n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalTimeProfile {
    /// Seed of the source path.
    pub path_ref: u64,
    pub epsilon: f64,
    pub delta: f64,
    pub cumulative: Vec<f64>,
}

impl LocalTimeProfile {
    /// Builds a profile from explicit cumulative values.
    pub fn from_cumulative(delta: f64, epsilon: f64, cumulative: Vec<f64>) -> Result<Self> {
        if !(delta > 0.0) || !(epsilon > 0.0) {
            return Err(Error::InvalidParameter(
                "delta and epsilon must be positive".into(),
            ));
        }
        if cumulative.len() < 2 {
            return Err(Error::InvalidInput("profile needs at least two grid points".into()));
        }
        if cumulative[0] != 0.0 {
            return Err(Error::InvalidInput("profile must start at 0".into()));
        }
        if cumulative.windows(2).any(|w| !(w[1] >= w[0])) {
            return Err(Error::InvalidInput("profile must be non-decreasing".into()));
        }
        Ok(Self {
            path_ref: 0,
            epsilon,
            delta,
            cumulative,
        })
    }

    pub fn grid_size(&self) -> usize {
        self.cumulative.len() - 1
    }

    pub fn horizon(&self) -> f64 {
        self.grid_size() as f64 * self.delta
    }

    /// `l(0, horizon]`.
    pub fn total(&self) -> f64 {
        *self.cumulative.last().unwrap()
    }

    pub fn is_zero(&self) -> bool {
        self.total() == 0.0
    }

    /// `l(0, t]`, linearly interpolated between grid points; clamps to the
    /// grid range.
    pub fn at(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        let n = self.grid_size();
        let pos = t / self.delta;
        let k = pos.floor();
        if k >= n as f64 {
            return self.total();
        }
        let k = k as usize;
        let frac = pos - k as f64;
        let lo = self.cumulative[k];
        if frac == 0.0 {
            return lo;
        }
        lo + frac * (self.cumulative[k + 1] - lo)
    }

    pub fn increments(&self) -> impl Iterator<Item = f64> + '_ {
        self.cumulative.windows(2).map(|w| w[1] - w[0])
    }

    /// Writes `k,t,cumulative` rows with a header.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "k,t,cumulative")?;
        for (k, c) in self.cumulative.iter().enumerate() {
            writeln!(out, "{},{},{}", k, k as f64 * self.delta, c)?;
        }
        Ok(())
    }
}

/// Occupation-density estimate of the local time at 0:
/// `cumulative[k] = delta / (2 epsilon) * #{1 <= j <= k : |X_j| < epsilon}`.
pub fn estimate_local_time(path: &SamplePath, epsilon: f64) -> Result<LocalTimeProfile> {
    if !(epsilon > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "epsilon must be positive, got {epsilon}"
        )));
    }
    let delta = path.delta();
    let unit = delta / (2.0 * epsilon);
    let mut count = 0u64;
    let mut cumulative = Vec::with_capacity(path.values.len());
    cumulative.push(0.0);
    for x in &path.values[1..] {
        if x.abs() < epsilon {
            count += 1;
        }
        // count * unit rather than a running sum keeps levels exact multiples
        cumulative.push(count as f64 * unit);
    }
    Ok(LocalTimeProfile {
        path_ref: path.seed,
        epsilon,
        delta,
        cumulative,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Jump {
    /// Local-time coordinate.
    pub location: f64,
    /// Excursion length (time units).
    pub size: f64,
}

/// Non-decreasing right-continuous step function
/// `L_x = drift * x + sum_{location <= x} size` on `[0, total_mass_cap]`.
#[derive(Debug, Clone, PartialEq)]
pub struct JumpFunction {
    jumps: Vec<Jump>,
    prefix: Vec<f64>,
    drift: f64,
    total_mass_cap: f64,
    open_tail: Option<f64>,
}

impl JumpFunction {
    pub fn new(jumps: Vec<Jump>, drift: f64, total_mass_cap: f64) -> Result<Self> {
        if !(drift >= 0.0 && drift.is_finite()) {
            return Err(Error::InvalidInput(format!("drift must be >= 0, got {drift}")));
        }
        if !(total_mass_cap >= 0.0) {
            return Err(Error::InvalidInput("total mass must be >= 0".into()));
        }
        for (i, j) in jumps.iter().enumerate() {
            if !(j.size > 0.0 && j.size.is_finite()) {
                return Err(Error::InvalidInput(format!("jump {i} has size {}", j.size)));
            }
            if !(j.location >= 0.0 && j.location <= total_mass_cap) {
                return Err(Error::InvalidInput(format!(
                    "jump {i} at {} outside [0, {total_mass_cap}]",
                    j.location
                )));
            }
            if i > 0 && !(j.location > jumps[i - 1].location) {
                return Err(Error::InvalidInput(format!(
                    "jump locations must be strictly increasing (index {i})"
                )));
            }
        }
        let mut prefix = Vec::with_capacity(jumps.len());
        let mut acc = 0.0;
        for j in &jumps {
            acc += j.size;
            prefix.push(acc);
        }
        Ok(Self {
            jumps,
            prefix,
            drift,
            total_mass_cap,
            open_tail: None,
        })
    }

    pub fn empty() -> Self {
        Self {
            jumps: Vec::new(),
            prefix: Vec::new(),
            drift: 0.0,
            total_mass_cap: 0.0,
            open_tail: None,
        }
    }

    pub fn jumps(&self) -> &[Jump] {
        &self.jumps
    }

    pub fn drift(&self) -> f64 {
        self.drift
    }

    pub fn total_mass_cap(&self) -> f64 {
        self.total_mass_cap
    }

    /// For inverses of path profiles: time from the last occupied cell to
    /// the horizon. That excursion is incomplete, so `L_x` is beyond the
    /// horizon for every `x >= total_mass_cap`.
    pub fn open_tail(&self) -> Option<f64> {
        self.open_tail
    }

    pub fn is_empty(&self) -> bool {
        self.jumps.is_empty() && self.drift == 0.0
    }

    /// True for inverses of profiles that never accrued local time.
    pub fn is_degenerate(&self) -> bool {
        self.total_mass_cap == 0.0
    }

    /// `L_x`, or `None` outside the range where it is determined.
    pub fn value(&self, x: f64) -> Option<f64> {
        let in_range = match self.open_tail {
            Some(_) => x >= 0.0 && x < self.total_mass_cap,
            None => x >= 0.0 && x <= self.total_mass_cap,
        };
        if !in_range {
            return None;
        }
        let idx = self.jumps.partition_point(|j| j.location <= x);
        let jumped = if idx == 0 { 0.0 } else { self.prefix[idx - 1] };
        Some(self.drift * x + jumped)
    }

    /// `L_x >= t`, counting `x` past the accrued mass of a path as beyond
    /// every horizon. For a continuous profile this is `l(0, t] <= x`.
    pub fn at_least(&self, x: f64, t: f64) -> bool {
        match self.value(x) {
            Some(v) => v >= t,
            None => self.open_tail.is_some() && x >= self.total_mass_cap,
        }
    }

    /// Re-integrates to a grid profile `l(0, k delta]`, `k = 0..=n`.
    pub fn to_profile(&self, delta: f64, n: usize) -> Result<LocalTimeProfile> {
        let cumulative = (0..=n).map(|k| self.local_time_at(k as f64 * delta)).collect();
        LocalTimeProfile::from_cumulative(delta, 1.0, cumulative)
    }

    /// `inf { x : L_x > t }`, capped at the total mass.
    pub fn local_time_at(&self, t: f64) -> f64 {
        // last jump whose left limit is <= t
        let left = |i: usize| {
            let before = if i == 0 { 0.0 } else { self.prefix[i - 1] };
            self.drift * self.jumps[i].location + before
        };
        let mut lo = 0usize;
        let mut hi = self.jumps.len();
        while lo < hi {
            let mid = (lo + hi) / 2;
            if left(mid) <= t {
                lo = mid + 1;
            } else {
                hi = mid;
            }
        }
        let x = if lo == 0 {
            if self.drift > 0.0 {
                t / self.drift
            } else {
                0.0
            }
        } else {
            let i = lo - 1;
            let loc = self.jumps[i].location;
            let after = self.drift * loc + self.prefix[i];
            if t < after {
                loc
            } else if self.drift > 0.0 {
                let next = self
                    .jumps
                    .get(i + 1)
                    .map_or(self.total_mass_cap, |j| j.location);
                (loc + (t - after) / self.drift).min(next)
            } else {
                loc
            }
        };
        x.min(self.total_mass_cap)
    }

    /// Writes `index,location,size` rows with a header.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "index,location,size")?;
        for (i, j) in self.jumps.iter().enumerate() {
            writeln!(out, "{},{},{}", i, j.location, j.size)?;
        }
        Ok(())
    }
}

/// Right-continuous inverse of a profile; every unoccupied run of cells
/// becomes a jump.
pub fn invert_profile(profile: &LocalTimeProfile) -> JumpFunction {
    invert_profile_with(profile, 1)
}

/// As [`invert_profile`], but unoccupied runs shorter than `min_jump_cells`
/// are folded into the drift instead of being recorded. With
/// `min_jump_cells > 1` the evaluation is no longer the exact inverse.
pub fn invert_profile_with(profile: &LocalTimeProfile, min_jump_cells: usize) -> JumpFunction {
    let delta = profile.delta;
    let mut jumps = Vec::new();
    let mut run = 0usize;
    let mut continuous_time = 0.0;
    for (k, inc) in profile.increments().enumerate() {
        if inc > 0.0 {
            if run > 0 {
                let size = run as f64 * delta;
                if run >= min_jump_cells.max(1) {
                    jumps.push(Jump {
                        location: profile.cumulative[k],
                        size,
                    });
                } else {
                    continuous_time += size;
                }
                run = 0;
            }
            continuous_time += delta;
        } else {
            run += 1;
        }
    }
    let mass = profile.total();
    let drift = if mass > 0.0 { continuous_time / mass } else { 0.0 };
    let mut prefix = Vec::with_capacity(jumps.len());
    let mut acc = 0.0;
    for j in &jumps {
        acc += j.size;
        prefix.push(acc);
    }
    JumpFunction {
        jumps,
        prefix,
        drift,
        total_mass_cap: mass,
        open_tail: Some(run as f64 * delta),
    }
}

/// `l(0, T] <= a`.
pub fn persistence_indicator(profile: &LocalTimeProfile, t: f64, a: f64) -> Result<bool> {
    check_event_args(profile.horizon(), t, a)?;
    Ok(profile.at(t) <= a)
}

/// The same event read off the inverse: `L_a >= T`.
pub fn persistence_indicator_inverse(
    inverse: &JumpFunction,
    horizon: f64,
    t: f64,
    a: f64,
) -> Result<bool> {
    check_event_args(horizon, t, a)?;
    Ok(inverse.at_least(a, t))
}

fn check_event_args(horizon: f64, t: f64, a: f64) -> Result<()> {
    if !(a > 0.0) {
        return Err(Error::InvalidParameter(format!("threshold must be positive, got {a}")));
    }
    if !(t > 0.0) || t > horizon * (1.0 + 1e-12) {
        return Err(Error::OutOfRange(format!("T = {t} outside (0, {horizon}]")));
    }
    Ok(())
}

/// Largest single-cell increment of the profile.
pub fn atom_diagnostic(profile: &LocalTimeProfile) -> f64 {
    profile.increments().fold(0.0, f64::max)
}

/// Fraction of grid cells carrying local time.
pub fn support_diagnostic(profile: &LocalTimeProfile) -> f64 {
    let occupied = profile.increments().filter(|&d| d > 0.0).count();
    occupied as f64 / profile.grid_size() as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{sample_path, ProcessSpec};

    fn linear(delta: f64, n: usize) -> LocalTimeProfile {
        LocalTimeProfile::from_cumulative(delta, 0.5, (0..=n).map(|k| k as f64 * delta).collect())
            .unwrap()
    }

    fn zero_path(n: usize) -> SamplePath {
        let mut p = sample_path(&ProcessSpec::bm(1.0, n), 0).unwrap();
        p.values.iter_mut().for_each(|v| *v = 0.0);
        p
    }

    #[test]
    fn empty_and_full_occupation() {
        let mut path = sample_path(&ProcessSpec::bm(1.0, 16), 1).unwrap();
        path.values.iter_mut().skip(1).for_each(|v| *v = 5.0);
        let prof = estimate_local_time(&path, 0.1).unwrap();
        assert!(prof.cumulative.iter().all(|&c| c == 0.0));

        let zero = zero_path(16);
        let eps = 0.25;
        let prof = estimate_local_time(&zero, eps).unwrap();
        let d = zero.delta();
        for (k, c) in prof.cumulative.iter().enumerate() {
            assert!((c - k as f64 * d / (2.0 * eps)).abs() < 1e-15);
        }
    }

    #[test]
    fn window_is_open() {
        let mut path = zero_path(4);
        path.values[1] = 0.5;
        path.values[2] = -0.5;
        let prof = estimate_local_time(&path, 0.5).unwrap();
        assert_eq!(prof.cumulative[2], 0.0);
        assert!(prof.cumulative[3] > 0.0);
    }

    #[test]
    fn rejects_bad_epsilon() {
        let path = zero_path(4);
        assert!(matches!(
            estimate_local_time(&path, 0.0),
            Err(Error::InvalidParameter(_))
        ));
        assert!(estimate_local_time(&path, -1.0).is_err());
    }

    #[test]
    fn increments_bounded_by_cell_dwell() {
        let path = sample_path(&ProcessSpec::fbm(0.3, 4.0, 512), 8).unwrap();
        let eps = EpsilonRule::default().for_path(&path);
        let prof = estimate_local_time(&path, eps).unwrap();
        let bound = path.delta() / (2.0 * eps);
        assert!(prof.increments().all(|d| (0.0..=bound * (1.0 + 1e-12)).contains(&d)));
    }

    #[test]
    fn invert_linear_profile() {
        let prof = linear(0.25, 8);
        let inv = invert_profile(&prof);
        assert!(inv.jumps().is_empty());
        assert_eq!(inv.drift(), 1.0);
        assert_eq!(inv.value(1.5), Some(1.5));
    }

    #[test]
    fn invert_piecewise_profile() {
        // 0 on [0, 1], t - 1 on [1, 3], grid step 1/2
        let cum = vec![0.0, 0.0, 0.0, 0.5, 1.0, 1.5, 2.0];
        let prof = LocalTimeProfile::from_cumulative(0.5, 1.0, cum).unwrap();
        let inv = invert_profile(&prof);
        assert_eq!(inv.jumps(), &[Jump { location: 0.0, size: 1.0 }]);
        assert_eq!(inv.drift(), 1.0);
        assert_eq!(inv.value(0.0), Some(1.0));
        assert_eq!(inv.value(1.0), Some(2.0));
        assert_eq!(inv.open_tail(), Some(0.0));
    }

    #[test]
    fn zero_profile_is_degenerate() {
        let prof = LocalTimeProfile::from_cumulative(0.5, 1.0, vec![0.0; 5]).unwrap();
        let inv = invert_profile(&prof);
        assert!(inv.is_degenerate());
        assert!(inv.jumps().is_empty());
        assert_eq!(inv.open_tail(), Some(2.0));
        assert!(inv.at_least(1.0, 2.0));
    }

    #[test]
    fn reintegration_round_trip() {
        let cum = vec![0.0, 0.0, 0.5, 0.5, 0.5, 1.0, 1.5, 1.5, 2.0];
        let prof = LocalTimeProfile::from_cumulative(0.5, 1.0, cum.clone()).unwrap();
        let inv = invert_profile(&prof);
        let again = inv.to_profile(0.5, 8).unwrap();
        assert_eq!(again.cumulative, cum);
        let inv2 = invert_profile(&again);
        for j in inv.jumps() {
            assert_eq!(inv.value(j.location), inv2.value(j.location));
        }
        assert_eq!(inv.jumps(), inv2.jumps());
    }

    #[test]
    fn persistence_examples() {
        let zero = LocalTimeProfile::from_cumulative(0.5, 1.0, vec![0.0; 9]).unwrap();
        assert!(persistence_indicator(&zero, 3.0, 1.0).unwrap());
        let lin = linear(0.5, 8);
        assert!(!persistence_indicator(&lin, 2.0, 1.0).unwrap());
        assert!(persistence_indicator(&lin, 1.0, 1.0).unwrap());
        assert!(matches!(
            persistence_indicator(&lin, 5.0, 1.0),
            Err(Error::OutOfRange(_))
        ));
        assert!(persistence_indicator(&lin, 1.0, 0.0).is_err());
    }

    #[test]
    fn inverse_event_agrees_on_simulated_paths() {
        let spec = ProcessSpec::fbm(0.7, 16.0, 2048);
        let gen = crate::generators::PathGenerator::new(&spec).unwrap();
        for seed in 0..200 {
            let path = gen.sample(seed);
            let prof = estimate_local_time(&path, EpsilonRule::default().for_path(&path)).unwrap();
            let inv = invert_profile(&prof);
            for &t in &[0.5, 1.0, 4.0, 16.0] {
                for &a in &[0.25, 1.0, 2.0] {
                    assert_eq!(
                        persistence_indicator(&prof, t, a).unwrap(),
                        persistence_indicator_inverse(&inv, prof.horizon(), t, a).unwrap(),
                        "seed {seed} t {t} a {a}"
                    );
                }
            }
        }
    }

    #[test]
    fn diagnostics() {
        let zero = LocalTimeProfile::from_cumulative(0.5, 1.0, vec![0.0; 9]).unwrap();
        assert_eq!(atom_diagnostic(&zero), 0.0);
        assert_eq!(support_diagnostic(&zero), 0.0);
        let lin = linear(0.125, 8);
        assert_eq!(atom_diagnostic(&lin), 0.125);
        let full = estimate_local_time(&zero_path(32), 0.1).unwrap();
        assert_eq!(support_diagnostic(&full), 1.0);
    }

    #[test]
    fn jump_function_validation() {
        let j = |location, size| Jump { location, size };
        assert!(JumpFunction::new(vec![j(0.5, 1.0), j(0.5, 1.0)], 0.0, 1.0).is_err());
        assert!(JumpFunction::new(vec![j(0.5, 0.0)], 0.0, 1.0).is_err());
        assert!(JumpFunction::new(vec![j(1.5, 1.0)], 0.0, 1.0).is_err());
        assert!(JumpFunction::new(vec![j(0.5, 1.0)], -1.0, 1.0).is_err());
        let f = JumpFunction::new(vec![j(0.25, 3.0), j(0.6, 0.5)], 0.0, 1.0).unwrap();
        assert_eq!(f.value(0.2), Some(0.0));
        assert_eq!(f.value(0.25), Some(3.0));
        assert_eq!(f.value(1.0), Some(3.5));
        assert_eq!(f.value(1.01), None);
    }
}
