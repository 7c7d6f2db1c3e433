//! Markdown summary across run directories.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::output::{RunManifest, Stage};
use super::run::{Outcome, Summary};
use crate::generators::Family;

/// Tolerance of the pooled Hill exponent around `1 - H`.
pub const HILL_TOLERANCE: f64 = 0.07;
/// Relative tolerance of the intensity ratio around `4^{1-H}`.
pub const RATIO_TOLERANCE: f64 = 0.10;
/// Relative tolerance between the heavy-subinterval counts at two `n`.
pub const COUNTING_TOLERANCE: f64 = 0.05;

/// One loaded run directory.
#[derive(Debug, Clone)]
pub struct LoadedRun {
    pub dir: PathBuf,
    pub manifest: RunManifest,
    pub summary: Summary,
}

/// Loads a run directory; missing or unreadable artifacts come back as a
/// gap description.
pub fn load_run(dir: &Path) -> std::result::Result<LoadedRun, String> {
    let manifest = RunManifest::load(dir).map_err(|e| format!("{}: manifest: {e}", dir.display()))?;
    let text = fs::read_to_string(dir.join("summary.json"))
        .map_err(|e| format!("{}: summary.json: {e}", dir.display()))?;
    let summary =
        serde_json::from_str(&text).map_err(|e| format!("{}: summary.json: {e}", dir.display()))?;
    Ok(LoadedRun {
        dir: dir.to_path_buf(),
        manifest,
        summary,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub run: String,
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub markdown: String,
    /// `run,family,hurst,log_T,log_survival` rows for plotting.
    pub loglog_csv: String,
    pub checks: Vec<Check>,
    pub gaps: Vec<String>,
}

impl Report {
    /// Every check passed and every requested run could be read.
    pub fn all_passed(&self) -> bool {
        self.gaps.is_empty() && self.checks.iter().all(|c| c.pass)
    }
}

fn flag(pass: bool) -> &'static str {
    if pass {
        "PASS"
    } else {
        "FAIL"
    }
}

fn family_name(f: Family) -> &'static str {
    match f {
        Family::Fbm => "FBM",
        Family::Bm => "BM",
        Family::Rosenblatt => "Rosenblatt",
    }
}

/// Loads every directory and assembles the report.
pub fn report_dirs(dirs: &[PathBuf]) -> Report {
    let mut runs = Vec::new();
    let mut gaps = Vec::new();
    for d in dirs {
        match load_run(d) {
            Ok(r) => runs.push(r),
            Err(g) => gaps.push(g),
        }
    }
    report(&runs, gaps)
}

/// Builds the Markdown summary and its acceptance checks.
pub fn report(runs: &[LoadedRun], mut gaps: Vec<String>) -> Report {
    let mut md = String::new();
    let mut checks = Vec::new();
    let mut csv = String::from("run,family,hurst,log_T,log_survival\n");
    let _ = writeln!(md, "# Local-time persistence report\n");
    if runs.is_empty() {
        let _ = writeln!(md, "No runs.\n");
    }

    let mut kappa = String::new();
    let mut oracle = String::new();
    let mut tail = String::new();
    let mut battery = String::new();
    for run in runs {
        let name = run.dir.display().to_string();
        let cfg = &run.manifest.config;
        let s = &run.summary;
        let h = cfg.process.hurst;
        let fam = family_name(cfg.process.family);
        let stage = run.manifest.stage;
        let persist = matches!(stage, Stage::Persist | Stage::All);
        let excursions = matches!(stage, Stage::Excursions | Stage::All);
        let invariants = matches!(stage, Stage::Invariants | Stage::All);
        let mut check = |label: &str, pass: bool, detail: String| {
            checks.push(Check {
                run: name.clone(),
                name: label.to_string(),
                pass,
                detail,
            })
        };

        check(
            "structural",
            s.diagnostics.survival_monotone && s.diagnostics.inverse_mismatches == 0,
            format!(
                "monotone {}, inverse mismatches {}",
                s.diagnostics.survival_monotone, s.diagnostics.inverse_mismatches
            ),
        );

        if persist {
            for (t, p) in s.curve.t_grid.iter().zip(&s.curve.survival) {
                if *p > 0.0 {
                    let _ = writeln!(csv, "{name},{fam},{h},{},{}", t.ln(), p.ln());
                }
            }
            let tol = cfg.kappa_tolerance();
            match &s.fit {
                Outcome::Ok(f) => {
                    let pass = (f.kappa_hat - s.kappa_target).abs() <= tol;
                    check("kappa", pass, format!("{:.4} vs {:.4}", f.kappa_hat, s.kappa_target));
                    let _ = writeln!(
                        kappa,
                        "| {name} | {fam} | {h} | {} | {} | {:.4} | {:.4} | {:.4} | ±{tol} | {} |",
                        cfg.process.horizon,
                        cfg.n_paths,
                        f.kappa_hat,
                        f.stderr_kappa,
                        s.kappa_target,
                        flag(pass)
                    );
                }
                Outcome::Unavailable(why) => {
                    check("kappa", false, why.clone());
                    let _ = writeln!(
                        kappa,
                        "| {name} | {fam} | {h} | {} | {} | n/a | | {:.4} | ±{tol} | FAIL |",
                        cfg.process.horizon, cfg.n_paths, s.kappa_target
                    );
                }
            }
            if !s.oracle.is_empty() {
                let pass = s.oracle.iter().all(|r| r.pass);
                check("levy_oracle", pass, format!("{} grid times", s.oracle.len()));
                for r in &s.oracle {
                    let _ = writeln!(
                        oracle,
                        "| {name} | {:.4} | {:.5} | {:.5} | {:.5} | {} |",
                        r.t,
                        r.survival,
                        r.exact,
                        r.tolerance,
                        flag(r.pass)
                    );
                }
            }
        }

        if excursions {
            let t = &s.tail;
            let target = s.kappa_target;
            let hill_pass = t
                .censored_hill
                .ok()
                .is_some_and(|f| (f.exponent - target).abs() <= HILL_TOLERANCE);
            let ratio_pass = t
                .ratio
                .ok()
                .is_some_and(|r| (r.ratio / t.ratio_target - 1.0).abs() <= RATIO_TOLERANCE);
            let counting_pass = t
                .counting
                .relative_change
                .is_some_and(|c| c <= COUNTING_TOLERANCE);
            check("hill", hill_pass, format!("{:?}", t.censored_hill.ok().map(|f| f.exponent)));
            check("intensity_ratio", ratio_pass, format!("{:?}", t.ratio.ok().map(|r| r.ratio)));
            check(
                "counting",
                counting_pass,
                format!("{:?}", t.counting.relative_change),
            );
            let show = |o: &Outcome<_>| match o {
                Outcome::Ok(f) => {
                    let f: &crate::pointprocess::IntensityFit = f;
                    format!("{:.4} ± {:.4}", f.exponent, f.stderr)
                }
                Outcome::Unavailable(_) => "n/a".into(),
            };
            let ratio = match &t.ratio {
                Outcome::Ok(r) => format!("{:.4} ± {:.4}", r.ratio, r.stderr),
                Outcome::Unavailable(_) => "n/a".into(),
            };
            let counting = t
                .counting
                .relative_change
                .map_or("n/a".into(), |c| format!("{:.2}%", 100.0 * c));
            let _ = writeln!(
                tail,
                "| {name} | {fam} | {h} | {} | {} | {} | {target:.4} | {} | {ratio} | {:.4} | {} | {counting} | {} |",
                show(&t.censored_hill),
                show(&t.hill),
                show(&t.loglog),
                flag(hill_pass),
                t.ratio_target,
                flag(ratio_pass),
                flag(counting_pass),
            );
        }

        if invariants {
            match &s.battery {
                Outcome::Ok(b) => {
                    check("battery", b.passed(), format!("{} tests", b.entries.len()));
                    let _ = writeln!(battery, "### {name} ({fam}, H = {h})\n");
                    let _ = writeln!(battery, "| test | statistic | p-value | n1 | n2 | excluded | expected | outcome |");
                    let _ = writeln!(battery, "|---|---|---|---|---|---|---|---|");
                    for e in &b.entries {
                        let r = &e.report;
                        let _ = writeln!(
                            battery,
                            "| {} | {:.5} | {:.3e} | {} | {} | {} | {} | {} |",
                            r.name,
                            r.statistic,
                            r.p_value,
                            r.n1,
                            r.n2,
                            r.excluded,
                            if e.expect_reject { "reject" } else { "keep" },
                            flag(e.reject_corrected == e.expect_reject),
                        );
                    }
                    let _ = writeln!(
                        battery,
                        "\nBonferroni level {:.2e}: {}\n",
                        b.corrected_level,
                        flag(b.passed())
                    );
                }
                Outcome::Unavailable(why) => {
                    check("battery", false, why.clone());
                    let _ = writeln!(battery, "### {name} ({fam}, H = {h})\n\nUnavailable: {why}\n");
                    gaps.push(format!("{name}: battery unavailable: {why}"));
                }
            }
        }
    }

    if !kappa.is_empty() {
        let _ = writeln!(md, "## Persistence exponent\n");
        let _ = writeln!(md, "| run | family | H | T_max | paths | kappa_hat | stderr | 1-H | tolerance | result |");
        let _ = writeln!(md, "|---|---|---|---|---|---|---|---|---|---|");
        md.push_str(&kappa);
        md.push('\n');
    }
    if !oracle.is_empty() {
        let _ = writeln!(md, "## Brownian oracle\n");
        let _ = writeln!(md, "| run | T | survival | erf(1/sqrt(2T)) | tolerance | result |");
        let _ = writeln!(md, "|---|---|---|---|---|---|");
        md.push_str(&oracle);
        md.push('\n');
    }
    if !tail.is_empty() {
        let _ = writeln!(md, "## Excursion tail\n");
        let _ = writeln!(
            md,
            "| run | family | H | Hill (censored) | Hill | log-log | 1-H | Hill result | ratio | 4^(1-H) | ratio result | counting change | counting result |"
        );
        let _ = writeln!(md, "|---|---|---|---|---|---|---|---|---|---|---|---|---|");
        md.push_str(&tail);
        md.push('\n');
    }
    if !battery.is_empty() {
        let _ = writeln!(md, "## Invariance battery\n");
        md.push_str(&battery);
    }
    if !checks.is_empty() {
        let _ = writeln!(md, "## Acceptance checks\n");
        let _ = writeln!(md, "| run | check | detail | result |");
        let _ = writeln!(md, "|---|---|---|---|");
        for c in &checks {
            let _ = writeln!(md, "| {} | {} | {} | {} |", c.run, c.name, c.detail, flag(c.pass));
        }
        md.push('\n');
    }
    if !gaps.is_empty() {
        let _ = writeln!(md, "## Gaps\n");
        for g in &gaps {
            let _ = writeln!(md, "- {g}");
        }
    }

    Report {
        markdown: md,
        loglog_csv: csv,
        checks,
        gaps,
    }
}
