//! Result files and the run manifest.

use std::collections::BTreeMap;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::config::ExperimentConfig;
use super::run::{run_ensemble, Summary};
use crate::error::{Error, Result};
use crate::generators::{derive_path_seed, PathGenerator};
use crate::localtime::{estimate_local_time, invert_profile};
use crate::pointprocess::write_point_sets_csv;

pub const MANIFEST_FILE: &str = "manifest.json";

/// Which artifacts a run writes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    /// Paths, profiles and inverses of every path as CSV.
    Simulate,
    /// Survival curves and exponent fits.
    Persist,
    /// Excursion point sets and tail fits.
    Excursions,
    /// Invariance test battery.
    Invariants,
    /// Everything except the per-path dumps of `Simulate`.
    All,
}

impl Stage {
    fn includes(self, other: Stage) -> bool {
        self == other || (self == Stage::All && other != Stage::Simulate)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub toolkit_version: String,
    /// SHA-256 of the canonical config JSON (output directory and worker
    /// hint excluded, as neither affects results).
    pub config_hash: String,
    pub config: ExperimentConfig,
    pub stage: Stage,
    /// Output file name to SHA-256.
    pub outputs: BTreeMap<String, String>,
    pub timings: BTreeMap<String, f64>,
}

impl RunManifest {
    pub fn load(dir: &Path) -> Result<Self> {
        let text = fs::read_to_string(dir.join(MANIFEST_FILE))?;
        Ok(serde_json::from_str(&text)?)
    }
}

fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Hash of the result-relevant part of the config.
pub fn config_hash(cfg: &ExperimentConfig) -> String {
    let canonical = ExperimentConfig {
        output_dir: None,
        workers: None,
        ..cfg.clone()
    };
    sha256_hex(canonical.to_json().as_bytes())
}

struct Writer {
    dir: PathBuf,
    outputs: BTreeMap<String, String>,
}

impl Writer {
    fn new(dir: PathBuf) -> Result<Self> {
        fs::create_dir_all(&dir)?;
        Ok(Self {
            dir,
            outputs: BTreeMap::new(),
        })
    }

    fn file(&mut self, name: &str, fill: impl FnOnce(&mut dyn Write) -> std::io::Result<()>) -> Result<()> {
        let mut buf = Vec::new();
        fill(&mut buf)?;
        let path = self.dir.join(name);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent)?;
        }
        let mut f = BufWriter::new(fs::File::create(&path)?);
        f.write_all(&buf)?;
        f.flush()?;
        self.outputs.insert(name.to_string(), sha256_hex(&buf));
        Ok(())
    }

    fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let text = serde_json::to_string_pretty(value)?;
        self.file(name, |w| writeln!(w, "{text}"))
    }
}

fn output_dir(cfg: &ExperimentConfig) -> Result<PathBuf> {
    cfg.output_dir
        .clone()
        .ok_or_else(|| Error::Config("output_dir is not set".into()))
}

/// Runs the full pipeline and writes every aggregate artifact.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunManifest> {
    run_stage(cfg, Stage::All)
}

/// Runs the pipeline and writes the artifacts of `stage` plus a manifest
/// into the config's output directory.
pub fn run_stage(cfg: &ExperimentConfig, stage: Stage) -> Result<RunManifest> {
    cfg.validate()?;
    let start = Instant::now();
    let mut w = Writer::new(output_dir(cfg)?)?;
    let mut timings = BTreeMap::new();

    if stage == Stage::Simulate {
        write_paths(cfg, &mut w)?;
        timings.insert("simulate".into(), start.elapsed().as_secs_f64());
    } else {
        let ensemble = run_ensemble(cfg)?;
        timings.insert("ensemble".into(), start.elapsed().as_secs_f64());
        let t = Instant::now();
        let summary = ensemble.summarize(cfg)?;
        timings.insert("aggregate".into(), t.elapsed().as_secs_f64());
        let t = Instant::now();
        write_summary(&summary, stage, &mut w)?;
        if stage.includes(Stage::Excursions) {
            let sets: Vec<_> = ensemble
                .records
                .iter()
                .filter_map(|r| r.points.as_ref().map(|p| (r.index, p)))
                .collect();
            w.file("points.csv", |out| write_point_sets_csv(out, sets.iter().map(|(i, p)| (*i, *p))))?;
        }
        timings.insert("write".into(), t.elapsed().as_secs_f64());
    }
    timings.insert("total".into(), start.elapsed().as_secs_f64());

    let manifest = RunManifest {
        toolkit_version: env!("CARGO_PKG_VERSION").to_string(),
        config_hash: config_hash(cfg),
        config: cfg.clone(),
        stage,
        outputs: w.outputs.clone(),
        timings,
    };
    let text = serde_json::to_string_pretty(&manifest)?;
    fs::write(w.dir.join(MANIFEST_FILE), text + "\n")?;
    Ok(manifest)
}

fn write_paths(cfg: &ExperimentConfig, w: &mut Writer) -> Result<()> {
    let generator = PathGenerator::new(&cfg.process)?;
    for i in 0..cfg.n_paths {
        let path = generator.sample(derive_path_seed(cfg.master_seed, i));
        let profile = estimate_local_time(&path, cfg.epsilon_rule.for_path(&path))?;
        let inverse = invert_profile(&profile);
        w.file(&format!("paths/path_{i:06}.csv"), |out| path.write_csv(out))?;
        w.file(&format!("paths/local_time_{i:06}.csv"), |out| profile.write_csv(out))?;
        w.file(&format!("paths/inverse_{i:06}.csv"), |out| inverse.write_csv(out))?;
    }
    Ok(())
}

fn write_summary(s: &Summary, stage: Stage, w: &mut Writer) -> Result<()> {
    if stage.includes(Stage::Persist) {
        w.file("curve.csv", |out| s.curve.write_csv(out))?;
        w.file("max_curve.csv", |out| s.max_curve.write_csv(out))?;
        w.file("loglog_survival.csv", |out| {
            writeln!(out, "log_T,log_survival")?;
            for (t, p) in s.curve.t_grid.iter().zip(&s.curve.survival) {
                if *p > 0.0 {
                    writeln!(out, "{},{}", t.ln(), p.ln())?;
                }
            }
            Ok(())
        })?;
        w.json(
            "fit.json",
            &serde_json::json!({
                "fit": s.fit,
                "max_fit": s.max_fit,
                "kappa_target": s.kappa_target,
                "oracle": s.oracle,
            }),
        )?;
    }
    if stage.includes(Stage::Excursions) {
        w.json("tail.json", &s.tail)?;
        w.file("loglog.csv", |out| {
            writeln!(out, "threshold,count,per_local_time")?;
            for (t, c, d) in &s.tail.loglog_rows {
                writeln!(out, "{t},{c},{d}")?;
            }
            Ok(())
        })?;
    }
    if stage.includes(Stage::Invariants) {
        w.json("tests.json", &s.battery)?;
    }
    w.json("diagnostics.json", &s.diagnostics)?;
    w.json("summary.json", &s.subset(stage))?;
    Ok(())
}

impl Summary {
    /// The summary with the parts `stage` did not compute blanked out.
    fn subset(&self, stage: Stage) -> Summary {
        use super::run::Outcome;
        let mut s = self.clone();
        if !stage.includes(Stage::Persist) {
            s.fit = Outcome::Unavailable("not computed by this stage".into());
            s.max_fit = Outcome::Unavailable("not computed by this stage".into());
            s.oracle.clear();
        }
        if !stage.includes(Stage::Invariants) {
            s.battery = Outcome::Unavailable("not computed by this stage".into());
        }
        s
    }
}
