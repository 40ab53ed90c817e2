use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::check::{MacRow, VarianceRow};
use super::config::ExperimentConfig;
use super::experiment::{CoverageRow, ExperimentResult, StructureSummary};
use crate::error::{Error, Result};

pub const SUMMARY_FILE: &str = "summary.csv";
pub const REPLICATES_FILE: &str = "replicates.csv";
pub const MANIFEST_FILE: &str = "manifest.json";
pub const MAC_TABLE_FILE: &str = "mac_table.csv";
pub const VARIANCE_FILE: &str = "variance.csv";
pub const COVERAGE_FILE: &str = "coverage.csv";

/// Everything needed to rerun an experiment, plus the calibrated sequences.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub name: String,
    pub seed: u64,
    pub config: ExperimentConfig,
    pub structures: Vec<StructureSummary>,
    pub files: Vec<String>,
}

impl Manifest {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }
}

fn prepare(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::Writer::from_writer(file))
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn write_rows<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut w = writer(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Writes `summary.csv` (one row per cell), `replicates.csv` (one row per
/// replicate value) and `manifest.json` into `dir`. Returns the paths.
pub fn emit_results(res: &ExperimentResult, dir: &Path) -> Result<Vec<PathBuf>> {
    prepare(dir)?;
    let summary = dir.join(SUMMARY_FILE);
    let mut w = writer(&summary)?;
    w.write_record([
        "structure",
        "p",
        "mac",
        "pi",
        "mu",
        "estimator",
        "n",
        "mean",
        "sd",
        "c_half",
        "c_one",
    ])?;
    for c in &res.cells {
        let s = res
            .structures
            .iter()
            .find(|s| s.structure == c.structure)
            .expect("cell structure is summarised");
        w.write_record([
            c.structure.clone(),
            s.p.to_string(),
            s.mac.to_string(),
            c.pi.to_string(),
            c.mu.to_string(),
            c.estimator.to_string(),
            c.values.len().to_string(),
            c.mean.to_string(),
            c.sd.to_string(),
            opt(s.c_half.as_ref().map(|b| b.c)),
            opt(s.c_one.as_ref().map(|b| b.c)),
        ])?;
    }
    w.flush().map_err(|e| Error::io(&summary, e))?;

    let replicates = dir.join(REPLICATES_FILE);
    let mut w = writer(&replicates)?;
    w.write_record(["structure", "pi", "mu", "estimator", "replicate", "value"])?;
    for c in &res.cells {
        for (r, v) in c.values.iter().enumerate() {
            w.write_record([
                c.structure.clone(),
                c.pi.to_string(),
                c.mu.to_string(),
                c.estimator.to_string(),
                r.to_string(),
                v.to_string(),
            ])?;
        }
    }
    w.flush().map_err(|e| Error::io(&replicates, e))?;

    let manifest_path = dir.join(MANIFEST_FILE);
    let manifest = Manifest {
        name: res.config.name.clone(),
        seed: res.config.seed,
        config: res.config.clone(),
        structures: res.structures.clone(),
        files: vec![SUMMARY_FILE.into(), REPLICATES_FILE.into()],
    };
    let json = serde_json::to_string_pretty(&manifest)?;
    fs::write(&manifest_path, json + "\n").map_err(|e| Error::io(&manifest_path, e))?;
    Ok(vec![summary, replicates, manifest_path])
}

pub fn emit_mac_table(rows: &[MacRow], dir: &Path) -> Result<PathBuf> {
    prepare(dir)?;
    let path = dir.join(MAC_TABLE_FILE);
    write_rows(&path, rows)?;
    Ok(path)
}

pub fn emit_variance(rows: &[VarianceRow], dir: &Path) -> Result<PathBuf> {
    prepare(dir)?;
    let path = dir.join(VARIANCE_FILE);
    write_rows(&path, rows)?;
    Ok(path)
}

pub fn emit_coverage(rows: &[CoverageRow], dir: &Path) -> Result<PathBuf> {
    prepare(dir)?;
    let path = dir.join(COVERAGE_FILE);
    write_rows(&path, rows)?;
    Ok(path)
}
