//! CSV artifacts: `curves.csv`, `acceptance.csv`, `trust.csv`, `summary.csv`.

use std::fs::File;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use super::run::{RunResult, Snapshot};
use crate::error::{PeerlabError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveRow {
    pub run_id: String,
    pub seed: u64,
    pub agent_id: usize,
    pub step: usize,
    pub solo_return: f64,
    /// Mean return of training episodes finished in the window; empty when none finished.
    pub train_return: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AcceptanceRow {
    pub run_id: String,
    pub seed: u64,
    pub step: usize,
    pub advisee: usize,
    pub advisor: usize,
    pub cumulative_count: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrustRow {
    pub run_id: String,
    pub seed: u64,
    pub step: usize,
    pub advisee: usize,
    pub advisor: usize,
    pub mechanism: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub config_name: String,
    pub mean: f64,
    pub std: f64,
    pub sem: f64,
    pub n_seeds: usize,
}

pub const CURVES: &str = "curves.csv";
pub const ACCEPTANCE: &str = "acceptance.csv";
pub const TRUST: &str = "trust.csv";
pub const SUMMARY: &str = "summary.csv";

/// Rows contributed by one checkpoint of one run.
pub fn snapshot_rows(
    run_id: &str,
    seed: u64,
    snap: &Snapshot,
) -> (Vec<CurveRow>, Vec<AcceptanceRow>, Vec<TrustRow>) {
    let curves = snap
        .solo
        .iter()
        .map(|&(agent_id, solo_return, train_return)| CurveRow {
            run_id: run_id.to_owned(),
            seed,
            agent_id,
            step: snap.step,
            solo_return,
            train_return,
        })
        .collect();
    let mut acceptance = Vec::new();
    for (advisee, row) in snap.acceptance.iter().enumerate() {
        if row.iter().all(|&c| c == 0) {
            continue;
        }
        for (advisor, &count) in row.iter().enumerate() {
            acceptance.push(AcceptanceRow {
                run_id: run_id.to_owned(),
                seed,
                step: snap.step,
                advisee,
                advisor,
                cumulative_count: count,
            });
        }
    }
    let mut trust = Vec::new();
    for (mechanism, values) in &snap.trust {
        for (advisee, row) in values.iter().enumerate() {
            for (advisor, &value) in row.iter().enumerate() {
                trust.push(TrustRow {
                    run_id: run_id.to_owned(),
                    seed,
                    step: snap.step,
                    advisee,
                    advisor,
                    mechanism: mechanism.label().to_owned(),
                    value,
                });
            }
        }
    }
    (curves, acceptance, trust)
}

/// Appends rows to the three per-run CSV files as checkpoints arrive, so an
/// interrupted run keeps its partial curves.
pub struct RunWriter {
    dir: PathBuf,
    curves: csv::Writer<File>,
    acceptance: csv::Writer<File>,
    trust: csv::Writer<File>,
}

impl RunWriter {
    pub fn create(dir: &Path) -> Result<Self> {
        std::fs::create_dir_all(dir)?;
        let open = |name: &str, header: &[&str]| -> Result<csv::Writer<File>> {
            let mut w = csv::WriterBuilder::new()
                .has_headers(false)
                .from_path(dir.join(name))?;
            w.write_record(header)?;
            w.flush()?;
            Ok(w)
        };
        Ok(Self {
            dir: dir.to_owned(),
            curves: open(CURVES, &CURVE_HEADER)?,
            acceptance: open(ACCEPTANCE, &ACCEPTANCE_HEADER)?,
            trust: open(TRUST, &TRUST_HEADER)?,
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn write(&mut self, run_id: &str, seed: u64, snap: &Snapshot) -> Result<()> {
        let (c, a, t) = snapshot_rows(run_id, seed, snap);
        write_all(&mut self.curves, &c)?;
        write_all(&mut self.acceptance, &a)?;
        write_all(&mut self.trust, &t)?;
        self.curves.flush()?;
        self.acceptance.flush()?;
        self.trust.flush()?;
        Ok(())
    }
}

fn write_all<W: std::io::Write, T: Serialize>(w: &mut csv::Writer<W>, rows: &[T]) -> Result<()> {
    for r in rows {
        w.serialize(r)?;
    }
    Ok(())
}

/// Writes the rows to `path`, header first. With no rows the file holds
/// just the header.
pub fn write_csv<T: Serialize>(path: &Path, header: &[&str], rows: &[T]) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_path(path)?;
    w.write_record(header)?;
    write_all(&mut w, rows)?;
    w.flush()?;
    Ok(())
}

pub fn read_csv<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let malformed = |reason: String| PeerlabError::MalformedCsv {
        path: path.to_owned(),
        reason,
    };
    let mut r = csv::Reader::from_path(path).map_err(|e| match e.kind() {
        csv::ErrorKind::Io(_) => PeerlabError::from(e),
        _ => malformed(e.to_string()),
    })?;
    r.deserialize()
        .map(|row| row.map_err(|e| malformed(e.to_string())))
        .collect()
}

pub const CURVE_HEADER: [&str; 6] = [
    "run_id",
    "seed",
    "agent_id",
    "step",
    "solo_return",
    "train_return",
];
pub const ACCEPTANCE_HEADER: [&str; 6] = [
    "run_id",
    "seed",
    "step",
    "advisee",
    "advisor",
    "cumulative_count",
];
pub const TRUST_HEADER: [&str; 7] = [
    "run_id",
    "seed",
    "step",
    "advisee",
    "advisor",
    "mechanism",
    "value",
];
pub const SUMMARY_HEADER: [&str; 5] = ["config_name", "mean", "std", "sem", "n_seeds"];

/// Concatenates the rows of all runs, in the given order, into the
/// top-level CSVs of `dir`.
pub fn write_aggregate(dir: &Path, runs: &[RunResult], summary: &[SummaryRow]) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let (mut curves, mut acceptance, mut trust) = (Vec::new(), Vec::new(), Vec::new());
    for run in runs {
        for snap in &run.snapshots {
            let (c, a, t) = snapshot_rows(&run.config_name, run.seed, snap);
            curves.extend(c);
            acceptance.extend(a);
            trust.extend(t);
        }
    }
    write_csv(&dir.join(CURVES), &CURVE_HEADER, &curves)?;
    write_csv(&dir.join(ACCEPTANCE), &ACCEPTANCE_HEADER, &acceptance)?;
    write_csv(&dir.join(TRUST), &TRUST_HEADER, &trust)?;
    write_csv(&dir.join(SUMMARY), &SUMMARY_HEADER, summary)?;
    Ok(())
}
