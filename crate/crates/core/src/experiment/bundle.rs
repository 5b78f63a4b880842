use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{io_err, ExperimentError};
use crate::qcbm::{min_kl, records_to_csv, TrainingRecord};

pub const MANIFEST_FILE: &str = "manifest.json";

const TRAINING_HEADER: &str = "epoch,best_kl,pop_best,pop_median";
const SPREAD_HEADER: &str = "run,min_kl,argmin_epoch";
const TRACE_HEADER: &str = "episode,terminal,reward,passes";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveEntry {
    pub path: String,
    /// `baseline`, `search` or `train`.
    pub kind: String,
    pub run: Option<usize>,
    pub epochs: usize,
    pub min_kl: f64,
    pub argmin_epoch: usize,
}

/// Index of a result bundle. `complete` turns true only after the last file.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Manifest {
    pub complete: bool,
    pub files: Vec<String>,
    pub curves: Vec<CurveEntry>,
}

/// The only code path that writes bundle files. The manifest is rewritten
/// after every file, so an aborted run leaves an accurate partial index.
pub struct BundleWriter {
    root: PathBuf,
    manifest: Manifest,
}

impl BundleWriter {
    pub fn create(root: &Path) -> Result<Self, ExperimentError> {
        fs::create_dir_all(root).map_err(io_err(root))?;
        let w = Self { root: root.to_path_buf(), manifest: Manifest::default() };
        w.flush()?;
        Ok(w)
    }

    pub fn manifest(&self) -> &Manifest {
        &self.manifest
    }

    fn flush(&self) -> Result<(), ExperimentError> {
        let path = self.root.join(MANIFEST_FILE);
        let mut text = serde_json::to_string_pretty(&self.manifest).expect("manifest serializes");
        text.push('\n');
        fs::write(&path, text).map_err(io_err(&path))
    }

    pub fn write(&mut self, rel: &str, content: &str) -> Result<(), ExperimentError> {
        let path = self.root.join(rel);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).map_err(io_err(parent))?;
        }
        fs::write(&path, content).map_err(io_err(&path))?;
        if !self.manifest.files.iter().any(|f| f == rel) {
            self.manifest.files.push(rel.to_string());
        }
        self.flush()
    }

    pub fn write_curve(
        &mut self,
        rel: &str,
        records: &[TrainingRecord],
        kind: &str,
        run: Option<usize>,
    ) -> Result<(), ExperimentError> {
        let (min, argmin) = min_kl(records).ok_or_else(|| ExperimentError::Bundle(format!("{rel}: empty curve")))?;
        self.manifest.curves.push(CurveEntry {
            path: rel.to_string(),
            kind: kind.to_string(),
            run,
            epochs: records.len(),
            min_kl: min,
            argmin_epoch: argmin,
        });
        self.write(rel, &records_to_csv(records))
    }

    pub fn finish(mut self) -> Result<Manifest, ExperimentError> {
        self.manifest.complete = true;
        self.flush()?;
        Ok(self.manifest)
    }
}

fn read(root: &Path, rel: &str) -> Result<String, ExperimentError> {
    let path = root.join(rel);
    fs::read_to_string(&path).map_err(io_err(&path))
}

fn check_header(rel: &str, text: &str, header: &str) -> Result<(), ExperimentError> {
    match text.lines().next() {
        Some(h) if h == header => Ok(()),
        other => Err(ExperimentError::Bundle(format!("{rel}: header {other:?}, expected `{header}`"))),
    }
}

fn parse_curve(rel: &str, text: &str) -> Result<Vec<(usize, f64)>, ExperimentError> {
    check_header(rel, text, TRAINING_HEADER)?;
    let bad = |line: usize| ExperimentError::Bundle(format!("{rel}:{line}: malformed row"));
    text.lines()
        .enumerate()
        .skip(1)
        .map(|(i, line)| {
            let cols: Vec<&str> = line.split(',').collect();
            if cols.len() != 4 {
                return Err(bad(i + 1));
            }
            for c in &cols[1..] {
                c.parse::<f64>().map_err(|_| bad(i + 1))?;
            }
            Ok((cols[0].parse().map_err(|_| bad(i + 1))?, cols[1].parse().map_err(|_| bad(i + 1))?))
        })
        .collect()
}

/// Checks a written bundle: every listed file exists, CSV headers match,
/// best-so-far columns never increase, epochs count up from zero, and the
/// manifest's min KL and argmin epoch equal those of each curve file.
pub fn verify_bundle(root: &Path) -> Result<Manifest, ExperimentError> {
    let manifest: Manifest = serde_json::from_str(&read(root, MANIFEST_FILE)?)
        .map_err(|e| ExperimentError::Bundle(format!("{MANIFEST_FILE}: {e}")))?;
    if !manifest.complete {
        return Err(ExperimentError::Bundle("manifest marks the bundle incomplete".into()));
    }
    for rel in &manifest.files {
        let text = read(root, rel)?;
        if rel.ends_with("spread.csv") {
            check_header(rel, &text, SPREAD_HEADER)?;
        } else if rel.ends_with("trace.csv") {
            check_header(rel, &text, TRACE_HEADER)?;
        }
    }
    for c in &manifest.curves {
        let rows = parse_curve(&c.path, &read(root, &c.path)?)?;
        let fail = |m: String| Err(ExperimentError::Bundle(format!("{}: {m}", c.path)));
        if rows.len() != c.epochs || rows.is_empty() {
            return fail(format!("{} rows, manifest says {}", rows.len(), c.epochs));
        }
        for (i, w) in rows.iter().enumerate() {
            if w.0 != i {
                return fail(format!("epoch {} on row {}", w.0, i));
            }
        }
        if let Some(w) = rows.windows(2).find(|w| w[1].1 > w[0].1) {
            return fail(format!("best_kl rises at epoch {}", w[1].0));
        }
        let min = rows.iter().map(|r| r.1).fold(f64::INFINITY, f64::min);
        let argmin = rows.iter().find(|r| r.1 == min).map(|r| r.0).unwrap();
        if min != c.min_kl || argmin != c.argmin_epoch {
            return fail(format!("curve minimum {min} at {argmin}, manifest {} at {}", c.min_kl, c.argmin_epoch));
        }
    }
    Ok(manifest)
}
