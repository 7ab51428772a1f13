//! One symbolic fit per output dimension, persisted per dimension.
//!
//! Results land in
//! `<out>/SR_output/<block>/dim_<j>/<yyyymmddThhmmssZ>/{front.csv,best.txt}`.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::expr::{parse_with_names, render_with_names, Expr};
use crate::harness::IOTable;
use crate::search::{evolve, Dataset, FrontEntry, ParetoFront, SRConfig, SearchStats};

pub const RESULTS_DIR: &str = "SR_output";
pub const FRONT_FILE: &str = "front.csv";
pub const BEST_FILE: &str = "best.txt";

#[derive(Clone, Debug)]
pub struct DimensionFit {
    pub front: ParetoFront,
    /// Index of the highest-scoring entry in `front`.
    pub best_index: usize,
    pub seed: u64,
    pub stats: SearchStats,
    pub output_dir: Option<PathBuf>,
}

impl DimensionFit {
    pub fn best(&self) -> &FrontEntry {
        &self.front.entries()[self.best_index]
    }
}

#[derive(Clone, Debug)]
pub struct FitResult {
    pub input_names: Vec<String>,
    pub output_names: Vec<String>,
    pub dims: Vec<DimensionFit>,
    pub config: SRConfig,
    pub wall_time: Duration,
}

/// Fits a dataset prepared by the caller (e.g. a weighted locale).
pub fn fit_dataset(data: &Dataset, config: &SRConfig) -> Result<DimensionFit> {
    let (front, stats) = evolve(data, config)?;
    let best_index = front
        .select_best()
        .ok_or_else(|| Error::Data("search produced no finite-loss expression".into()))?;
    Ok(DimensionFit {
        front,
        best_index,
        seed: config.seed,
        stats,
        output_dir: None,
    })
}

/// Fits every output dimension of `table` with seed `config.seed + j`
/// and, when `out_dir` is given, writes the per-dimension results there.
pub fn distill(
    table: &IOTable,
    config: &SRConfig,
    out_dir: Option<&Path>,
    block_name: &str,
) -> Result<FitResult> {
    distill_weighted(table, None, config, out_dir, block_name)
}

/// [`distill`] with optional per-row weights shared by every dimension.
pub fn distill_weighted(
    table: &IOTable,
    weights: Option<&[f64]>,
    config: &SRConfig,
    out_dir: Option<&Path>,
    block_name: &str,
) -> Result<FitResult> {
    config.validate()?;
    if let (Some(w), true) = (weights, table.n_outputs() > 0) {
        Dataset::new(table.inputs(), &table.outputs().column(0))?.with_weights(w)?;
    }
    let started = Instant::now();
    let mut dims: Vec<DimensionFit> = (0..table.n_outputs())
        .into_par_iter()
        .map(|j| {
            let tag = |e: Error| Error::Dimension {
                dim: j,
                source: Box::new(e),
            };
            let mut data = table.dataset(j).map_err(tag)?;
            if let Some(w) = weights {
                data = data.with_weights(w).map_err(tag)?;
            }
            let cfg = SRConfig {
                seed: config.seed.wrapping_add(j as u64),
                ..config.clone()
            };
            fit_dataset(&data, &cfg).map_err(tag)
        })
        .collect::<Result<_>>()?;

    if let Some(root) = out_dir {
        let stamp = chrono::Utc::now().format("%Y%m%dT%H%M%SZ").to_string();
        for (j, fit) in dims.iter_mut().enumerate() {
            let dim_dir = root
                .join(RESULTS_DIR)
                .join(block_name)
                .join(format!("dim_{j}"));
            let dir = fresh_dir(&dim_dir, &stamp)?;
            write_front(&dir, &fit.front, fit.best_index, table.input_names())?;
            fit.output_dir = Some(dir);
        }
    }

    Ok(FitResult {
        input_names: table.input_names().to_vec(),
        output_names: table.output_names().to_vec(),
        dims,
        config: config.clone(),
        wall_time: started.elapsed(),
    })
}

fn fresh_dir(parent: &Path, stamp: &str) -> Result<PathBuf> {
    fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    let mut dir = parent.join(stamp);
    let mut k = 1;
    while dir.exists() {
        dir = parent.join(format!("{stamp}_{k}"));
        k += 1;
    }
    fs::create_dir(&dir).map_err(|e| Error::io(&dir, e))?;
    Ok(dir)
}

/// Writes `front.csv` (`complexity,loss,score,equation`) and `best.txt`.
pub fn write_front<S: AsRef<str>>(
    dir: &Path,
    front: &ParetoFront,
    best_index: usize,
    names: &[S],
) -> Result<()> {
    let path = dir.join(FRONT_FILE);
    let mut w = csv::Writer::from_path(&path).map_err(|e| Error::format(&path, e.to_string()))?;
    let io = |e: csv::Error| Error::format(&path, e.to_string());
    w.write_record(["complexity", "loss", "score", "equation"]).map_err(io)?;
    for (e, s) in front.entries().iter().zip(front.scores()) {
        w.write_record([
            e.complexity.to_string(),
            e.loss.to_string(),
            s.to_string(),
            render_with_names(&e.expr, names),
        ])
        .map_err(io)?;
    }
    w.flush().map_err(|e| Error::io(&path, e))?;

    let best = dir.join(BEST_FILE);
    let text = render_with_names(&front.entries()[best_index].expr, names) + "\n";
    fs::write(&best, text).map_err(|e| Error::io(&best, e))
}

/// A row of a persisted front.
#[derive(Clone, Debug, PartialEq)]
pub struct FrontRow {
    pub complexity: u32,
    pub loss: f64,
    pub score: f64,
    pub equation: String,
}

pub fn read_front(path: &Path) -> Result<Vec<FrontRow>> {
    let mut r = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Error::format(path, e.to_string()))?;
    let header = r.headers().map_err(|e| Error::format(path, e.to_string()))?.clone();
    let col = |name: &str| {
        header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::format(path, format!("missing column `{name}`")))
    };
    let (ci, li, ei) = (col("complexity")?, col("loss")?, col("equation")?);
    let si = header.iter().position(|h| h == "score");
    let mut rows = Vec::new();
    for (k, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| Error::format(path, e.to_string()))?;
        let bad = |what: &str| Error::format(path, format!("row {}: bad {what}", k + 1));
        rows.push(FrontRow {
            complexity: rec.get(ci).and_then(|v| v.parse().ok()).ok_or_else(|| bad("complexity"))?,
            loss: rec.get(li).and_then(|v| v.parse().ok()).ok_or_else(|| bad("loss"))?,
            score: match si {
                Some(i) => rec.get(i).and_then(|v| v.parse().ok()).ok_or_else(|| bad("score"))?,
                None => f64::NAN,
            },
            equation: rec.get(ei).ok_or_else(|| bad("equation"))?.to_string(),
        });
    }
    Ok(rows)
}

/// Reads an expression bank: one expression per nonblank line.
pub fn read_bank<S: AsRef<str>>(path: &Path, names: &[S]) -> Result<Vec<Expr>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            parse_with_names(l, names)
                .map_err(|e| Error::format(path, format!("line {}: {e}", i + 1)))
        })
        .collect()
}
