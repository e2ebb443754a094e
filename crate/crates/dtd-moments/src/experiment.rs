//! Monte-Carlo experiments over a phantom sweep × SNR × fitter grid.
//!
//! Output directory layout:
//! - `summary.json`: every cell's [`McSummary`] with its sweep parameters;
//! - `sweep.csv`: one row per cell and descriptor (median, quartiles, bias);
//! - `cells/cell_NNN.csv`: per-realization estimates of cell `NNN`.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use dtd_moments_core::experiments::{McSummary, Realization};
use serde::{Deserialize, Serialize};

use crate::config::{ExperimentConfig, PhantomPoint};
use crate::error::{Error, Result};
use crate::formats::{csv_writer, write_json, write_text};
use crate::mc::{run_parallel, McRun};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub index: usize,
    pub phantom: String,
    pub params: BTreeMap<String, f64>,
    pub csv: String,
    pub summary: McSummary,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub seed: u64,
    pub n_realizations: usize,
    pub cells: Vec<Cell>,
}

impl ExperimentReport {
    pub fn wholly_failed(&self) -> Vec<&Cell> {
        self.cells
            .iter()
            .filter(|c| c.summary.n_failed == c.summary.n_realizations)
            .collect()
    }
}

#[derive(Serialize)]
struct RealizationRow<'a> {
    realization: usize,
    fitter: &'a str,
    e_iso: Option<f64>,
    v_iso: Option<f64>,
    e_aniso2_norm: Option<f64>,
    converged: bool,
}

pub const REALIZATION_HEADER: [&str; 6] = ["realization", "fitter", "e_iso", "v_iso", "e_aniso2_norm", "converged"];

pub fn realizations_csv(fitter: &str, runs: &[Realization]) -> String {
    let mut w = csv_writer(Vec::new(), &REALIZATION_HEADER);
    for r in runs {
        let e = r.estimate.as_ref();
        w.serialize(RealizationRow {
            realization: r.index,
            fitter,
            e_iso: e.map(|e| e.e_iso),
            v_iso: e.map(|e| e.v_iso),
            e_aniso2_norm: e.map(|e| e.e_aniso2_norm),
            converged: e.is_some_and(|e| e.converged),
        })
        .expect("writing to memory");
    }
    String::from_utf8(w.into_inner().expect("writing to memory")).expect("CSV output is UTF-8")
}

fn sweep_csv(report: &ExperimentReport) -> String {
    let keys: Vec<&String> = {
        let mut k: Vec<&String> = report.cells.iter().flat_map(|c| c.params.keys()).collect();
        k.sort();
        k.dedup();
        k
    };
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["cell", "phantom"];
    header.extend(keys.iter().map(|k| k.as_str()));
    header.extend([
        "fitter",
        "snr",
        "descriptor",
        "median",
        "q25",
        "q75",
        "iqr",
        "ground_truth",
        "bias",
        "n_failed",
        "n_unconverged",
    ]);
    w.write_record(&header).expect("writing to memory");
    for c in &report.cells {
        let s = &c.summary;
        for (name, d) in [("e_iso", &s.e_iso), ("v_iso", &s.v_iso), ("e_aniso2_norm", &s.e_aniso2_norm)] {
            let mut row = vec![c.index.to_string(), c.phantom.clone()];
            row.extend(keys.iter().map(|k| c.params.get(*k).map_or(String::new(), |v| v.to_string())));
            row.extend([
                s.fitter.clone(),
                s.snr.to_string(),
                name.to_string(),
                d.median.to_string(),
                d.q25.to_string(),
                d.q75.to_string(),
                d.iqr.to_string(),
                d.ground_truth.to_string(),
                d.bias.to_string(),
                s.n_failed.to_string(),
                s.n_unconverged.to_string(),
            ]);
            w.write_record(&row).expect("writing to memory");
        }
    }
    String::from_utf8(w.into_inner().expect("writing to memory")).expect("CSV output is UTF-8")
}

fn kind(p: &PhantomPoint) -> String {
    p.to_string().split(' ').next().unwrap_or_default().to_string()
}

/// Runs every cell; per-cell realization CSVs are returned alongside the
/// report, in cell order.
pub fn run_experiment(cfg: &ExperimentConfig, pool: &rayon::ThreadPool) -> Result<(ExperimentReport, Vec<String>)> {
    let scheme = cfg.scheme.load()?;
    let mut cells = Vec::new();
    let mut csvs = Vec::new();
    for point in &cfg.points {
        let phantom = point.build(&cfg.resolution)?;
        let params: BTreeMap<String, f64> = point.params().into_iter().map(|(k, v)| (k.to_string(), v)).collect();
        for &snr in &cfg.snr {
            for fk in &cfg.fitters {
                let fitter = fk.fitter(cfg.starts);
                let McRun { summary, realizations } =
                    run_parallel(pool, &phantom, &scheme, &fitter, snr, cfg.n, cfg.seed);
                let index = cells.len();
                csvs.push(realizations_csv(fk.name(), &realizations));
                cells.push(Cell {
                    index,
                    phantom: kind(point),
                    params: params.clone(),
                    csv: format!("cells/cell_{index:03}.csv"),
                    summary,
                });
            }
        }
    }
    Ok((
        ExperimentReport {
            seed: cfg.seed,
            n_realizations: cfg.n,
            cells,
        },
        csvs,
    ))
}

/// Writes the report into `dir` and returns the paths written.
pub fn write_experiment(dir: &Path, report: &ExperimentReport, csvs: &[String]) -> Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    let summary = dir.join("summary.json");
    write_json(report, &summary)?;
    written.push(summary);
    let sweep = dir.join("sweep.csv");
    write_text(&sweep, &sweep_csv(report))?;
    written.push(sweep);
    for (cell, text) in report.cells.iter().zip(csvs) {
        let p = dir.join(&cell.csv);
        write_text(&p, text)?;
        written.push(p);
    }
    Ok(written)
}

pub fn check_failures(report: &ExperimentReport) -> Result<()> {
    let failed = report.wholly_failed();
    if failed.is_empty() {
        return Ok(());
    }
    let names: Vec<String> = failed.iter().map(|c| format!("cell {} ({})", c.index, c.summary.fitter)).collect();
    Err(Error::Convergence(format!(
        "every realization failed in {}",
        names.join(", ")
    )))
}
