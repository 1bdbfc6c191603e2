//! Correlation PCA over a player-season x metric matrix, with parallel-analysis
//! (column permutation) null bands and row-bootstrap variability bands.

use std::collections::BTreeMap;
use std::io::Write;

use nalgebra::{DMatrix, SymmetricEigen};
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::MetricPanel;
use crate::rng;
use crate::stats::quantile_sorted;

/// Metrics left out of the PCA by default (too many zero denominators).
pub const EXCLUDED_METRICS: [&str; 1] = ["SBPA"];

/// Standardised complete-case matrix. Rows are player-seasons, columns metrics;
/// rows are kept in ascending value order.
#[derive(Debug, Clone, PartialEq)]
pub struct PcaInput {
    pub metrics: Vec<String>,
    pub rows: Vec<(String, i32)>,
    pub raw: DMatrix<f64>,
    pub means: Vec<f64>,
    pub sds: Vec<f64>,
    /// z-scores (sample SD, `n - 1`).
    pub z: DMatrix<f64>,
}

fn standardize(raw: &DMatrix<f64>) -> Option<(Vec<f64>, Vec<f64>, DMatrix<f64>)> {
    let n = raw.nrows();
    let mut means = Vec::with_capacity(raw.ncols());
    let mut sds = Vec::with_capacity(raw.ncols());
    let mut z = raw.clone();
    for (j, mut col) in z.column_iter_mut().enumerate() {
        let mean = raw.column(j).sum() / n as f64;
        let ss: f64 = raw.column(j).iter().map(|x| (x - mean).powi(2)).sum();
        let sd = (ss / (n - 1) as f64).sqrt();
        let scale = raw.column(j).iter().fold(0.0_f64, |a, x| a.max(x.abs()));
        if sd.is_nan() || sd <= 1e-12 * scale.max(f64::MIN_POSITIVE) {
            return None;
        }
        for v in col.iter_mut() {
            *v = (*v - mean) / sd;
        }
        means.push(mean);
        sds.push(sd);
    }
    Some((means, sds, z))
}

fn lexicographic(m: &DMatrix<f64>, a: usize, b: usize) -> std::cmp::Ordering {
    m.row(a)
        .iter()
        .zip(m.row(b).iter())
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .unwrap_or(std::cmp::Ordering::Equal)
}

/// Rows sorted by value so that summation order, and hence every result bit,
/// is independent of the input row order.
fn canonical_rows(rows: Vec<(String, i32)>, raw: DMatrix<f64>) -> (Vec<(String, i32)>, DMatrix<f64>) {
    let mut order: Vec<usize> = (0..raw.nrows()).collect();
    order.sort_by(|&a, &b| lexicographic(&raw, a, b).then_with(|| rows[a].cmp(&rows[b])));
    let sorted = DMatrix::from_fn(raw.nrows(), raw.ncols(), |i, j| raw[(order[i], j)]);
    (order.iter().map(|&i| rows[i].clone()).collect(), sorted)
}

impl PcaInput {
    pub fn from_matrix(metrics: Vec<String>, rows: Vec<(String, i32)>, raw: DMatrix<f64>) -> Result<Self> {
        if raw.ncols() < 2 || raw.ncols() != metrics.len() {
            return Err(Error::InvalidData(format!(
                "PCA needs at least two named metrics, got {} columns for {} names",
                raw.ncols(),
                metrics.len()
            )));
        }
        if raw.nrows() < 3 || raw.nrows() != rows.len() {
            return Err(Error::InvalidData(format!(
                "PCA needs at least three complete rows, got {}",
                raw.nrows()
            )));
        }
        if raw.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidData("PCA input has non-finite cells".into()));
        }
        let (rows, raw) = canonical_rows(rows, raw);
        let (means, sds, z) = standardize(&raw).ok_or_else(|| {
            Error::InvalidData("PCA input has a column with zero variance".into())
        })?;
        Ok(PcaInput { metrics, rows, raw, means, sds, z })
    }

    pub fn columns(&self) -> usize {
        self.z.ncols()
    }
}

/// Inner join of panels on `(player_id, season)`; incomplete rows are dropped.
pub fn assemble(panels: &[&MetricPanel]) -> Result<PcaInput> {
    if panels.len() < 2 {
        return Err(Error::InvalidData("PCA needs at least two metrics".into()));
    }
    let mut table: BTreeMap<(String, i32), Vec<Option<f64>>> = BTreeMap::new();
    for (j, p) in panels.iter().enumerate() {
        for o in p.observations() {
            let key = (p.player_ids[o.player].clone(), o.season);
            if j == 0 {
                table.entry(key).or_insert_with(|| vec![None; panels.len()])[0] = Some(o.value);
            } else if let Some(row) = table.get_mut(&key) {
                row[j] = Some(o.value);
            }
        }
    }
    let complete: Vec<((String, i32), Vec<f64>)> = table
        .into_iter()
        .filter_map(|(k, v)| v.into_iter().collect::<Option<Vec<f64>>>().map(|v| (k, v)))
        .collect();
    if complete.is_empty() {
        return Err(Error::InvalidData("no player-season is present in every metric".into()));
    }
    let n = complete.len();
    let raw = DMatrix::from_fn(n, panels.len(), |i, j| complete[i].1[j]);
    let rows = complete.into_iter().map(|(k, _)| k).collect();
    PcaInput::from_matrix(panels.iter().map(|p| p.metric.clone()).collect(), rows, raw)
}

/// `Z'Z / (n - 1)` for a column-standardised matrix.
fn correlation(z: &DMatrix<f64>) -> DMatrix<f64> {
    let mut c = z.tr_mul(z);
    c /= (z.nrows() - 1) as f64;
    c
}

fn sorted_eigenvalues(c: DMatrix<f64>) -> Vec<f64> {
    let mut ev: Vec<f64> = c.symmetric_eigenvalues().iter().map(|v| v.max(0.0)).collect();
    ev.sort_by(|a, b| b.total_cmp(a));
    ev
}

/// Eigenvalues (descending) and unit loadings of the correlation matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
    /// Column `k` holds component `k`; its largest-magnitude entry is positive.
    pub loadings: DMatrix<f64>,
}

/// Spectral decomposition of the sample correlation matrix. Rows are put in a
/// canonical order first, so the result does not depend on row order.
pub fn decompose(input: &PcaInput) -> Result<Spectrum> {
    let z = &input.z;
    let mut order: Vec<usize> = (0..z.nrows()).collect();
    order.sort_by(|&a, &b| lexicographic(z, a, b));
    let canonical = DMatrix::from_fn(z.nrows(), z.ncols(), |i, j| z[(order[i], j)]);
    let corr = correlation(&canonical);
    if corr.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical("correlation matrix is not finite".into()));
    }
    let eig = SymmetricEigen::new(corr);
    let p = eig.eigenvalues.len();
    let mut idx: Vec<usize> = (0..p).collect();
    idx.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let eigenvalues = idx.iter().map(|&k| eig.eigenvalues[k].max(0.0)).collect();
    let mut loadings = DMatrix::zeros(p, p);
    for (out, &k) in idx.iter().enumerate() {
        let v = eig.eigenvectors.column(k);
        let pivot = v.iter().fold(0.0_f64, |best, x| if x.abs() > best.abs() { *x } else { best });
        let sign = if pivot < 0.0 { -1.0 } else { 1.0 };
        loadings.set_column(out, &(v * sign));
    }
    Ok(Spectrum { eigenvalues, loadings })
}

fn run_reps<F>(reps: usize, f: F) -> Vec<Vec<f64>>
where
    F: Fn(usize) -> Vec<f64> + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..reps).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..reps).map(f).collect()
    }
}

fn per_component(spectra: &[Vec<f64>], p: usize, q: f64) -> Vec<f64> {
    (0..p)
        .map(|k| {
            let mut col: Vec<f64> = spectra.iter().map(|s| s[k]).collect();
            col.sort_by(f64::total_cmp);
            quantile_sorted(&col, q)
        })
        .collect()
}

/// Copy of `z` with each column independently shuffled.
pub fn permute_columns<R: Rng + ?Sized>(z: &DMatrix<f64>, rng: &mut R) -> DMatrix<f64> {
    let mut out = z.clone();
    for mut col in out.column_iter_mut() {
        col.as_mut_slice().shuffle(rng);
    }
    out
}

/// Per-component `quantile` of the eigenvalues of column-permuted copies.
pub fn permutation_band(input: &PcaInput, reps: usize, quantile: f64, seed: u64) -> Result<Vec<f64>> {
    check_band_args(reps, quantile)?;
    let spectra = run_reps(reps, |r| {
        let mut g = rng::stream(seed, r as u64);
        sorted_eigenvalues(correlation(&permute_columns(&input.z, &mut g)))
    });
    Ok(per_component(&spectra, input.columns(), quantile))
}

/// Central `level` interval of bootstrap eigenvalues (rows resampled with
/// replacement, then re-standardised).
pub fn bootstrap_band(input: &PcaInput, reps: usize, level: f64, seed: u64) -> Result<(Vec<f64>, Vec<f64>)> {
    check_band_args(reps, level)?;
    let n = input.raw.nrows();
    let p = input.columns();
    let boot_seed = rng::mix64(seed ^ 0xB0B0_B0B0);
    let spectra = run_reps(reps, |r| {
        let mut g = rng::stream(boot_seed, r as u64);
        let pick: Vec<usize> = (0..n).map(|_| g.random_range(0..n)).collect();
        let sample = DMatrix::from_fn(n, p, |i, j| input.raw[(pick[i], j)]);
        match standardize(&sample) {
            Some((_, _, z)) => sorted_eigenvalues(correlation(&z)),
            // A resample with a constant column; report it as all-zero.
            None => vec![0.0; p],
        }
    });
    let tail = (1.0 - level) / 2.0;
    Ok((per_component(&spectra, p, tail), per_component(&spectra, p, 1.0 - tail)))
}

fn check_band_args(reps: usize, q: f64) -> Result<()> {
    if reps == 0 {
        return Err(Error::InvalidParameter("band needs at least one replicate".into()));
    }
    if !(0.0..=1.0).contains(&q) {
        return Err(Error::InvalidParameter(format!("quantile {q} outside [0, 1]")));
    }
    Ok(())
}

/// Leading components whose eigenvalue strictly exceeds the null band;
/// counting stops at the first one that does not.
pub fn significant_components(observed: &[f64], null_band: &[f64]) -> usize {
    observed
        .iter()
        .zip(null_band)
        .take_while(|(o, b)| o > b)
        .count()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PcaConfig {
    pub reps: usize,
    pub quantile: f64,
    pub seed: u64,
}

impl Default for PcaConfig {
    fn default() -> Self {
        PcaConfig {
            reps: 500,
            quantile: 0.95,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PcaResult {
    pub metrics: Vec<String>,
    pub rows: usize,
    pub spectrum: Spectrum,
    pub null_band: Vec<f64>,
    pub boot_low: Vec<f64>,
    pub boot_high: Vec<f64>,
    pub significant_count: usize,
}

/// Spectrum, both bands and the significant-component count.
pub fn analyze(input: &PcaInput, config: &PcaConfig) -> Result<PcaResult> {
    let spectrum = decompose(input)?;
    let null_band = permutation_band(input, config.reps, config.quantile, config.seed)?;
    let (boot_low, boot_high) = bootstrap_band(input, config.reps, config.quantile, config.seed)?;
    let significant_count = significant_components(&spectrum.eigenvalues, &null_band);
    Ok(PcaResult {
        metrics: input.metrics.clone(),
        rows: input.raw.nrows(),
        spectrum,
        null_band,
        boot_low,
        boot_high,
        significant_count,
    })
}

/// `component,observed,null_band,boot_low,boot_high` (components from 1).
pub fn write_result_csv<W: Write>(result: &PcaResult, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["component", "observed", "null_band", "boot_low", "boot_high"])?;
    for k in 0..result.spectrum.eigenvalues.len() {
        w.write_record([
            (k + 1).to_string(),
            result.spectrum.eigenvalues[k].to_string(),
            result.null_band[k].to_string(),
            result.boot_low[k].to_string(),
            result.boot_high[k].to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io("<pca csv>", e))?;
    Ok(())
}

/// Rows of a result CSV as `(observed, null_band, boot_low, boot_high)`.
pub fn read_result_csv<R: std::io::Read>(source: R) -> Result<Vec<[f64; 4]>> {
    let mut r = csv::Reader::from_reader(source);
    let mut out = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        let mut row = [0.0; 4];
        for (k, slot) in row.iter_mut().enumerate() {
            *slot = rec.get(k + 1).and_then(|v| v.parse().ok()).ok_or_else(|| Error::BadField {
                row: i + 2,
                column: format!("column {}", k + 2),
                message: "not a number".into(),
            })?;
        }
        out.push(row);
    }
    Ok(out)
}
