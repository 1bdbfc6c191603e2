//! L1-penalised regression of centred metric values on player indicators.
//!
//! With one indicator column per player the columns touch disjoint rows, so
//! the problem separates by player and the minimiser of
//! `sum_ij (c_ij - beta_i)^2 + lambda sum_i |beta_i|` is the soft-threshold
//! `beta_i = sign(m_i) max(|m_i| - lambda / (2 n_i), 0)`, where `m_i` is the
//! player's centred mean and `n_i` their season count. Opportunity weights
//! are not used.

use std::io::Write;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::MetricPanel;
use crate::rng;

/// Coefficients with `|beta| <= NONZERO_EPS` count as zero.
pub const NONZERO_EPS: f64 = 1e-12;

/// Tolerance on the achieved fraction when solving for `lambda`.
pub const FRACTION_TOL: f64 = 1e-6;

/// Per-player sufficient statistics of a centred panel (or a subset of rows).
#[derive(Debug, Clone, PartialEq)]
pub struct IndicatorDesign {
    /// Grand mean removed from every value.
    pub center: f64,
    /// Centred per-player means; zero for players without rows.
    pub means: Vec<f64>,
    /// Rows per player.
    pub counts: Vec<usize>,
}

impl IndicatorDesign {
    pub fn from_panel(panel: &MetricPanel) -> Self {
        let rows: Vec<usize> = (0..panel.len()).collect();
        Self::from_rows(panel, &rows)
    }

    /// Design restricted to the given observation indices.
    pub fn from_rows(panel: &MetricPanel, rows: &[usize]) -> Self {
        let obs = panel.observations();
        let m = panel.player_count();
        let center = rows.iter().map(|&r| obs[r].value).sum::<f64>() / rows.len().max(1) as f64;
        let mut sums = vec![0.0; m];
        let mut counts = vec![0usize; m];
        for &r in rows {
            let o = &obs[r];
            sums[o.player] += o.value - center;
            counts[o.player] += 1;
        }
        let means = sums
            .iter()
            .zip(&counts)
            .map(|(s, &n)| if n > 0 { s / n as f64 } else { 0.0 })
            .collect();
        IndicatorDesign { center, means, counts }
    }

    /// Smallest `lambda` at which every coefficient is zero.
    pub fn lambda_max(&self) -> f64 {
        self.means
            .iter()
            .zip(&self.counts)
            .map(|(m, &n)| 2.0 * n as f64 * m.abs())
            .fold(0.0, f64::max)
    }

    pub fn ols_l1(&self) -> f64 {
        self.means.iter().map(|m| m.abs()).sum()
    }
}

/// Unpenalised coefficients: the centred per-player means.
pub fn ols_means(panel: &MetricPanel) -> Vec<f64> {
    IndicatorDesign::from_panel(panel).means
}

fn soft_threshold(x: f64, t: f64) -> f64 {
    x.signum() * (x.abs() - t).max(0.0)
}

/// Exact lasso solution at penalty `lambda`.
pub fn fit_at_lambda(design: &IndicatorDesign, lambda: f64) -> Vec<f64> {
    design
        .means
        .iter()
        .zip(&design.counts)
        .map(|(&m, &n)| {
            if n == 0 {
                0.0
            } else {
                soft_threshold(m, lambda / (2.0 * n as f64))
            }
        })
        .collect()
}

fn fraction_of(design: &IndicatorDesign, beta: &[f64]) -> f64 {
    let ols = design.ols_l1();
    if ols == 0.0 {
        0.0
    } else {
        beta.iter().map(|b| b.abs()).sum::<f64>() / ols
    }
}

/// `lambda` whose fit has L1 fraction `f` (within [`FRACTION_TOL`]), by
/// bisection on `[0, lambda_max]`.
pub fn lambda_for_fraction(design: &IndicatorDesign, f: f64) -> f64 {
    let lmax = design.lambda_max();
    if f >= 1.0 || lmax == 0.0 {
        return 0.0;
    }
    if f <= 0.0 {
        return lmax;
    }
    let (mut lo, mut hi) = (0.0, lmax);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let got = fraction_of(design, &fit_at_lambda(design, mid));
        if (got - f).abs() <= FRACTION_TOL {
            return mid;
        }
        // The fraction falls as lambda grows.
        if got > f {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LassoFit {
    pub metric: String,
    pub fraction: f64,
    pub lambda: f64,
    pub coefficients: Vec<f64>,
    pub lasso_pct: f64,
    /// Mean out-of-fold RMSE at this fraction (NaN when not cross-validated).
    pub cv_rmse: f64,
}

/// Percentage of players with a nonzero coefficient.
pub fn lasso_pct(coefficients: &[f64]) -> f64 {
    if coefficients.is_empty() {
        return 0.0;
    }
    100.0 * coefficients.iter().filter(|b| b.abs() > NONZERO_EPS).count() as f64 / coefficients.len() as f64
}

fn fit_fraction(panel: &MetricPanel, design: &IndicatorDesign, f: f64) -> LassoFit {
    let lambda = lambda_for_fraction(design, f);
    let coefficients = if f <= 0.0 {
        vec![0.0; design.means.len()]
    } else {
        fit_at_lambda(design, lambda)
    };
    LassoFit {
        metric: panel.metric.clone(),
        fraction: f,
        lambda,
        lasso_pct: lasso_pct(&coefficients),
        coefficients,
        cv_rmse: f64::NAN,
    }
}

/// Fits along a grid of fractions. A constant panel maps every fraction to
/// the all-zero fit; `degenerate` reports that case.
pub fn fraction_path(panel: &MetricPanel, grid: &[f64]) -> Result<FractionPath> {
    validate_grid(grid)?;
    let design = IndicatorDesign::from_panel(panel);
    let fits = grid.iter().map(|&f| fit_fraction(panel, &design, f)).collect();
    Ok(FractionPath {
        fits,
        degenerate: design.ols_l1() == 0.0,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct FractionPath {
    pub fits: Vec<LassoFit>,
    pub degenerate: bool,
}

fn validate_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::InvalidParameter("empty fraction grid".into()));
    }
    if grid.iter().any(|f| !(0.0..=1.0).contains(f)) || grid.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::InvalidParameter("fraction grid must be sorted within [0, 1]".into()));
    }
    Ok(())
}

/// `points` evenly spaced fractions from 0 to 1.
pub fn default_grid(points: usize) -> Vec<f64> {
    match points {
        0 => vec![],
        1 => vec![1.0],
        n => (0..n).map(|k| k as f64 / (n - 1) as f64).collect(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CvConfig {
    pub folds: usize,
    pub repeats: usize,
    pub grid_points: usize,
    pub seed: u64,
}

impl Default for CvConfig {
    fn default() -> Self {
        CvConfig {
            folds: 5,
            repeats: 10,
            grid_points: 101,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CvResult {
    pub grid: Vec<f64>,
    /// Out-of-fold RMSE averaged over every (repeat, fold) split.
    pub mean_rmse: Vec<f64>,
    pub chosen_fraction: f64,
    /// Full-data fit at the chosen fraction.
    pub fit: LassoFit,
}

/// Random fold labels for one repeat: shuffle the rows, then deal them out.
pub fn fold_assignment(n: usize, folds: usize, seed: u64, repeat: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng::stream(seed, repeat as u64));
    let mut label = vec![0; n];
    for (pos, &row) in order.iter().enumerate() {
        label[row] = pos % folds;
    }
    label
}

/// Out-of-fold RMSE for every grid point on one split.
fn split_rmse(panel: &MetricPanel, labels: &[usize], fold: usize, grid: &[f64]) -> Result<Vec<f64>> {
    let (train, test): (Vec<usize>, Vec<usize>) = (0..panel.len()).partition(|&r| labels[r] != fold);
    if train.is_empty() || test.is_empty() {
        return Err(Error::InvalidData(format!("fold {fold} has no rows")));
    }
    let design = IndicatorDesign::from_rows(panel, &train);
    let obs = panel.observations();
    Ok(grid
        .iter()
        .map(|&f| {
            let beta = if f <= 0.0 {
                vec![0.0; design.means.len()]
            } else {
                fit_at_lambda(&design, lambda_for_fraction(&design, f))
            };
            let sse: f64 = test
                .iter()
                .map(|&r| {
                    let o = &obs[r];
                    (o.value - design.center - beta[o.player]).powi(2)
                })
                .sum();
            (sse / test.len() as f64).sqrt()
        })
        .collect())
}

/// Repeated k-fold cross-validation over the fraction grid. Players absent
/// from a training split are predicted at the training grand mean. Ties in
/// RMSE go to the smaller fraction.
pub fn cross_validate(panel: &MetricPanel, grid: &[f64], config: &CvConfig) -> Result<CvResult> {
    validate_grid(grid)?;
    if config.folds < 2 || config.repeats == 0 {
        return Err(Error::InvalidParameter("need at least 2 folds and 1 repeat".into()));
    }
    if panel.len() < config.folds {
        return Err(Error::InvalidData(format!(
            "metric `{}`: {} player-seasons cannot fill {} folds",
            panel.metric,
            panel.len(),
            config.folds
        )));
    }
    let cells: Vec<(usize, usize)> = (0..config.repeats)
        .flat_map(|r| (0..config.folds).map(move |k| (r, k)))
        .collect();
    let labels: Vec<Vec<usize>> = (0..config.repeats)
        .map(|r| fold_assignment(panel.len(), config.folds, config.seed, r))
        .collect();
    let run = |&(r, k): &(usize, usize)| split_rmse(panel, &labels[r], k, grid);
    #[cfg(feature = "parallel")]
    let per_cell: Vec<Vec<f64>> = {
        use rayon::prelude::*;
        cells.par_iter().map(run).collect::<Result<_>>()?
    };
    #[cfg(not(feature = "parallel"))]
    let per_cell: Vec<Vec<f64>> = cells.iter().map(run).collect::<Result<_>>()?;

    let mut mean_rmse = vec![0.0; grid.len()];
    for cell in &per_cell {
        for (acc, v) in mean_rmse.iter_mut().zip(cell) {
            *acc += v;
        }
    }
    for v in &mut mean_rmse {
        *v /= per_cell.len() as f64;
    }
    let best = mean_rmse
        .iter()
        .enumerate()
        .fold(0, |best, (i, v)| if *v < mean_rmse[best] { i } else { best });
    let chosen = grid[best];
    let design = IndicatorDesign::from_panel(panel);
    let mut fit = fit_fraction(panel, &design, chosen);
    fit.cv_rmse = mean_rmse[best];
    Ok(CvResult {
        grid: grid.to_vec(),
        mean_rmse,
        chosen_fraction: chosen,
        fit,
    })
}

/// `fraction,mean_rmse,chosen` for one metric.
pub fn write_cv_csv<W: Write>(result: &CvResult, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["fraction", "mean_rmse", "chosen"])?;
    for (f, r) in result.grid.iter().zip(&result.mean_rmse) {
        w.write_record([f.to_string(), r.to_string(), (*f == result.chosen_fraction).to_string()])?;
    }
    w.flush().map_err(|e| Error::io("<lasso csv>", e))?;
    Ok(())
}
