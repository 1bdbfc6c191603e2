//! Posterior summaries: `p1_hat`, negative entropy of the slab indicators,
//! per-player individual means, rankings and the signal scatter table.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sampler::PosteriorSamples;

/// Fewest retained draws `summarize` accepts.
pub const MIN_DRAWS: usize = 100;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlayerEstimate {
    pub player_id: String,
    /// Fraction of draws with the player in the slab.
    pub gamma_hat: f64,
    /// Posterior mean of `mu + alpha_i`.
    pub mean_est: f64,
    /// Posterior SD of `mu + alpha_i`.
    pub sd_est: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricSummary {
    pub metric: String,
    pub p1_hat: f64,
    pub neg_entropy: f64,
    pub mu_hat: f64,
    pub approx_normal: Option<bool>,
    pub players: Vec<PlayerEstimate>,
}

/// `x ln x + (1 - x) ln(1 - x)` with `0 ln 0 = 0`.
fn binary_neg_entropy(x: f64) -> f64 {
    let term = |p: f64| if p > 0.0 { p * p.ln() } else { 0.0 };
    term(x) + term(1.0 - x)
}

/// Mean binary negative entropy (natural log) of the indicator probabilities.
/// Lies in `[ln 0.5, 0]`.
pub fn neg_entropy(gamma_hat: &[f64]) -> f64 {
    if gamma_hat.is_empty() {
        return 0.0;
    }
    gamma_hat.iter().map(|&g| binary_neg_entropy(g)).sum::<f64>() / gamma_hat.len() as f64
}

pub fn summarize(samples: &PosteriorSamples) -> Result<MetricSummary> {
    let s = samples.draws();
    if s < MIN_DRAWS {
        return Err(Error::InvalidData(format!(
            "metric `{}`: {s} draws, need at least {MIN_DRAWS} to summarize",
            samples.metric
        )));
    }
    let m = samples.player_count();
    let mut ones = vec![0usize; m];
    let mut sum = vec![0.0; m];
    for d in 0..s {
        let mu = samples.mu[d];
        for (i, (&a, &g)) in samples.alpha_draw(d).iter().zip(samples.gamma_draw(d)).enumerate() {
            sum[i] += mu + a;
            ones[i] += usize::from(g);
        }
    }
    let means: Vec<f64> = sum.iter().map(|t| t / s as f64).collect();
    let mut sq = vec![0.0; m];
    for d in 0..s {
        let mu = samples.mu[d];
        for (i, &a) in samples.alpha_draw(d).iter().enumerate() {
            sq[i] += (mu + a - means[i]).powi(2);
        }
    }
    let players: Vec<PlayerEstimate> = (0..m)
        .map(|i| PlayerEstimate {
            player_id: samples.player_ids[i].clone(),
            gamma_hat: ones[i] as f64 / s as f64,
            mean_est: means[i],
            sd_est: (sq[i] / (s - 1) as f64).sqrt(),
        })
        .collect();
    let gamma_hat: Vec<f64> = players.iter().map(|p| p.gamma_hat).collect();
    Ok(MetricSummary {
        metric: samples.metric.clone(),
        p1_hat: samples.p1.iter().sum::<f64>() / s as f64,
        neg_entropy: neg_entropy(&gamma_hat),
        mu_hat: samples.mu.iter().sum::<f64>() / s as f64,
        approx_normal: None,
        players,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RankOrder {
    /// Largest individual mean first.
    #[default]
    Descending,
    /// Smallest first, for metrics where lower is better.
    Ascending,
}

/// The `k` best players by `mean_est`; ties go to the smaller `sd_est`, then
/// to the smaller player id.
pub fn top_players(summary: &MetricSummary, k: usize, order: RankOrder) -> Vec<PlayerEstimate> {
    let mut ranked: Vec<&PlayerEstimate> = summary.players.iter().collect();
    ranked.sort_by(|a, b| {
        let by_mean = match order {
            RankOrder::Descending => b.mean_est.total_cmp(&a.mean_est),
            RankOrder::Ascending => a.mean_est.total_cmp(&b.mean_est),
        };
        by_mean
            .then(a.sd_est.total_cmp(&b.sd_est))
            .then_with(|| a.player_id.cmp(&b.player_id))
    });
    ranked.into_iter().take(k).cloned().collect()
}

/// Region of the (`neg_entropy`, `p1_hat`) plane treated as high signal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SignalRegion {
    pub min_p1: f64,
    pub min_neg_entropy: f64,
}

impl Default for SignalRegion {
    fn default() -> Self {
        SignalRegion {
            min_p1: 0.5,
            min_neg_entropy: -0.35,
        }
    }
}

impl SignalRegion {
    pub fn contains(&self, p1_hat: f64, neg_entropy: f64) -> bool {
        p1_hat >= self.min_p1 && neg_entropy >= self.min_neg_entropy
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScatterRow {
    pub metric: String,
    pub p1_hat: f64,
    pub neg_entropy: f64,
    pub approx_normal: Option<bool>,
    pub high_signal: bool,
}

pub fn scatter_table(summaries: &[MetricSummary], region: &SignalRegion) -> Vec<ScatterRow> {
    summaries
        .iter()
        .map(|s| ScatterRow {
            metric: s.metric.clone(),
            p1_hat: s.p1_hat,
            neg_entropy: s.neg_entropy,
            approx_normal: s.approx_normal,
            high_signal: region.contains(s.p1_hat, s.neg_entropy),
        })
        .collect()
}

fn flag(v: Option<bool>) -> &'static str {
    match v {
        Some(true) => "true",
        Some(false) => "false",
        None => "",
    }
}

/// `metric,p1_hat,neg_entropy,mu_hat,approx_normal,high_signal`.
pub fn write_scatter_csv<W: Write>(rows: &[ScatterRow], summaries: &[MetricSummary], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["metric", "p1_hat", "neg_entropy", "mu_hat", "approx_normal", "high_signal"])?;
    for r in rows {
        let mu = summaries
            .iter()
            .find(|s| s.metric == r.metric)
            .map(|s| s.mu_hat.to_string())
            .unwrap_or_default();
        w.write_record([
            r.metric.clone(),
            r.p1_hat.to_string(),
            r.neg_entropy.to_string(),
            mu,
            flag(r.approx_normal).to_string(),
            r.high_signal.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io("<summary csv>", e))?;
    Ok(())
}

/// `player_id,gamma_hat,mean_est,sd_est`.
pub fn write_players_csv<W: Write>(players: &[PlayerEstimate], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["player_id", "gamma_hat", "mean_est", "sd_est"])?;
    for p in players {
        w.write_record([
            p.player_id.clone(),
            p.gamma_hat.to_string(),
            p.mean_est.to_string(),
            p.sd_est.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io("<players csv>", e))?;
    Ok(())
}
