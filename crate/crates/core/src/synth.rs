//! Panels drawn from the spike-and-slab generative model.
//!
//! Player `i` uses its own substream `i + 1` of the master seed, so adding
//! players never changes the draws of earlier ones, and players can be
//! generated in any order.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{MetricPanel, PanelRecord};
use crate::rng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeasonCount {
    Fixed(usize),
    /// Uniform on `min..=max`, drawn per player.
    Uniform { min: usize, max: usize },
    PerPlayer(Vec<usize>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightScheme {
    /// All weights 1.
    Unit,
    /// Opportunity counts uniform on `min..=max`; weights `n_bar / n` as in ingest.
    Opportunities { min: u32, max: u32 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruthParams {
    pub mu: f64,
    pub sigma2: f64,
    pub tau2: f64,
    pub p1: f64,
    pub v0: f64,
    pub players: usize,
    pub seasons: SeasonCount,
    pub weights: WeightScheme,
    pub seed: u64,
    #[serde(default = "default_first_season")]
    pub first_season: i32,
}

fn default_first_season() -> i32 {
    2000
}

impl Default for TruthParams {
    fn default() -> Self {
        TruthParams {
            mu: 0.10,
            sigma2: 0.001,
            tau2: 0.004,
            p1: 0.6,
            v0: 0.01,
            players: 200,
            seasons: SeasonCount::Fixed(5),
            weights: WeightScheme::Unit,
            seed: 1,
            first_season: default_first_season(),
        }
    }
}

impl TruthParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if !(0.0..=1.0).contains(&self.p1) {
            return bad(format!("p1 = {} outside [0, 1]", self.p1));
        }
        if !(self.v0 > 0.0 && self.v0 < 1.0) {
            return bad(format!("v0 = {} must lie in (0, 1)", self.v0));
        }
        if !(self.sigma2 > 0.0 && self.tau2 > 0.0) || !self.sigma2.is_finite() || !self.tau2.is_finite() {
            return bad("sigma2 and tau2 must be positive and finite".into());
        }
        if !self.mu.is_finite() {
            return bad("mu must be finite".into());
        }
        if self.players == 0 {
            return bad("need at least one player".into());
        }
        match &self.seasons {
            SeasonCount::Fixed(0) => return bad("seasons per player must be positive".into()),
            SeasonCount::Uniform { min, max } if *min == 0 || min > max => {
                return bad(format!("season range {min}..={max} invalid"))
            }
            SeasonCount::PerPlayer(v) if v.len() != self.players || v.contains(&0) => {
                return bad("per-player season list must have one positive entry per player".into())
            }
            _ => {}
        }
        if let WeightScheme::Opportunities { min, max } = self.weights {
            if min == 0 || min > max {
                return bad(format!("opportunity range {min}..={max} invalid"));
            }
        }
        Ok(())
    }
}

/// A generated panel and the latent truth behind it.
#[derive(Debug, Clone)]
pub struct SynthPanel {
    pub panel: MetricPanel,
    pub gamma: Vec<bool>,
    pub alpha: Vec<f64>,
}

struct PlayerDraw {
    gamma: bool,
    alpha: f64,
    seasons: Vec<(f64, f64)>, // (opportunity, standard normal)
}

fn draw_player(truth: &TruthParams, i: usize) -> PlayerDraw {
    let mut r = rng::stream(truth.seed, i as u64 + 1);
    let gamma = r.random::<f64>() < truth.p1;
    let scale = if gamma { truth.tau2 } else { truth.v0 * truth.tau2 }.sqrt();
    let z: f64 = StandardNormal.sample(&mut r);
    let alpha = scale * z;
    let k = match &truth.seasons {
        SeasonCount::Fixed(k) => *k,
        SeasonCount::Uniform { min, max } => r.random_range(*min..=*max),
        SeasonCount::PerPlayer(v) => v[i],
    };
    let seasons = (0..k)
        .map(|_| {
            let n = match truth.weights {
                WeightScheme::Unit => 1.0,
                WeightScheme::Opportunities { min, max } => f64::from(r.random_range(min..=max)),
            };
            (n, StandardNormal.sample(&mut r))
        })
        .collect();
    PlayerDraw { gamma, alpha, seasons }
}

/// Draw `gamma_i ~ Bernoulli(p1)`, `alpha_i` from the selected mixture
/// component and `y_ij ~ Normal(mu + alpha_i, w_ij sigma2)`.
pub fn generate_panel(metric: &str, truth: &TruthParams) -> Result<SynthPanel> {
    truth.validate()?;
    let draws: Vec<PlayerDraw> = (0..truth.players).map(|i| draw_player(truth, i)).collect();

    let width = (truth.players.max(2) - 1).to_string().len();
    let ids: Vec<String> = (0..truth.players).map(|i| format!("P{i:0width$}")).collect();
    let total: usize = draws.iter().map(|d| d.seasons.len()).sum();
    let n_bar = draws
        .iter()
        .flat_map(|d| d.seasons.iter().map(|s| s.0))
        .sum::<f64>()
        / total as f64;

    let mut rows = Vec::with_capacity(total);
    for (d, id) in draws.iter().zip(&ids) {
        for (j, &(n, z)) in d.seasons.iter().enumerate() {
            let w = match truth.weights {
                WeightScheme::Unit => 1.0,
                WeightScheme::Opportunities { .. } => n_bar / n,
            };
            let value = truth.mu + d.alpha + (w * truth.sigma2).sqrt() * z;
            rows.push((
                PanelRecord {
                    player_id: id.clone(),
                    season: truth.first_season + j as i32,
                    value,
                    opportunity: n,
                },
                w,
            ));
        }
    }
    let panel = MetricPanel::from_weighted(metric, rows)?;
    Ok(SynthPanel {
        panel,
        gamma: draws.iter().map(|d| d.gamma).collect(),
        alpha: draws.iter().map(|d| d.alpha).collect(),
    })
}

impl SynthPanel {
    /// Truth sidecar: `player_id,true_gamma,true_alpha`.
    pub fn write_truth_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["player_id", "true_gamma", "true_alpha"])?;
        for (i, id) in self.panel.player_ids.iter().enumerate() {
            w.write_record([
                id.clone(),
                u8::from(self.gamma[i]).to_string(),
                self.alpha[i].to_string(),
            ])?;
        }
        w.flush().map_err(|e| Error::io("<truth csv>", e))?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn p1_zero_gives_no_slab_players() {
        let t = TruthParams { p1: 0.0, ..Default::default() };
        let s = generate_panel("S", &t).unwrap();
        assert!(s.gamma.iter().all(|g| !g));
        assert_eq!(s.panel.len(), 1000);
    }

    #[test]
    fn slab_fraction_within_binomial_error() {
        let t = TruthParams { players: 1000, p1: 0.6, seed: 99, ..Default::default() };
        let s = generate_panel("S", &t).unwrap();
        let frac = s.gamma.iter().filter(|g| **g).count() as f64 / 1000.0;
        assert!((frac - 0.6).abs() <= 4.0 * (0.24f64 / 1000.0).sqrt(), "{frac}");
    }

    #[test]
    fn degenerate_tau_recovers_mu() {
        let t = TruthParams {
            tau2: 1e-30,
            p1: 1.0,
            mu: 0.3,
            sigma2: 0.01,
            players: 2000,
            seed: 3,
            ..Default::default()
        };
        let s = generate_panel("S", &t).unwrap();
        let m = crate::stats::mean(&s.panel.values());
        // N = 10^4, sd of the grand mean = 0.001.
        assert!((m - 0.3).abs() < 0.004, "{m}");
    }

    #[test]
    fn prefix_players_are_stable_when_m_grows() {
        let small = generate_panel("S", &TruthParams { players: 10, ..Default::default() }).unwrap();
        let big = generate_panel("S", &TruthParams { players: 50, ..Default::default() }).unwrap();
        assert_eq!(small.alpha[..], big.alpha[..10]);
        assert_eq!(small.gamma[..], big.gamma[..10]);
    }

    #[test]
    fn same_seed_same_panel() {
        let t = TruthParams {
            weights: WeightScheme::Opportunities { min: 50, max: 700 },
            seasons: SeasonCount::Uniform { min: 1, max: 8 },
            ..Default::default()
        };
        let a = generate_panel("S", &t).unwrap();
        let b = generate_panel("S", &t).unwrap();
        assert_eq!(a.panel, b.panel);
    }

    #[test]
    fn slab_alpha_variance_matches_tau2() {
        let t = TruthParams { players: 100_000, tau2: 0.5, seasons: SeasonCount::Fixed(1), seed: 5, ..Default::default() };
        let s = generate_panel("S", &t).unwrap();
        let slab: Vec<f64> = s
            .alpha
            .iter()
            .zip(&s.gamma)
            .filter(|(_, g)| **g)
            .map(|(a, _)| *a)
            .collect();
        let v = crate::stats::sample_variance(&slab);
        assert!((v / 0.5 - 1.0).abs() < 0.05, "{v}");
    }

    #[test]
    fn rejects_bad_params() {
        assert!(generate_panel("S", &TruthParams { p1: 1.5, ..Default::default() }).is_err());
        assert!(generate_panel("S", &TruthParams { v0: 1.0, ..Default::default() }).is_err());
    }
}
