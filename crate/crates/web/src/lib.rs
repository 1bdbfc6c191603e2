//! Browser demo. Each export takes a JSON request and returns a JSON reply
//! carrying the headline numbers and an SVG plot; errors come back as
//! `{"error": "..."}` so the page never has to catch.

use hitsignal::evaluate::summarize;
use hitsignal::lasso::{cross_validate, default_grid, CvConfig};
use hitsignal::pca::{analyze, PcaConfig, PcaInput};
use hitsignal::rng;
use hitsignal::sampler::run_chain;
use hitsignal::svg::{padded_range, scree_bands, Plot};
use hitsignal::synth::{generate_panel, TruthParams};
use hitsignal::{ChainConfig, Hyperparams, Result};
use nalgebra::DMatrix;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use wasm_bindgen::prelude::wasm_bindgen;

#[derive(Debug, Clone, Deserialize)]
#[serde(default)]
pub struct PanelRequest {
    pub players: usize,
    pub seasons: usize,
    pub p1: f64,
    pub tau2: f64,
    pub sigma2: f64,
    pub seed: u64,
}

impl Default for PanelRequest {
    fn default() -> Self {
        PanelRequest { players: 100, seasons: 5, p1: 0.6, tau2: 0.004, sigma2: 0.001, seed: 1 }
    }
}

impl PanelRequest {
    fn truth(&self) -> TruthParams {
        TruthParams {
            players: self.players,
            seasons: hitsignal::synth::SeasonCount::Fixed(self.seasons),
            p1: self.p1,
            tau2: self.tau2,
            sigma2: self.sigma2,
            seed: self.seed,
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct FitReply {
    pub p1_hat: f64,
    pub neg_entropy: f64,
    pub accuracy: f64,
    pub svg: String,
}

/// Short chain on a synthetic panel; plots posterior vs true player offsets.
pub fn fit_reply(req: &PanelRequest) -> Result<FitReply> {
    let synth = generate_panel("demo", &req.truth())?;
    let chain = ChainConfig { iterations: 6_000, burn_in: 1_000, thin: 5, seed: req.seed, ..Default::default() };
    let s = summarize(&run_chain(&synth.panel, &Hyperparams::default(), &chain)?)?;
    let hits = s.players.iter().zip(&synth.gamma).filter(|(p, &g)| (p.gamma_hat > 0.5) == g).count();

    let pts: Vec<(f64, f64, bool)> = s
        .players
        .iter()
        .zip(&synth.alpha)
        .map(|(p, a)| (*a, p.mean_est - s.mu_hat, p.gamma_hat > 0.5))
        .collect();
    let range = padded_range(pts.iter().flat_map(|p| [p.0, p.1]), 0.05);
    let (slab, spike): (Vec<(f64, f64, bool)>, Vec<_>) = pts.iter().partition(|p| p.2);
    let svg = Plot::new("Posterior vs true offsets", "true alpha", "posterior mean alpha", range, range)
        .line(vec![(range.0, range.0), (range.1, range.1)], "#999", true)
        .points(spike.iter().map(|p| (p.0, p.1)).collect(), "#1f77b4")
        .points(slab.iter().map(|p| (p.0, p.1)).collect(), "#d62728")
        .render();
    Ok(FitReply {
        p1_hat: s.p1_hat,
        neg_entropy: s.neg_entropy,
        accuracy: hits as f64 / synth.gamma.len() as f64,
        svg,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct LassoReply {
    pub chosen_fraction: f64,
    pub cv_rmse: f64,
    pub baseline_rmse: f64,
    pub lasso_pct: f64,
    pub svg: String,
}

/// Cross-validated RMSE against the Lasso fraction.
pub fn lasso_reply(req: &PanelRequest) -> Result<LassoReply> {
    let panel = generate_panel("demo", &req.truth())?.panel;
    let grid = default_grid(51);
    let cv = cross_validate(&panel, &grid, &CvConfig { repeats: 3, grid_points: 51, seed: req.seed, ..Default::default() })?;
    let k = grid.iter().position(|f| *f == cv.chosen_fraction).unwrap_or(0);
    let curve: Vec<(f64, f64)> = grid.iter().copied().zip(cv.mean_rmse.iter().copied()).collect();
    let y = padded_range(cv.mean_rmse.iter().copied(), 0.05);
    let svg = Plot::new("Cross-validated RMSE", "fraction f", "RMSE", (0.0, 1.0), y)
        .line(curve, "#1f77b4", false)
        .line(vec![(cv.chosen_fraction, y.0), (cv.chosen_fraction, y.1)], "#d62728", true)
        .render();
    Ok(LassoReply {
        chosen_fraction: cv.chosen_fraction,
        cv_rmse: cv.mean_rmse[k],
        baseline_rmse: cv.mean_rmse[0],
        lasso_pct: cv.fit.lasso_pct,
        svg,
    })
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default)]
pub struct PcaRequest {
    pub rows: usize,
    pub columns: usize,
    pub rank: usize,
    pub ratio: f64,
    pub reps: usize,
    pub seed: u64,
}

impl Default for PcaRequest {
    fn default() -> Self {
        PcaRequest { rows: 500, columns: 12, rank: 3, ratio: 1.5, reps: 100, seed: 1 }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PcaReply {
    pub eigenvalues: Vec<f64>,
    pub significant_count: usize,
    pub svg: String,
}

/// Column `j` is `ratio * f_{j mod rank} + e` with standard normal draws.
fn factor_data(req: &PcaRequest) -> Result<PcaInput> {
    let mut g = rng::stream(req.seed, 0);
    let factors: Vec<f64> = (0..req.rows * req.rank).map(|_| StandardNormal.sample(&mut g)).collect();
    let raw = DMatrix::from_fn(req.rows, req.columns, |i, j| {
        let e: f64 = StandardNormal.sample(&mut g);
        let signal = if req.rank == 0 { 0.0 } else { req.ratio * factors[i * req.rank + j % req.rank] };
        signal + e
    });
    PcaInput::from_matrix(
        (0..req.columns).map(|j| format!("m{j}")).collect(),
        (0..req.rows).map(|i| (format!("r{i}"), 0)).collect(),
        raw,
    )
}

/// Scree plot with permutation and bootstrap bands.
pub fn pca_reply(req: &PcaRequest) -> Result<PcaReply> {
    let input = factor_data(req)?;
    let r = analyze(&input, &PcaConfig { reps: req.reps, quantile: 0.95, seed: req.seed })?;
    let title = format!("{} significant components", r.significant_count);
    let svg = scree_bands(&r.spectrum.eigenvalues, &r.null_band, &r.boot_low, &r.boot_high, &title);
    Ok(PcaReply { eigenvalues: r.spectrum.eigenvalues, significant_count: r.significant_count, svg })
}

fn respond<Q: for<'de> Deserialize<'de> + Default, A: Serialize>(request: &str, f: impl Fn(&Q) -> Result<A>) -> String {
    let parsed: std::result::Result<Q, _> =
        if request.trim().is_empty() { Ok(Q::default()) } else { serde_json::from_str(request) };
    let reply = match parsed {
        Ok(q) => f(&q).map_err(|e| e.to_string()),
        Err(e) => Err(format!("bad request: {e}")),
    };
    match reply {
        Ok(a) => serde_json::to_string(&a).unwrap_or_else(|e| error_json(&e.to_string())),
        Err(e) => error_json(&e),
    }
}

fn error_json(message: &str) -> String {
    serde_json::json!({ "error": message }).to_string()
}

#[wasm_bindgen]
pub fn fit_synthetic(request: &str) -> String {
    respond(request, fit_reply)
}

#[wasm_bindgen]
pub fn lasso_curve(request: &str) -> String {
    respond(request, lasso_reply)
}

#[wasm_bindgen]
pub fn pca_scree(request: &str) -> String {
    respond(request, pca_reply)
}
