use super::updates::{init_state, sweep, PanelStats};
use super::{ChainConfig, Hyperparams, PosteriorSamples};
use crate::error::{Error, Result};
use crate::ingest::MetricPanel;
use crate::rng;

/// Run one chain and keep every `thin`-th iteration after burn-in.
pub fn run_chain(panel: &MetricPanel, hyper: &Hyperparams, config: &ChainConfig) -> Result<PosteriorSamples> {
    hyper.validate()?;
    config.validate()?;
    let mut state = init_state(panel, hyper, config.init)?;
    let stats = PanelStats::new(panel);
    let mut rng = rng::stream(config.seed, 0);

    let kept = config.retained();
    let m = panel.player_count();
    let mut samples = PosteriorSamples {
        metric: panel.metric.clone(),
        player_ids: panel.player_ids.clone(),
        mu: Vec::with_capacity(kept),
        sigma2: Vec::with_capacity(kept),
        tau2: Vec::with_capacity(kept),
        p1: Vec::with_capacity(kept),
        alpha: Vec::with_capacity(kept * m),
        gamma: Vec::with_capacity(kept * m),
        hyper: *hyper,
        config: *config,
        panel_hash: panel.content_hash(),
    };
    for t in 1..=config.iterations {
        sweep(&mut state, &stats, hyper, &mut rng).map_err(|e| Error::Chain {
            iteration: t,
            message: e.to_string(),
        })?;
        if config.keeps(t) {
            samples.push(&state);
        }
    }
    Ok(samples)
}

/// `n` independent chains; chain `k` is seeded from `config.seed` and `k`.
pub fn run_chains(
    panel: &MetricPanel,
    hyper: &Hyperparams,
    config: &ChainConfig,
    n: usize,
) -> Result<Vec<PosteriorSamples>> {
    (0..n)
        .map(|k| {
            let cfg = ChainConfig {
                seed: rng::mix64(config.seed ^ (k as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)),
                ..*config
            };
            run_chain(panel, hyper, &cfg)
        })
        .collect()
}
