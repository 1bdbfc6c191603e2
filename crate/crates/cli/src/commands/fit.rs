use hitsignal::rng::derive_seed;
use hitsignal::sampler::run_chain;
use hitsignal::{PosteriorSamples, Result};

use super::{available_panels, ensure_dir, load_panel, Context, Outcome};

/// Seed of the chain for `metric` under master seed `master`.
pub fn chain_seed(master: u64, metric: &str) -> u64 {
    derive_seed(master, &format!("fit/{metric}"))
}

pub fn run(ctx: &Context) -> Result<Outcome> {
    let metrics = available_panels(ctx)?;
    let dir = ctx.layout.fits();
    ensure_dir(&dir)?;
    let cfg = &ctx.config;
    let mut outcome = Outcome::default();
    let mut ok = 0;
    ctx.each(
        metrics,
        |metric| -> Result<PosteriorSamples> {
            let panel = load_panel(ctx, metric)?;
            run_chain(&panel, &cfg.hyper, &cfg.chain.with_seed(chain_seed(cfg.seed, metric)))
        },
        |metric, result| {
            match result {
                Ok(samples) => {
                    samples.save(&ctx.layout.fit_stem(metric))?;
                    ok += 1;
                }
                Err(e) => outcome.fail(metric, e),
            }
            Ok(())
        },
    )?;
    outcome.finish(&dir, "fit", ok)
}
