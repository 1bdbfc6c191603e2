use hitsignal::ingest::{metric_file_stem, write_panel_csv};
use hitsignal::rng::derive_seed;
use hitsignal::synth::{generate_panel, SynthPanel};
use hitsignal::Result;

use super::{create, ensure_dir, Context, Outcome};
use crate::config::SynthMetric;

pub fn run(ctx: &Context) -> Result<Outcome> {
    let metrics: Vec<SynthMetric> =
        ctx.config.synth.metrics.iter().filter(|m| ctx.config.wants(&m.name)).cloned().collect();
    if metrics.is_empty() {
        return Err(hitsignal::Error::InvalidParameter("no synthetic metrics selected".into()));
    }
    ensure_dir(&ctx.layout.panels())?;
    ensure_dir(&ctx.layout.truth())?;
    let master = ctx.config.seed;
    let mut outcome = Outcome::default();
    let mut ok = 0;
    ctx.each(
        metrics,
        |metric| -> Result<SynthPanel> {
            generate_panel(&metric.name, &metric.truth(derive_seed(master, &format!("synth/{}", metric.name))))
        },
        |metric, result| {
            match result {
                Ok(s) => {
                    write_panel_csv(&s.panel, create(&ctx.layout.panel_file(&metric.name))?)?;
                    let truth = ctx.layout.truth().join(format!("{}.csv", metric_file_stem(&metric.name)));
                    s.write_truth_csv(create(&truth)?)?;
                    ok += 1;
                }
                Err(e) => outcome.fail(&metric.name, e),
            }
            Ok(())
        },
    )?;
    outcome.finish(&ctx.layout.truth(), "synth", ok)
}
