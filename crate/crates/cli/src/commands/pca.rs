use hitsignal::pca::{analyze, assemble, write_result_csv, PcaResult};
use hitsignal::rng::derive_seed;
use hitsignal::svg;
use hitsignal::{Error, MetricPanel, Result};

use super::{available_panels, create, ensure_dir, load_panel, write_text, Context, Outcome};

/// Metric sets: everything, then the high-signal split when a report exists.
fn metric_sets(ctx: &Context, all: &[String]) -> Result<Vec<(String, Vec<String>)>> {
    let mut sets = vec![("all".to_string(), all.to_vec())];
    let summary = ctx.layout.report().join("summary.csv");
    if summary.exists() {
        let mut r = csv::Reader::from_path(&summary)?;
        let idx = r
            .headers()?
            .iter()
            .position(|h| h == "high_signal")
            .ok_or_else(|| Error::MissingColumn(format!("high_signal in {}", summary.display())))?;
        let (mut high, mut rest) = (Vec::new(), Vec::new());
        for rec in r.records() {
            let rec = rec?;
            let metric = rec.get(0).unwrap_or_default().to_string();
            if !all.contains(&metric) {
                continue;
            }
            if rec.get(idx) == Some("true") {
                high.push(metric);
            } else {
                rest.push(metric);
            }
        }
        sets.push(("high_signal".into(), high));
        sets.push(("remaining".into(), rest));
    }
    Ok(sets)
}

pub fn run(ctx: &Context) -> Result<Outcome> {
    let cfg = &ctx.config;
    let all: Vec<String> =
        available_panels(ctx)?.into_iter().filter(|m| !cfg.pca.exclude.contains(m)).collect();
    let panels: Vec<MetricPanel> = all.iter().map(|m| load_panel(ctx, m)).collect::<Result<_>>()?;
    let dir = ctx.layout.pca();
    ensure_dir(&dir)?;
    let sets = metric_sets(ctx, &all)?;

    let mut outcome = Outcome::default();
    let mut done: Vec<(String, PcaResult)> = Vec::new();
    ctx.each(
        sets,
        |(name, metrics)| -> Result<PcaResult> {
            let chosen: Vec<&MetricPanel> = panels.iter().filter(|p| metrics.contains(&p.metric)).collect();
            let input = assemble(&chosen)?;
            analyze(&input, &cfg.pca.with_seed(derive_seed(cfg.seed, &format!("pca/{name}"))))
        },
        |(name, _), result| {
            match result {
                Ok(res) => {
                    write_result_csv(&res, create(&dir.join(format!("{name}.csv")))?)?;
                    write_text(&dir.join(format!("{name}.svg")), &svg::scree(&res, &format!("PCA: {name}")))?;
                    done.push((name.clone(), res));
                }
                Err(e) => outcome.fail(name, e),
            }
            Ok(())
        },
    )?;
    done.sort_by(|a, b| a.0.cmp(&b.0));

    let path = dir.join("summary.csv");
    let mut w = csv::Writer::from_writer(create(&path)?);
    w.write_record(["set", "significant_count", "metrics", "rows"])?;
    for (name, res) in &done {
        w.write_record([
            name.clone(),
            res.significant_count.to_string(),
            res.metrics.len().to_string(),
            res.rows.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io(&path, e))?;
    outcome.finish(&dir, "pca", done.len())
}
