use std::path::PathBuf;

use hitsignal::ingest::{
    build_panel, builtin_definitions, load_definitions, merge_definitions, parse_raw_path, screen_normality,
    write_panel_csv, MetricDefinition, MetricPanel, NormalityFlag,
};
use hitsignal::{Error, Result};

use super::{create, ensure_dir, Context, Outcome};

/// Metric definitions in effect: the shipped table plus any JSON overrides.
pub fn definitions(ctx: &Context) -> Result<Vec<MetricDefinition>> {
    let mut defs = builtin_definitions();
    if let Some(path) = &ctx.config.input.definitions {
        defs = merge_definitions(defs, load_definitions(path)?);
    }
    for wanted in &ctx.config.metrics {
        if !defs.iter().any(|d| &d.name == wanted) {
            return Err(Error::InvalidParameter(format!("unknown metric `{wanted}`")));
        }
    }
    Ok(defs.into_iter().filter(|d| ctx.config.wants(&d.name)).collect())
}

type Built = Result<(MetricPanel, Result<NormalityFlag>)>;

pub fn run(ctx: &Context, raw: Option<PathBuf>) -> Result<Outcome> {
    let raw = raw
        .or_else(|| ctx.config.input.raw.clone())
        .ok_or_else(|| Error::InvalidParameter("ingest needs a raw CSV (--raw or input.raw)".into()))?;
    let rows = parse_raw_path(&raw)?;
    let defs = definitions(ctx)?;
    let dir = ctx.layout.panels();
    ensure_dir(&dir)?;

    let thresholds = ctx.config.normality;
    let explicit = !ctx.config.metrics.is_empty();
    let mut outcome = Outcome::default();
    let mut built: Vec<(usize, MetricPanel, Option<NormalityFlag>)> = Vec::new();
    let indexed: Vec<(usize, &MetricDefinition)> = defs.iter().enumerate().collect();
    ctx.each(
        indexed,
        |(_, def)| -> Built {
            let panel = build_panel(&rows, def)?;
            let flag = screen_normality(&panel, &thresholds);
            Ok((panel, flag))
        },
        |(k, def), result| {
            match result {
                Ok((panel, flag)) => {
                    write_panel_csv(&panel, create(&ctx.layout.panel_file(&def.name))?)?;
                    built.push((*k, panel, flag.ok()));
                }
                // Without an explicit selection, recipe-less metrics whose
                // precomputed column is absent are skipped, not failed.
                Err(Error::MissingColumn(col)) if !explicit && def.passthrough.is_some() => {
                    eprintln!("ingest: skipping `{}`: no {col}", def.name);
                }
                Err(e) => outcome.fail(&def.name, e),
            }
            Ok(())
        },
    )?;
    built.sort_by_key(|(k, _, _)| *k);

    let path = dir.join("normality.csv");
    let mut w = csv::Writer::from_writer(create(&path)?);
    w.write_record([
        "metric",
        "observations",
        "players",
        "dropped",
        "skewness",
        "zero_fraction",
        "approx_normal",
    ])?;
    for (_, panel, flag) in &built {
        let (skew, zeros, normal) = match flag {
            Some(f) => (f.skewness.to_string(), f.zero_fraction.to_string(), f.approx_normal.to_string()),
            None => (String::new(), String::new(), String::new()),
        };
        w.write_record([
            panel.metric.clone(),
            panel.len().to_string(),
            panel.player_count().to_string(),
            panel.dropped.total().to_string(),
            skew,
            zeros,
            normal,
        ])?;
    }
    w.flush().map_err(|e| Error::io(&path, e))?;
    outcome.finish(&dir, "ingest", built.len())
}
