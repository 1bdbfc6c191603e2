use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use hitsignal::evaluate::{scatter_table, summarize, top_players, write_players_csv, write_scatter_csv, RankOrder};
use hitsignal::ingest::{metric_file_stem, metric_from_file_stem, screen_normality};
use hitsignal::svg;
use hitsignal::{Error, MetricSummary, PosteriorSamples, Result};

use super::{create, ensure_dir, list_files, load_panel, write_text, Context, Outcome};

fn fitted_metrics(ctx: &Context) -> Result<Vec<String>> {
    let dir = ctx.layout.fits();
    let metrics: Vec<String> = list_files(&dir, ".meta.json")?
        .iter()
        .filter_map(|p| p.file_name().and_then(|n| n.to_str()).map(|n| n.trim_end_matches(".meta.json").to_string()))
        .map(|stem| metric_from_file_stem(&stem))
        .filter(|m| ctx.config.wants(m))
        .collect();
    if metrics.is_empty() {
        return Err(Error::InvalidData(format!("no fitted chains in {}; run `fit` first", dir.display())));
    }
    Ok(metrics)
}

pub fn run(ctx: &Context) -> Result<Outcome> {
    let metrics = fitted_metrics(ctx)?;
    let dir = ctx.layout.report();
    ensure_dir(&dir.join("players"))?;
    let cfg = &ctx.config;
    let mut outcome = Outcome::default();
    let mut summaries: Vec<MetricSummary> = Vec::new();
    ctx.each(
        metrics,
        |metric| -> Result<MetricSummary> {
            let samples = PosteriorSamples::load(&ctx.layout.fit_stem(metric))?;
            let mut summary = summarize(&samples)?;
            if ctx.layout.panel_file(metric).exists() {
                let panel = load_panel(ctx, metric)?;
                summary.approx_normal = screen_normality(&panel, &cfg.normality).ok().map(|f| f.approx_normal);
            }
            Ok(summary)
        },
        |metric, result| {
            match result {
                Ok(s) => summaries.push(s),
                Err(e) => outcome.fail(metric, e),
            }
            Ok(())
        },
    )?;
    summaries.sort_by(|a, b| a.metric.cmp(&b.metric));

    let region = &cfg.report.region;
    let rows = scatter_table(&summaries, region);
    write_scatter_csv(&rows, &summaries, create(&dir.join("summary.csv"))?)?;
    write_text(&dir.join("signal.svg"), &svg::signal_scatter(&rows, region, false))?;
    write_text(&dir.join("signal_zoom.svg"), &svg::signal_scatter(&rows, region, true))?;

    let top_path = dir.join("top_players.csv");
    let mut top = csv::Writer::from_writer(create(&top_path)?);
    top.write_record(["metric", "rank", "player_id", "mean_est", "sd_est", "gamma_hat", "mu_hat"])?;
    for s in &summaries {
        write_players_csv(&s.players, create(&dir.join("players").join(format!("{}.csv", metric_file_stem(&s.metric))))?)?;
        let order = if cfg.report.lower_is_better.contains(&s.metric) {
            RankOrder::Ascending
        } else {
            RankOrder::Descending
        };
        for (rank, p) in top_players(s, cfg.report.top_k, order).iter().enumerate() {
            top.write_record([
                s.metric.clone(),
                (rank + 1).to_string(),
                p.player_id.clone(),
                p.mean_est.to_string(),
                p.sd_est.to_string(),
                p.gamma_hat.to_string(),
                s.mu_hat.to_string(),
            ])?;
        }
    }
    top.flush().map_err(|e| Error::io(&top_path, e))?;

    let lasso_summary = ctx.layout.lasso().join("summary.csv");
    if lasso_summary.exists() {
        let pct = read_column(&lasso_summary, "lasso_pct")?;
        let joined: Vec<_> = rows.iter().filter_map(|r| pct.get(&r.metric).map(|p| (r.clone(), *p))).collect();
        let path = dir.join("lasso_signal.csv");
        let mut w = csv::Writer::from_writer(create(&path)?);
        w.write_record(["metric", "p1_hat", "neg_entropy", "lasso_pct", "approx_normal"])?;
        for (r, p) in &joined {
            let normal = r.approx_normal.map(|b| b.to_string()).unwrap_or_default();
            w.write_record([r.metric.clone(), r.p1_hat.to_string(), r.neg_entropy.to_string(), p.to_string(), normal])?;
        }
        w.flush().map_err(|e| Error::io(&path, e))?;
        write_text(&dir.join("lasso_p1.svg"), &svg::lasso_scatter(&joined, false))?;
        write_text(&dir.join("lasso_entropy.svg"), &svg::lasso_scatter(&joined, true))?;
    }

    let pca_summary = ctx.layout.pca().join("summary.csv");
    if pca_summary.exists() {
        for set in read_column(&pca_summary, "significant_count")?.keys() {
            let path = ctx.layout.pca().join(format!("{set}.csv"));
            let f = fs::File::open(&path).map_err(|e| Error::io(&path, e))?;
            let table = hitsignal::pca::read_result_csv(f)?;
            let col = |k: usize| -> Vec<f64> { table.iter().map(|r| r[k]).collect() };
            let plot = svg::scree_bands(&col(0), &col(1), &col(2), &col(3), &format!("PCA: {set}"));
            write_text(&dir.join(format!("pca_{set}.svg")), &plot)?;
        }
    }
    outcome.finish(&dir, "report", summaries.len())
}

/// `first column -> named numeric column` from a CSV with a header.
pub fn read_column(path: &Path, column: &str) -> Result<BTreeMap<String, f64>> {
    let mut r = csv::Reader::from_path(path)?;
    let idx = r
        .headers()?
        .iter()
        .position(|h| h == column)
        .ok_or_else(|| Error::MissingColumn(format!("{column} in {}", path.display())))?;
    let mut out = BTreeMap::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        let value = rec.get(idx).and_then(|v| v.parse::<f64>().ok()).ok_or_else(|| Error::BadField {
            row: i + 2,
            column: column.to_string(),
            message: format!("not a number in {}", path.display()),
        })?;
        out.insert(rec.get(0).unwrap_or_default().to_string(), value);
    }
    Ok(out)
}
