use hitsignal::lasso::{cross_validate, default_grid, write_cv_csv, CvResult};
use hitsignal::ingest::metric_file_stem;
use hitsignal::rng::derive_seed;
use hitsignal::{Error, Result};

use super::{available_panels, create, ensure_dir, load_panel, Context, Outcome};

pub fn run(ctx: &Context) -> Result<Outcome> {
    let metrics = available_panels(ctx)?;
    let dir = ctx.layout.lasso();
    ensure_dir(&dir)?;
    let cfg = &ctx.config;
    let grid = default_grid(cfg.lasso.grid_points);
    let mut outcome = Outcome::default();
    let mut results: Vec<CvResult> = Vec::new();
    ctx.each(
        metrics,
        |metric| -> Result<CvResult> {
            let panel = load_panel(ctx, metric)?;
            let seed = derive_seed(cfg.seed, &format!("lasso/{metric}"));
            cross_validate(&panel, &grid, &cfg.lasso.with_seed(seed))
        },
        |metric, result| {
            match result {
                Ok(cv) => {
                    write_cv_csv(&cv, create(&dir.join(format!("{}.csv", metric_file_stem(metric))))?)?;
                    results.push(cv);
                }
                Err(e) => outcome.fail(metric, e),
            }
            Ok(())
        },
    )?;
    results.sort_by(|a, b| a.fit.metric.cmp(&b.fit.metric));

    let path = dir.join("summary.csv");
    let mut w = csv::Writer::from_writer(create(&path)?);
    w.write_record(["metric", "chosen_fraction", "lambda", "lasso_pct", "cv_rmse", "baseline_rmse"])?;
    for cv in &results {
        w.write_record([
            cv.fit.metric.clone(),
            cv.chosen_fraction.to_string(),
            cv.fit.lambda.to_string(),
            cv.fit.lasso_pct.to_string(),
            cv.fit.cv_rmse.to_string(),
            cv.mean_rmse[0].to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io(&path, e))?;
    outcome.finish(&dir, "lasso", results.len())
}
