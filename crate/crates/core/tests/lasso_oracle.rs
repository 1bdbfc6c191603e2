mod common;

use common::{coordinate_descent, indicator_system};
use hitsignal::ingest::{MetricPanel, PanelRecord};
use hitsignal::lasso::{
    cross_validate, default_grid, fit_at_lambda, fold_assignment, fraction_path, lambda_for_fraction, ols_means,
    CvConfig, IndicatorDesign,
};
use hitsignal::rng;
use hitsignal::synth::{generate_panel, TruthParams};
use nalgebra::{DMatrix, DVector};
use rand::Rng;

fn random_panel(seed: u64) -> MetricPanel {
    let mut g = rng::stream(seed, 0);
    let m = g.random_range(2..15);
    let mut recs = Vec::new();
    for i in 0..m {
        let seasons = g.random_range(1..7);
        let level: f64 = g.random_range(-1.0..1.0);
        for s in 0..seasons {
            recs.push(PanelRecord {
                player_id: format!("p{i:02}"),
                season: 2000 + s,
                value: level + g.random_range(-0.5..0.5),
                opportunity: 1.0,
            });
        }
    }
    MetricPanel::from_records("r", recs).unwrap()
}

#[test]
fn soft_threshold_matches_coordinate_descent() {
    for seed in 0..100 {
        let panel = random_panel(seed);
        let design = IndicatorDesign::from_panel(&panel);
        let (x, y) = indicator_system(&panel);
        let mut g = rng::stream(seed, 1);
        let lambda = g.random_range(0.0..1.2) * design.lambda_max();
        let exact = fit_at_lambda(&design, lambda);
        let cd = coordinate_descent(&x, &y, lambda);
        for (a, b) in exact.iter().zip(&cd) {
            assert!((a - b).abs() < 1e-10, "seed {seed}: {a} vs {b}");
        }
    }
}

#[test]
fn ols_matches_normal_equations() {
    for seed in 0..10 {
        let panel = random_panel(seed + 500);
        let (x, y) = indicator_system(&panel);
        let xm = DMatrix::from_fn(x.len(), x[0].len(), |r, c| x[r][c]);
        let yv = DVector::from_vec(y);
        let beta = (xm.transpose() * &xm).lu().solve(&(xm.transpose() * yv)).unwrap();
        for (a, b) in ols_means(&panel).iter().zip(beta.iter()) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}

#[test]
fn hand_evaluated_soft_threshold() {
    let design = IndicatorDesign { center: 0.0, means: vec![0.30, -0.05], counts: vec![2, 1] };
    let b = fit_at_lambda(&design, 0.4);
    assert!((b[0] - 0.20).abs() < 1e-15);
    assert_eq!(b[1], 0.0);
    assert_eq!(fit_at_lambda(&design, 0.0), design.means);
    assert!(fit_at_lambda(&design, 1e9).iter().all(|v| *v == 0.0));
    assert_eq!(design.lambda_max(), 2.0 * 2.0 * 0.30);
}

#[test]
fn fraction_path_endpoints_and_monotonicity() {
    for seed in 0..20 {
        let panel = random_panel(seed + 100);
        let grid = default_grid(101);
        let path = fraction_path(&panel, &grid).unwrap();
        let ols = ols_means(&panel);
        assert_eq!(path.fits.last().unwrap().coefficients, ols);
        assert!(path.fits[0].coefficients.iter().all(|b| *b == 0.0));
        assert_eq!(path.fits[0].lasso_pct, 0.0);
        let l1: Vec<f64> = path.fits.iter().map(|f| f.coefficients.iter().map(|b| b.abs()).sum()).collect();
        let ols_l1: f64 = ols.iter().map(|b| b.abs()).sum();
        for (fit, s) in path.fits.iter().zip(&l1) {
            assert!((s / ols_l1 - fit.fraction).abs() <= 1e-6);
        }
        for w in path.fits.windows(2) {
            assert!(w[1].lasso_pct >= w[0].lasso_pct);
        }
        for w in l1.windows(2) {
            assert!(w[1] >= w[0]);
        }
    }
}

#[test]
fn constant_panel_is_flagged() {
    let recs = (0..6)
        .map(|i| PanelRecord { player_id: format!("p{}", i % 3), season: i, value: 0.3, opportunity: 1.0 })
        .collect();
    let panel = MetricPanel::from_records("c", recs).unwrap();
    let path = fraction_path(&panel, &[0.0, 0.5, 1.0]).unwrap();
    assert!(path.degenerate);
    assert!(path.fits.iter().all(|f| f.coefficients.iter().all(|b| *b == 0.0)));
    assert_eq!(lambda_for_fraction(&IndicatorDesign::from_panel(&panel), 0.5), 0.0);
}

#[test]
fn zero_fraction_rmse_is_the_grand_mean_baseline() {
    let panel = generate_panel("s", &TruthParams { players: 40, seed: 3, ..Default::default() }).unwrap().panel;
    let cfg = CvConfig { seed: 8, ..Default::default() };
    let cv = cross_validate(&panel, &[0.0, 0.5, 1.0], &cfg).unwrap();
    let obs = panel.observations();
    let mut total = 0.0;
    for r in 0..cfg.repeats {
        let labels = fold_assignment(panel.len(), cfg.folds, cfg.seed, r);
        for k in 0..cfg.folds {
            let train: Vec<f64> = (0..obs.len()).filter(|&i| labels[i] != k).map(|i| obs[i].value).collect();
            let center = train.iter().sum::<f64>() / train.len() as f64;
            let test: Vec<f64> = (0..obs.len()).filter(|&i| labels[i] == k).map(|i| obs[i].value).collect();
            total += (test.iter().map(|y| (y - center).powi(2)).sum::<f64>() / test.len() as f64).sqrt();
        }
    }
    let baseline = total / (cfg.repeats * cfg.folds) as f64;
    assert!((cv.mean_rmse[0] - baseline).abs() < 1e-12);
}

#[test]
fn cross_validation_signal_and_null() {
    let strong = TruthParams { p1: 0.8, tau2: 0.01, players: 200, seed: 21, ..Default::default() };
    let panel = generate_panel("s", &strong).unwrap().panel;
    let grid = default_grid(101);
    let cfg = CvConfig { seed: 1, ..Default::default() };
    let cv = cross_validate(&panel, &grid, &cfg).unwrap();
    assert!(cv.chosen_fraction > 0.0);
    assert!(cv.fit.cv_rmse < cv.mean_rmse[0]);
    assert_eq!(cv, cross_validate(&panel, &grid, &cfg).unwrap());

    let null = TruthParams { p1: 0.0, players: 200, seed: 22, ..Default::default() };
    let panel = generate_panel("n", &null).unwrap().panel;
    let cv = cross_validate(&panel, &grid, &cfg).unwrap();
    assert!(cv.chosen_fraction <= 0.2, "{}", cv.chosen_fraction);
}
