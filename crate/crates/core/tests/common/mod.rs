//! Independent oracles shared by the integration suites. Nothing here calls
//! the library's update arithmetic; closed forms are re-derived from raw rows.
#![allow(dead_code)]

use hitsignal::ingest::{MetricPanel, PanelRecord};
use hitsignal::rng;
use hitsignal::sampler::{update_alpha, update_gamma, update_mu, update_p1, update_sigma2, update_tau2, PanelStats};
use hitsignal::{GibbsState, Hyperparams, TauPrior};

/// `(player, season, value, weight)`.
pub type Row = (&'static str, i32, f64, f64);

pub fn weighted_panel(metric: &str, rows: &[Row]) -> MetricPanel {
    MetricPanel::from_weighted(
        metric,
        rows.iter()
            .map(|&(p, s, y, w)| {
                (
                    PanelRecord { player_id: p.into(), season: s, value: y, opportunity: 1.0 / w },
                    w,
                )
            })
            .collect(),
    )
    .unwrap()
}

/// Three players, two seasons each, unequal weights. Players sort as a, b, c.
pub const FIXTURE: [Row; 6] = [
    ("a", 2001, 0.31, 0.5),
    ("a", 2002, 0.27, 2.0),
    ("b", 2001, 0.18, 1.0),
    ("b", 2002, 0.22, 0.8),
    ("c", 2001, 0.40, 1.5),
    ("c", 2002, 0.35, 0.4),
];

pub fn fixture_hyper() -> Hyperparams {
    // Shapes large enough that the inverse-gamma fourth moments exist, so the
    // variance check has a finite standard error.
    Hyperparams {
        k2: 4.0,
        alpha0: 3.0,
        beta0: 0.02,
        psi0: 3.0,
        delta0: 0.05,
        v0: 0.1,
        tau_prior: TauPrior::InverseGamma,
    }
}

pub fn fixture_state() -> GibbsState {
    GibbsState {
        mu: 0.28,
        sigma2: 0.002,
        tau2: 0.006,
        p1: 0.45,
        alpha: vec![0.02, -0.07, 0.09],
        gamma: vec![true, false, true],
    }
}

fn player_index(rows: &[Row], id: &str) -> usize {
    let mut ids: Vec<&str> = rows.iter().map(|r| r.0).collect();
    ids.sort();
    ids.dedup();
    ids.iter().position(|p| *p == id).unwrap()
}

/// Normal conditional of `mu`: precision-weighted mean of `y - alpha`.
pub fn mu_moments(rows: &[Row], s: &GibbsState, h: &Hyperparams) -> (f64, f64) {
    let mut num = 0.0;
    let mut prec = 1.0 / h.k2;
    for &(p, _, y, w) in rows {
        let a = s.alpha[player_index(rows, p)];
        num += (y - a) / (w * s.sigma2);
        prec += 1.0 / (w * s.sigma2);
    }
    (num / prec, 1.0 / prec)
}

/// Normal conditional of `alpha_i`.
pub fn alpha_moments(rows: &[Row], s: &GibbsState, h: &Hyperparams, i: usize) -> (f64, f64) {
    let prior = if s.gamma[i] { s.tau2 } else { h.v0 * s.tau2 };
    let mut num = 0.0;
    let mut prec = 1.0 / prior;
    for &(_, _, y, w) in rows.iter().filter(|r| player_index(rows, r.0) == i) {
        num += (y - s.mu) / (w * s.sigma2);
        prec += 1.0 / (w * s.sigma2);
    }
    (num / prec, 1.0 / prec)
}

/// Inverse-gamma `(shape, scale)` of the `sigma2` conditional.
pub fn sigma2_params(rows: &[Row], s: &GibbsState, h: &Hyperparams) -> (f64, f64) {
    let mut rate = h.beta0;
    for &(p, _, y, w) in rows {
        let r = y - s.alpha[player_index(rows, p)] - s.mu;
        rate += r * r / (2.0 * w);
    }
    (h.alpha0 + rows.len() as f64 / 2.0, rate)
}

/// Inverse-gamma `(shape, scale)` of the `tau2` conditional.
pub fn tau2_params(s: &GibbsState, h: &Hyperparams) -> (f64, f64) {
    let m = s.alpha.len() as f64;
    let ss: f64 = s
        .alpha
        .iter()
        .zip(&s.gamma)
        .map(|(a, &g)| a * a / if g { 2.0 } else { 2.0 * h.v0 })
        .sum();
    match h.tau_prior {
        TauPrior::InverseGamma => (h.psi0 + m / 2.0, h.delta0 + ss),
        TauPrior::UniformOnTau => ((m - 1.0) / 2.0, ss),
    }
}

/// `P(gamma = 1)` straight from the mixture densities, no log-space tricks.
pub fn slab_prob_direct(a: f64, tau2: f64, p1: f64, v0: f64) -> f64 {
    let slab = p1 * (-a * a / (2.0 * tau2)).exp();
    let spike = (1.0 - p1) / v0.sqrt() * (-a * a / (2.0 * v0 * tau2)).exp();
    slab / (slab + spike)
}

pub fn inv_gamma_moments(shape: f64, scale: f64) -> (f64, f64) {
    let mean = scale / (shape - 1.0);
    (mean, mean * mean / (shape - 2.0))
}

pub fn beta_moments(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (a / s, a * b / (s * s * (s + 1.0)))
}

/// Monte Carlo mean/variance against analytic values, in standard errors.
#[derive(Debug, Clone)]
pub struct MomentCheck {
    pub name: String,
    pub mean: f64,
    pub expected_mean: f64,
    pub mean_z: f64,
    pub var: f64,
    pub expected_var: f64,
    pub var_z: f64,
}

impl MomentCheck {
    pub fn within(&self, k: f64) -> bool {
        self.mean_z.abs() <= k && self.var_z.abs() <= k
    }
}

/// The mean's SE uses the analytic variance; the variance's SE uses the
/// sample fourth central moment.
pub fn moment_check(name: &str, draws: &[f64], expected_mean: f64, expected_var: f64) -> MomentCheck {
    let n = draws.len() as f64;
    let mean = draws.iter().sum::<f64>() / n;
    let m2 = draws.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    let m4 = draws.iter().map(|x| (x - mean).powi(4)).sum::<f64>() / n;
    let var = m2 * n / (n - 1.0);
    let se_mean = (expected_var / n).sqrt();
    let se_var = ((m4 - m2 * m2) / n).sqrt();
    let z = |d: f64, se: f64| if se > 0.0 { d / se } else if d == 0.0 { 0.0 } else { f64::INFINITY };
    MomentCheck {
        name: name.into(),
        mean,
        expected_mean,
        mean_z: z(mean - expected_mean, se_mean),
        var,
        expected_var,
        var_z: z(var - expected_var, se_var),
    }
}

/// Draw each of the six conditionals `draws` times with the fixture state
/// held fixed and compare against the closed forms above.
pub fn conditional_moment_suite(draws: usize, seed: u64) -> Vec<MomentCheck> {
    let panel = weighted_panel("fixture", &FIXTURE);
    let stats = PanelStats::new(&panel);
    let h = fixture_hyper();
    let s = fixture_state();
    let mut g = rng::stream(seed, 0);
    let mut out = Vec::new();

    let mu: Vec<f64> = (0..draws).map(|_| update_mu(&s, &stats, &h, &mut g).unwrap()).collect();
    let (m, v) = mu_moments(&FIXTURE, &s, &h);
    out.push(moment_check("mu", &mu, m, v));

    let alpha: Vec<Vec<f64>> = (0..draws).map(|_| update_alpha(&s, &stats, &h, &mut g).unwrap()).collect();
    for i in 0..3 {
        let col: Vec<f64> = alpha.iter().map(|a| a[i]).collect();
        let (m, v) = alpha_moments(&FIXTURE, &s, &h, i);
        out.push(moment_check(&format!("alpha[{i}]"), &col, m, v));
    }

    let sigma2: Vec<f64> = (0..draws).map(|_| update_sigma2(&s, &stats, &h, &mut g).unwrap()).collect();
    let (a, b) = sigma2_params(&FIXTURE, &s, &h);
    let (m, v) = inv_gamma_moments(a, b);
    out.push(moment_check("sigma2", &sigma2, m, v));

    let tau2: Vec<f64> = (0..draws).map(|_| update_tau2(&s, &h, &mut g).unwrap()).collect();
    let (a, b) = tau2_params(&s, &h);
    let (m, v) = inv_gamma_moments(a, b);
    out.push(moment_check("tau2", &tau2, m, v));

    let gamma: Vec<Vec<bool>> = (0..draws).map(|_| update_gamma(&s, &h, &mut g).unwrap()).collect();
    for i in 0..3 {
        let col: Vec<f64> = gamma.iter().map(|x| if x[i] { 1.0 } else { 0.0 }).collect();
        let q = slab_prob_direct(s.alpha[i], s.tau2, s.p1, h.v0);
        out.push(moment_check(&format!("gamma[{i}]"), &col, q, q * (1.0 - q)));
    }

    let p1: Vec<f64> = (0..draws).map(|_| update_p1(&s, &mut g).unwrap()).collect();
    let ones = s.gamma.iter().filter(|x| **x).count() as f64;
    let (m, v) = beta_moments(1.0 + ones, 1.0 + s.gamma.len() as f64 - ones);
    out.push(moment_check("p1", &p1, m, v));
    out
}

/// Generic cyclic coordinate descent for
/// `sum_r (y_r - x_r . beta)^2 + lambda * sum_j |beta_j|` on a dense design.
pub fn coordinate_descent(x: &[Vec<f64>], y: &[f64], lambda: f64) -> Vec<f64> {
    let p = x[0].len();
    let mut beta = vec![0.0; p];
    let mut resid: Vec<f64> = y.to_vec();
    for _ in 0..10_000 {
        let mut delta: f64 = 0.0;
        for j in 0..p {
            let z: f64 = x.iter().map(|r| r[j] * r[j]).sum();
            if z == 0.0 {
                continue;
            }
            let rho: f64 = x.iter().zip(&resid).map(|(r, e)| r[j] * (e + r[j] * beta[j])).sum();
            let t = lambda / 2.0;
            let new = if rho > t {
                (rho - t) / z
            } else if rho < -t {
                (rho + t) / z
            } else {
                0.0
            };
            let step = new - beta[j];
            if step != 0.0 {
                for (e, r) in resid.iter_mut().zip(x) {
                    *e -= r[j] * step;
                }
                beta[j] = new;
                delta = delta.max(step.abs());
            }
        }
        if delta < 1e-15 {
            break;
        }
    }
    beta
}

/// Dense player-indicator design and centred response of a panel.
pub fn indicator_system(panel: &MetricPanel) -> (Vec<Vec<f64>>, Vec<f64>) {
    let obs = panel.observations();
    let center = obs.iter().map(|o| o.value).sum::<f64>() / obs.len() as f64;
    let m = panel.player_count();
    let x = obs
        .iter()
        .map(|o| {
            let mut r = vec![0.0; m];
            r[o.player] = 1.0;
            r
        })
        .collect();
    (x, obs.iter().map(|o| o.value - center).collect())
}

/// `n x p` data with `rank` latent factors: column `j` is
/// `ratio * f_{j mod rank} + e`, all draws standard normal.
pub fn planted_factors(n: usize, p: usize, rank: usize, ratio: f64, seed: u64) -> hitsignal::pca::PcaInput {
    use rand_distr::{Distribution, StandardNormal};
    let mut g = rng::stream(seed, 0);
    let factors: Vec<Vec<f64>> = (0..n).map(|_| (0..rank).map(|_| StandardNormal.sample(&mut g)).collect()).collect();
    let raw = nalgebra::DMatrix::from_fn(n, p, |i, j| {
        let e: f64 = StandardNormal.sample(&mut g);
        let signal = if rank == 0 { 0.0 } else { ratio * factors[i][j % rank] };
        signal + e
    });
    hitsignal::pca::PcaInput::from_matrix(
        (0..p).map(|j| format!("m{j}")).collect(),
        (0..n).map(|i| (format!("r{i}"), 2000)).collect(),
        raw,
    )
    .unwrap()
}
