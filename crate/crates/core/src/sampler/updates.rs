use rand::Rng;
use rand_distr::{Beta, Distribution, StandardNormal};

use super::{GibbsState, Hyperparams, InitScheme, TauPrior};
use crate::error::{Error, Result};
use crate::ingest::MetricPanel;
use crate::stats::inverse_gamma;

/// Lower bound applied to every `sigma2` and `tau2` draw.
pub const VARIANCE_FLOOR: f64 = 1e-12;

/// `p1` is clamped to `[P1_CLAMP, 1 - P1_CLAMP]` before the indicator update.
pub const P1_CLAMP: f64 = 1e-12;

/// Per-player precision sums, computed once per panel.
///
/// `precision[i] = sum_j 1/w_ij`, `weighted_sum[i] = sum_j y_ij/w_ij`.
#[derive(Debug, Clone)]
pub struct PanelStats<'a> {
    pub panel: &'a MetricPanel,
    pub precision: Vec<f64>,
    pub weighted_sum: Vec<f64>,
    pub total_precision: f64,
}

impl<'a> PanelStats<'a> {
    pub fn new(panel: &'a MetricPanel) -> Self {
        let m = panel.player_count();
        let mut precision = vec![0.0; m];
        let mut weighted_sum = vec![0.0; m];
        for (i, (p, s)) in precision.iter_mut().zip(weighted_sum.iter_mut()).enumerate() {
            for o in panel.player(i) {
                *p += 1.0 / o.weight;
                *s += o.value / o.weight;
            }
        }
        let total_precision = precision.iter().sum();
        PanelStats {
            panel,
            precision,
            weighted_sum,
            total_precision,
        }
    }

    pub fn players(&self) -> usize {
        self.precision.len()
    }
}

fn check_finite(what: &str, v: f64) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Numerical(format!("{what} is not finite ({v})")))
    }
}

fn normal<R: Rng + ?Sized>(rng: &mut R, mean: f64, var: f64) -> f64 {
    let z: f64 = StandardNormal.sample(rng);
    mean + var.sqrt() * z
}

/// Step 1: `mu | alpha, sigma2, y`.
pub fn update_mu<R: Rng + ?Sized>(
    state: &GibbsState,
    stats: &PanelStats,
    hyper: &Hyperparams,
    rng: &mut R,
) -> Result<f64> {
    check_finite("sigma2", state.sigma2)?;
    let shifted: f64 = stats
        .weighted_sum
        .iter()
        .zip(&stats.precision)
        .zip(&state.alpha)
        .map(|((s, p), a)| s - a * p)
        .sum();
    let precision = stats.total_precision / state.sigma2 + 1.0 / hyper.k2;
    let mean = check_finite("mu conditional mean", shifted / state.sigma2 / precision)?;
    Ok(normal(rng, mean, 1.0 / precision))
}

/// Step 2: each `alpha_i | mu, gamma_i, sigma2, tau2, y`, independently.
pub fn update_alpha<R: Rng + ?Sized>(
    state: &GibbsState,
    stats: &PanelStats,
    hyper: &Hyperparams,
    rng: &mut R,
) -> Result<Vec<f64>> {
    check_finite("mu", state.mu)?;
    check_finite("sigma2", state.sigma2)?;
    check_finite("tau2", state.tau2)?;
    (0..stats.players())
        .map(|i| {
            let prior_var = if state.gamma[i] {
                state.tau2
            } else {
                hyper.v0 * state.tau2
            };
            let precision = stats.precision[i] / state.sigma2 + 1.0 / prior_var;
            let num = (stats.weighted_sum[i] - state.mu * stats.precision[i]) / state.sigma2;
            let mean = check_finite("alpha conditional mean", num / precision)?;
            Ok(normal(rng, mean, 1.0 / precision))
        })
        .collect()
}

/// Step 3: `sigma2 | mu, alpha, y ~ InvGamma(alpha0 + N/2, beta0 + sum r^2 / 2w)`.
pub fn update_sigma2<R: Rng + ?Sized>(
    state: &GibbsState,
    stats: &PanelStats,
    hyper: &Hyperparams,
    rng: &mut R,
) -> Result<f64> {
    let panel = stats.panel;
    let rss: f64 = panel
        .observations()
        .iter()
        .map(|o| {
            let r = o.value - state.alpha[o.player] - state.mu;
            r * r / (2.0 * o.weight)
        })
        .sum();
    check_finite("sigma2 residual sum", rss)?;
    let shape = hyper.alpha0 + panel.len() as f64 / 2.0;
    let draw = inverse_gamma(rng, shape, hyper.beta0 + rss)
        .ok_or_else(|| Error::Numerical("sigma2 draw failed".into()))?;
    Ok(draw.max(VARIANCE_FLOOR))
}

/// Shape and scale of the inverse-gamma `tau2` conditional. For the flat-on-tau
/// prior the prior contributes `(tau2)^(-1/2)`, so the conditional is
/// `InvGamma(m/2 - 1/2, sum alpha_i^2 / 2v_i)`.
pub fn tau2_conditional(state: &GibbsState, hyper: &Hyperparams) -> Result<(f64, f64)> {
    let m = state.alpha.len() as f64;
    let ss: f64 = state
        .alpha
        .iter()
        .zip(&state.gamma)
        .map(|(a, g)| a * a / (2.0 * if *g { 1.0 } else { hyper.v0 }))
        .sum();
    check_finite("tau2 scale", ss)?;
    match hyper.tau_prior {
        TauPrior::InverseGamma => Ok((hyper.psi0 + m / 2.0, hyper.delta0 + ss)),
        TauPrior::UniformOnTau => {
            if state.alpha.len() < 2 {
                return Err(Error::InvalidParameter(
                    "uniform-on-tau prior needs at least two players".into(),
                ));
            }
            Ok((m / 2.0 - 0.5, ss))
        }
    }
}

/// Step 4: `tau2 | alpha, gamma`.
pub fn update_tau2<R: Rng + ?Sized>(
    state: &GibbsState,
    hyper: &Hyperparams,
    rng: &mut R,
) -> Result<f64> {
    let (shape, scale) = tau2_conditional(state, hyper)?;
    if scale <= 0.0 {
        // All alpha exactly zero under the improper prior: the conditional
        // piles up at zero.
        return Ok(VARIANCE_FLOOR);
    }
    let draw = inverse_gamma(rng, shape, scale)
        .ok_or_else(|| Error::Numerical("tau2 draw failed".into()))?;
    Ok(draw.max(VARIANCE_FLOOR))
}

/// `P(gamma_i = 1 | alpha_i, tau2, p1)`, evaluated in log space.
pub fn slab_probability(alpha: f64, tau2: f64, p1: f64, v0: f64) -> f64 {
    let z = alpha * alpha / (2.0 * tau2);
    let log_slab = p1.ln() - z;
    let log_spike = (1.0 - p1).ln() - 0.5 * v0.ln() - z / v0;
    let d = log_spike - log_slab;
    if d.is_nan() {
        return if p1 >= 1.0 { 1.0 } else { 0.0 };
    }
    if d > 0.0 {
        let e = (-d).exp();
        e / (1.0 + e)
    } else {
        1.0 / (1.0 + d.exp())
    }
}

/// Step 5: each `gamma_i ~ Bernoulli(q_i)`.
pub fn update_gamma<R: Rng + ?Sized>(
    state: &GibbsState,
    hyper: &Hyperparams,
    rng: &mut R,
) -> Result<Vec<bool>> {
    check_finite("tau2", state.tau2)?;
    let p1 = state.p1.clamp(P1_CLAMP, 1.0 - P1_CLAMP);
    Ok(state
        .alpha
        .iter()
        .map(|&a| rng.random::<f64>() < slab_probability(a, state.tau2, p1, hyper.v0))
        .collect())
}

/// Beta parameters of the `p1 | gamma` conditional.
pub fn p1_conditional(gamma: &[bool]) -> (f64, f64) {
    let ones = gamma.iter().filter(|g| **g).count() as f64;
    (1.0 + ones, 1.0 + gamma.len() as f64 - ones)
}

/// Step 6: `p1 | gamma ~ Beta(1 + sum gamma, 1 + sum (1 - gamma))`.
pub fn update_p1<R: Rng + ?Sized>(state: &GibbsState, rng: &mut R) -> Result<f64> {
    let (a, b) = p1_conditional(&state.gamma);
    let beta = Beta::new(a, b).map_err(|e| Error::Numerical(format!("p1 draw: {e}")))?;
    Ok(beta.sample(rng))
}

/// One full sweep in the order mu, alpha, sigma2, tau2, gamma, p1.
pub fn sweep<R: Rng + ?Sized>(
    state: &mut GibbsState,
    stats: &PanelStats,
    hyper: &Hyperparams,
    rng: &mut R,
) -> Result<()> {
    state.mu = update_mu(state, stats, hyper, rng)?;
    state.alpha = update_alpha(state, stats, hyper, rng)?;
    state.sigma2 = update_sigma2(state, stats, hyper, rng)?;
    state.tau2 = update_tau2(state, hyper, rng)?;
    state.gamma = update_gamma(state, hyper, rng)?;
    state.p1 = update_p1(state, rng)?;
    Ok(())
}

/// Starting state.
///
/// With [`InitScheme::DataMoments`]: `mu` is the precision-weighted grand mean,
/// `alpha_i` the player's weighted mean minus `mu`, `sigma2` the pooled
/// within-player weighted variance, `tau2` the variance of the `alpha_i`,
/// `gamma_i = |alpha_i| > sd(alpha)` and `p1` the mean of `gamma`.
pub fn init_state(panel: &MetricPanel, hyper: &Hyperparams, scheme: InitScheme) -> Result<GibbsState> {
    hyper.validate()?;
    if panel.len() < 2 {
        return Err(Error::InvalidData(format!(
            "metric `{}`: need at least two observations to start a chain",
            panel.metric
        )));
    }
    let stats = PanelStats::new(panel);
    let m = panel.player_count();
    let mu = stats.weighted_sum.iter().sum::<f64>() / stats.total_precision;
    let player_means: Vec<f64> = stats
        .weighted_sum
        .iter()
        .zip(&stats.precision)
        .map(|(s, p)| s / p)
        .collect();

    let within: f64 = panel
        .observations()
        .iter()
        .map(|o| (o.value - player_means[o.player]).powi(2) / o.weight)
        .sum();
    let dof = if panel.len() > m { panel.len() - m } else { panel.len() };
    let sigma2 = (within / dof as f64).max(VARIANCE_FLOOR);

    match scheme {
        InitScheme::DataMoments => {
            let alpha: Vec<f64> = player_means.iter().map(|x| x - mu).collect();
            let a_mean = alpha.iter().sum::<f64>() / m as f64;
            let a_var = alpha.iter().map(|a| (a - a_mean).powi(2)).sum::<f64>() / m as f64;
            let sd = a_var.sqrt();
            let gamma: Vec<bool> = alpha.iter().map(|a| a.abs() > sd).collect();
            let p1 = gamma.iter().filter(|g| **g).count() as f64 / m as f64;
            Ok(GibbsState {
                mu,
                sigma2,
                tau2: a_var.max(VARIANCE_FLOOR),
                p1: p1.clamp(P1_CLAMP, 1.0 - P1_CLAMP),
                alpha,
                gamma,
            })
        }
        InitScheme::Dispersed => {
            let values = panel.values();
            let var = crate::stats::sample_variance(&values).max(VARIANCE_FLOOR);
            Ok(GibbsState {
                mu: mu - 5.0 * var.sqrt(),
                sigma2: 10.0 * var,
                tau2: 10.0 * var,
                p1: 0.5,
                alpha: vec![0.0; m],
                gamma: vec![true; m],
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::PanelRecord;
    use crate::rng;

    fn panel(rows: &[(&str, i32, f64, f64)]) -> MetricPanel {
        MetricPanel::from_weighted(
            "T",
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

    #[test]
    fn slab_probability_hand_values() {
        assert!((slab_probability(0.0, 1.0, 0.5, 0.01) - 1.0 / 11.0).abs() < 1e-15);
        assert_eq!(slab_probability(1e3, 1.0, 0.5, 0.01), 1.0);
        assert_eq!(slab_probability(0.3, 1.0, 1.0, 0.01), 1.0);
        assert_eq!(slab_probability(0.3, 1.0, 0.0, 0.01), 0.0);
        assert!(slab_probability(1e-200, 1e-300, 0.5, 0.01).is_finite());
    }

    #[test]
    fn slab_probability_monotone() {
        let mut prev = 0.0;
        for k in 0..200 {
            let q = slab_probability(k as f64 * 0.02, 0.5, 0.3, 0.01);
            assert!(q >= prev);
            prev = q;
        }
        assert!(slab_probability(0.1, 1.0, 0.6, 0.01) > slab_probability(0.1, 1.0, 0.5, 0.01));
    }

    #[test]
    fn init_constant_panel() {
        let p = panel(&[("a", 1, 2.5, 1.0), ("a", 2, 2.5, 1.0), ("b", 1, 2.5, 1.0)]);
        let s = init_state(&p, &Hyperparams::default(), InitScheme::DataMoments).unwrap();
        assert_eq!(s.mu, 2.5);
        assert!(s.alpha.iter().all(|a| *a == 0.0));
        assert!(s.gamma.iter().all(|g| !g));
        assert_eq!(s.sigma2, VARIANCE_FLOOR);
        assert_eq!(s.tau2, VARIANCE_FLOOR);
    }

    #[test]
    fn init_two_symmetric_players() {
        let p = panel(&[("a", 1, 1.3, 1.0), ("a", 2, 1.3, 1.0), ("b", 1, 0.7, 1.0), ("b", 2, 0.7, 1.0)]);
        let s = init_state(&p, &Hyperparams::default(), InitScheme::DataMoments).unwrap();
        assert!((s.mu - 1.0).abs() < 1e-15);
        assert!((s.alpha[0] - 0.3).abs() < 1e-12 && (s.alpha[1] + 0.3).abs() < 1e-12);
    }

    #[test]
    fn init_rejects_single_observation() {
        let p = panel(&[("a", 1, 1.0, 1.0)]);
        assert!(init_state(&p, &Hyperparams::default(), InitScheme::DataMoments).is_err());
    }

    #[test]
    fn spike_pins_alpha() {
        let p = panel(&[("a", 1, 5.0, 1.0), ("a", 2, 7.0, 1.0)]);
        let stats = PanelStats::new(&p);
        let hyper = Hyperparams { v0: 1e-6, ..Default::default() };
        let state = GibbsState {
            mu: 0.0,
            sigma2: 1.0,
            tau2: 1e-6,
            p1: 0.5,
            alpha: vec![0.0],
            gamma: vec![false],
        };
        let mut r = rng::stream(1, 0);
        for _ in 0..100 {
            let a = update_alpha(&state, &stats, &hyper, &mut r).unwrap()[0];
            assert!(a.abs() < 1e-4, "{a}");
        }
    }

    #[test]
    fn tau2_conditional_shapes() {
        let state = GibbsState {
            mu: 0.0,
            sigma2: 1.0,
            tau2: 1.0,
            p1: 0.5,
            alpha: vec![0.1, -0.2, 0.0],
            gamma: vec![false, false, false],
        };
        let h = Hyperparams::default();
        let (a, b) = tau2_conditional(&state, &h).unwrap();
        assert!((a - (0.01 + 1.5)).abs() < 1e-15);
        // Spike players get alpha^2 inflated by 1/v0 = 100.
        assert!((b - (0.01 + 100.0 * 0.05 / 2.0)).abs() < 1e-12);
        let flat = Hyperparams { tau_prior: TauPrior::UniformOnTau, ..h };
        let (a, _) = tau2_conditional(&state, &flat).unwrap();
        assert_eq!(a, 1.0);
        let one = GibbsState { alpha: vec![0.1], gamma: vec![true], ..state };
        assert!(tau2_conditional(&one, &flat).is_err());
    }

    #[test]
    fn p1_parameters() {
        let mut g = vec![false; 10];
        g[..4].fill(true);
        assert_eq!(p1_conditional(&g), (5.0, 7.0));
        assert_eq!(p1_conditional(&[true; 20]), (21.0, 1.0));
    }

    #[test]
    fn gamma_all_slab_when_p1_is_one() {
        let state = GibbsState {
            mu: 0.0,
            sigma2: 1.0,
            tau2: 1.0,
            p1: 1.0,
            alpha: vec![0.0, 0.01, -3.0],
            gamma: vec![false; 3],
        };
        let mut r = rng::stream(4, 0);
        for _ in 0..1000 {
            assert!(update_gamma(&state, &Hyperparams::default(), &mut r).unwrap().iter().all(|g| *g));
        }
    }
}
