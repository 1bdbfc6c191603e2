//! Gibbs sampler for the spike-and-slab random-effects model
//!
//! ```text
//! y_ij | mu, alpha_i, sigma2 ~ Normal(mu + alpha_i, w_ij sigma2)
//! alpha_i | gamma_i, tau2    ~ Normal(0, tau2)        if gamma_i = 1
//!                              Normal(0, v0 tau2)     if gamma_i = 0
//! gamma_i | p1               ~ Bernoulli(p1)
//! mu ~ Normal(0, K2), sigma2 ~ InvGamma(alpha0, beta0),
//! tau2 ~ InvGamma(psi0, delta0) or p(tau2) ∝ tau^-1, p1 ~ Uniform(0, 1)
//! ```
//!
//! One sweep updates, in order: `mu`, every `alpha_i`, `sigma2`, `tau2`,
//! every `gamma_i`, `p1`. All six conditionals are conjugate.

mod chain;
mod diagnostics;
mod io;
mod updates;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use chain::{run_chain, run_chains};
pub use diagnostics::{effective_sample_size, potential_scale_reduction};
pub use io::{read_samples, write_samples, SampleMetadata};
pub use updates::{
    init_state, p1_conditional, slab_probability, sweep, tau2_conditional, update_alpha, update_gamma, update_mu,
    update_p1, update_sigma2, update_tau2, PanelStats, P1_CLAMP, VARIANCE_FLOOR,
};

/// Prior family for the slab variance `tau2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum TauPrior {
    /// `tau2 ~ InvGamma(psi0, delta0)`.
    #[default]
    InverseGamma,
    /// Flat on `tau`, i.e. `p(tau2) ∝ 1 / tau`.
    UniformOnTau,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Hyperparams {
    /// Prior variance of `mu`.
    pub k2: f64,
    pub alpha0: f64,
    pub beta0: f64,
    pub psi0: f64,
    pub delta0: f64,
    /// Spike-to-slab variance ratio.
    pub v0: f64,
    pub tau_prior: TauPrior,
}

impl Default for Hyperparams {
    fn default() -> Self {
        Hyperparams {
            k2: 10_000.0,
            alpha0: 0.01,
            beta0: 0.01,
            psi0: 0.01,
            delta0: 0.01,
            v0: 0.01,
            tau_prior: TauPrior::InverseGamma,
        }
    }
}

impl Hyperparams {
    pub fn validate(&self) -> Result<()> {
        let all = [self.k2, self.alpha0, self.beta0, self.psi0, self.delta0, self.v0];
        if all.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::InvalidParameter(format!(
                "hyperparameters must be positive and finite: {self:?}"
            )));
        }
        if self.v0 >= 1.0 {
            return Err(Error::InvalidParameter(format!("v0 = {} must be < 1", self.v0)));
        }
        Ok(())
    }
}

/// Current values of every model parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct GibbsState {
    pub mu: f64,
    pub sigma2: f64,
    pub tau2: f64,
    pub p1: f64,
    pub alpha: Vec<f64>,
    pub gamma: Vec<bool>,
}

/// How the chain is started.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum InitScheme {
    /// Moments of the data (see [`init_state`]).
    #[default]
    DataMoments,
    /// Far from the data: `mu` five SDs off, variances ten times too large,
    /// every player in the slab.
    Dispersed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct ChainConfig {
    pub iterations: usize,
    pub burn_in: usize,
    pub thin: usize,
    pub seed: u64,
    pub init: InitScheme,
}

impl Default for ChainConfig {
    fn default() -> Self {
        ChainConfig {
            iterations: 60_000,
            burn_in: 10_000,
            thin: 50,
            seed: 0,
            init: InitScheme::DataMoments,
        }
    }
}

impl ChainConfig {
    /// Number of retained draws, `(iterations - burn_in) / thin`.
    pub fn retained(&self) -> usize {
        self.iterations.saturating_sub(self.burn_in) / self.thin.max(1)
    }

    /// Whether (1-based) iteration `t` is kept.
    pub fn keeps(&self, t: usize) -> bool {
        t > self.burn_in && (t - self.burn_in).is_multiple_of(self.thin)
    }

    pub fn validate(&self) -> Result<()> {
        if self.thin == 0 {
            return Err(Error::InvalidParameter("thin must be at least 1".into()));
        }
        if self.burn_in >= self.iterations {
            return Err(Error::InvalidParameter(format!(
                "burn-in {} must be below the iteration count {}",
                self.burn_in, self.iterations
            )));
        }
        if self.retained() == 0 {
            return Err(Error::InvalidParameter("chain retains no draws".into()));
        }
        Ok(())
    }
}

/// Retained draws of one chain. `alpha` and `gamma` are stored draw-major:
/// draw `s`, player `i` lives at `s * m + i`.
#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorSamples {
    pub metric: String,
    pub player_ids: Vec<String>,
    pub mu: Vec<f64>,
    pub sigma2: Vec<f64>,
    pub tau2: Vec<f64>,
    pub p1: Vec<f64>,
    pub alpha: Vec<f64>,
    pub gamma: Vec<bool>,
    pub hyper: Hyperparams,
    pub config: ChainConfig,
    pub panel_hash: String,
}

impl PosteriorSamples {
    pub fn draws(&self) -> usize {
        self.mu.len()
    }

    pub fn player_count(&self) -> usize {
        self.player_ids.len()
    }

    pub fn alpha_draw(&self, s: usize) -> &[f64] {
        let m = self.player_count();
        &self.alpha[s * m..(s + 1) * m]
    }

    pub fn gamma_draw(&self, s: usize) -> &[bool] {
        let m = self.player_count();
        &self.gamma[s * m..(s + 1) * m]
    }

    fn push(&mut self, state: &GibbsState) {
        self.mu.push(state.mu);
        self.sigma2.push(state.sigma2);
        self.tau2.push(state.tau2);
        self.p1.push(state.p1);
        self.alpha.extend_from_slice(&state.alpha);
        self.gamma.extend_from_slice(&state.gamma);
    }
}
