//! Within-player reliability of panel metrics.
//!
//! Each metric is modelled as `y_ij ~ Normal(mu + alpha_i, w_ij * sigma2)` with a
//! two-component normal mixture ("spike and slab") on the player offsets
//! `alpha_i`. The posterior is explored with a six-step Gibbs sampler and
//! summarised by the posterior mean of the slab proportion `p1` and the
//! negative entropy of the per-player slab indicators. Two cross-checks are
//! provided: an L1-penalised player-indicator regression tuned by repeated
//! k-fold cross-validation, and a correlation PCA with permutation null and
//! bootstrap bands.
//!
//! Module map:
//!
//! * [`ingest`]: CSV parsing, the 50 shipped metric recipes, panels, normality screen.
//! * [`synth`]: panels drawn from the generative model with known truth.
//! * [`sampler`]: hyperparameters, Gibbs updates, chain scheduling and sample I/O.
//! * [`evaluate`]: `p1_hat`, negative entropy, player estimates and rankings.
//! * [`lasso`]: exact soft-threshold solver, fraction path and cross-validation.
//! * [`pca`]: correlation PCA with permutation and bootstrap bands.
//! * [`svg`]: a small SVG renderer for diagnostic plots.

pub mod error;
pub mod evaluate;
pub mod ingest;
pub mod lasso;
pub mod pca;
pub mod rng;
pub mod sampler;
pub mod stats;
pub mod svg;
pub mod synth;

pub use error::{Error, ErrorKind, Result};
pub use evaluate::{MetricSummary, PlayerEstimate};

pub use ingest::{MetricDefinition, MetricPanel, NormalityFlag, RawSeasonRow};
pub use sampler::{ChainConfig, GibbsState, Hyperparams, PosteriorSamples, TauPrior};
pub use synth::TruthParams;
