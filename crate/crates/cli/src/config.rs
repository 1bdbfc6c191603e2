//! Run configuration: one TOML document, every field defaulted.

use std::path::{Path, PathBuf};

use hitsignal::evaluate::SignalRegion;
use hitsignal::ingest::NormalityThresholds;
use hitsignal::lasso::CvConfig;
use hitsignal::pca::{PcaConfig, EXCLUDED_METRICS};
use hitsignal::sampler::InitScheme;
use hitsignal::synth::{SeasonCount, TruthParams, WeightScheme};
use hitsignal::{ChainConfig, Error, Hyperparams, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Master seed; every per-metric seed is derived from it.
    pub seed: u64,
    pub out: PathBuf,
    /// Worker threads; 0 uses every core.
    pub jobs: usize,
    /// Metric selection; empty means everything available.
    pub metrics: Vec<String>,
    pub input: InputConfig,
    pub normality: NormalityThresholds,
    pub hyper: Hyperparams,
    pub chain: ChainSection,
    pub synth: SynthSection,
    pub report: ReportSection,
    pub lasso: LassoSection,
    pub pca: PcaSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 1,
            out: PathBuf::from("out"),
            jobs: 0,
            metrics: Vec::new(),
            input: InputConfig::default(),
            normality: NormalityThresholds::default(),
            hyper: Hyperparams::default(),
            chain: ChainSection::default(),
            synth: SynthSection::default(),
            report: ReportSection::default(),
            lasso: LassoSection::default(),
            pca: PcaSection::default(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InputConfig {
    /// Raw counting-stat CSV for `ingest`.
    pub raw: Option<PathBuf>,
    /// JSON metric definitions merged over the shipped table.
    pub definitions: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChainSection {
    pub iterations: usize,
    pub burn_in: usize,
    pub thin: usize,
    pub init: InitScheme,
}

impl Default for ChainSection {
    fn default() -> Self {
        let c = ChainConfig::default();
        ChainSection { iterations: c.iterations, burn_in: c.burn_in, thin: c.thin, init: c.init }
    }
}

impl ChainSection {
    pub fn with_seed(&self, seed: u64) -> ChainConfig {
        ChainConfig { iterations: self.iterations, burn_in: self.burn_in, thin: self.thin, seed, init: self.init }
    }
}

/// One synthetic metric; the seed comes from the master seed and the name.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthMetric {
    pub name: String,
    pub mu: f64,
    pub sigma2: f64,
    pub tau2: f64,
    pub p1: f64,
    pub v0: f64,
    pub players: usize,
    pub seasons: SeasonCount,
    pub weights: WeightScheme,
    pub first_season: i32,
}

impl Default for SynthMetric {
    fn default() -> Self {
        let t = TruthParams::default();
        SynthMetric {
            name: "SYN".into(),
            mu: t.mu,
            sigma2: t.sigma2,
            tau2: t.tau2,
            p1: t.p1,
            v0: t.v0,
            players: t.players,
            seasons: t.seasons,
            weights: t.weights,
            first_season: t.first_season,
        }
    }
}

impl SynthMetric {
    pub fn truth(&self, seed: u64) -> TruthParams {
        TruthParams {
            mu: self.mu,
            sigma2: self.sigma2,
            tau2: self.tau2,
            p1: self.p1,
            v0: self.v0,
            players: self.players,
            seasons: self.seasons.clone(),
            weights: self.weights.clone(),
            seed,
            first_season: self.first_season,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthSection {
    pub metrics: Vec<SynthMetric>,
}

impl Default for SynthSection {
    fn default() -> Self {
        SynthSection { metrics: vec![SynthMetric::default()] }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReportSection {
    /// Rows per metric in the top-players table.
    pub top_k: usize,
    pub region: SignalRegion,
    /// Metrics ranked ascending.
    pub lower_is_better: Vec<String>,
}

impl Default for ReportSection {
    fn default() -> Self {
        ReportSection { top_k: 10, region: SignalRegion::default(), lower_is_better: Vec::new() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LassoSection {
    pub folds: usize,
    pub repeats: usize,
    pub grid_points: usize,
}

impl Default for LassoSection {
    fn default() -> Self {
        let c = CvConfig::default();
        LassoSection { folds: c.folds, repeats: c.repeats, grid_points: c.grid_points }
    }
}

impl LassoSection {
    pub fn with_seed(&self, seed: u64) -> CvConfig {
        CvConfig { folds: self.folds, repeats: self.repeats, grid_points: self.grid_points, seed }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PcaSection {
    pub reps: usize,
    pub quantile: f64,
    /// Metrics never entered into the PCA.
    pub exclude: Vec<String>,
}

impl Default for PcaSection {
    fn default() -> Self {
        let c = PcaConfig::default();
        PcaSection {
            reps: c.reps,
            quantile: c.quantile,
            exclude: EXCLUDED_METRICS.iter().map(|s| s.to_string()).collect(),
        }
    }
}

impl PcaSection {
    pub fn with_seed(&self, seed: u64) -> PcaConfig {
        PcaConfig { reps: self.reps, quantile: self.quantile, seed }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::InvalidParameter(format!("config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text).map_err(|e| Error::InvalidParameter(format!("{}: {e}", path.display())))
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::InvalidParameter(format!("config: {e}")))
    }

    pub fn validate(&self) -> Result<()> {
        self.hyper.validate()?;
        self.chain.with_seed(self.seed).validate()?;
        if self.lasso.grid_points < 2 || self.lasso.folds < 2 || self.lasso.repeats == 0 {
            return Err(Error::InvalidParameter("lasso needs >= 2 grid points, >= 2 folds and >= 1 repeat".into()));
        }
        if self.pca.reps == 0 || !(0.0..=1.0).contains(&self.pca.quantile) {
            return Err(Error::InvalidParameter("pca needs reps >= 1 and a quantile in [0, 1]".into()));
        }
        for m in &self.synth.metrics {
            m.truth(0).validate()?;
        }
        Ok(())
    }

    pub fn wants(&self, metric: &str) -> bool {
        self.metrics.is_empty() || self.metrics.iter().any(|m| m == metric)
    }
}
