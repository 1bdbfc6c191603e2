//! Draws as a wide CSV (one row per retained draw) plus a JSON sidecar.
//!
//! CSV columns: `draw,mu,sigma2,tau2,p1,alpha:<id>...,gamma:<id>...`.

use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{ChainConfig, Hyperparams, PosteriorSamples};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleMetadata {
    pub metric: String,
    pub players: Vec<String>,
    pub draws: usize,
    pub hyperparams: Hyperparams,
    pub chain: ChainConfig,
    pub seed: u64,
    pub panel_hash: String,
}

impl From<&PosteriorSamples> for SampleMetadata {
    fn from(s: &PosteriorSamples) -> Self {
        SampleMetadata {
            metric: s.metric.clone(),
            players: s.player_ids.clone(),
            draws: s.draws(),
            hyperparams: s.hyper,
            chain: s.config,
            seed: s.config.seed,
            panel_hash: s.panel_hash.clone(),
        }
    }
}

pub fn write_samples<W: Write>(samples: &PosteriorSamples, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["draw".to_string(), "mu".into(), "sigma2".into(), "tau2".into(), "p1".into()];
    header.extend(samples.player_ids.iter().map(|p| format!("alpha:{p}")));
    header.extend(samples.player_ids.iter().map(|p| format!("gamma:{p}")));
    w.write_record(&header)?;
    let mut row = Vec::with_capacity(header.len());
    for s in 0..samples.draws() {
        row.clear();
        row.push(s.to_string());
        row.push(samples.mu[s].to_string());
        row.push(samples.sigma2[s].to_string());
        row.push(samples.tau2[s].to_string());
        row.push(samples.p1[s].to_string());
        row.extend(samples.alpha_draw(s).iter().map(|a| a.to_string()));
        row.extend(samples.gamma_draw(s).iter().map(|g| if *g { "1" } else { "0" }.to_string()));
        w.write_record(&row)?;
    }
    w.flush().map_err(|e| Error::io("<draws csv>", e))?;
    Ok(())
}

pub fn read_samples<R: Read>(source: R, meta: &SampleMetadata) -> Result<PosteriorSamples> {
    let m = meta.players.len();
    let mut reader = csv::Reader::from_reader(source);
    let header = reader.headers()?.clone();
    if header.len() != 5 + 2 * m {
        return Err(Error::InvalidData(format!(
            "draws file has {} columns, metadata implies {}",
            header.len(),
            5 + 2 * m
        )));
    }
    for (i, p) in meta.players.iter().enumerate() {
        if header.get(5 + i) != Some(format!("alpha:{p}").as_str()) {
            return Err(Error::InvalidData(format!("draws column {} is not alpha:{p}", 5 + i)));
        }
    }
    let mut samples = PosteriorSamples {
        metric: meta.metric.clone(),
        player_ids: meta.players.clone(),
        mu: Vec::new(),
        sigma2: Vec::new(),
        tau2: Vec::new(),
        p1: Vec::new(),
        alpha: Vec::new(),
        gamma: Vec::new(),
        hyper: meta.hyperparams,
        config: meta.chain,
        panel_hash: meta.panel_hash.clone(),
    };
    for (r, rec) in reader.records().enumerate() {
        let rec = rec?;
        let num = |c: usize| -> Result<f64> {
            rec.get(c).and_then(|v| v.parse().ok()).ok_or_else(|| Error::BadField {
                row: r + 2,
                column: header.get(c).unwrap_or("?").to_string(),
                message: "not a number".into(),
            })
        };
        samples.mu.push(num(1)?);
        samples.sigma2.push(num(2)?);
        samples.tau2.push(num(3)?);
        samples.p1.push(num(4)?);
        for c in 5..5 + m {
            samples.alpha.push(num(c)?);
        }
        for c in 5 + m..5 + 2 * m {
            samples.gamma.push(num(c)? != 0.0);
        }
    }
    if samples.draws() != meta.draws {
        return Err(Error::InvalidData(format!(
            "draws file has {} rows, metadata says {}",
            samples.draws(),
            meta.draws
        )));
    }
    Ok(samples)
}

impl PosteriorSamples {
    /// Paths `<stem>.draws.csv` and `<stem>.meta.json`.
    pub fn file_paths(stem: &Path) -> (PathBuf, PathBuf) {
        let s = stem.as_os_str().to_string_lossy();
        (PathBuf::from(format!("{s}.draws.csv")), PathBuf::from(format!("{s}.meta.json")))
    }

    pub fn save(&self, stem: &Path) -> Result<()> {
        let (draws, meta) = Self::file_paths(stem);
        let f = std::fs::File::create(&draws).map_err(|e| Error::io(&draws, e))?;
        write_samples(self, std::io::BufWriter::new(f))?;
        let json = serde_json::to_string_pretty(&SampleMetadata::from(self))?;
        std::fs::write(&meta, json + "\n").map_err(|e| Error::io(&meta, e))?;
        Ok(())
    }

    pub fn load(stem: &Path) -> Result<Self> {
        let (draws, meta) = Self::file_paths(stem);
        let text = std::fs::read_to_string(&meta).map_err(|e| Error::io(&meta, e))?;
        let meta: SampleMetadata = serde_json::from_str(&text)?;
        let f = std::fs::File::open(&draws).map_err(|e| Error::io(&draws, e))?;
        read_samples(std::io::BufReader::new(f), &meta)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampler::{run_chain, ChainConfig};
    use crate::synth::{generate_panel, TruthParams};

    #[test]
    fn roundtrip_is_lossless() {
        let p = generate_panel("S", &TruthParams { players: 12, ..Default::default() }).unwrap().panel;
        let cfg = ChainConfig { iterations: 300, burn_in: 100, thin: 4, ..Default::default() };
        let s = run_chain(&p, &Default::default(), &cfg).unwrap();
        let mut buf = Vec::new();
        write_samples(&s, &mut buf).unwrap();
        let meta = SampleMetadata::from(&s);
        let json = serde_json::to_string(&meta).unwrap();
        let meta2: SampleMetadata = serde_json::from_str(&json).unwrap();
        let back = read_samples(buf.as_slice(), &meta2).unwrap();
        assert_eq!(s, back);
    }
}
