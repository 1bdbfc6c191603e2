use std::io::{Read, Write};
use std::path::Path;

use sha2::{Digest, Sha256};

use super::metrics::{MetricDefinition, Skip};
use super::raw::RawSeasonRow;
use crate::error::{Error, Result};

/// One player-season of a metric, before weights are assigned.
#[derive(Debug, Clone, PartialEq)]
pub struct PanelRecord {
    pub player_id: String,
    pub season: i32,
    pub value: f64,
    pub opportunity: f64,
}

/// One player-season inside a [`MetricPanel`]. `player` indexes
/// [`MetricPanel::player_ids`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observation {
    pub player: usize,
    pub season: i32,
    pub value: f64,
    pub opportunity: f64,
    pub weight: f64,
}

/// Rows that `build_panel` could not use.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct DropCounts {
    pub missing: usize,
    pub zero_denominator: usize,
    pub zero_opportunity: usize,
    pub before_available: usize,
}

impl DropCounts {
    pub fn total(&self) -> usize {
        self.missing + self.zero_denominator + self.zero_opportunity + self.before_available
    }
}

/// A single metric's observations `y_ij` with variance multipliers `w_ij`.
///
/// Players are stored sorted by id and each player's seasons in ascending
/// order, so the panel is independent of the order rows were supplied in.
/// The weight of a player-season with opportunity count `n` is `n_bar / n`,
/// where `n_bar` is the arithmetic mean opportunity count over the panel.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricPanel {
    pub metric: String,
    pub player_ids: Vec<String>,
    observations: Vec<Observation>,
    starts: Vec<usize>,
    pub dropped: DropCounts,
}

impl MetricPanel {
    /// Build from opportunity counts; weights are `n_bar / n`.
    pub fn from_records(metric: impl Into<String>, mut records: Vec<PanelRecord>) -> Result<Self> {
        let metric = metric.into();
        records.sort_by(|a, b| a.player_id.cmp(&b.player_id).then(a.season.cmp(&b.season)));
        for r in &records {
            if !(r.opportunity > 0.0 && r.opportunity.is_finite()) {
                return Err(Error::InvalidData(format!(
                    "metric `{metric}`: player `{}` season {} has opportunity {}",
                    r.player_id, r.season, r.opportunity
                )));
            }
        }
        let n_bar = records.iter().map(|r| r.opportunity).sum::<f64>() / records.len().max(1) as f64;
        let weighted = records
            .into_iter()
            .map(|r| {
                let w = n_bar / r.opportunity;
                (r, w)
            })
            .collect();
        Self::assemble(metric, weighted)
    }

    /// Build with explicit weights (synthetic data, tests).
    pub fn from_weighted(metric: impl Into<String>, rows: Vec<(PanelRecord, f64)>) -> Result<Self> {
        Self::assemble(metric.into(), rows)
    }

    fn assemble(metric: String, mut rows: Vec<(PanelRecord, f64)>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::EmptyPanel { metric, dropped: 0 });
        }
        rows.sort_by(|(a, _), (b, _)| {
            a.player_id
                .cmp(&b.player_id)
                .then(a.season.cmp(&b.season))
        });
        let mut player_ids: Vec<String> = Vec::new();
        let mut starts = Vec::new();
        let mut observations = Vec::with_capacity(rows.len());
        for (idx, (r, w)) in rows.into_iter().enumerate() {
            if !r.value.is_finite() {
                return Err(Error::InvalidData(format!(
                    "metric `{metric}`: non-finite value for `{}` season {}",
                    r.player_id, r.season
                )));
            }
            if !(w > 0.0 && w.is_finite()) {
                return Err(Error::InvalidData(format!(
                    "metric `{metric}`: weight {w} for `{}` season {}",
                    r.player_id, r.season
                )));
            }
            if player_ids.last() != Some(&r.player_id) {
                player_ids.push(r.player_id.clone());
                starts.push(idx);
            } else if observations
                .last()
                .is_some_and(|o: &Observation| o.season == r.season)
            {
                return Err(Error::DuplicateKey {
                    player: r.player_id,
                    season: r.season,
                    row: idx + 1,
                });
            }
            observations.push(Observation {
                player: player_ids.len() - 1,
                season: r.season,
                value: r.value,
                opportunity: r.opportunity,
                weight: w,
            });
        }
        starts.push(observations.len());
        Ok(MetricPanel {
            metric,
            player_ids,
            observations,
            starts,
            dropped: DropCounts::default(),
        })
    }

    /// Number of players `m`.
    pub fn player_count(&self) -> usize {
        self.player_ids.len()
    }

    /// Number of player-seasons `N`.
    pub fn len(&self) -> usize {
        self.observations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observations.is_empty()
    }

    pub fn observations(&self) -> &[Observation] {
        &self.observations
    }

    /// Seasons of player `i`.
    pub fn player(&self, i: usize) -> &[Observation] {
        &self.observations[self.starts[i]..self.starts[i + 1]]
    }

    pub fn values(&self) -> Vec<f64> {
        self.observations.iter().map(|o| o.value).collect()
    }

    pub fn records(&self) -> Vec<PanelRecord> {
        self.observations
            .iter()
            .map(|o| PanelRecord {
                player_id: self.player_ids[o.player].clone(),
                season: o.season,
                value: o.value,
                opportunity: o.opportunity,
            })
            .collect()
    }

    /// SHA-256 over the panel content, hex encoded.
    pub fn content_hash(&self) -> String {
        let mut h = Sha256::new();
        h.update(self.metric.as_bytes());
        for o in &self.observations {
            h.update(self.player_ids[o.player].as_bytes());
            h.update([0u8]);
            h.update(o.season.to_le_bytes());
            h.update(o.value.to_bits().to_le_bytes());
            h.update(o.weight.to_bits().to_le_bytes());
        }
        h.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// Evaluate `definition` on every row and collect the usable player-seasons.
pub fn build_panel(rows: &[RawSeasonRow], definition: &MetricDefinition) -> Result<MetricPanel> {
    if let Some(col) = definition.passthrough {
        if !rows.is_empty() && rows.iter().all(|r| r.precomputed(col).is_none()) {
            return Err(Error::MissingColumn(format!(
                "{} (precomputed values for metric `{}`)",
                col.name(),
                definition.name
            )));
        }
    }
    let mut dropped = DropCounts::default();
    let mut records = Vec::new();
    for row in rows {
        if definition.available_from.is_some_and(|first| row.season < first) {
            dropped.before_available += 1;
            continue;
        }
        let outcome = definition
            .value(row)
            .and_then(|v| definition.opportunity(row).map(|n| (v, n)));
        match outcome {
            Ok((value, opportunity)) => records.push(PanelRecord {
                player_id: row.player_id.clone(),
                season: row.season,
                value,
                opportunity,
            }),
            Err(Skip::Missing) => dropped.missing += 1,
            Err(Skip::ZeroDenominator) => dropped.zero_denominator += 1,
            Err(Skip::ZeroOpportunity) => dropped.zero_opportunity += 1,
        }
    }
    if records.is_empty() {
        return Err(Error::EmptyPanel {
            metric: definition.name.clone(),
            dropped: dropped.total(),
        });
    }
    let mut panel = MetricPanel::from_records(definition.name.clone(), records)?;
    panel.dropped = dropped;
    Ok(panel)
}

/// File stem for a metric name (`K/PA` -> `K_per_PA`).
pub fn metric_file_stem(metric: &str) -> String {
    metric.replace('/', "_per_")
}

pub fn metric_from_file_stem(stem: &str) -> String {
    stem.replace("_per_", "/")
}

/// Per-metric panel file: `player_id,season,value,opportunity`.
pub fn write_panel_csv<W: Write>(panel: &MetricPanel, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["player_id", "season", "value", "opportunity"])?;
    for r in panel.records() {
        w.write_record([
            r.player_id,
            r.season.to_string(),
            r.value.to_string(),
            r.opportunity.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io("<panel csv>", e))?;
    Ok(())
}

pub fn read_panel_csv<R: Read>(metric: &str, source: R) -> Result<MetricPanel> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(source);
    let headers = reader.headers()?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::MissingColumn(name.to_string()))
    };
    let (pc, sc, vc, oc) = (col("player_id")?, col("season")?, col("value")?, col("opportunity")?);
    let mut records = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec?;
        let row = i + 2;
        let get = |c: usize| rec.get(c).unwrap_or("");
        let bad = |c: usize| Error::BadField {
            row,
            column: headers.get(c).unwrap_or("?").to_string(),
            message: format!("cannot parse {:?}", rec.get(c).unwrap_or("")),
        };
        records.push(PanelRecord {
            player_id: get(pc).to_string(),
            season: get(sc).parse().map_err(|_| bad(sc))?,
            value: get(vc).parse().map_err(|_| bad(vc))?,
            opportunity: get(oc).parse().map_err(|_| bad(oc))?,
        });
    }
    if records.is_empty() {
        return Err(Error::EmptyPanel {
            metric: metric.to_string(),
            dropped: 0,
        });
    }
    MetricPanel::from_records(metric, records)
}

pub(crate) fn read_panel_path(path: &Path) -> Result<MetricPanel> {
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("metric");
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_panel_csv(&metric_from_file_stem(stem), std::io::BufReader::new(file))
}

impl MetricPanel {
    /// Read a per-metric CSV; the metric name comes from the file stem.
    pub fn read_path(path: impl AsRef<Path>) -> Result<Self> {
        read_panel_path(path.as_ref())
    }
}
