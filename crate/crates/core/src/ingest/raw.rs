use std::collections::HashSet;
use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Counting-stat columns. `PaStar` is derived (`PA - SH`) and never read.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Field {
    #[serde(rename = "PA")]
    Pa,
    #[serde(rename = "AB")]
    Ab,
    #[serde(rename = "H")]
    H,
    #[serde(rename = "1B")]
    Single,
    #[serde(rename = "2B")]
    Double,
    #[serde(rename = "3B")]
    Triple,
    #[serde(rename = "HR")]
    Hr,
    #[serde(rename = "R")]
    R,
    #[serde(rename = "RBI")]
    Rbi,
    #[serde(rename = "BB")]
    Bb,
    #[serde(rename = "IBB")]
    Ibb,
    #[serde(rename = "K")]
    K,
    #[serde(rename = "HBP")]
    Hbp,
    #[serde(rename = "SF")]
    Sf,
    #[serde(rename = "SH")]
    Sh,
    #[serde(rename = "GDP")]
    Gdp,
    #[serde(rename = "SB")]
    Sb,
    #[serde(rename = "CS")]
    Cs,
    #[serde(rename = "BUH")]
    Buh,
    #[serde(rename = "GB")]
    Gb,
    #[serde(rename = "FB")]
    Fb,
    #[serde(rename = "LD")]
    Ld,
    #[serde(rename = "IFFB")]
    Iffb,
    #[serde(rename = "IFH")]
    Ifh,
    #[serde(rename = "BIP")]
    Bip,
    #[serde(rename = "OB")]
    Ob,
    #[serde(rename = "PA_STAR")]
    PaStar,
}

impl Field {
    /// Columns that can appear in a raw CSV, in canonical order.
    pub const COLUMNS: [Field; 26] = [
        Field::Pa,
        Field::Ab,
        Field::H,
        Field::Single,
        Field::Double,
        Field::Triple,
        Field::Hr,
        Field::R,
        Field::Rbi,
        Field::Bb,
        Field::Ibb,
        Field::K,
        Field::Hbp,
        Field::Sf,
        Field::Sh,
        Field::Gdp,
        Field::Sb,
        Field::Cs,
        Field::Buh,
        Field::Gb,
        Field::Fb,
        Field::Ld,
        Field::Iffb,
        Field::Ifh,
        Field::Bip,
        Field::Ob,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Field::Pa => "PA",
            Field::Ab => "AB",
            Field::H => "H",
            Field::Single => "1B",
            Field::Double => "2B",
            Field::Triple => "3B",
            Field::Hr => "HR",
            Field::R => "R",
            Field::Rbi => "RBI",
            Field::Bb => "BB",
            Field::Ibb => "IBB",
            Field::K => "K",
            Field::Hbp => "HBP",
            Field::Sf => "SF",
            Field::Sh => "SH",
            Field::Gdp => "GDP",
            Field::Sb => "SB",
            Field::Cs => "CS",
            Field::Buh => "BUH",
            Field::Gb => "GB",
            Field::Fb => "FB",
            Field::Ld => "LD",
            Field::Iffb => "IFFB",
            Field::Ifh => "IFH",
            Field::Bip => "BIP",
            Field::Ob => "OB",
            Field::PaStar => "PA_STAR",
        }
    }

    fn column_index(self) -> Option<usize> {
        Field::COLUMNS.iter().position(|&f| f == self)
    }
}

/// Externally computed metrics carried through unchanged.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Precomputed {
    #[serde(rename = "wOBA")]
    Woba,
    #[serde(rename = "wRC")]
    Wrc,
    #[serde(rename = "wRAA")]
    Wraa,
    #[serde(rename = "Spd")]
    Spd,
}

impl Precomputed {
    pub const ALL: [Precomputed; 4] = [
        Precomputed::Woba,
        Precomputed::Wrc,
        Precomputed::Wraa,
        Precomputed::Spd,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Precomputed::Woba => "wOBA",
            Precomputed::Wrc => "wRC",
            Precomputed::Wraa => "wRAA",
            Precomputed::Spd => "Spd",
        }
    }
}

/// One player's season totals. Empty CSV cells are kept as `None`.
#[derive(Debug, Clone, PartialEq)]
pub struct RawSeasonRow {
    pub player_id: String,
    pub season: i32,
    pub counts: [Option<u64>; 26],
    pub precomputed: [Option<f64>; 4],
}

impl RawSeasonRow {
    pub fn new(player_id: impl Into<String>, season: i32) -> Self {
        RawSeasonRow {
            player_id: player_id.into(),
            season,
            counts: [None; 26],
            precomputed: [None; 4],
        }
    }

    pub fn with(mut self, field: Field, value: u64) -> Self {
        self.set(field, value);
        self
    }

    pub fn set(&mut self, field: Field, value: u64) {
        if let Some(i) = field.column_index() {
            self.counts[i] = Some(value);
        }
    }

    pub fn set_precomputed(&mut self, col: Precomputed, value: f64) {
        let i = Precomputed::ALL.iter().position(|&c| c == col).unwrap();
        self.precomputed[i] = Some(value);
    }

    pub fn precomputed(&self, col: Precomputed) -> Option<f64> {
        let i = Precomputed::ALL.iter().position(|&c| c == col).unwrap();
        self.precomputed[i]
    }

    fn stored(&self, field: Field) -> Option<f64> {
        field
            .column_index()
            .and_then(|i| self.counts[i])
            .map(|v| v as f64)
    }

    /// Value of a count, deriving `PA_STAR`, and `1B`, `BIP`, `OB` when not
    /// supplied. Derived values that come out negative are treated as missing.
    pub fn count(&self, field: Field) -> Option<f64> {
        let derived = match field {
            Field::PaStar => Some(self.count(Field::Pa)? - self.count(Field::Sh)?),
            _ => match self.stored(field) {
                Some(v) => return Some(v),
                None => match field {
                    Field::Single => Some(
                        self.stored(Field::H)?
                            - self.stored(Field::Double)?
                            - self.stored(Field::Triple)?
                            - self.stored(Field::Hr)?,
                    ),
                    Field::Bip => Some(
                        self.stored(Field::Ab)? - self.stored(Field::K)? - self.stored(Field::Hr)?
                            + self.stored(Field::Sf)?,
                    ),
                    Field::Ob => Some(
                        self.stored(Field::H)? + self.stored(Field::Bb)? + self.stored(Field::Hbp)?,
                    ),
                    _ => None,
                },
            },
        };
        derived.filter(|v| *v >= 0.0)
    }
}

/// Parse a raw season CSV. Required columns are `player_id` and `season`; any
/// subset of the count columns and precomputed columns may follow.
pub fn parse_raw<R: Read>(source: R) -> Result<Vec<RawSeasonRow>> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(source);
    let headers = reader.headers()?.clone();
    let find = |name: &str| headers.iter().position(|h| h == name);
    let pid_col = find("player_id").ok_or_else(|| Error::MissingColumn("player_id".into()))?;
    let season_col = find("season").ok_or_else(|| Error::MissingColumn("season".into()))?;
    let count_cols: Vec<(usize, usize)> = Field::COLUMNS
        .iter()
        .enumerate()
        .filter_map(|(slot, f)| find(f.name()).map(|c| (slot, c)))
        .collect();
    let pre_cols: Vec<(usize, usize)> = Precomputed::ALL
        .iter()
        .enumerate()
        .filter_map(|(slot, p)| find(p.name()).map(|c| (slot, c)))
        .collect();

    let mut seen = HashSet::new();
    let mut rows = Vec::new();
    for (i, record) in reader.records().enumerate() {
        // Data rows are numbered from 2; row 1 is the header.
        let row_no = i + 2;
        let record = record?;
        let bad = |col: usize, message: String| Error::BadField {
            row: row_no,
            column: headers.get(col).unwrap_or("?").to_string(),
            message,
        };
        let player_id = record.get(pid_col).unwrap_or("").to_string();
        if player_id.is_empty() {
            return Err(bad(pid_col, "empty player_id".into()));
        }
        let season_raw = record.get(season_col).unwrap_or("");
        let season: i32 = season_raw
            .parse()
            .map_err(|_| bad(season_col, format!("expected integer, found {season_raw:?}")))?;

        let mut row = RawSeasonRow::new(player_id, season);
        for &(slot, col) in &count_cols {
            let cell = record.get(col).unwrap_or("");
            if cell.is_empty() {
                continue;
            }
            let v: i64 = cell
                .parse()
                .map_err(|_| bad(col, format!("expected integer count, found {cell:?}")))?;
            if v < 0 {
                return Err(bad(col, format!("negative count {v}")));
            }
            row.counts[slot] = Some(v as u64);
        }
        for &(slot, col) in &pre_cols {
            let cell = record.get(col).unwrap_or("");
            if cell.is_empty() {
                continue;
            }
            let v: f64 = cell
                .parse()
                .ok()
                .filter(|v: &f64| v.is_finite())
                .ok_or_else(|| bad(col, format!("expected real number, found {cell:?}")))?;
            row.precomputed[slot] = Some(v);
        }
        if !seen.insert((row.player_id.clone(), row.season)) {
            return Err(Error::DuplicateKey {
                player: row.player_id,
                season,
                row: row_no,
            });
        }
        rows.push(row);
    }
    Ok(rows)
}

pub fn parse_raw_path(path: impl AsRef<Path>) -> Result<Vec<RawSeasonRow>> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    parse_raw(std::io::BufReader::new(file))
}
