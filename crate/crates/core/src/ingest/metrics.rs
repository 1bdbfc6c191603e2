use std::path::Path;

use serde::{Deserialize, Serialize};

use super::raw::{Field, Precomputed, RawSeasonRow};
use crate::error::{Error, Result};

/// `coef * field`. In JSON either `"HR"` or `{"field": "HR", "coef": 3}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "TermRepr")]
pub struct Term {
    pub field: Field,
    pub coef: f64,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum TermRepr {
    Bare(Field),
    Full {
        field: Field,
        #[serde(default = "one")]
        coef: f64,
    },
}

fn one() -> f64 {
    1.0
}

impl From<TermRepr> for Term {
    fn from(t: TermRepr) -> Self {
        match t {
            TermRepr::Bare(field) => Term { field, coef: 1.0 },
            TermRepr::Full { field, coef } => Term { field, coef },
        }
    }
}

impl Term {
    pub const fn of(field: Field) -> Self {
        Term { field, coef: 1.0 }
    }

    pub const fn times(coef: f64, field: Field) -> Self {
        Term { field, coef }
    }
}

/// `sum(numerator) / sum(denominator)`; an empty denominator means 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ratio {
    pub numerator: Vec<Term>,
    #[serde(default)]
    pub denominator: Vec<Term>,
}

/// Opportunity count `n` for a player-season.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightRecipe {
    /// Sum of the listed counts (`SB + CS`).
    Sum(Vec<Field>),
    /// Geometric mean of the listed counts (`AB x PA_STAR` for OPS).
    GeometricMean(Vec<Field>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricDefinition {
    pub name: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub numerator: Vec<Term>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub denominator: Vec<Term>,
    /// Further ratios added to the main one (OPS = OBP + SLG).
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub plus: Vec<Ratio>,
    /// Take the value from a precomputed column instead of a recipe.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub passthrough: Option<Precomputed>,
    pub weight: WeightRecipe,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub available_from: Option<i32>,
}

/// Why a row yields no observation for a metric.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Skip {
    Missing,
    ZeroDenominator,
    ZeroOpportunity,
}

fn sum_terms(row: &RawSeasonRow, terms: &[Term]) -> Option<f64> {
    terms
        .iter()
        .try_fold(0.0, |acc, t| Some(acc + t.coef * row.count(t.field)?))
}

fn eval_ratio(row: &RawSeasonRow, num: &[Term], den: &[Term]) -> Result<f64, Skip> {
    let n = sum_terms(row, num).ok_or(Skip::Missing)?;
    if den.is_empty() {
        return Ok(n);
    }
    let d = sum_terms(row, den).ok_or(Skip::Missing)?;
    if d <= 0.0 {
        return Err(Skip::ZeroDenominator);
    }
    Ok(n / d)
}

impl MetricDefinition {
    pub(crate) fn value(&self, row: &RawSeasonRow) -> Result<f64, Skip> {
        if let Some(col) = self.passthrough {
            return row.precomputed(col).ok_or(Skip::Missing);
        }
        let mut v = eval_ratio(row, &self.numerator, &self.denominator)?;
        for r in &self.plus {
            v += eval_ratio(row, &r.numerator, &r.denominator)?;
        }
        Ok(v)
    }

    pub(crate) fn opportunity(&self, row: &RawSeasonRow) -> Result<f64, Skip> {
        let n = match &self.weight {
            WeightRecipe::Sum(fields) => fields
                .iter()
                .try_fold(0.0, |acc, f| Some(acc + row.count(*f)?))
                .ok_or(Skip::Missing)?,
            WeightRecipe::GeometricMean(fields) => {
                let logs = fields
                    .iter()
                    .map(|f| row.count(*f).map(f64::ln))
                    .collect::<Option<Vec<_>>>()
                    .ok_or(Skip::Missing)?;
                (logs.iter().sum::<f64>() / logs.len() as f64).exp()
            }
        };
        if n > 0.0 && n.is_finite() {
            Ok(n)
        } else {
            Err(Skip::ZeroOpportunity)
        }
    }

    fn validate(&self) -> Result<()> {
        let fields = match &self.weight {
            WeightRecipe::Sum(f) | WeightRecipe::GeometricMean(f) => f,
        };
        if self.name.is_empty() {
            return Err(Error::InvalidParameter("metric definition with empty name".into()));
        }
        if fields.is_empty() {
            return Err(Error::InvalidParameter(format!(
                "metric `{}`: weight recipe lists no fields",
                self.name
            )));
        }
        if self.passthrough.is_none() && self.numerator.is_empty() {
            return Err(Error::InvalidParameter(format!(
                "metric `{}`: needs a numerator or a passthrough column",
                self.name
            )));
        }
        Ok(())
    }
}

const LATE_SEASON: i32 = 2002;

fn def(
    name: &str,
    numerator: &[Term],
    denominator: &[Term],
    weight: WeightRecipe,
    late: bool,
) -> MetricDefinition {
    MetricDefinition {
        name: name.to_string(),
        numerator: numerator.to_vec(),
        denominator: denominator.to_vec(),
        plus: Vec::new(),
        passthrough: None,
        weight,
        available_from: late.then_some(LATE_SEASON),
    }
}

fn passthrough(col: Precomputed, weight: Field) -> MetricDefinition {
    MetricDefinition {
        name: col.name().to_string(),
        numerator: Vec::new(),
        denominator: Vec::new(),
        plus: Vec::new(),
        passthrough: Some(col),
        weight: WeightRecipe::Sum(vec![weight]),
        available_from: None,
    }
}

/// The 50 shipped metrics, in table order.
pub fn builtin_definitions() -> Vec<MetricDefinition> {
    use Field::*;
    let w = |f: Field| WeightRecipe::Sum(vec![f]);
    let t = Term::of;
    let mut out = Vec::with_capacity(50);

    // Totals and per-PA rates, weighted by PA.
    for f in [Single, Double, Triple, Hr, R, Rbi, Bb, Ibb, K, Hbp] {
        out.push(def(f.name(), &[t(f)], &[], w(Pa), false));
        out.push(def(&format!("{}/PA", f.name()), &[t(f)], &[t(Pa)], w(Pa), false));
    }
    out.push(def("BUH", &[t(Buh)], &[], w(H), true));
    out.push(def("BUH/H", &[t(Buh)], &[t(H)], w(H), true));
    for f in [H, Gdp, Sf, Sh] {
        out.push(def(f.name(), &[t(f)], &[], w(Pa), false));
    }

    let total_bases = [t(Single), Term::times(2.0, Double), Term::times(3.0, Triple), Term::times(4.0, Hr)];
    let extra_bases = [t(Double), Term::times(2.0, Triple), Term::times(3.0, Hr)];
    out.push(def("OBP", &[t(Ob)], &[t(PaStar)], w(PaStar), false));
    out.push(def("AVG", &[t(H)], &[t(Ab)], w(Ab), false));
    out.push(def("SLG", &total_bases, &[t(Ab)], w(Ab), false));
    let mut ops = def(
        "OPS",
        &[t(Ob)],
        &[t(PaStar)],
        WeightRecipe::GeometricMean(vec![Ab, PaStar]),
        false,
    );
    ops.plus.push(Ratio {
        numerator: total_bases.to_vec(),
        denominator: vec![t(Ab)],
    });
    out.push(ops);
    out.push(def("ISO", &extra_bases, &[t(Ab)], w(Ab), false));
    out.push(def("BB/K", &[t(Bb)], &[t(K)], w(Pa), false));
    out.push(def("HR/FB", &[t(Hr)], &[t(Fb)], w(Pa), true));
    out.push(def("GB/FB", &[t(Gb)], &[t(Fb)], w(Bip), true));
    out.push(def("BABIP", &[t(H), Term::times(-1.0, Hr)], &[t(Bip)], w(Bip), false));
    out.push(def("LD/BIP", &[t(Ld)], &[t(Bip)], w(Bip), true));
    out.push(def("GB/BIP", &[t(Gb)], &[t(Bip)], w(Bip), true));
    out.push(def("FB/BIP", &[t(Fb)], &[t(Bip)], w(Bip), true));
    out.push(def("IFFB/FB", &[t(Iffb)], &[t(Fb)], w(Fb), true));
    out.push(def("IFH", &[t(Ifh)], &[], w(Gb), true));
    out.push(def("IFH/H", &[t(Ifh)], &[t(H)], w(Gb), true));
    out.push(passthrough(Precomputed::Woba, PaStar));
    out.push(passthrough(Precomputed::Wrc, Pa));
    out.push(passthrough(Precomputed::Wraa, Pa));

    out.push(def("SB", &[t(Sb)], &[], w(Ob), false));
    out.push(def("SB/OB", &[t(Sb)], &[t(Ob)], w(Ob), false));
    out.push(def("CS", &[t(Cs)], &[], w(Ob), false));
    out.push(def("CS/OB", &[t(Cs)], &[t(Ob)], w(Ob), false));
    out.push(def("SBPA", &[t(Sb)], &[t(Sb), t(Cs)], WeightRecipe::Sum(vec![Sb, Cs]), false));
    out.push(passthrough(Precomputed::Spd, Pa));
    out
}

/// Look up a definition by name.
pub fn definition<'a>(defs: &'a [MetricDefinition], name: &str) -> Result<&'a MetricDefinition> {
    defs.iter()
        .find(|d| d.name == name)
        .ok_or_else(|| Error::UnknownMetric(name.to_string()))
}

/// Read a JSON array of definitions.
pub fn load_definitions(path: impl AsRef<Path>) -> Result<Vec<MetricDefinition>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let defs: Vec<MetricDefinition> = serde_json::from_str(&text)?;
    for d in &defs {
        d.validate()?;
    }
    Ok(defs)
}

/// Replace built-ins with same-named overrides; append new names at the end.
pub fn merge_definitions(
    mut base: Vec<MetricDefinition>,
    overrides: Vec<MetricDefinition>,
) -> Vec<MetricDefinition> {
    for o in overrides {
        match base.iter_mut().find(|d| d.name == o.name) {
            Some(slot) => *slot = o,
            None => base.push(o),
        }
    }
    base
}
