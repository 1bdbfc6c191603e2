use serde::{Deserialize, Serialize};

use super::panel::MetricPanel;
use crate::error::{Error, Result};
use crate::stats::skewness;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NormalityThresholds {
    pub max_abs_skewness: f64,
    pub max_zero_fraction: f64,
}

impl Default for NormalityThresholds {
    fn default() -> Self {
        NormalityThresholds {
            max_abs_skewness: 2.0,
            max_zero_fraction: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalityFlag {
    pub metric: String,
    pub skewness: f64,
    pub zero_fraction: f64,
    pub approx_normal: bool,
}

pub const MIN_SCREEN_OBSERVATIONS: usize = 10;

/// Flag metrics whose pooled values are heavily skewed or mostly zero.
pub fn screen_normality(panel: &MetricPanel, thresholds: &NormalityThresholds) -> Result<NormalityFlag> {
    let values = panel.values();
    if values.len() < MIN_SCREEN_OBSERVATIONS {
        return Err(Error::InvalidData(format!(
            "metric `{}`: normality screen needs at least {MIN_SCREEN_OBSERVATIONS} observations, got {}",
            panel.metric,
            values.len()
        )));
    }
    let g1 = skewness(&values);
    let zero_fraction = values.iter().filter(|v| **v == 0.0).count() as f64 / values.len() as f64;
    Ok(NormalityFlag {
        metric: panel.metric.clone(),
        skewness: g1,
        zero_fraction,
        approx_normal: g1.abs() <= thresholds.max_abs_skewness
            && zero_fraction <= thresholds.max_zero_fraction,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::PanelRecord;

    fn panel(values: &[f64]) -> MetricPanel {
        let recs = values
            .iter()
            .enumerate()
            .map(|(i, &v)| PanelRecord {
                player_id: format!("p{i:04}"),
                season: 2000,
                value: v,
                opportunity: 1.0,
            })
            .collect();
        MetricPanel::from_records("T", recs).unwrap()
    }

    #[test]
    fn symmetric_sample_is_normal() {
        let v: Vec<f64> = (0..30).map(|i| [-1.0, 0.0, 1.0][i % 3]).collect();
        let f = screen_normality(&panel(&v), &NormalityThresholds::default()).unwrap();
        assert!(f.skewness.abs() < 1e-12);
        assert!(f.approx_normal);
    }

    #[test]
    fn zero_heavy_long_tail_is_flagged() {
        // 90 zeros plus 10 values 1..=10: g1 = 3.626 by direct evaluation.
        let mut v = vec![0.0; 90];
        v.extend((1..=10).map(f64::from));
        let f = screen_normality(&panel(&v), &NormalityThresholds::default()).unwrap();
        assert!((f.zero_fraction - 0.9).abs() < 1e-15);
        assert!(f.skewness > 2.0, "g1 = {}", f.skewness);
        assert!(!f.approx_normal);
    }

    #[test]
    fn constant_panel_and_too_few() {
        let f = screen_normality(&panel(&[0.3; 12]), &NormalityThresholds::default()).unwrap();
        assert_eq!(f.skewness, 0.0);
        assert!(f.approx_normal);
        assert!(screen_normality(&panel(&[1.0; 9]), &NormalityThresholds::default()).is_err());
    }

    #[test]
    fn cubing_a_shifted_symmetric_sample_flips_the_flag() {
        // Symmetric about 0.5 on a geometric grid of half-widths.
        let mut v = Vec::new();
        for k in 0..40 {
            let d = 0.5 * (k as f64 / 39.0).powi(4);
            v.push(0.5 + d);
            v.push(0.5 - d);
        }
        v.extend([0.5 + 4.0, 0.5 - 4.0]);
        let t = NormalityThresholds::default();
        let before = screen_normality(&panel(&v), &t).unwrap();
        let cubed: Vec<f64> = v.iter().map(|x| x.powi(3)).collect();
        let after = screen_normality(&panel(&cubed), &t).unwrap();
        assert!(before.approx_normal && before.skewness.abs() < 1e-9);
        assert!(!after.approx_normal, "cubed skewness {}", after.skewness);
    }
}
