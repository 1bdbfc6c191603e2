use std::collections::HashMap;

use hitsignal::ingest::{build_panel, builtin_definitions, Field, MetricPanel, PanelRecord, RawSeasonRow};
use proptest::prelude::*;

fn records(opps: &[u32]) -> Vec<PanelRecord> {
    opps.iter()
        .enumerate()
        .map(|(i, &n)| PanelRecord {
            player_id: format!("p{}", i % 7),
            season: 2000 + (i / 7) as i32,
            value: i as f64 * 0.01,
            opportunity: n as f64,
        })
        .collect()
}

proptest! {
    // With w = mean(n) / n the reciprocals average to one.
    #[test]
    fn reciprocal_weights_average_to_one(opps in prop::collection::vec(1u32..800, 1..60)) {
        let panel = MetricPanel::from_records("m", records(&opps)).unwrap();
        let s: f64 = panel.observations().iter().map(|o| 1.0 / o.weight).sum();
        prop_assert!((s / panel.len() as f64 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn weights_inverse_to_opportunity(opps in prop::collection::vec(1u32..800, 2..60)) {
        let panel = MetricPanel::from_records("m", records(&opps)).unwrap();
        let nbar = opps.iter().map(|&n| n as f64).sum::<f64>() / opps.len() as f64;
        for o in panel.observations() {
            prop_assert!((o.weight * o.opportunity - nbar).abs() < 1e-9 * nbar);
        }
    }

    #[test]
    fn panel_is_independent_of_record_order(opps in prop::collection::vec(1u32..800, 2..40), seed in any::<u64>()) {
        let recs = records(&opps);
        let mut shuffled = recs.clone();
        let k = (seed as usize) % shuffled.len();
        shuffled.rotate_left(k);
        shuffled.reverse();
        let a = MetricPanel::from_records("m", recs).unwrap();
        let b = MetricPanel::from_records("m", shuffled).unwrap();
        prop_assert_eq!(a.content_hash(), b.content_hash());
        prop_assert_eq!(a, b);
    }

    // value x denominator reproduces the integer numerator for every recipe metric.
    #[test]
    fn recipes_reproduce_numerators(counts in prop::collection::vec(1u64..400, 26)) {
        let mut row = RawSeasonRow::new("x", 2005);
        let mut known: HashMap<Field, f64> = HashMap::new();
        for (f, &c) in Field::COLUMNS.iter().zip(&counts) {
            // Keep SH below PA so PA_STAR stays positive.
            let c = if *f == Field::Pa { c + 400 } else { c };
            row.set(*f, c);
            known.insert(*f, c as f64);
        }
        known.insert(Field::PaStar, known[&Field::Pa] - known[&Field::Sh]);
        let rows = vec![row];
        for def in builtin_definitions() {
            if def.passthrough.is_some() || !def.plus.is_empty() {
                continue;
            }
            let num: f64 = def.numerator.iter().map(|t| t.coef * known[&t.field]).sum();
            let den: f64 = if def.denominator.is_empty() {
                1.0
            } else {
                def.denominator.iter().map(|t| t.coef * known[&t.field]).sum()
            };
            if den == 0.0 || num < 0.0 {
                continue;
            }
            let panel = build_panel(&rows, &def).unwrap();
            let y = panel.observations()[0].value;
            prop_assert!((y * den - num).abs() <= 1e-12 * num.abs().max(1.0), "{}: {} vs {}", def.name, y * den, num);
        }
    }
}

#[test]
fn fifty_builtin_metrics() {
    let defs = builtin_definitions();
    assert_eq!(defs.len(), 50);
    assert_eq!(defs.iter().filter(|d| d.available_from == Some(2002)).count(), 10);
}

#[test]
fn build_panel_is_deterministic() {
    let rows: Vec<RawSeasonRow> = (0..20)
        .map(|i| {
            RawSeasonRow::new(format!("p{}", i % 5), 2000 + i / 5)
                .with(Field::Ab, 100 + i as u64 * 7)
                .with(Field::H, 30 + i as u64)
                .with(Field::Pa, 120 + i as u64 * 7)
        })
        .collect();
    let defs = builtin_definitions();
    let avg = defs.iter().find(|d| d.name == "AVG").unwrap();
    let a = build_panel(&rows, avg).unwrap();
    let b = build_panel(&rows, avg).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.len(), 20);
}
