//! Raw season rows, metric recipes, per-metric panels and the normality screen.

mod metrics;
mod normality;
mod panel;
mod raw;

pub use metrics::{
    builtin_definitions, definition, load_definitions, merge_definitions, MetricDefinition, Ratio,
    Term, WeightRecipe,
};
pub use normality::{screen_normality, NormalityFlag, NormalityThresholds};
pub use panel::{
    build_panel, metric_file_stem, metric_from_file_stem, read_panel_csv, write_panel_csv,
    DropCounts, MetricPanel, Observation, PanelRecord,
};
pub use raw::{parse_raw, parse_raw_path, Field, Precomputed, RawSeasonRow};
