//! File formats, benchmark generation and conflict-quality reporting.

pub mod bench;
pub mod property;
pub mod report;
pub mod sketch;

pub use bench::generate_benchmark;
pub use property::{parse_property, parse_spec, ParsedProperty};
pub use report::{ce_quality_report, CeReport, ReportMode};
pub use sketch::{parse_sketch, serialize_sketch, FORMAT_TAG};
