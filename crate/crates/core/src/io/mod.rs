//! Config parsing, trace interchange formats, and CSV report emission.

pub mod bonnmotion;
pub mod config_file;
pub mod csv;
pub mod ns2;

pub use bonnmotion::{export_bonnmotion, import_bonnmotion, ImportGeometry};
pub use config_file::{parse_config, FileConfig};
pub use csv::{emit_csv, CsvRecord, MetricCsvRow, PerfCsvRow, SeparationCsvRow};
pub use ns2::{export_ns2_movements, import_ns2_movements};
