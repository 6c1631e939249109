//! Plain-text file formats: scene configs, map files, calibration reports,
//! and ground-truth sidecars. Everything is line-oriented UTF-8 with `\n`
//! newlines and `.` decimals, so files diff cleanly and byte-identical
//! output for identical inputs is testable.

mod kv;
mod map_file;
mod report;
mod scene_file;

pub use kv::KvDoc;
pub use map_file::{read_map, write_complex_map, write_plot_data, write_real_map, MapData};
pub use report::{
    read_report, read_truth, write_report, write_trace, write_truth, ReportSummary, TruthRecord,
};
pub use scene_file::{parse_inline_gammas, read_gammas, read_scene, write_gammas, write_scene};
