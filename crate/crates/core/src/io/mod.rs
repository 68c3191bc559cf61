//! Text formats, DOT export and run reports.

pub mod dot;
pub mod format;
pub mod report;
