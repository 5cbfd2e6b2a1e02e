//! Problem files, reports and command dispatch.

pub mod commands;
pub mod problem;
pub mod report;
