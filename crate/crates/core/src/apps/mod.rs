//! Presentation files, built-in operads and report generation.

pub mod algebra;
pub mod builtins;
pub mod parse;
pub mod pbw;
pub mod report;
