//! Experiment driver for the face-rotation exclusion process.

pub mod experiments;
pub mod output;
pub mod registry;
pub mod spec;
