//! Experiment tooling around the `aoselm` learner: configuration, named
//! benchmark scenarios, the stream driver, report emission and model files.

pub mod bench;
pub mod config;
pub mod model_io;
pub mod report;
pub mod runner;
pub mod scenario;
