//! Scenario ingestion, experiment commands and result serialization for the
//! `mecgame` binary.

pub mod commands;
pub mod scenario;
pub mod table;
