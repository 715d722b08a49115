//! IO, file formats, LLM transport, the review service and the command
//! line around `mhscreen-core`.

pub mod artifacts;
pub mod cli;
pub mod config;
pub mod io;
pub mod llm;
pub mod manifest;
pub mod predictions;
pub mod reports;
pub mod service;
pub mod store;
