//! HTTP analysis service and command-line front end.
//!
//! `POST /api/analyze` returns the same [`api::AnalyzeResponse`] document the
//! CLI writes with `score --json`; `GET /api/models` lists the registered
//! detection models.

pub mod api;
pub mod cli;
pub mod registry;
pub mod server;

pub use api::{analyze, AnalyzeRequest, AnalyzeResponse, SCHEMA_VERSION};
pub use registry::{ModelEntry, ModelRegistry};
pub use server::{router, AppState};
