//! Scenario runner for the polaron-frame master equation.
//!
//! A run is described by a versioned TOML file ([`config::RunConfig`]), executed by
//! [`run`], and leaves CSV tables, SVG plots, a JSON summary and a checksummed
//! `manifest.json` in the output directory.

pub mod config;
pub mod output;
pub mod scenarios;

pub use config::{RunConfig, Scenario};
pub use output::{verify_manifest, Manifest};

use serde_json::json;
use std::fs;

use crate::output::{io_error, write_atomic};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error in `{field}`: {reason}")]
    Config { field: String, reason: String },
    #[error("{module} failed: {message}")]
    Numerics { module: &'static str, message: String },
    #[error("cannot write {path}: {message}")]
    Io { path: String, message: String },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config { .. } => 1,
            CliError::Numerics { .. } | CliError::Io { .. } => 2,
        }
    }

    /// Machine-readable error report.
    pub fn report(&self) -> serde_json::Value {
        let body = match self {
            CliError::Config { field, reason } => json!({"kind": "config", "field": field, "reason": reason}),
            CliError::Numerics { module, message } => json!({"kind": "numerics", "module": module, "message": message}),
            CliError::Io { path, message } => json!({"kind": "io", "path": path, "message": message}),
        };
        json!({"error": body, "exit_code": self.exit_code()})
    }
}

/// Executes the configured scenario and writes its artefacts.
pub fn run(cfg: &RunConfig) -> Result<Manifest, CliError> {
    cfg.validate()?;
    let art = scenarios::execute(cfg)?;
    let dir = &cfg.out;
    fs::create_dir_all(dir).map_err(|e| io_error(dir.display().to_string(), e))?;

    let mut files = Vec::new();
    for t in &art.tables {
        files.push(write_atomic(dir, &t.file, &t.to_csv()?)?);
    }
    for p in &art.plots {
        files.push(write_atomic(dir, &p.file, p.to_svg().as_bytes())?);
    }
    files.push(write_atomic(dir, "config.toml", cfg.to_toml().as_bytes())?);
    let summary = json!({
        "scenario": cfg.scenario.label(),
        "tool_version": env!("CARGO_PKG_VERSION"),
        "config": cfg,
        "results": art.results,
        "warnings": art.warnings,
    });
    let text = serde_json::to_string_pretty(&summary).map_err(|e| io_error("summary.json", e))? + "\n";
    files.push(write_atomic(dir, "summary.json", text.as_bytes())?);

    let manifest = Manifest {
        scenario: cfg.scenario.label().to_string(),
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        files,
    };
    let text = serde_json::to_string_pretty(&manifest).map_err(|e| io_error("manifest.json", e))? + "\n";
    write_atomic(dir, "manifest.json", text.as_bytes())?;
    Ok(manifest)
}
