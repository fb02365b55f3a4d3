//! Output directories: every file written is recorded with its checksum in
//! `run_config.json` alongside the exact command line configuration.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::Cli;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] confinement_core::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        use confinement_core::Error as E;
        match self {
            CliError::Config(_) => 2,
            CliError::Core(E::InvalidParams(_) | E::InvalidResolution(_) | E::RegimeMismatch(_) | E::MassTooLarge { .. }) => 2,
            CliError::Core(E::NotConverged { .. } | E::EigsNotConverged { .. }) => 3,
            _ => 1,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

#[derive(Debug, Serialize)]
pub struct OutputFile {
    pub path: String,
    pub bytes: u64,
    pub sha256: String,
}

#[derive(Debug, Serialize)]
struct RunConfig<'a> {
    schema_version: u32,
    tool_version: &'static str,
    config: &'a Cli,
    outputs: &'a [OutputFile],
}

/// Collects the files of one run.
pub struct OutputDir {
    root: PathBuf,
    files: Vec<OutputFile>,
}

impl OutputDir {
    pub fn create(root: &Path) -> CliResult<OutputDir> {
        fs::create_dir_all(root)?;
        Ok(OutputDir { root: root.to_path_buf(), files: Vec::new() })
    }

    pub fn path(&self) -> &Path {
        &self.root
    }

    /// Record a file already written under the root.
    pub fn record(&mut self, name: &str) -> CliResult<()> {
        let bytes = fs::read(self.root.join(name))?;
        self.files.push(OutputFile { path: name.to_string(), bytes: bytes.len() as u64, sha256: hex::encode(Sha256::digest(&bytes)) });
        Ok(())
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> CliResult<()> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        fs::write(self.root.join(name), text)?;
        self.record(name)
    }

    /// Write `run_config.json` listing everything recorded so far.
    pub fn finish(self, cli: &Cli) -> CliResult<()> {
        let cfg = RunConfig { schema_version: SCHEMA_VERSION, tool_version: env!("CARGO_PKG_VERSION"), config: cli, outputs: &self.files };
        let mut f = fs::File::create(self.root.join("run_config.json"))?;
        serde_json::to_writer_pretty(&mut f, &cfg)?;
        writeln!(f)?;
        Ok(())
    }
}
