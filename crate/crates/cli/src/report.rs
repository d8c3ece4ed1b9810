use std::path::Path;

use anyhow::Result;
use serde::Serialize;
use sha2::{Digest, Sha256};
use vsl_core::search::VersionSpaceReport;
use vsl_core::{Dataset, LearnerConfig};

/// Version of the report layout; bump on any incompatible change.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Serialize)]
pub struct InputInfo {
    pub path: String,
    /// SHA-256 of the raw dataset file, lowercase hex.
    pub sha256: String,
    pub n: usize,
    pub m_p: usize,
    pub m_n: usize,
}

/// The JSON document written by `vsl learn`.
#[derive(Debug, Serialize)]
pub struct RunReportFile {
    pub schema_version: u32,
    pub input: InputInfo,
    pub config: LearnerConfig,
    #[serde(flatten)]
    pub report: VersionSpaceReport,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

impl RunReportFile {
    pub fn new(path: &Path, bytes: &[u8], data: &Dataset, config: &LearnerConfig, report: VersionSpaceReport) -> Self {
        RunReportFile {
            schema_version: SCHEMA_VERSION,
            input: InputInfo {
                path: path.display().to_string(),
                sha256: sha256_hex(bytes),
                n: data.n(),
                m_p: data.m_p(),
                m_n: data.m_n(),
            },
            config: config.clone(),
            report,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }
}
