use std::fs;
use std::path::Path;

use lundberg_core::{Distribution, DistributionSpec};

use crate::error::CliError;

pub fn parse_spec(text: &str, path: &Path) -> Result<DistributionSpec, CliError> {
    serde_json::from_str(text).map_err(|e| CliError::Parse { path: path.to_path_buf(), message: e.to_string() })
}

/// Reads and validates a distribution spec file.
pub fn load_distribution(path: &Path) -> Result<Distribution, CliError> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })?;
    Ok(Distribution::validate(parse_spec(&text, path)?)?)
}
