//! On-disk artifacts written and read by the commands.

use std::fs;
use std::path::{Path, PathBuf};

use activeset::dcopf::{bundled, parse_network, CaseFormat, Network};
use activeset::discovery::DiscoveryResult;
use activeset::parametric::{ActiveSetKey, ParametricProgram};
use activeset::policy::EvalReport;
use activeset::sampling::DistributionSpec;
use anyhow::{anyhow, bail, Context, Result};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: u32 = 1;

pub const RESULT_FILE: &str = "result.json";
pub const KEYS_FILE: &str = "keys.json";
pub const SNAPSHOT_FILE: &str = "snapshot.json";
pub const EVAL_JSON: &str = "eval.json";
pub const EVAL_CSV: &str = "eval.csv";

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum FormatArg {
    Matpower,
    Json,
}

impl From<FormatArg> for CaseFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Matpower => CaseFormat::MatpowerSubset,
            FormatArg::Json => CaseFormat::NativeJson,
        }
    }
}

/// A parsed case and the name it is reported under.
#[derive(Debug, Clone)]
pub struct LoadedCase {
    pub name: String,
    pub network: Network,
}

/// Loads a case file. A bare name of a bundled case (`case3`, ...) is
/// accepted when no file of that name exists.
pub fn load_case(path: &Path, format: Option<FormatArg>) -> Result<LoadedCase> {
    let name = path
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("case")
        .to_string();
    if !path.exists() {
        if let Some(network) = path.to_str().and_then(bundled::load) {
            return Ok(LoadedCase { name, network });
        }
        bail!("file not found: {}", path.display());
    }
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let format = format.unwrap_or_else(|| match path.extension().and_then(|e| e.to_str()) {
        Some("json") => FormatArg::Json,
        _ => FormatArg::Matpower,
    });
    let network = parse_network(&text, format.into())
        .map_err(|e| anyhow!("{}: {e}", path.display()))?;
    for w in &network.warnings {
        log::warn!("{}: {w}", path.display());
    }
    Ok(LoadedCase { name, network })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseInfo {
    pub name: String,
    pub fingerprint: u64,
}

impl CaseInfo {
    pub fn new(name: &str, program: &dyn ParametricProgram) -> Self {
        Self {
            name: name.to_string(),
            fingerprint: program.fingerprint(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultFile {
    pub version: u32,
    pub case: CaseInfo,
    pub distribution: DistributionSpec,
    pub result: DiscoveryResult<ActiveSetKey>,
}

/// One entry of the key catalog.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CatalogEntry {
    pub rows: Vec<usize>,
    pub labels: Vec<String>,
    pub count: usize,
    pub frequency: f64,
    pub first_seen: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalFile {
    pub version: u32,
    pub case: CaseInfo,
    pub distribution: DistributionSpec,
    pub k_m: usize,
    pub report: EvalReport,
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

/// Single-line JSON, for bulky machine-only files.
pub fn write_json_compact<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string(value)?;
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    if !path.exists() {
        bail!("file not found: {}", path.display());
    }
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("malformed {}", path.display()))
}

/// `path` itself if it is a file, otherwise `path/name`.
pub fn resolve(path: &Path, name: &str) -> PathBuf {
    if path.is_dir() {
        path.join(name)
    } else {
        path.to_path_buf()
    }
}
