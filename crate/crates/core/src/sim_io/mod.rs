//! Reading simulation bundles and persisting graphs, paths and reports.

mod bundle;
mod dot;
mod graph_file;

use std::io::Write;
use std::path::{Path, PathBuf};

use thiserror::Error;

pub use bundle::{load_bundle, parse_bundle, save_bundle, to_json as bundle_to_json, EnergyCurve, PartRecord, Pid, SimulationBundle, Units};
pub use dot::{export_dot, to_dot, DotOptions};
pub use graph_file::{graph_from_json, graph_to_json, load_graph, save_graph, GRAPH_FORMAT_VERSION};

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: malformed JSON: {source}")]
    Parse {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
    #[error("validation failed{}: field `{field}`: {message}", pid.map(|p| format!(" for pid {p}")).unwrap_or_default())]
    Validation { pid: Option<Pid>, field: String, message: String },
    #[error("unsupported graph format version {0:?}")]
    SchemaVersion(String),
    #[error("highlighted path is not in the graph: {0}")]
    PathNotInGraph(String),
}

impl Error {
    pub(crate) fn validation(pid: Option<Pid>, field: &str, message: impl Into<String>) -> Self {
        Error::Validation { pid, field: field.to_string(), message: message.into() }
    }

    pub fn is_validation(&self) -> bool {
        matches!(self, Error::Validation { .. } | Error::Parse { .. } | Error::SchemaVersion(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn read_to_string(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| Error::Io { path: path.to_path_buf(), source })
}

/// Writes `bytes` to a temp file next to `path`, then renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let io_err = |source| Error::Io { path: path.to_path_buf(), source };
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(dir).map_err(io_err)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io_err)?;
    tmp.write_all(bytes).map_err(io_err)?;
    tmp.flush().map_err(io_err)?;
    tmp.persist(path).map_err(|e| io_err(e.error))?;
    Ok(())
}

/// Pretty JSON with a trailing newline, written atomically.
pub fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|source| Error::Parse { path: path.to_path_buf(), source })?;
    text.push('\n');
    write_atomic(path, text.as_bytes())
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = read_to_string(path)?;
    serde_json::from_str(&text).map_err(|source| Error::Parse { path: path.to_path_buf(), source })
}
