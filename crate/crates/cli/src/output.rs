use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use gbmflow_core::{GridSpec, ModelParams};
use serde::{Deserialize, Serialize};

use crate::error::CliResult;

/// Column-oriented numeric table written as CSV.
pub struct Table {
    header: Vec<String>,
    columns: Vec<Vec<f64>>,
}

impl Table {
    pub fn new() -> Self {
        Self { header: Vec::new(), columns: Vec::new() }
    }

    pub fn column(mut self, name: &str, values: Vec<f64>) -> Self {
        debug_assert!(self.columns.first().map_or(true, |c| c.len() == values.len()));
        self.header.push(name.to_owned());
        self.columns.push(values);
        self
    }

    fn rows(&self) -> usize {
        self.columns.first().map_or(0, Vec::len)
    }

    pub fn to_csv(&self) -> CliResult<Vec<u8>> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        w.write_record(&self.header)?;
        for i in 0..self.rows() {
            w.write_record(self.columns.iter().map(|c| fmt_f64(c[i])))?;
        }
        Ok(w.into_inner().map_err(|e| e.into_error())?)
    }
}

/// Round-trippable 17-significant-digit representation.
pub fn fmt_f64(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        v.to_string()
    }
}

/// Everything needed to reproduce one output file.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    /// Arguments after the program name; `gbmflow replay` re-parses these.
    pub argv: Vec<String>,
    pub params: Option<ModelParams>,
    /// Command-specific scalars such as `x_target`, `alpha` or `r`.
    pub extra: BTreeMap<String, f64>,
    pub seed: Option<u64>,
    pub n_paths: Option<usize>,
    pub grid: Option<GridSpec>,
    pub outputs: Vec<PathBuf>,
    pub tool_version: String,
    pub timestamp: String,
}

impl RunManifest {
    pub fn new(command: &str, argv: &[String]) -> Self {
        Self {
            command: command.to_owned(),
            argv: argv.to_vec(),
            params: None,
            extra: BTreeMap::new(),
            seed: None,
            n_paths: None,
            grid: None,
            outputs: Vec::new(),
            tool_version: env!("CARGO_PKG_VERSION").to_owned(),
            timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true),
        }
    }

    pub fn params(mut self, p: &ModelParams) -> Self {
        self.params = Some(*p);
        self
    }

    pub fn extra(mut self, key: &str, value: f64) -> Self {
        self.extra.insert(key.to_owned(), value);
        self
    }

    pub fn grid(mut self, g: GridSpec) -> Self {
        self.grid = Some(g);
        self
    }

    pub fn sampling(mut self, seed: u64, n_paths: usize) -> Self {
        self.seed = Some(seed);
        self.n_paths = Some(n_paths);
        self
    }
}

pub fn manifest_path(out: &Path) -> PathBuf {
    sibling(out, "manifest.json")
}

pub fn summary_path(out: &Path) -> PathBuf {
    sibling(out, "summary.json")
}

fn sibling(out: &Path, suffix: &str) -> PathBuf {
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    out.with_file_name(format!("{stem}.{suffix}"))
}

/// Writes via a temporary file in the destination directory and renames it
/// into place, so readers never observe a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> CliResult<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    write_atomic(path, &bytes)
}

/// Writes the CSV, an optional JSON summary, and the manifest beside them.
pub fn emit(out: &Path, table: &Table, summary: Option<serde_json::Value>, mut manifest: RunManifest) -> CliResult<()> {
    write_atomic(out, &table.to_csv()?)?;
    manifest.outputs.push(out.to_path_buf());
    if let Some(s) = summary {
        let path = summary_path(out);
        write_json(&path, &s)?;
        manifest.outputs.push(path);
    }
    write_json(&manifest_path(out), &manifest)?;
    eprintln!("wrote {}", out.display());
    Ok(())
}
