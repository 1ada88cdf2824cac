//! Tables, atomic file output, input discovery and run manifests.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::{Format, RunConfig};
use crate::UsageError;
use dyad::Session;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Empty,
    Text(String),
    Int(i64),
    Float(f64),
    Bool(bool),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Empty => String::new(),
            Cell::Text(s) => s.clone(),
            Cell::Int(v) => v.to_string(),
            Cell::Float(v) => v.to_string(),
            Cell::Bool(v) => v.to_string(),
        }
    }

    fn json(&self) -> serde_json::Value {
        match self {
            Cell::Empty => serde_json::Value::Null,
            Cell::Text(s) => s.clone().into(),
            Cell::Int(v) => (*v).into(),
            Cell::Float(v) => {
                serde_json::Number::from_f64(*v).map_or(serde_json::Value::Null, Into::into)
            }
            Cell::Bool(v) => (*v).into(),
        }
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<u32> for Cell {
    fn from(v: u32) -> Self {
        Cell::Int(i64::from(v))
    }
}

impl From<u8> for Cell {
    fn from(v: u8) -> Self {
        Cell::Int(i64::from(v))
    }
}

impl<T: Into<Cell>> From<Option<T>> for Cell {
    fn from(v: Option<T>) -> Self {
        v.map_or(Cell::Empty, Into::into)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn render(&self, format: Format) -> Result<Vec<u8>> {
        match format {
            Format::Csv => {
                let mut w = csv::Writer::from_writer(Vec::new());
                w.write_record(&self.columns)?;
                for row in &self.rows {
                    w.write_record(row.iter().map(Cell::render))?;
                }
                Ok(w.into_inner().map_err(|e| anyhow::anyhow!("{e}"))?)
            }
            Format::Json => {
                let records: Vec<serde_json::Value> = self
                    .rows
                    .iter()
                    .map(|row| {
                        let obj: serde_json::Map<String, serde_json::Value> = self
                            .columns
                            .iter()
                            .cloned()
                            .zip(row.iter().map(Cell::json))
                            .collect();
                        serde_json::Value::Object(obj)
                    })
                    .collect();
                let mut bytes = serde_json::to_vec_pretty(&records)?;
                bytes.push(b'\n');
                Ok(bytes)
            }
        }
    }
}

/// A table read back from disk with every cell as text; JSON nulls become
/// empty strings.
#[derive(Debug, Clone, PartialEq)]
pub struct TextTable {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl TextTable {
    pub fn read(path: &Path) -> Result<Self> {
        let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
        if path.extension().is_some_and(|e| e == "json") {
            let records: Vec<serde_json::Map<String, serde_json::Value>> =
                serde_json::from_slice(&bytes)
                    .with_context(|| format!("parsing {}", path.display()))?;
            let columns: Vec<String> = records
                .first()
                .map(|r| r.keys().cloned().collect())
                .unwrap_or_default();
            let rows = records
                .iter()
                .map(|r| {
                    columns
                        .iter()
                        .map(|c| match r.get(c) {
                            None | Some(serde_json::Value::Null) => String::new(),
                            Some(serde_json::Value::String(s)) => s.clone(),
                            Some(v) => v.to_string(),
                        })
                        .collect()
                })
                .collect();
            Ok(Self { columns, rows })
        } else {
            let mut reader = csv::Reader::from_reader(bytes.as_slice());
            let columns = reader.headers()?.iter().map(str::to_string).collect();
            let rows = reader
                .records()
                .map(|r| r.map(|r| r.iter().map(str::to_string).collect()))
                .collect::<Result<_, _>>()
                .with_context(|| format!("parsing {}", path.display()))?;
            Ok(Self { columns, rows })
        }
    }

    pub fn column(&self, name: &str) -> Result<usize> {
        self.columns
            .iter()
            .position(|c| c == name)
            .with_context(|| format!("no column `{name}` (have {})", self.columns.join(", ")))
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Writes through a temporary file in the target directory, then renames.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)
        .with_context(|| format!("writing {}", path.display()))?;
    tmp.write_all(bytes)?;
    tmp.persist(path)
        .with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

#[derive(Debug, Serialize)]
struct FileDigest {
    path: String,
    sha256: String,
}

#[derive(Debug, Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    command: &'a str,
    config_hash: String,
    config: BTreeMap<String, String>,
    inputs: Vec<FileDigest>,
    outputs: Vec<FileDigest>,
}

/// Collects the files a command reads and writes and records them in
/// `<out>/<command>.manifest.json`.
pub struct Run<'a> {
    pub cfg: &'a RunConfig,
    command: String,
    inputs: BTreeMap<String, String>,
    outputs: BTreeMap<String, String>,
}

impl<'a> Run<'a> {
    pub fn new(cfg: &'a RunConfig, command: &str) -> Self {
        Self {
            cfg,
            command: command.to_string(),
            inputs: BTreeMap::new(),
            outputs: BTreeMap::new(),
        }
    }

    pub fn record_input(&mut self, path: &Path, bytes: &[u8]) {
        self.inputs
            .insert(path.display().to_string(), sha256_hex(bytes));
    }

    pub fn read_input(&mut self, path: &Path) -> Result<Vec<u8>> {
        let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
        self.record_input(path, &bytes);
        Ok(bytes)
    }

    /// Path relative to the output directory.
    pub fn out_path(&self, relative: &str) -> PathBuf {
        self.cfg.out.join(relative)
    }

    pub fn write(&mut self, relative: &str, bytes: &[u8]) -> Result<()> {
        write_atomic(&self.out_path(relative), bytes)?;
        self.outputs.insert(relative.to_string(), sha256_hex(bytes));
        Ok(())
    }

    /// Records a file already written by a worker.
    pub fn record_output(&mut self, relative: String, digest: String) {
        self.outputs.insert(relative, digest);
    }

    pub fn write_table(&mut self, stem: &str, table: &Table) -> Result<String> {
        let name = format!("{stem}.{}", self.cfg.format.extension());
        self.write(&name, &table.render(self.cfg.format)?)?;
        Ok(name)
    }

    pub fn finish(self) -> Result<()> {
        let config = self
            .cfg
            .canonical()
            .lines()
            .filter_map(|l| l.split_once('='))
            .map(|(k, v)| (k.to_string(), v.to_string()))
            .collect();
        let manifest = Manifest {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            command: &self.command,
            config_hash: self.cfg.hash(),
            config,
            inputs: self
                .inputs
                .into_iter()
                .map(|(path, sha256)| FileDigest { path, sha256 })
                .collect(),
            outputs: self
                .outputs
                .into_iter()
                .map(|(path, sha256)| FileDigest { path, sha256 })
                .collect(),
        };
        let mut bytes = serde_json::to_vec_pretty(&manifest)?;
        bytes.push(b'\n');
        write_atomic(
            &self.cfg.out.join(format!("{}.manifest.json", self.command)),
            &bytes,
        )
    }
}

/// Transcript files named on the command line; directories contribute their
/// `.tsv` and `.json` files in name order.
pub fn discover(inputs: &[PathBuf]) -> Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    for p in inputs {
        if p.is_dir() {
            let mut found: Vec<PathBuf> = fs::read_dir(p)
                .with_context(|| format!("listing {}", p.display()))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|f| f.is_file() && f.extension().is_some_and(|e| e == "tsv" || e == "json"))
                .filter(|f| !f.to_string_lossy().ends_with(".manifest.json"))
                .collect();
            found.sort();
            files.extend(found);
        } else if p.is_file() {
            files.push(p.clone());
        } else {
            return Err(UsageError(format!("input {} does not exist", p.display())).into());
        }
    }
    if files.is_empty() {
        bail!("no transcript files found");
    }
    Ok(files)
}

/// Parses every input, ordered by dyad and session.
pub fn load_sessions(run: &mut Run<'_>, inputs: &[PathBuf]) -> Result<Vec<Session>> {
    let mut sessions = Vec::new();
    for path in discover(inputs)? {
        let bytes = run.read_input(&path)?;
        let text =
            String::from_utf8(bytes).with_context(|| format!("{}: not UTF-8", path.display()))?;
        let session = dyad::corpus::parse_session(&text)
            .with_context(|| format!("stage `ingest`, input {}", path.display()))?;
        sessions.push(session);
    }
    sessions
        .sort_by(|a, b| (a.dyad_id(), a.session_index()).cmp(&(b.dyad_id(), b.session_index())));
    for pair in sessions.windows(2) {
        if (pair[0].dyad_id(), pair[0].session_index())
            == (pair[1].dyad_id(), pair[1].session_index())
        {
            bail!(
                "duplicate session {} #{}",
                pair[0].dyad_id(),
                pair[0].session_index()
            );
        }
    }
    Ok(sessions)
}

/// `id` with every character other than ASCII letters, digits, `-` and `_`
/// replaced by `_`.
pub fn file_safe(id: &str) -> String {
    id.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '-' || c == '_' {
                c
            } else {
                '_'
            }
        })
        .collect()
}

/// File-name stem for a session, `<dyad>_s<index>`.
pub fn session_stem(session: &Session) -> String {
    format!(
        "{}_s{}",
        file_safe(session.dyad_id()),
        session.session_index()
    )
}
