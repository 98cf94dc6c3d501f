use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::sim::config::SystemConfig;

/// One plot-ready aggregate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    /// `ul_se`, `dl_se`, `ds`, `ipr`, `iop`, `ee`, or `varpi`.
    pub metric: String,
    /// `mr`, `zf`, `mmse`, or empty when not applicable.
    pub scheme: String,
    /// `nr`, `rps`, or `mo`.
    pub mode: String,
    /// `M` or `reuse`.
    pub axis: String,
    pub x: f64,
    /// `all`, `closest`, `farthest`, or `pair`.
    pub group: String,
    /// `grid` (snapped RIS sites) or `raw`.
    pub variant: String,
    pub rician_db: f64,
    pub value: f64,
    /// Monte Carlo trials behind the value.
    pub count: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultMeta {
    pub preset: String,
    pub config_hash: String,
    pub seed: u64,
    pub trials: usize,
    pub runtime_s: f64,
    pub config: SystemConfig,
}

/// Per-UE UL SE of every trial for one (point, mode, scheme), trial-major.
#[derive(Clone, Debug, PartialEq)]
pub struct UlSamples {
    pub x: f64,
    pub mode: String,
    pub scheme: String,
    pub ues: usize,
    /// Association group of every UE (0 for `K_0`).
    pub groups: Vec<usize>,
    pub values: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentResult {
    pub meta: ResultMeta,
    pub rows: Vec<ResultRow>,
    pub ul_samples: Vec<UlSamples>,
}

impl ExperimentResult {
    pub fn empty(preset: &str, config: &SystemConfig) -> Self {
        Self {
            meta: ResultMeta {
                preset: preset.to_owned(),
                config_hash: format!("{:016x}", config.hash()),
                seed: config.seed,
                trials: config.trials,
                runtime_s: 0.0,
                config: config.clone(),
            },
            rows: Vec::new(),
            ul_samples: Vec::new(),
        }
    }

    /// First row matching every given field.
    pub fn find(
        &self,
        metric: &str,
        scheme: &str,
        mode: &str,
        x: f64,
        group: &str,
    ) -> Option<&ResultRow> {
        self.rows.iter().find(|r| {
            r.metric == metric && r.scheme == scheme && r.mode == mode && r.x == x && r.group == group
        })
    }

    pub fn value(&self, metric: &str, scheme: &str, mode: &str, x: f64, group: &str) -> Option<f64> {
        self.find(metric, scheme, mode, x, group).map(|r| r.value)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Csv,
    JsonLines,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "jsonl" | "json-lines" => Ok(Format::JsonLines),
            _ => Err(invalid(format!("unknown format {s:?} (csv or jsonl)"))),
        }
    }
}

impl Format {
    /// By file extension; CSV unless `.jsonl` / `.ndjson`.
    pub fn for_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some("jsonl" | "ndjson") => Format::JsonLines,
            _ => Format::Csv,
        }
    }
}

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn csv_err(path: &Path, e: csv::Error) -> Error {
    let source = match e.into_kind() {
        csv::ErrorKind::Io(io) => io,
        other => std::io::Error::new(std::io::ErrorKind::InvalidData, format!("{other:?}")),
    };
    Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Writes CSV rows to any writer; `#` lines carry the metadata and resolved
/// configuration.
pub fn write_csv<W: Write>(result: &ExperimentResult, mut out: W) -> std::io::Result<()> {
    let m = &result.meta;
    writeln!(out, "# preset = {}", m.preset)?;
    writeln!(out, "# config_hash = {}", m.config_hash)?;
    writeln!(out, "# runtime_s = {}", m.runtime_s)?;
    for line in m.config.to_toml_string().lines() {
        writeln!(out, "# {line}")?;
    }
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record([
        "metric", "scheme", "mode", "axis", "x", "group", "variant", "rician_db", "value", "count",
    ])
    .map_err(std::io::Error::other)?;
    for r in &result.rows {
        w.serialize(r).map_err(std::io::Error::other)?;
    }
    w.flush()
}

/// First line `{"meta": ...}`, then one row object per line.
pub fn write_jsonl<W: Write>(result: &ExperimentResult, mut out: W) -> std::io::Result<()> {
    serde_json::to_writer(&mut out, &serde_json::json!({ "meta": result.meta }))?;
    writeln!(out)?;
    for r in &result.rows {
        serde_json::to_writer(&mut out, r)?;
        writeln!(out)?;
    }
    out.flush()
}

pub fn emit_results(result: &ExperimentResult, format: Format, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(io_err(path))?;
    let w = BufWriter::new(file);
    match format {
        Format::Csv => write_csv(result, w),
        Format::JsonLines => write_jsonl(result, w),
    }
    .map_err(io_err(path))
}

pub fn read_csv_rows(path: &Path) -> Result<Vec<ResultRow>> {
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_path(path)
        .map_err(|e| csv_err(path, e))?;
    rdr.deserialize()
        .map(|r| r.map_err(|e| csv_err(path, e)))
        .collect()
}

pub fn read_jsonl_rows(path: &Path) -> Result<Vec<ResultRow>> {
    let file = File::open(path).map_err(io_err(path))?;
    let mut rows = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(io_err(path))?;
        if i == 0 || line.trim().is_empty() {
            continue;
        }
        let row = serde_json::from_str(&line).map_err(|e| Error::Io {
            path: path.to_path_buf(),
            source: e.into(),
        })?;
        rows.push(row);
    }
    Ok(rows)
}
