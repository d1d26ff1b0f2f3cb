//! Flat-file writers. Every file starts with the resolved configuration and
//! the hash of the input config, so a result can be traced to its inputs.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

/// Hex SHA-256 of `bytes` framed as a git blob object (`blob <len>\0...`).
pub fn blob_hash(bytes: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(format!("blob {}\0", bytes.len()).as_bytes());
    h.update(bytes);
    h.finalize().iter().fold(String::with_capacity(64), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

/// Provenance shared by all outputs of one invocation.
pub struct Header {
    pub command: &'static str,
    /// Single-line JSON of the config after overrides.
    pub config: String,
    pub input_hash: String,
}

impl Header {
    fn comment_lines(&self, prefix: &str) -> String {
        format!(
            "{prefix} grc {}\n{prefix} config: {}\n{prefix} input-sha256: {}\n",
            self.command, self.config, self.input_hash
        )
    }
}

/// 17 significant digits, round-trips every `f64`.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

pub enum Cell {
    Num(f64),
    Int(usize),
    Text(String),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Num(x) => num(*x),
            Cell::Int(i) => i.to_string(),
            Cell::Text(s) if s.contains([',', '"', '\n']) => format!("\"{}\"", s.replace('"', "\"\"")),
            Cell::Text(s) => s.clone(),
        }
    }
}

pub struct Writer {
    dir: PathBuf,
    header: Header,
}

impl Writer {
    pub fn new(dir: &Path, header: Header) -> std::io::Result<Self> {
        fs::create_dir_all(dir)?;
        Ok(Self { dir: dir.to_path_buf(), header })
    }

    fn write(&self, name: &str, body: &str) -> Result<PathBuf, String> {
        let path = self.dir.join(name);
        fs::write(&path, body).map_err(|e| format!("{}: {e}", path.display()))?;
        log::info!("wrote {}", path.display());
        Ok(path)
    }

    pub fn csv(&self, name: &str, columns: &[&str], rows: &[Vec<Cell>]) -> Result<PathBuf, String> {
        let mut out = self.header.comment_lines("#");
        out.push_str(&columns.join(","));
        out.push('\n');
        for row in rows {
            debug_assert_eq!(row.len(), columns.len());
            let cells: Vec<String> = row.iter().map(Cell::render).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        self.write(name, &out)
    }

    /// JSON has no comments, so provenance goes into top-level fields.
    pub fn json<T: Serialize>(&self, name: &str, results: &T) -> Result<PathBuf, String> {
        let config: serde_json::Value = serde_json::from_str(&self.header.config).map_err(|e| e.to_string())?;
        let doc = serde_json::json!({
            "command": self.header.command,
            "config": config,
            "input_sha256": self.header.input_hash,
            "results": results,
        });
        let mut text = serde_json::to_string_pretty(&doc).map_err(|e| e.to_string())?;
        text.push('\n');
        self.write(name, &text)
    }

    pub fn svg(&self, name: &str, body: &str) -> Result<PathBuf, String> {
        let comment = self.header.comment_lines("").replace("--", "- -");
        let text = body.replacen('\n', &format!("\n<!--\n{comment}-->\n"), 1);
        self.write(name, &text)
    }
}
