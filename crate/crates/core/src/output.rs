//! Output files.
//!
//! Every CSV starts with `#`-prefixed `key = value` lines carrying the run
//! metadata, followed by a header row and the data. Floats are written with
//! 17 significant digits so they read back bit-exactly. The run manifest is
//! written last and lists every file with its SHA-256 digest; a directory
//! without a manifest holds an interrupted run.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub const MANIFEST_NAME: &str = "manifest.json";

/// One CSV field.
#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Float(f64),
    Int(i64),
    Text(String),
    Empty,
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Float(x)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<u32> for Cell {
    fn from(x: u32) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<&str> for Cell {
    fn from(x: &str) -> Self {
        Cell::Text(x.to_string())
    }
}

impl From<Option<f64>> for Cell {
    fn from(x: Option<f64>) -> Self {
        x.map_or(Cell::Empty, Cell::Float)
    }
}

/// 17 significant digits in scientific notation.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Float(x) => format_float(*x),
            Cell::Int(i) => i.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }
}

/// Renders a CSV document with a metadata block.
pub fn render_csv(meta: &[(String, String)], header: &[&str], rows: &[Vec<Cell>]) -> Result<String> {
    let mut out = String::new();
    for (k, v) in meta {
        out.push_str(&format!("# {k} = {v}\n"));
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    let fail = |e: csv::Error| Error::invalid(format!("csv encoding failed: {e}"));
    w.write_record(header).map_err(fail)?;
    for row in rows {
        if row.len() != header.len() {
            return Err(Error::invalid(format!(
                "csv row has {} fields, header has {}",
                row.len(),
                header.len()
            )));
        }
        w.write_record(row.iter().map(Cell::render)).map_err(fail)?;
    }
    let body = w
        .into_inner()
        .map_err(|e| Error::invalid(format!("csv encoding failed: {e}")))?;
    out.push_str(&String::from_utf8(body).expect("csv output is utf-8"));
    Ok(out)
}

/// Data rows of a CSV document: everything after the `#` block.
pub fn csv_body(text: &str) -> &str {
    let mut rest = text;
    while rest.starts_with('#') {
        rest = rest.split_once('\n').map_or("", |(_, r)| r);
    }
    rest
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileDigest {
    pub path: String,
    pub bytes: u64,
    pub sha256: String,
}

/// Seed record for one independent stream.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeedRecord {
    pub label: String,
    pub master_seed: u64,
    pub stream: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub software: String,
    pub version: String,
    pub kind: String,
    /// The resolved experiment file.
    pub config: String,
    pub generator: String,
    pub seeds: Vec<SeedRecord>,
    pub started: String,
    pub finished: String,
    pub files: Vec<FileDigest>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Writer for one run directory; remembers what it wrote for the manifest.
#[derive(Debug)]
pub struct OutputDir {
    root: PathBuf,
    files: Vec<FileDigest>,
}

impl OutputDir {
    /// Creates the directory and removes a stale manifest from an earlier run.
    pub fn create(root: impl Into<PathBuf>) -> Result<Self> {
        let root = root.into();
        fs::create_dir_all(&root).map_err(|e| Error::io(&root, e))?;
        let manifest = root.join(MANIFEST_NAME);
        match fs::remove_file(&manifest) {
            Ok(()) => {}
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => {}
            Err(e) => return Err(Error::io(manifest, e)),
        }
        Ok(Self {
            root,
            files: Vec::new(),
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn files(&self) -> &[FileDigest] {
        &self.files
    }

    pub fn write_bytes(&mut self, name: &str, bytes: &[u8]) -> Result<PathBuf> {
        if name == MANIFEST_NAME {
            return Err(Error::invalid("the manifest is written by finish()"));
        }
        let path = self.root.join(name);
        fs::write(&path, bytes).map_err(|e| Error::io(&path, e))?;
        self.files.retain(|f| f.path != name);
        self.files.push(FileDigest {
            path: name.to_string(),
            bytes: bytes.len() as u64,
            sha256: sha256_hex(bytes),
        });
        Ok(path)
    }

    pub fn write_csv(
        &mut self,
        name: &str,
        meta: &[(String, String)],
        header: &[&str],
        rows: &[Vec<Cell>],
    ) -> Result<PathBuf> {
        let text = render_csv(meta, header, rows)?;
        self.write_bytes(name, text.as_bytes())
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<PathBuf> {
        let mut text = serde_json::to_string_pretty(value)
            .map_err(|e| Error::invalid(format!("json encoding failed: {e}")))?;
        text.push('\n');
        self.write_bytes(name, text.as_bytes())
    }

    /// Writes the manifest, filling in the file list. Must be the last write.
    pub fn finish(self, mut manifest: RunManifest) -> Result<PathBuf> {
        manifest.files = self.files;
        let path = self.root.join(MANIFEST_NAME);
        let text = serde_json::to_string_pretty(&manifest)
            .map_err(|e| Error::invalid(format!("json encoding failed: {e}")))?;
        fs::write(&path, text + "\n").map_err(|e| Error::io(&path, e))?;
        Ok(path)
    }
}

/// Re-hashes every file listed in a manifest and reports the first mismatch.
pub fn verify_manifest(root: &Path) -> Result<RunManifest> {
    let path = root.join(MANIFEST_NAME);
    let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    let manifest: RunManifest = serde_json::from_str(&text)
        .map_err(|e| Error::invalid(format!("unreadable manifest: {e}")))?;
    for f in &manifest.files {
        let p = root.join(&f.path);
        let bytes = fs::read(&p).map_err(|e| Error::io(&p, e))?;
        if sha256_hex(&bytes) != f.sha256 {
            return Err(Error::invalid(format!("digest mismatch for {}", f.path)));
        }
    }
    Ok(manifest)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip_exactly() {
        for x in [0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, f64::MIN_POSITIVE, 0.0] {
            assert_eq!(format_float(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(format_float(0.5), "5.0000000000000000e-1");
    }

    #[test]
    fn csv_has_metadata_block_then_header() {
        let meta = vec![("seed".to_string(), "7".to_string())];
        let rows = vec![vec![Cell::from(1usize), Cell::from(0.5), Cell::Empty]];
        let text = render_csv(&meta, &["n", "x", "y"], &rows).unwrap();
        assert_eq!(text, "# seed = 7\nn,x,y\n1,5.0000000000000000e-1,\n");
        assert_eq!(csv_body(&text), "n,x,y\n1,5.0000000000000000e-1,\n");
    }

    #[test]
    fn ragged_rows_are_rejected() {
        let rows = vec![vec![Cell::from(1usize)]];
        assert!(render_csv(&[], &["a", "b"], &rows).is_err());
    }

    #[test]
    fn sha256_of_empty_input() {
        assert_eq!(
            sha256_hex(b""),
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"
        );
    }

    #[test]
    fn manifest_lists_digests_of_written_files() {
        let dir = tempfile::tempdir().unwrap();
        let mut out = OutputDir::create(dir.path().join("run")).unwrap();
        out.write_bytes("a.txt", b"abc").unwrap();
        out.write_json("b.json", &vec![1, 2]).unwrap();
        let root = out.root().to_path_buf();
        assert!(!root.join(MANIFEST_NAME).exists());
        out.finish(RunManifest {
            software: "x".into(),
            version: "0".into(),
            kind: "ness".into(),
            config: String::new(),
            generator: String::new(),
            seeds: vec![],
            started: String::new(),
            finished: String::new(),
            files: vec![],
        })
        .unwrap();
        let m = verify_manifest(&root).unwrap();
        assert_eq!(m.files.len(), 2);
        assert_eq!(
            m.files[0].sha256,
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
        std::fs::write(root.join("a.txt"), b"abd").unwrap();
        assert!(verify_manifest(&root).is_err());
    }

    #[test]
    fn reopening_a_directory_drops_the_old_manifest() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join(MANIFEST_NAME), "{}").unwrap();
        OutputDir::create(dir.path()).unwrap();
        assert!(!dir.path().join(MANIFEST_NAME).exists());
    }

    #[test]
    fn unwritable_target_is_an_io_error() {
        let dir = tempfile::tempdir().unwrap();
        let file = dir.path().join("plain");
        std::fs::write(&file, "x").unwrap();
        let err = OutputDir::create(file.join("sub")).unwrap_err();
        assert_eq!(err.exit_code(), 3);
    }
}
