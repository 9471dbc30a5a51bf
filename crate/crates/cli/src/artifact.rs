//! Artifact files: `<name>.json` always, `<name>.csv` in csv format.
//!
//! Both begin with the same metadata. In CSV it is a block of `# key: value`
//! comment lines ahead of the header row:
//!
//! ```text
//! # artifact_version: 1
//! # command: run
//! # schema: scaling
//! # seed: 7
//! # spec: {"kind":"nupds_scaling",...}
//! # timestamp: 1760000000
//! n,mean_nupds,stderr_nupds,trials,p_succ
//! ```
//!
//! The timestamp line is the only part that changes between identical runs;
//! with `--no-timestamp` it reads `# timestamp: none`.

use std::io::{self, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

pub const ARTIFACT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Serialize)]
pub struct Metadata {
    pub artifact_version: u32,
    pub command: String,
    pub schema: String,
    pub seed: u64,
    pub spec: serde_json::Value,
    pub timestamp: Option<u64>,
}

/// A fixed-schema CSV table.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub schema: &'static str,
    pub header: &'static [&'static str],
    pub rows: Vec<Vec<String>>,
}

pub fn fmt_f64(x: f64) -> String {
    format!("{x}")
}

pub fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

fn csv_bytes(meta: &Metadata, table: &Table) -> io::Result<Vec<u8>> {
    let mut out = Vec::new();
    writeln!(out, "# artifact_version: {}", meta.artifact_version)?;
    writeln!(out, "# command: {}", meta.command)?;
    writeln!(out, "# schema: {}", meta.schema)?;
    writeln!(out, "# seed: {}", meta.seed)?;
    writeln!(out, "# spec: {}", serde_json::to_string(&meta.spec)?)?;
    match meta.timestamp {
        Some(t) => writeln!(out, "# timestamp: {t}")?,
        None => writeln!(out, "# timestamp: none")?,
    }
    let mut w = csv::Writer::from_writer(out);
    w.write_record(table.header)?;
    for row in &table.rows {
        w.write_record(row)?;
    }
    w.into_inner().map_err(|e| e.into_error())
}

fn json_bytes<R: Serialize>(meta: &Metadata, result: &R) -> io::Result<Vec<u8>> {
    #[derive(Serialize)]
    struct Document<'a, R> {
        metadata: &'a Metadata,
        result: &'a R,
    }
    let mut out = serde_json::to_vec_pretty(&Document { metadata: meta, result })?;
    out.push(b'\n');
    Ok(out)
}

/// Write through a temporary file in the same directory and rename it
/// into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> io::Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

/// Write `<dir>/<name>.json` and, for csv format, `<dir>/<name>.csv`.
pub fn write_artifacts<R: Serialize>(
    dir: &Path,
    name: &str,
    meta: &Metadata,
    result: &R,
    table: &Table,
    format: Format,
) -> io::Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    let json = dir.join(format!("{name}.json"));
    write_atomic(&json, &json_bytes(meta, result)?)?;
    written.push(json);
    if format == Format::Csv {
        let csv = dir.join(format!("{name}.csv"));
        write_atomic(&csv, &csv_bytes(meta, table)?)?;
        written.push(csv);
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn meta(timestamp: Option<u64>) -> Metadata {
        Metadata {
            artifact_version: ARTIFACT_VERSION,
            command: "perturb".into(),
            schema: "perturb".into(),
            seed: 3,
            spec: serde_json::json!({"kind": "perturbation"}),
            timestamp,
        }
    }

    fn table() -> Table {
        Table {
            schema: "perturb",
            header: &["n", "mean_f", "mean_fle", "samples"],
            rows: vec![vec!["3".into(), fmt_f64(0.995), fmt_f64(0.99), "10".into()]],
        }
    }

    #[test]
    fn csv_layout() {
        let text = String::from_utf8(csv_bytes(&meta(None), &table()).unwrap()).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "# artifact_version: 1");
        assert_eq!(lines[4], r#"# spec: {"kind":"perturbation"}"#);
        assert_eq!(lines[5], "# timestamp: none");
        assert_eq!(lines[6], "n,mean_f,mean_fle,samples");
        assert_eq!(lines[7], "3,0.995,0.99,10");
    }

    #[test]
    fn writes_both_formats() {
        let dir = tempfile::tempdir().unwrap();
        let files = write_artifacts(dir.path(), "perturb", &meta(Some(5)), &[1, 2], &table(), Format::Csv).unwrap();
        assert_eq!(files.len(), 2);
        let json: serde_json::Value = serde_json::from_slice(&std::fs::read(&files[0]).unwrap()).unwrap();
        assert_eq!(json["metadata"]["timestamp"], 5);
        assert_eq!(json["result"], serde_json::json!([1, 2]));
        let only = tempfile::tempdir().unwrap();
        let files = write_artifacts(only.path(), "perturb", &meta(None), &(), &table(), Format::Json).unwrap();
        assert_eq!(files.len(), 1);
        assert_eq!(std::fs::read_dir(only.path()).unwrap().count(), 1);
    }
}
