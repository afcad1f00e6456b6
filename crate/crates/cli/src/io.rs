use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

use crate::config::RunConfig;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("cannot read {path}: {message}")]
    Input { path: PathBuf, message: String },
    #[error("cannot write {path}: {source}")]
    Output { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Core(#[from] frasian_core::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(frasian_core::Error::Solver { .. }) => 3,
            _ => 2,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

/// Reads the numeric column `header` from a CSV file with a header row.
pub fn read_column(path: &Path, header: &str) -> CliResult<Vec<f64>> {
    let input_err = |message: String| CliError::Input { path: path.to_path_buf(), message };
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| input_err(e.to_string()))?;
    let headers = reader.headers().map_err(|e| input_err(e.to_string()))?.clone();
    let Some(col) = headers.iter().position(|h| h == header) else {
        return Err(input_err(format!("missing `{header}` column (found: {})", headers.iter().collect::<Vec<_>>().join(", "))));
    };
    let mut values = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| input_err(e.to_string()))?;
        let field = record.get(col).unwrap_or("");
        let v: f64 = field
            .parse()
            .map_err(|_| input_err(format!("row {}: `{field}` is not a number", i + 2)))?;
        values.push(v);
    }
    Ok(values)
}

pub fn parse_inline(list: &str) -> CliResult<Vec<f64>> {
    list.split(',')
        .map(|s| s.trim())
        .filter(|s| !s.is_empty())
        .map(|s| s.parse().map_err(|_| CliError::Usage(format!("`{s}` in --sample is not a number"))))
        .collect()
}

pub struct Artifacts<'a> {
    dir: &'a Path,
    config: &'a RunConfig,
    pub written: Vec<PathBuf>,
}

impl<'a> Artifacts<'a> {
    pub fn new(config: &'a RunConfig) -> CliResult<Self> {
        let dir = config.out.as_path();
        fs::create_dir_all(dir).map_err(|source| CliError::Output { path: dir.to_path_buf(), source })?;
        Ok(Artifacts { dir, config, written: Vec::new() })
    }

    /// Writes `{"schema": 1, "config": ..., <body fields>}`.
    pub fn json(&mut self, name: &str, body: Value) -> CliResult<()> {
        let mut doc = json!({ "schema": SCHEMA_VERSION, "config": self.config });
        if let (Some(obj), Value::Object(fields)) = (doc.as_object_mut(), body) {
            obj.extend(fields);
        }
        let mut text = serde_json::to_string_pretty(&doc).expect("JSON values always serialize");
        text.push('\n');
        self.write(name, text.as_bytes())
    }

    pub fn csv<R: Serialize>(&mut self, name: &str, header: &[&str], rows: impl IntoIterator<Item = R>) -> CliResult<()> {
        let path = self.dir.join(name);
        let out_err = |e: csv::Error| CliError::Output {
            path: path.clone(),
            source: std::io::Error::other(e.to_string()),
        };
        let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
        w.write_record(header).map_err(out_err)?;
        for row in rows {
            w.serialize(row).map_err(out_err)?;
        }
        let bytes = w.into_inner().map_err(|e| CliError::Output { path: path.clone(), source: e.into_error() })?;
        self.write(name, &bytes)
    }

    fn write(&mut self, name: &str, bytes: &[u8]) -> CliResult<()> {
        let path = self.dir.join(name);
        fs::write(&path, bytes).map_err(|source| CliError::Output { path: path.clone(), source })?;
        self.written.push(path);
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        let solver = frasian_core::Error::Solver { message: "no bracket".into(), lo: -1.0, hi: 1.0, f_lo: 1.0, f_hi: 1.0 };
        assert_eq!(CliError::Core(solver).exit_code(), 3);
        assert_eq!(CliError::Core(frasian_core::Error::Domain("bad".into())).exit_code(), 2);
        assert_eq!(CliError::Usage("x".into()).exit_code(), 2);
        let input = CliError::Input { path: "a.csv".into(), message: "gone".into() };
        assert_eq!(input.exit_code(), 2);
    }

    #[test]
    fn inline_sample() {
        assert_eq!(parse_inline("0.1, -0.3,").unwrap(), vec![0.1, -0.3]);
        assert!(matches!(parse_inline("1,x"), Err(CliError::Usage(_))));
    }

    #[test]
    fn column_by_header() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.csv");
        fs::write(&path, "id,y\n1, 2.5\n2,-1\n").unwrap();
        assert_eq!(read_column(&path, "y").unwrap(), vec![2.5, -1.0]);
        assert!(matches!(read_column(&path, "pvalue"), Err(CliError::Input { .. })));
        fs::write(&path, "y\nabc\n").unwrap();
        assert!(matches!(read_column(&path, "y"), Err(CliError::Input { .. })));
    }
}
