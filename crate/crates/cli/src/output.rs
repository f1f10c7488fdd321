//! Output directory bookkeeping.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{io_err, CliError, CliResult};

/// Writes files into one directory and remembers their names.
#[derive(Debug)]
pub struct Outputs {
    dir: PathBuf,
    written: Vec<String>,
}

impl Outputs {
    pub fn create(dir: &Path) -> CliResult<Self> {
        fs::create_dir_all(dir).map_err(io_err(dir))?;
        Ok(Outputs {
            dir: dir.to_path_buf(),
            written: Vec::new(),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    pub fn files(&self) -> &[String] {
        &self.written
    }

    pub fn text(&mut self, name: &str, content: &str) -> CliResult<()> {
        let path = self.path(name);
        fs::write(&path, content).map_err(io_err(&path))?;
        self.written.push(name.to_string());
        Ok(())
    }

    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> CliResult<()> {
        let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Input(e.to_string()))?;
        text.push('\n');
        self.text(name, &text)
    }

    pub fn csv<I>(&mut self, name: &str, header: &[&str], rows: I) -> CliResult<()>
    where
        I: IntoIterator<Item = Vec<String>>,
    {
        let mut wtr = csv::Writer::from_writer(Vec::new());
        let bad = |e: csv::Error| CliError::Input(e.to_string());
        wtr.write_record(header).map_err(bad)?;
        for row in rows {
            wtr.write_record(&row).map_err(bad)?;
        }
        let bytes = wtr.into_inner().map_err(|e| CliError::Input(e.to_string()))?;
        let path = self.path(name);
        fs::write(&path, bytes).map_err(io_err(&path))?;
        self.written.push(name.to_string());
        Ok(())
    }

    /// Writes through a callback that receives a byte buffer.
    pub fn with_writer<F>(&mut self, name: &str, f: F) -> CliResult<()>
    where
        F: FnOnce(&mut Vec<u8>) -> CliResult<()>,
    {
        let mut buf = Vec::new();
        f(&mut buf)?;
        let path = self.path(name);
        fs::write(&path, buf).map_err(io_err(&path))?;
        self.written.push(name.to_string());
        Ok(())
    }
}

/// Shortest decimal that reads back to the same float.
pub fn num(v: f64) -> String {
    v.to_string()
}

pub fn opt_num(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}
