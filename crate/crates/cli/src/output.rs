//! File writers. Every CSV starts with a `#` line naming its schema and version.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::CliResult;
use crate::svg::Plot;

pub const SCHEMA_VERSION: u32 = 1;

pub fn schema_line(schema: &str) -> String {
    format!("# shor-afs {schema} v{SCHEMA_VERSION}")
}

pub fn write_csv<T: Serialize>(dir: &Path, name: &str, schema: &str, rows: &[T]) -> CliResult<PathBuf> {
    let path = dir.join(name);
    let mut file = BufWriter::new(File::create(&path)?);
    writeln!(file, "{}", schema_line(schema))?;
    let mut w = csv::Writer::from_writer(file);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(path)
}

pub fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> CliResult<PathBuf> {
    let path = dir.join(name);
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(&path, text)?;
    Ok(path)
}

pub fn write_svg(dir: &Path, name: &str, plot: &Plot) -> CliResult<PathBuf> {
    let path = dir.join(name);
    std::fs::write(&path, plot.render())?;
    Ok(path)
}
