//! Result files and the run manifest.

use std::io::Write;
use std::path::PathBuf;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::ValueEnum;
use serde::Serialize;

use qsn_core::report::{to_json_string, write_json, Table};

use crate::Failure;

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Serialize)]
struct RunManifest {
    tool: &'static str,
    version: &'static str,
    arguments: Vec<String>,
    config: serde_json::Value,
    seed: Option<u64>,
    format: Format,
    /// Seconds since the Unix epoch.
    started_at: f64,
    finished_at: f64,
    outputs: Vec<String>,
    exit_code: u8,
}

fn now() -> f64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs_f64())
        .unwrap_or(0.0)
}

pub struct Emitter {
    out: Option<PathBuf>,
    format: Format,
    manifest: RunManifest,
    name: String,
}

fn csv_error(e: csv::Error) -> Failure {
    Failure::Config(format!("writing CSV: {e}"))
}

fn write_table<W: Write>(writer: W, table: &Table) -> Result<(), Failure> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(&table.headers).map_err(csv_error)?;
    for row in &table.rows {
        w.write_record(row).map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

impl Emitter {
    pub fn new(out: Option<PathBuf>, format: Format) -> Self {
        Self {
            out,
            format,
            name: "run".into(),
            manifest: RunManifest {
                tool: "qsn",
                version: env!("CARGO_PKG_VERSION"),
                arguments: std::env::args().skip(1).collect(),
                config: serde_json::Value::Null,
                seed: None,
                format,
                started_at: now(),
                finished_at: 0.0,
                outputs: Vec::new(),
                exit_code: 0,
            },
        }
    }

    pub fn config<T: Serialize>(&mut self, config: &T, seed: Option<u64>) {
        self.manifest.config = serde_json::to_value(config).unwrap_or(serde_json::Value::Null);
        self.manifest.seed = seed;
    }

    pub fn emit<T: Serialize>(
        &mut self,
        name: &str,
        value: &T,
        table: &Table,
    ) -> Result<(), Failure> {
        self.name = name.into();
        match &self.out {
            Some(dir) => {
                std::fs::create_dir_all(dir)?;
                let path = dir.join(match self.format {
                    Format::Json => format!("{name}.json"),
                    Format::Csv => format!("{name}.csv"),
                });
                let file = std::io::BufWriter::new(std::fs::File::create(&path)?);
                match self.format {
                    Format::Json => {
                        let mut file = file;
                        write_json(&mut file, value)?;
                        file.write_all(b"\n")?;
                        file.flush()?;
                    }
                    Format::Csv => write_table(file, table)?,
                }
                self.manifest.outputs.push(path.display().to_string());
            }
            None => {
                let stdout = std::io::stdout();
                let mut lock = stdout.lock();
                match self.format {
                    Format::Json => lock.write_all(to_json_string(value)?.as_bytes())?,
                    Format::Csv => write_table(&mut lock, table)?,
                }
                self.manifest.outputs.push("<stdout>".into());
            }
        }
        Ok(())
    }

    /// Writes `<name>.manifest.json` into the output directory, or a
    /// one-line manifest to stderr.
    pub fn finish(mut self, exit_code: u8) -> Result<(), Failure> {
        self.manifest.exit_code = exit_code;
        self.manifest.finished_at = now();
        match &self.out {
            Some(dir) => {
                std::fs::create_dir_all(dir)?;
                let path = dir.join(format!("{}.manifest.json", self.name));
                std::fs::write(&path, to_json_string(&self.manifest)?)?;
            }
            None => {
                let line =
                    serde_json::to_string(&self.manifest).map_err(qsn_core::QsnError::from)?;
                eprintln!("manifest: {line}");
            }
        }
        Ok(())
    }
}
