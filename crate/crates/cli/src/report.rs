//! Run reports and the output directory.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::CliError;
use crate::formats::SCHEMA;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InputDigest {
    /// SHA-256 over the input files (in read order) and the sorted flags.
    pub digest: String,
    pub files: Vec<String>,
    pub flags: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "state", rename_all = "lowercase")]
pub enum Status {
    Ok,
    Error { code: i32, message: String },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub schema: &'static str,
    pub command: String,
    pub inputs: InputDigest,
    /// Paths relative to the output directory.
    pub outputs: Vec<String>,
    pub metrics: BTreeMap<String, f64>,
    pub diagnostics: Vec<String>,
    pub status: Status,
}

impl RunReport {
    pub fn exit_code(&self) -> i32 {
        match self.status {
            Status::Ok => 0,
            Status::Error { code, .. } => code,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }
}

/// Flags shared by every command.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GlobalFlags {
    pub out: PathBuf,
    pub seed: u64,
    pub threads: usize,
}

/// Collects inputs, outputs and metrics while a command runs.
pub struct Session {
    out: PathBuf,
    hasher: Sha256,
    report: RunReport,
}

impl Session {
    pub fn new(command: &str, global: &GlobalFlags) -> Self {
        let mut s = Self {
            out: global.out.clone(),
            hasher: Sha256::new(),
            report: RunReport {
                schema: SCHEMA,
                command: command.to_string(),
                inputs: InputDigest { digest: String::new(), files: Vec::new(), flags: BTreeMap::new() },
                outputs: Vec::new(),
                metrics: BTreeMap::new(),
                diagnostics: Vec::new(),
                status: Status::Ok,
            },
        };
        s.flag("seed", global.seed);
        s.flag("threads", global.threads);
        s
    }

    pub fn out_dir(&self) -> &Path {
        &self.out
    }

    pub fn flag(&mut self, key: &str, value: impl Display) {
        self.report.inputs.flags.insert(key.to_string(), value.to_string());
    }

    pub fn metric(&mut self, key: impl Into<String>, value: f64) {
        self.report.metrics.insert(key.into(), value);
    }

    /// `key.0`, `key.1`, ...
    pub fn metric_seq(&mut self, key: &str, values: impl IntoIterator<Item = f64>) {
        for (i, v) in values.into_iter().enumerate() {
            self.metric(format!("{key}.{i}"), v);
        }
    }

    pub fn diagnostic(&mut self, msg: impl Into<String>) {
        self.report.diagnostics.push(msg.into());
    }

    pub fn read(&mut self, path: &Path) -> Result<Vec<u8>, CliError> {
        let bytes = fs::read(path).map_err(|e| CliError::io(path, e))?;
        self.hasher.update((bytes.len() as u64).to_le_bytes());
        self.hasher.update(&bytes);
        self.report.inputs.files.push(path.display().to_string());
        Ok(bytes)
    }

    pub fn read_json<T: DeserializeOwned>(&mut self, path: &Path) -> Result<T, CliError> {
        let bytes = self.read(path)?;
        serde_json::from_slice(&bytes).map_err(|e| CliError::parse(path, e))
    }

    pub fn read_text(&mut self, path: &Path) -> Result<String, CliError> {
        let bytes = self.read(path)?;
        String::from_utf8(bytes).map_err(|e| CliError::parse(path, e))
    }

    /// Writes `name` under the output directory and lists it as an output.
    pub fn write(&mut self, name: &str, contents: impl AsRef<[u8]>) -> Result<(), CliError> {
        let path = self.out.join(name);
        if let Some(dir) = path.parent() {
            fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        }
        fs::write(&path, contents).map_err(|e| CliError::io(&path, e))?;
        self.report.outputs.push(name.to_string());
        Ok(())
    }

    pub fn write_json(&mut self, name: &str, value: &impl Serialize) -> Result<(), CliError> {
        let text = serde_json::to_string_pretty(value).expect("output types serialize");
        self.write(name, text + "\n")
    }

    pub fn write_csv<R: Serialize>(&mut self, name: &str, header: &[&str], rows: impl IntoIterator<Item = R>) -> Result<(), CliError> {
        let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
        let csv_err = |e: csv::Error| CliError::io(name, std::io::Error::other(e));
        w.write_record(header).map_err(csv_err)?;
        for r in rows {
            w.serialize(r).map_err(csv_err)?;
        }
        let bytes = w.into_inner().map_err(|e| CliError::io(name, std::io::Error::other(e.to_string())))?;
        self.write(name, bytes)
    }

    pub fn finish(mut self, result: Result<(), CliError>) -> RunReport {
        for (k, v) in &self.report.inputs.flags {
            self.hasher.update(k.as_bytes());
            self.hasher.update(b"=");
            self.hasher.update(v.as_bytes());
            self.hasher.update(b"\n");
        }
        self.report.inputs.digest = self.hasher.finalize().iter().map(|b| format!("{b:02x}")).collect();
        if let Err(e) = result {
            self.report.status = Status::Error { code: e.code(), message: e.to_string() };
        }
        self.report
    }
}
