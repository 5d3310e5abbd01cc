//! Reading inputs, writing outputs, and mapping failures to exit codes.

use std::fmt;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use genperm_core::{embed_selection, Error, OrderedSelection, StepPermuton};
use serde::Serialize;
use serde_json::Value;

pub const EXIT_VALIDATION: u8 = 2;
pub const EXIT_IO: u8 = 3;
pub const EXIT_PARAMETER: u8 = 4;

#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn validation(message: impl Into<String>) -> Self {
        Self { code: EXIT_VALIDATION, message: message.into() }
    }

    pub fn parameter(message: impl Into<String>) -> Self {
        Self { code: EXIT_PARAMETER, message: message.into() }
    }

    pub fn io(message: impl Into<String>) -> Self {
        Self { code: EXIT_IO, message: message.into() }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::Io(_) | Error::Csv(_) => EXIT_IO,
            Error::Json(j) if j.is_data() => EXIT_VALIDATION,
            Error::Json(_) => EXIT_IO,
            Error::Domain(_) | Error::Parameter(_) | Error::Shape { .. } | Error::Resource { .. } => EXIT_PARAMETER,
            Error::Structure(_)
            | Error::Tie { .. }
            | Error::Invalid(_)
            | Error::Invariant(_)
            | Error::Precondition(_) => EXIT_VALIDATION,
        };
        Self { code, message: e.to_string() }
    }
}

pub type CliResult<T> = Result<T, Failure>;

fn read_json(path: &Path) -> CliResult<Value> {
    let text = fs::read_to_string(path).map_err(|e| Failure::io(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::io(format!("{}: {e}", path.display())))
}

fn decode<T: serde::de::DeserializeOwned>(path: &Path, value: Value) -> CliResult<T> {
    serde_json::from_value(value).map_err(|e| Failure::validation(format!("{}: {e}", path.display())))
}

/// A measure file: either a step permuton or an ordered selection.
pub enum Measure {
    Selection(OrderedSelection),
    Permuton(StepPermuton),
}

impl Measure {
    pub fn into_permuton(self) -> StepPermuton {
        match self {
            Measure::Selection(nu) => embed_selection(&nu),
            Measure::Permuton(mu) => mu,
        }
    }
}

pub fn read_measure(path: &Path) -> CliResult<Measure> {
    let value = read_json(path)?;
    if value.get("values").is_some() {
        decode(path, value).map(Measure::Selection)
    } else {
        decode(path, value).map(Measure::Permuton)
    }
}

pub fn read_permuton(path: &Path) -> CliResult<StepPermuton> {
    read_measure(path).map(Measure::into_permuton)
}

pub fn read_selection(path: &Path) -> CliResult<OrderedSelection> {
    match read_measure(path)? {
        Measure::Selection(nu) => Ok(nu),
        Measure::Permuton(mu) => Ok(genperm_core::extract_selection(&mu)?),
    }
}

pub fn read_value<T: serde::de::DeserializeOwned>(path: &Path) -> CliResult<T> {
    let value = read_json(path)?;
    decode(path, value)
}

/// Output sink: a file when `--output` is given, stdout otherwise.
pub struct Sink {
    path: Option<PathBuf>,
}

impl Sink {
    pub fn new(path: Option<PathBuf>) -> Self {
        Self { path }
    }

    pub fn write_bytes(&self, bytes: &[u8]) -> CliResult<()> {
        let result = match &self.path {
            Some(p) => fs::write(p, bytes),
            None => io::stdout().lock().write_all(bytes),
        };
        result.map_err(|e| Failure::io(format!("writing output: {e}")))
    }

    pub fn json<T: Serialize + ?Sized>(&self, value: &T) -> CliResult<()> {
        let mut text = serde_json::to_string_pretty(value).map_err(|e| Failure::io(e.to_string()))?;
        text.push('\n');
        self.write_bytes(text.as_bytes())
    }

    /// Serializes `rows` as CSV with a header taken from the field names.
    pub fn csv<T: Serialize>(&self, header: &[&str], rows: &[T]) -> CliResult<()> {
        let mut writer = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
        let fail = |e: csv::Error| Failure::io(e.to_string());
        writer.write_record(header).map_err(fail)?;
        for row in rows {
            writer.serialize(row).map_err(fail)?;
        }
        let bytes = writer.into_inner().map_err(|e| Failure::io(e.to_string()))?;
        self.write_bytes(&bytes)
    }
}
