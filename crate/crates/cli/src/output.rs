use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use serde_json::Value;

use crate::{Common, Format};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Core(#[from] paulipriv_core::Error),
    #[error("{path}: {source}", path = .0.display(), source = .1)]
    Io(PathBuf, std::io::Error),
    #[error("{path}: {source}", path = .0.display(), source = .1)]
    Json(PathBuf, serde_json::Error),
    #[error("{0}")]
    Usage(String),
}

pub type CliResult<T> = Result<T, CliError>;

#[derive(Serialize)]
struct Envelope<'a> {
    command: &'a str,
    seed: u64,
    tolerance: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    timestamp: Option<u64>,
    result: Value,
}

/// What a command produced.
pub struct Outcome {
    pub command: &'static str,
    pub tolerance: Option<f64>,
    pub result: Value,
    pub text: String,
    /// Written to `--out` when given.
    pub artifact: Option<String>,
    pub exit: u8,
}

impl Outcome {
    pub fn new(command: &'static str, result: impl Serialize, text: String) -> Self {
        Outcome {
            command,
            tolerance: None,
            result: serde_json::to_value(result).expect("results serialize"),
            text,
            artifact: None,
            exit: 0,
        }
    }

    pub fn tolerance(mut self, tol: f64) -> Self {
        self.tolerance = Some(tol);
        self
    }

    pub fn artifact(mut self, content: String) -> Self {
        self.artifact = Some(content);
        self
    }

    pub fn verdict(mut self, ok: bool) -> Self {
        self.exit = if ok { 0 } else { 1 };
        self
    }
}

pub fn write_file(path: &Path, content: &str) -> CliResult<()> {
    std::fs::write(path, content).map_err(|e| CliError::Io(path.to_path_buf(), e))
}

pub fn emit(o: Outcome, common: &Common) -> CliResult<u8> {
    if let (Some(path), Some(content)) = (&common.out, &o.artifact) {
        write_file(path, content)?;
    }
    let mut text = String::new();
    match common.format {
        Format::Json => {
            let timestamp = if common.no_timestamp {
                None
            } else {
                Some(SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs()))
            };
            let env = Envelope { command: o.command, seed: common.seed, tolerance: o.tolerance, timestamp, result: o.result };
            text.push_str(&serde_json::to_string_pretty(&env).expect("envelope serializes"));
            text.push('\n');
        }
        Format::Text => {
            match o.tolerance {
                Some(t) => text.push_str(&format!("seed {} tolerance {t:e}\n", common.seed)),
                None => text.push_str(&format!("seed {}\n", common.seed)),
            }
            text.push_str(&o.text);
            if !o.text.ends_with('\n') {
                text.push('\n');
            }
        }
    }
    // a reader that closed the pipe early is not an error
    match std::io::stdout().lock().write_all(text.as_bytes()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => return Err(CliError::Io("<stdout>".into(), e)),
        _ => {}
    }
    Ok(o.exit)
}
