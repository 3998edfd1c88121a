//! Report envelopes and machine-readable error records.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use avcgame::model::config::ConfigError;
use serde_json::{json, Value};

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Config(ConfigError),
    Io { path: PathBuf, message: String },
    /// A command-line value that failed validation.
    Invalid { field: String, message: String },
    Compute(avcgame::Error),
}

impl From<avcgame::Error> for CliError {
    fn from(e: avcgame::Error) -> Self {
        match e {
            avcgame::Error::Config(c) => CliError::Config(c),
            other => CliError::Compute(other),
        }
    }
}

pub fn invalid(field: &str, message: impl Into<String>) -> CliError {
    CliError::Invalid {
        field: field.to_string(),
        message: message.into(),
    }
}

fn compute_kind(e: &avcgame::Error) -> &'static str {
    use avcgame::Error::*;
    match e {
        InvalidDistribution(_) => "invalid_distribution",
        Dimension(_) => "dimension",
        Budget { .. } => "budget",
        Parameter(_) => "parameter",
        InfeasibleDistortion { .. } => "infeasible_distortion",
        NonConvergence { .. } => "non_convergence",
        DegenerateBall(_) => "degenerate_ball",
        Undefined(_) => "undefined",
        Lp(_) => "lp",
        Config(_) => "config",
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Compute(_) => 1,
            CliError::Usage(_) => 2,
            CliError::Config(_) | CliError::Invalid { .. } => 3,
            CliError::Io { .. } => 4,
        }
    }

    pub fn record(&self) -> Value {
        let error = match self {
            CliError::Usage(m) => json!({ "kind": "usage", "message": m }),
            CliError::Config(c) => json!({
                "kind": "config",
                "message": c.message,
                "path": c.path,
                "line": c.line,
                "column": c.column,
            }),
            CliError::Io { path, message } => json!({
                "kind": "io",
                "message": message,
                "path": path.display().to_string(),
            }),
            CliError::Invalid { field, message } => json!({
                "kind": "invalid_argument",
                "message": message,
                "path": field,
            }),
            CliError::Compute(e) => json!({ "kind": compute_kind(e), "message": e.to_string() }),
        };
        json!({ "ok": false, "error": error })
    }
}

pub fn io_error(path: &Path, e: std::io::Error) -> CliError {
    CliError::Io {
        path: path.to_path_buf(),
        message: e.to_string(),
    }
}

pub fn envelope(command: &str, seed: u64, result: Value) -> Value {
    json!({
        "ok": true,
        "command": command,
        "version": env!("CARGO_PKG_VERSION"),
        "seed": seed,
        "result": result,
    })
}

/// Pretty JSON to `out`, or to stdout.
pub fn emit(value: &Value, out: Option<&Path>) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).expect("reports serialize");
    match out {
        Some(p) => fs::write(p, text + "\n").map_err(|e| io_error(p, e)),
        None => {
            let mut so = std::io::stdout().lock();
            writeln!(so, "{text}").map_err(|e| io_error(Path::new("<stdout>"), e))
        }
    }
}
