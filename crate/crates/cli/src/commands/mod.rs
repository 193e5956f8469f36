//! Subcommand implementations and the error type that maps failures onto
//! the documented exit codes.

use std::fmt;
use std::path::Path;

pub mod bench;
pub mod bg_model;
pub mod eval;
pub mod matte;
pub mod synth;

/// Exit code for command-line misuse.
pub const EXIT_USAGE: i32 = 1;
/// Exit code for unreadable, malformed, or inconsistent input data.
pub const EXIT_DATA: i32 = 2;
/// Exit code for internal failures that input data should never trigger.
pub const EXIT_INTERNAL: i32 = 3;

/// A failed command: the cause plus which exit code it deserves.
#[derive(Debug)]
pub struct CmdError {
    exit: i32,
    inner: anyhow::Error,
}

impl CmdError {
    pub fn usage(msg: impl fmt::Display) -> Self {
        Self {
            exit: EXIT_USAGE,
            inner: anyhow::anyhow!("{msg}"),
        }
    }

    pub fn data(err: impl Into<anyhow::Error>) -> Self {
        Self {
            exit: EXIT_DATA,
            inner: err.into(),
        }
    }

    pub fn internal(err: impl Into<anyhow::Error>) -> Self {
        Self {
            exit: EXIT_INTERNAL,
            inner: err.into(),
        }
    }

    pub fn context(self, msg: impl fmt::Display) -> Self {
        Self {
            exit: self.exit,
            inner: self.inner.context(msg.to_string()),
        }
    }

    pub fn exit_code(&self) -> i32 {
        self.exit
    }
}

impl fmt::Display for CmdError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:#}", self.inner)
    }
}

impl From<depthmatte::Error> for CmdError {
    fn from(err: depthmatte::Error) -> Self {
        // Every library error is traceable to input data or configuration.
        CmdError::data(err)
    }
}

impl From<std::io::Error> for CmdError {
    fn from(err: std::io::Error) -> Self {
        CmdError::data(err)
    }
}

pub type CmdResult<T> = Result<T, CmdError>;

/// Serializes `value` as pretty JSON into `path`, creating parent dirs.
pub fn write_json(path: &Path, value: &impl serde::Serialize) -> CmdResult<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    let mut text = serde_json::to_string_pretty(value).map_err(CmdError::internal)?;
    text.push('\n');
    std::fs::write(path, text)
        .map_err(|e| CmdError::data(e).context(format!("writing {}", path.display())))?;
    Ok(())
}

/// Echoes the effective configuration into an output directory, so every
/// artifact records exactly what produced it.
pub fn echo_config(dir: &Path, config: &crate::config::PipelineConfig) -> CmdResult<()> {
    write_json(&dir.join("config.json"), config)
}
