use std::fmt;
use std::path::{Path, PathBuf};

use superstat::ErrorClass;

#[derive(Debug)]
pub enum CliError {
    Core(superstat::Error),
    /// A library error raised while reading a named input file.
    Input { path: PathBuf, source: superstat::Error },
    Io { path: PathBuf, source: std::io::Error },
    /// Unreadable or malformed `--config` contents.
    Config(String),
    /// Flags that parse but make no sense together.
    Usage(String),
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    pub fn input(path: &Path) -> impl FnOnce(superstat::Error) -> Self + '_ {
        move |source| CliError::Input {
            path: path.to_path_buf(),
            source,
        }
    }

    /// 1 domain, 2 I/O or parse, 3 invalid flags.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) | CliError::Input { source: e, .. } => match e.class() {
                ErrorClass::Domain => 1,
                ErrorClass::Parse => 2,
                ErrorClass::InvalidArgument => 3,
            },
            CliError::Io { .. } | CliError::Config(_) => 2,
            CliError::Usage(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Input { path, source } => write!(f, "{}: {source}", path.display()),
            CliError::Io { path, source } => write!(f, "{}: {source}", path.display()),
            CliError::Config(msg) => write!(f, "config: {msg}"),
            CliError::Usage(msg) => f.write_str(msg),
        }
    }
}

impl From<superstat::Error> for CliError {
    fn from(e: superstat::Error) -> Self {
        CliError::Core(e)
    }
}
