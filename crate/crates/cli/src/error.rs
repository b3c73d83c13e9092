use std::path::PathBuf;

use serde_json::json;

pub type CliResult<T> = Result<T, CliError>;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] trace_core::Error),

    #[error("{}: {message}", path.display())]
    Config { path: PathBuf, message: String },

    #[error("{0}")]
    Usage(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    /// 3 for I/O failures, 2 for everything else.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Io { .. } => 3,
            CliError::Core(e) if e.is_io() => 3,
            _ => 2,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Core(e) => e.kind(),
            CliError::Config { .. } => "ConfigError",
            CliError::Usage(_) => "UsageError",
            CliError::Io { .. } => "Io",
        }
    }

    /// Machine-readable form written to standard error.
    pub fn to_json(&self) -> String {
        json!({
            "error": {
                "kind": self.kind(),
                "message": self.to_string(),
                "exit_code": self.exit_code(),
            }
        })
        .to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        assert_eq!(CliError::Usage("x".into()).exit_code(), 2);
        assert_eq!(CliError::Core(trace_core::Error::EmptyInput).exit_code(), 2);
        let io = std::io::Error::new(std::io::ErrorKind::NotFound, "gone");
        assert_eq!(CliError::Core(trace_core::Error::Io(io)).exit_code(), 3);
    }

    #[test]
    fn json_names_the_kind() {
        let v: serde_json::Value =
            serde_json::from_str(&CliError::Core(trace_core::Error::RankDeficient).to_json())
                .unwrap();
        assert_eq!(v["error"]["kind"], "RankDeficient");
        assert_eq!(v["error"]["exit_code"], 2);
    }
}
