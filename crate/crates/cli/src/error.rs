//! Error taxonomy mapped onto process exit codes.

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CliErrorKind {
    /// Bad configuration or flags.
    Config,
    /// Missing, malformed, or stale inputs.
    Input,
    /// A pipeline gate rejected everything (empty universe, empty corpus).
    Gate,
    /// External-service transport failure.
    Transport,
}

impl CliErrorKind {
    pub fn exit_code(self) -> i32 {
        match self {
            CliErrorKind::Config => 2,
            CliErrorKind::Input => 3,
            CliErrorKind::Gate => 4,
            CliErrorKind::Transport => 5,
        }
    }
}

#[derive(Debug)]
pub struct CliError {
    pub kind: CliErrorKind,
    pub message: String,
}

impl CliError {
    pub fn config(message: impl Into<String>) -> Self {
        CliError { kind: CliErrorKind::Config, message: message.into() }
    }

    pub fn input(message: impl Into<String>) -> Self {
        CliError { kind: CliErrorKind::Input, message: message.into() }
    }

    pub fn gate(message: impl Into<String>) -> Self {
        CliError { kind: CliErrorKind::Gate, message: message.into() }
    }

    pub fn transport(message: impl Into<String>) -> Self {
        CliError { kind: CliErrorKind::Transport, message: message.into() }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.message)
    }
}

impl std::error::Error for CliError {}

pub type CliResult<T> = Result<T, CliError>;
