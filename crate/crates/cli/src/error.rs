use std::fmt;

#[derive(Debug)]
pub enum CliError {
    /// Unreadable or invalid configuration; exit status 2.
    Config(String),
    /// Numerical failure or unwritable output; exit status 3.
    Run(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Run(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Run(m) => write!(f, "{m}"),
        }
    }
}

impl From<dustflow::Error> for CliError {
    fn from(e: dustflow::Error) -> Self {
        if let dustflow::Error::Config(m) = e {
            CliError::Config(m)
        } else if e.is_config() {
            CliError::Config(e.to_string())
        } else {
            CliError::Run(e.to_string())
        }
    }
}
