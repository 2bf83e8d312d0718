use std::fmt;
use std::path::Path;

use ppgrt::attacks::AttackError;
use ppgrt::bench::BenchError;
use ppgrt::format::FormatError;
use ppgrt::haplotype::HaplotypeError;
use ppgrt::index::IndexError;
use ppgrt::matcher::MatchError;
use ppgrt::net::NetError;

/// Failure with its process exit code: 2 usage, 3 crypto, 4 IO.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Crypto(String),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Crypto(_) => 3,
            CliError::Io(_) => 4,
        }
    }

    pub fn io(path: &Path, err: std::io::Error) -> Self {
        CliError::Io(format!("{}: {err}", path.display()))
    }

    /// Prefixes the message with the file it came from.
    pub fn in_file(self, path: &Path) -> Self {
        let p = path.display();
        match self {
            CliError::Usage(m) => CliError::Usage(format!("{p}: {m}")),
            CliError::Crypto(m) => CliError::Crypto(format!("{p}: {m}")),
            CliError::Io(m) => CliError::Io(format!("{p}: {m}")),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Crypto(m) | CliError::Io(m) => f.write_str(m),
        }
    }
}

impl From<FormatError> for CliError {
    fn from(e: FormatError) -> Self {
        match e {
            FormatError::Index(_) | FormatError::Paillier(_) => CliError::Crypto(e.to_string()),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

impl From<HaplotypeError> for CliError {
    fn from(e: HaplotypeError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<IndexError> for CliError {
    fn from(e: IndexError) -> Self {
        match e {
            IndexError::Haplotype(h) => h.into(),
            IndexError::MissingSecret | IndexError::ModeMismatch { .. } => CliError::Usage(e.to_string()),
            _ => CliError::Crypto(e.to_string()),
        }
    }
}

impl From<MatchError> for CliError {
    fn from(e: MatchError) -> Self {
        CliError::Crypto(e.to_string())
    }
}

impl From<AttackError> for CliError {
    fn from(e: AttackError) -> Self {
        CliError::Crypto(e.to_string())
    }
}

impl From<BenchError> for CliError {
    fn from(e: BenchError) -> Self {
        match e {
            BenchError::EmptyWorkload => CliError::Usage(e.to_string()),
            _ => CliError::Crypto(e.to_string()),
        }
    }
}

impl From<NetError> for CliError {
    fn from(e: NetError) -> Self {
        match e {
            NetError::Remote { .. } => CliError::Crypto(e.to_string()),
            NetError::Format(f) => f.into(),
            _ => CliError::Io(e.to_string()),
        }
    }
}
