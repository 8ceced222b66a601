use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("empty result: {0}")]
    EmptyResult(String),

    #[error("zero marginal for {axis} `{label}`; prune the table first")]
    ZeroMarginal { axis: &'static str, label: String },

    #[error("SVD did not converge after {sweeps} sweeps")]
    NonConvergence { sweeps: usize },

    #[error("degenerate residual at axis {axis}: nothing left to decompose")]
    DegenerateAxis { axis: usize },

    #[error("degenerate structure: {0}")]
    DegenerateStructure(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Self::InvalidInput(msg.into())
    }

    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Self::Parse {
            line,
            msg: msg.into(),
        }
    }

    /// True for failures of the numerical routines rather than of the input.
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Self::NonConvergence { .. }
                | Self::DegenerateAxis { .. }
                | Self::DegenerateStructure(_)
                | Self::ZeroMarginal { .. }
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
