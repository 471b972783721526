use std::path::PathBuf;

use gwel::boundary_calc::BoundaryError;
use gwel::entropy_lab::EntropyError;
use gwel::growth_cogrowth::GrowthError;
use gwel::quotients::QuotientError;
use gwel::sigma_lattice::LatticeError;
use gwel::{MeasureError, WordError};
use thiserror::Error;

/// Failures surfaced to the command line, each with its exit status.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Param(String),
    #[error("{0}")]
    Resource(String),
    #[error("{0}")]
    NonConvergence(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Param(_) => 2,
            CliError::Resource(_) => 3,
            CliError::NonConvergence(_) => 4,
            CliError::Io { .. } => 1,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Param(_) => "parameter",
            CliError::Resource(_) => "resource-guard",
            CliError::NonConvergence(_) => "non-convergence",
            CliError::Io { .. } => "io",
        }
    }

    /// One-line JSON: `{"error":kind,"exit_code":n,"message":text}`.
    pub fn to_json_line(&self) -> String {
        serde_json::json!({
            "error": self.kind(),
            "exit_code": self.exit_code(),
            "message": self.to_string(),
        })
        .to_string()
    }
}

impl From<WordError> for CliError {
    fn from(e: WordError) -> Self {
        CliError::Param(e.to_string())
    }
}

impl From<MeasureError> for CliError {
    fn from(e: MeasureError) -> Self {
        CliError::Param(e.to_string())
    }
}

impl From<QuotientError> for CliError {
    fn from(e: QuotientError) -> Self {
        match e {
            QuotientError::CosetLimitExceeded(_) => CliError::Resource(e.to_string()),
            _ => CliError::Param(e.to_string()),
        }
    }
}

impl From<GrowthError> for CliError {
    fn from(e: GrowthError) -> Self {
        match e {
            GrowthError::NonConvergence(_) => CliError::NonConvergence(e.to_string()),
            GrowthError::RadiusTooLarge { .. } => CliError::Resource(e.to_string()),
            _ => CliError::Param(e.to_string()),
        }
    }
}

impl From<EntropyError> for CliError {
    fn from(e: EntropyError) -> Self {
        match e {
            EntropyError::MemoryGuard { .. } | EntropyError::SupportTooLarge { .. } => {
                CliError::Resource(e.to_string())
            }
            EntropyError::Growth(g) => g.into(),
            EntropyError::Measure(m) => m.into(),
            _ => CliError::Param(e.to_string()),
        }
    }
}

impl From<BoundaryError> for CliError {
    fn from(e: BoundaryError) -> Self {
        match e {
            BoundaryError::TooManyCylinders(_) => CliError::Resource(e.to_string()),
            _ => CliError::Param(e.to_string()),
        }
    }
}

impl From<LatticeError> for CliError {
    fn from(e: LatticeError) -> Self {
        match e {
            LatticeError::NonConvergence(_) => CliError::NonConvergence(e.to_string()),
            _ => CliError::Param(e.to_string()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        let e: CliError = QuotientError::CosetLimitExceeded(10).into();
        assert_eq!(e.exit_code(), 3);
        let e: CliError = GrowthError::NonConvergence(5).into();
        assert_eq!(e.exit_code(), 4);
        let e: CliError = EntropyError::Growth(GrowthError::NonConvergence(5)).into();
        assert_eq!(e.exit_code(), 4);
        let e: CliError = EntropyError::MemoryGuard { needed: 2, limit: 1 }.into();
        assert_eq!(e.exit_code(), 3);
        let e: CliError = WordError::RankTooSmall { rank: 1, min: 2 }.into();
        assert_eq!(e.exit_code(), 2);
        let line = e.to_json_line();
        assert!(!line.contains('\n'));
        assert!(line.starts_with("{\"error\":\"parameter\""));
    }
}
