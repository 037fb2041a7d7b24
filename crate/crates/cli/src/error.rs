use std::fmt;

use fractal_chains::chain::ChainError;
use fractal_chains::cover::CoverError;
use fractal_chains::delta::DeltaError;
use fractal_chains::fractal::FractalError;
use fractal_chains::holder::HolderError;
use fractal_chains::io::FormatError;
use fractal_chains::lipcover::LipCoverError;
use fractal_chains::selfsimilar::SelfSimilarError;
use fractal_chains::ultra::UltraError;
use fractal_chains::MetricError;

pub const EXIT_INVALID: i32 = 2;
pub const EXIT_LIMIT: i32 = 3;

/// A failed run: bad input or flags, or a size cap / search budget hit.
#[derive(Debug)]
pub enum Failure {
    Invalid(String),
    Limit { message: String, detail: Option<serde_json::Value> },
}

impl Failure {
    pub fn invalid(message: impl Into<String>) -> Self {
        Failure::Invalid(message.into())
    }

    fn limit(message: impl ToString) -> Self {
        Failure::Limit { message: message.to_string(), detail: None }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Invalid(_) => EXIT_INVALID,
            Failure::Limit { .. } => EXIT_LIMIT,
        }
    }

    pub fn detail(&self) -> Option<&serde_json::Value> {
        match self {
            Failure::Limit { detail, .. } => detail.as_ref(),
            Failure::Invalid(_) => None,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Invalid(m) | Failure::Limit { message: m, .. } => f.write_str(m),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Invalid(e.to_string())
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Invalid(e.to_string())
    }
}

impl From<MetricError> for Failure {
    fn from(e: MetricError) -> Self {
        match e {
            MetricError::TooManyPoints { .. } => Failure::limit(e),
            _ => Failure::Invalid(e.to_string()),
        }
    }
}

impl From<FormatError> for Failure {
    fn from(e: FormatError) -> Self {
        match e {
            FormatError::Invalid(m) => m.into(),
            _ => Failure::Invalid(e.to_string()),
        }
    }
}

impl From<FractalError> for Failure {
    fn from(e: FractalError) -> Self {
        match e {
            FractalError::DepthTooLarge { .. } | FractalError::TooManyPoints { .. } => Failure::limit(e),
            _ => Failure::Invalid(e.to_string()),
        }
    }
}

impl From<DeltaError> for Failure {
    fn from(e: DeltaError) -> Self {
        match e {
            DeltaError::TooManyPoints { .. } => Failure::limit(e),
            DeltaError::Chain(inner) => inner.into(),
            DeltaError::BudgetExceeded { ref best, .. } => Failure::Limit {
                message: e.to_string(),
                detail: serde_json::to_value(best.as_ref()).ok(),
            },
            _ => Failure::Invalid(e.to_string()),
        }
    }
}

impl From<HolderError> for Failure {
    fn from(e: HolderError) -> Self {
        Failure::Invalid(e.to_string())
    }
}

impl From<CoverError> for Failure {
    fn from(e: CoverError) -> Self {
        match e {
            CoverError::TooManyPoints { .. } => Failure::limit(e),
            _ => Failure::Invalid(e.to_string()),
        }
    }
}

impl From<UltraError> for Failure {
    fn from(e: UltraError) -> Self {
        Failure::Invalid(e.to_string())
    }
}

impl From<LipCoverError> for Failure {
    fn from(e: LipCoverError) -> Self {
        match e {
            LipCoverError::SearchSpaceTooLarge { .. } => Failure::limit(e),
            LipCoverError::EmptyDomain => Failure::Invalid(e.to_string()),
        }
    }
}

impl From<SelfSimilarError> for Failure {
    fn from(e: SelfSimilarError) -> Self {
        Failure::Invalid(e.to_string())
    }
}

impl From<ChainError> for Failure {
    fn from(e: ChainError) -> Self {
        match e {
            ChainError::TooManyPoints { .. } => Failure::limit(e),
            _ => Failure::Invalid(e.to_string()),
        }
    }
}
