//! Error type shared across the crate.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{0} is not squarefree")]
    NotSquarefree(u64),
    #[error("operands belong to different fields")]
    MixedFields,
    #[error("division by zero")]
    DivisionByZero,
    #[error("the zero ideal has no normal form")]
    ZeroIdeal,
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("hypothesis violated: {0}")]
    Hypothesis(String),
    #[error("search exhausted: {0}")]
    SearchExhausted(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("matrix is singular")]
    Singular,
    #[error("matrix is not integral")]
    NotIntegral,
    #[error("matrix is not a similitude")]
    NotSimilitude,
    #[error("similitude factors differ")]
    SimilitudeMismatch,
    #[error("matrix is not upper block triangular")]
    NotTriangular,
    #[error("outside the inert scope: {0}")]
    Scope(String),
    #[error("enumeration exceeded the cap of {0} candidates")]
    EnumerationCap(usize),
    #[error("{0}")]
    Domain(String),
    #[error("internal consistency failure: {0}")]
    Consistency(String),
}

impl Error {
    /// Scope errors signal requests outside the inert part; the CLI maps
    /// them to a dedicated exit status.
    pub fn is_scope(&self) -> bool {
        matches!(self, Error::Scope(_))
    }

    /// Stable machine-readable code for JSON error reports.
    pub fn code(&self) -> &'static str {
        match self {
            Error::NotSquarefree(_) => "not_squarefree",
            Error::MixedFields => "mixed_fields",
            Error::DivisionByZero => "division_by_zero",
            Error::ZeroIdeal => "zero_ideal",
            Error::NotPrime(_) => "not_prime",
            Error::Hypothesis(_) => "hypothesis_violated",
            Error::SearchExhausted(_) => "search_exhausted",
            Error::Dimension(_) => "dimension_mismatch",
            Error::Singular => "singular_matrix",
            Error::NotIntegral => "not_integral",
            Error::NotSimilitude => "not_similitude",
            Error::SimilitudeMismatch => "similitude_mismatch",
            Error::NotTriangular => "not_triangular",
            Error::Scope(_) => "scope",
            Error::EnumerationCap(_) => "enumeration_cap",
            Error::Domain(_) => "domain",
            Error::Consistency(_) => "consistency",
        }
    }
}
