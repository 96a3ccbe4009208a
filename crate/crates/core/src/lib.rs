//! Bibliometric publication-inequality toolkit.
//!
//! Pipeline: ingest per-conference article exports ([`records`]), turn each
//! author's yearly counts into windowed weighted rates and inequality
//! statistics ([`metrics`]), compare author groups ([`grouping`]), model
//! abstract topics and country-level embedding similarity ([`topics`]), and
//! scan for duplicate publications ([`dupscan`]).
//!
//! The metric code is generic over [`Scalar`]; the aliases below fix the
//! two scalars used in practice: [`Real`] for reports and [`Exact`] for
//! rational arithmetic in checks.

pub mod dupscan;
pub mod grouping;
pub mod metrics;
pub mod records;
pub mod scalar;
pub mod table;
pub mod topics;

pub use scalar::{RealScalar, Scalar};

/// Floating-point scalar used for reports.
pub type Real = f64;
/// Exact rational scalar.
pub type Exact = num_rational::Ratio<i64>;

pub type RateSeries = metrics::WindowRateSeries<Real>;
pub type ExactRateSeries = metrics::WindowRateSeries<Exact>;
pub type Gini = metrics::GiniResult<Real>;
pub type ExactGini = metrics::GiniResult<Exact>;
pub type Lotka = metrics::LotkaTable<Real>;
pub type ExactLotka = metrics::LotkaTable<Exact>;
pub type RpdReport = grouping::RpdReport<Real>;
pub type Similarity = topics::SimilarityMatrix<Real>;
