//! Knowledge fusion: given (subject, predicate, object) triples extracted by
//! multiple extractors from multiple Web sources, estimate for every unique
//! triple a calibrated probability that it is true.
//!
//! Conflicting object values for the same `(subject, predicate)` data item are
//! resolved by one of three estimators — provenance counting ([`fusion::vote_fuse`]),
//! Bayesian inference against iteratively re-estimated per-provenance accuracies
//! ([`fusion::accu_fuse`]), or the same with an empirical false-value
//! distribution ([`fusion::popaccu_fuse`]). The [`pipeline`] module runs the
//! estimators as a three-stage, data-parallel, seeded-deterministic loop with
//! optional refinements: provenance granularity, coverage and accuracy
//! filtering, and accuracy bootstrapping from a reference KB.
//!
//! The crate is a library first; see the `examples/` directory for one
//! runnable program per capability, and the thin `kfuse` binary for the
//! `generate` / `fuse` / `evaluate` / `analyze` commands.

pub mod cli;
pub mod eval;
pub mod fusion;
pub mod gold;
mod hashing;
pub mod ingest;
pub mod model;
pub mod pipeline;
pub mod synth;

pub use eval::{CalibrationReport, PrReport};
pub use fusion::{FusionParams, ItemGroup};
pub use gold::{GoldStandard, Label};
pub use ingest::Corpus;
pub use model::{
    AccuracyTable, DataItem, ExtractionRecord, FusionResult, Granularity, ProvenanceKey, Triple,
};
pub use pipeline::{Method, PipelineConfig};
pub use synth::SynthConfig;

/// Errors surfaced by the library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: std::path::PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("empty item group")]
    EmptyGroup,
    #[error("no accuracy entry for provenance {0}")]
    MissingAccuracy(String),
    #[error("oracle limits exceeded: {0}")]
    OracleLimit(String),
    #[error("no labeled triples with predicted probabilities")]
    NoParticipants,
    #[error("kappa denominator is zero: |kb|^2 == |t1|*|t2|")]
    DegenerateKappa,
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<std::path::PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
