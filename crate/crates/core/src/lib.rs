//! Möbius invariants of submanifolds in space forms, computed from
//! symbolic immersions with truncated Taylor jets, and a classifier for
//! submanifolds with vanishing Möbius form and parallel Blaschke tensor.

#![allow(clippy::needless_range_loop)]

pub mod classify;
pub mod expr;
pub mod gallery;
pub mod invariants;
pub mod jet;
pub mod linalg;
pub mod report;
pub mod riemann;
pub mod sampling;
pub mod spec;

pub use classify::{
    classify, BlaschkeSpectrum, ClassificationReport, ClassifyError, ClassifyOptions, Verdict, WitnessData,
};
pub use expr::{parse, Expr, ParseError};
pub use gallery::{builtin, builtin_examples, builtin_names, GalleryError, LSParams};
pub use invariants::{moebius_invariants, IdentityResiduals, InvariantError, MoebiusData};
pub use jet::{Jet, JetError};
pub use linalg::{CausalType, Eigenvalue, LinalgError, LorentzTransform, LorentzVector, SymmetricPencil};
pub use report::{emit_report, ReportFormat};
pub use spec::{Ambient, AmbientKind, ImmersionSpec, SpecError};

use thiserror::Error;

/// Any error the library can report.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Spec(#[from] SpecError),
    #[error(transparent)]
    Invariant(#[from] InvariantError),
    #[error(transparent)]
    Classify(#[from] ClassifyError),
    #[error(transparent)]
    Gallery(#[from] GalleryError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Jet(#[from] JetError),
    #[error(transparent)]
    Parse(#[from] ParseError),
}

impl Error {
    /// Whether the error stems from the input rather than a failed check.
    pub fn is_input_error(&self) -> bool {
        !matches!(self, Error::Linalg(_) | Error::Jet(_))
    }
}
