//! Error type shared across the library.

use thiserror::Error;

#[derive(Clone, PartialEq, Eq, Debug, Error)]
pub enum Error {
    #[error("FieldMismatch: operands live in different fields")]
    FieldMismatch,
    #[error("DivisionByZero: inverse of zero requested")]
    DivisionByZero,
    #[error("NoInverse: element is not a unit in this ring")]
    NoInverse,
    #[error("InvalidScalar: cannot parse {text:?}")]
    InvalidScalar { text: String },
    #[error("IndexOutOfRange: indices are 1-based")]
    IndexOutOfRange,
    #[error("EmptyPeriod: periodic descriptors need a nonempty period")]
    EmptyPeriod,
    #[error("NotNormalizable: {subterm} is outside the closed rewrite fragment")]
    NotNormalizable { subterm: String },
    #[error("NotInGlFr: matrix has a scalar part or an irreducible tail")]
    NotInGlFr,
    #[error("RingNotSupported: this operation needs a field, not a ring")]
    RingNotSupported,
    #[error("EqualDiagonalEntries: entries ({i},{i}) and ({j},{j}) coincide")]
    EqualDiagonalEntries { i: u64, j: u64 },
    #[error("NotDiagonal: matrix has off-diagonal content")]
    NotDiagonal,
    #[error("ZeroPivot: entry ({i},{j}) is zero")]
    ZeroPivot { i: u64, j: u64 },
    #[error("NotInSlFr: matrix is not a finite-row matrix of trace zero")]
    NotInSlFr,
    #[error("UnsupportedTail: no infinite off-diagonal band to extract from")]
    UnsupportedTail,
    #[error("FiniteDisagreement: adjacent diagonal entries eventually agree")]
    FiniteDisagreement,
    #[error("NotInfinite: the index set is finite")]
    NotInfinite,
    #[error("GapPropertyViolated: complement contains two consecutive indices")]
    GapPropertyViolated,
    #[error("ProbeExceeded: diagonal support goes beyond the recorded table")]
    ProbeExceeded,
    #[error("NotADerivation: {detail}")]
    NotADerivation { detail: String },
    #[error("SparsityViolated: probe image of E({k},{k}) has content at ({i},{j})")]
    SparsityViolated { k: u64, i: u64, j: u64 },
    #[error("ProbeInsufficient: probe bound {given} is too small (need at least {needed})")]
    ProbeInsufficient { given: u64, needed: u64 },
    #[error("NotTransportable: {subterm} has no image in the target grammar")]
    NotTransportable { subterm: String },
}

pub type Result<T> = std::result::Result<T, Error>;
