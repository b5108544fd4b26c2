//! Exact computation in the Lie algebra of column-finite infinite matrices.
//!
//! The library represents infinite ℕ×ℕ matrices with finitely many nonzero
//! entries per column as symbolic expressions over decidable descriptors,
//! evaluates them exactly over ℚ, F_p, or ℤ, normalizes them to a unique
//! canonical decomposition scalar + finite-row + irreducible tail, classifies
//! any expression onto the seven-element ideal lattice of the algebra, and
//! produces machine-checkable bracket-chain certificates for ideal
//! membership, perfectness, centrality, and the inner/central splitting of
//! derivations. A reindexing module transports expressions between ℕ×ℕ and
//! ℤ×ℤ index sets along an explicit bijection.

pub mod chain;
pub mod derivations;
pub mod error;
pub mod expr;
pub mod field;
pub mod ideals;
pub mod index_set;
pub mod normalize;
pub mod reindex;
pub mod seq;
pub mod testkit;
pub mod witnesses;
pub mod zexpr;

pub use error::{Error, Result};
pub use expr::MatExpr;
pub use field::{FieldElem, FieldId};
pub use ideals::IdealName;
pub use index_set::IndexSet;
pub use normalize::CanonicalForm;
pub use seq::SeqDesc;
