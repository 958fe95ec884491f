//! Structured operators: finite sums of band-shift terms on multi-index
//! lattices tensored with an internal operator, acting exactly on finitely
//! supported vectors.

mod internal;
mod operator;
mod signature;
mod vector;

pub use internal::{InternalOperator, ScalarMatrix};
pub use operator::{BandShiftFactor, StructuredOperator, Term, WindowResidual, MATERIALIZE_BUDGET};
pub use signature::{BasisKey, CoordKind, LatticeSignature, Signature};
pub use vector::SupportedVector;
