//! Exact toolkit for n-tuples of doubly non-commuting isometries.
//!
//! The crate is layered bottom-up:
//!
//! * [`phase`] and [`scalar`]: unit complex numbers as rational rotations and
//!   exact cyclotomic scalars built from them.
//! * [`symalg`]: the universal *-algebra generated by the relations, with a
//!   canonical normal form for words.
//! * [`opalg`]: structured band-shift operators on multi-index lattices acting
//!   exactly on finitely supported vectors.
//! * [`tuples`]: standard tuples, torus generators, clock–shift data, direct
//!   sums, dilations and relation checks.
//! * [`wold`]: sector projections, wandering subspaces and the reconstruction
//!   of a tuple from its wandering data.
//! * [`classify`]: unitary equivalence and irreducibility of wandering data.

pub mod classify;
pub mod config;
pub mod error;
pub mod index_set;
pub mod opalg;
pub mod phase;
pub mod scalar;
pub mod symalg;
pub mod tuples;
pub mod wold;

pub use config::Config;
pub use error::{Error, Result};
pub use index_set::IndexSet;
pub use phase::{Phase, StructureConstants};
pub use scalar::Scalar;
