//! The universal *-algebra generated by n doubly non-commuting isometries.
//!
//! Every word in the generators `V_i`, `V_i*` reduces to a unique monomial
//!
//! ```text
//! phase · V_1^{a_1} ··· V_n^{a_n} · V_1^{*b_1} ··· V_n^{*b_n}
//! ```
//!
//! (all unstarred letters first, then all starred letters, each group in
//! increasing index order). Cross-index letters commute up to a structure
//! constant in all four star combinations, and a same-index pair `V_i* V_i`
//! collapses to 1, so identity checking becomes syntactic.

mod monomial;
mod parse;
mod sum;

pub use monomial::{reduce_word, reduce_word_from_right, Letter, Monomial};
pub use parse::parse_expression;
pub use sum::{verify_identity, FormalSum};
