//! The graded algebra Ω•(W(End V)): matrix-valued, form-valued Weyl series
//! with the fiberwise Moyal product and the Koszul complex (δ, δ⁻¹, σ).
//!
//! dx factors are kept in increasing index order and multiply from the left;
//! every operation reduces to that order with the sign of the permutation.

mod algebra;
mod element;
pub mod forms;
mod frame;

pub use algebra::WeylAlgebra;
pub use element::{ElementRepr, GradedElement, TermKey, TermRepr, TruncationPolicy};
pub use frame::{invert, SymplecticFrame};

pub(crate) use algebra::factorial;
