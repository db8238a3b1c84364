//! Exact symbolic Fedosov quantization on symplectic charts and tori, the
//! Feigin–Felder–Shoikhet trace density, and a checker for the local
//! algebraic index theorem.

pub mod chern_weil;
pub mod cli;
pub mod coefficients;
pub mod error;
pub mod fedosov;
pub mod index;
pub mod ffs;
pub mod weyl_forms;

pub use error::{Error, Result};
