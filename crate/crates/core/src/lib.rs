//! Schur parametrizations of block contractions and positive block matrices,
//! Julia-operator dilations of POVMs and quantum channels, and a randomized
//! harness for positive-map witnesses.
//!
//! Matrices are dense complex `nalgebra` matrices ([`ComplexMatrix`]). Every
//! numerical routine takes a [`Tolerances`] bundle.

pub mod contraction;
pub mod dilation;
pub mod error;
pub mod json;
pub mod linalg;
pub mod maps;
pub mod sample;
pub mod sc_params;
pub mod witness;

pub use error::{Error, Result};
pub use linalg::{ComplexMatrix, Tolerances};
pub use sc_params::{BlockShape, ParamKind, Params};
