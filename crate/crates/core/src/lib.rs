//! Numerical existence machinery for Hammerstein integral equations
//! `u(t) = ∫ k(t,s) η(s) f(s, u(s)) ds` posed on the whole real line.
//!
//! Functions live in a weighted space: `u` is represented by `ũ = u/φ`, which
//! extends continuously to ±∞ and is sampled on a compactified grid.

pub mod catalog;
pub mod certify;
pub mod conditions;
pub mod error;
pub mod ext;
pub mod operators;
pub mod quadrature;
pub mod spectral;
pub mod weighted_space;

pub use error::{Error, Result};
