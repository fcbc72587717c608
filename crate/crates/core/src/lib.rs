//! Absolutely maximally entangled (AME) states of minimal support, built and
//! checked through their equivalent forms: MDS codes over `{0..d-1}` and
//! sets of mutually orthogonal latin hypercubes.

pub mod ame;
pub mod bounds;
pub mod codes;
pub mod existence;
pub mod field;
pub mod io;
pub mod latin;
pub mod rs;
pub mod search;
mod subsets;

pub use subsets::{binomial, Subsets};
