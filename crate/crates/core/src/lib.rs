//! Exact Kazhdan–Lusztig theory with unequal parameters for the affine Weyl
//! groups of type G2 and B2, and machine verification of their affine
//! cellular structure.
//!
//! The layers build on each other:
//!
//! * [`laurent`]: the coefficient ring `Z[v, v^-1]`.
//! * [`coxeter`] and [`ball`]: words, normal forms, Bruhat order, and the
//!   finite length-truncated universe every computation lives in.
//! * [`hecke`]: the Hecke algebra in the standard basis.
//! * [`klbasis`]: the Kazhdan–Lusztig basis, structure constants, caching.
//! * [`cells`]: cell preorders, partitions and the strip construction.
//! * [`celldata`]: the cell tables (classes, a-values, zones, descriptors).
//! * [`cellular`]: the affine cell ideal isomorphism and its verification.

pub mod ball;
pub mod celldata;
pub mod cells;
pub mod cellular;
pub mod coxeter;
pub mod error;
pub mod exec;
pub mod hecke;
pub mod klbasis;
pub mod laurent;

pub use ball::{Ball, Id};
pub use coxeter::{CoxeterSystem, Gen, GenSet, GroupElement, GroupType, Side};
pub use error::{Error, Result};
pub use exec::Exec;
pub use laurent::LaurentPoly;
