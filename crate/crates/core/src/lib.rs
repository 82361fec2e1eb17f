//! Definite quaternion algebras, Eichler towers and Heegner points on the associated
//! Shimura sets, with ordinary theta elements built from them.

#![allow(clippy::needless_range_loop)]

pub mod arith;
pub mod cm;
pub mod commands;
pub mod error;
pub mod heegner;
pub mod lattice;
pub mod ordinary;
pub mod quaternion;
pub mod shimura;
pub mod zmod;

pub use error::{Error, Result};
