//! Frobenius manifold structures on orbit spaces of the extended affine Weyl
//! groups of type B and C, built and checked in exact rational arithmetic.

#![allow(clippy::needless_range_loop)]

pub mod coordmap;
pub mod document;
pub mod error;
pub mod exactalg;
pub mod fixtures;
pub mod flatcoords;
pub mod frobenius;
pub mod metrics;
pub mod orbitspace;
pub mod rootdata;
pub mod verify;

pub use error::{Error, Result};
