//! Numerical laboratory for conjugacy criteria of circle diffeomorphisms.
//!
//! The crate is `no_std` (it needs `alloc`). Maps are degree-one lifts
//! evaluated in double precision; every supremum over partitions is
//! reported as a lower bound from a finite family of partitions.

#![no_std]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod catalog;
pub mod combinatorics;
pub mod crossratio;
pub mod dynamics;
pub mod error;
pub mod maps;
pub mod num;
pub mod quad;
pub mod rotation;
pub mod variation;

pub use error::{Error, Result};
pub use maps::{Arc, CircleDiffeo, RealMap};
