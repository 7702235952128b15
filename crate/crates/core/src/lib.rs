//! Boundary geometry, isometry actions and SL(2, C) length coordinates for
//! the rank-one hyperbolic spaces over R, C, H and O.

#![no_std]

extern crate alloc;

pub mod algebra;
pub mod ballmodel;
pub mod error;
pub mod isometry;
pub mod linalg;
pub mod nilboundary;
pub mod sl2;
pub mod spectrum;

pub use algebra::{AlgebraElement, AlgebraKind};
pub use ballmodel::BallPoint;
pub use error::{Error, Result};
pub use isometry::{GroupMatrix, IsometryClass, NormalIsometry};
pub use nilboundary::{NilPoint, SpaceConfig};
pub use sl2::{Sl2, Sl2Class, Sl2Rep, Word};
