//! Exact construction and verification of bounded sets that tile by one
//! lattice and pack by another.

pub mod constructor;
pub mod field;
pub mod geometry;
pub mod hnf;
pub mod io;
pub mod lattice;
pub mod matrix;
pub mod nofd;
pub mod par;
pub mod structure;
pub mod verifier;
