//! Construction and verification of the cyclotomic-unit and Stickelberger Euler systems over ℚ.

pub mod arith;
pub mod ball;
pub mod circdist;
pub mod cycnum;
pub mod error;
pub mod eulersys;
pub mod field;
pub mod cyclotomic;
pub mod groupring;
pub mod iwasawa;
pub mod lattice;
pub mod linalg;
pub mod lvalues;
pub mod poly;
pub mod report;
pub mod symbols;
pub mod tunits;

pub use error::{Error, Result};
