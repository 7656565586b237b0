#![no_std]
extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod error;
pub mod mp;
pub mod real;
pub mod special;
pub mod poly;
pub mod quad;
pub mod quad_mp;
pub mod linalg;
pub mod mc;
pub mod opcore;
pub mod detproc;
pub mod rmt;
pub mod mop;
pub mod painleve;

pub use error::{OpxError, Result};
pub use mp::Mp;
pub use real::Real;
