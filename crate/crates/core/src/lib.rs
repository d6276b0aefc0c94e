//! Exact cohomology and splitting certificates for supervector bundles on the
//! projective superspaces `P^{n|m}`.

pub mod error;
pub mod superring;
pub mod supermodule;
pub mod sheaf;
pub mod linalg;
pub mod cohomology;
pub mod families;
pub mod splitting;
pub mod catalog;

pub use error::{Error, Result};
