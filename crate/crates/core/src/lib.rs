//! Exact Rokhlin towers, K-theory of crossed products and flowbox
//! approximations for minimal Cantor systems.

pub mod cantor;
pub mod cli;
pub mod error;
pub mod kernels;
pub mod ktheory;
pub mod rokhlin;
pub mod suspension;

pub use error::{Error, Result};
