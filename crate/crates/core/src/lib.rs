//! Local solutions of the Darboux equation
//!
//! ```text
//! y'' + [h - xi(xi+1) ns^2 u - eta(eta+1) dc^2 u - mu(mu+1) k^2 cd^2 u - nu(nu+1) k^2 sn^2 u] y = 0
//! ```
//!
//! on the torus with quarter periods `K`, `iK'`, together with its symmetry
//! group of order 384, accessory-parameter eigenvalues and a numerical
//! oracle layer that checks every transformation table the library relies on.

pub mod catalog;
pub mod elliptic;
pub mod error;
pub mod tables;
pub mod reductions;
pub mod series;
pub mod symmetry;
pub mod verify;
pub mod weierstrass;

pub use error::{Error, Result};
