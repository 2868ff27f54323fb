//! Cauchy problem for the Klein-Gordon equation `u_xx - u_tt - q(x) u = 0`
//! on `[-b, b]`, solved by expanding the initial data over a transmuted power
//! basis and summing generalized wave polynomials.

pub mod approx;
pub mod basis;
pub mod cauchy;
pub mod error;
pub mod problems;
pub mod spps;
pub mod transmute;
pub mod wavepoly;

pub use error::{Error, Result};
