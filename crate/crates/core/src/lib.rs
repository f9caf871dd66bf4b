//! Best approximation of z̄ in the Bergman space of a bounded planar domain.
//!
//! The crate computes the orthogonal projection of the conjugate coordinate
//! onto a finite analytic subspace of `A²(Ω)`, checks the boundary identity
//! `|z|² = F + F̄` for its antiderivative, traces domains from the implicit
//! equation `|z|² - c₀ = 2 Re F`, and compares the Bergman analytic content
//! with torsional rigidity, the Dirichlet ground eigenvalue and the `L²`
//! norm of the Cauchy transform of the domain.

pub mod basis;
pub mod content;
pub mod domain_file;
pub mod bergman;
pub mod error;
pub mod geometry;
pub mod linalg;
pub mod moments;
pub mod poisson;
pub mod quadrature;
pub mod tracer;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
