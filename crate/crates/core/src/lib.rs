//! Positive solutions of a three-point boundary value problem for a fractional
//! differential equation with a p-Laplacian operator.

pub mod cli;
pub mod error;
pub mod exprlang;
pub mod greens;
pub mod plaplacian;
pub mod problem;
pub mod quadrature;
pub mod solver;
pub mod verify;
pub mod specialfn;
pub mod theorems;

pub use error::{DomainError, Error, Result};
pub use exprlang::Expr;
pub use greens::KernelParams;
pub use plaplacian::Exponent;
pub use problem::Problem;
pub use quadrature::{GridFunction, Partition};
