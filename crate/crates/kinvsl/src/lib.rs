//! K-invariant Sturm–Liouville operators.
//!
//! A weighted composition operator `(Kf)(x) = A(x) f(φ(x))` commutes with the
//! differential expression `τ = (1/r)(-(p d/dx)' + q)` when the coefficients
//! satisfy a set of functional equations. This crate checks those equations,
//! classifies the self-adjoint extensions of τ that K leaves invariant, and
//! computes the supporting spectra and kernel data numerically.

pub mod bkvglab;
pub mod cli;
pub mod error;
pub mod extensions;
pub mod funcalg;
pub mod gallery;
pub mod ktransform;
pub mod lgtransform;
pub mod numerics;
pub mod problem;
pub mod spectral;
pub mod schroeder;
pub mod slcore;

pub use error::{Error, Result};
