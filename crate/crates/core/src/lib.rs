//! Spectral averaging for rank-one perturbation families.
//!
//! Given a real symmetric matrix `A`, a unit vector `φ` and a weighting
//! measure `ν` on the coupling constant, the averaged measure
//! `κ(B) = ∫ μ_λ(B) dν(λ)` collects the spectral measures `μ_λ` of
//! `A + λ⟨φ,·⟩φ`. This crate evaluates `κ` and its Poisson/Borel transforms,
//! checks the transform identities and Hölder-type bounds that relate `κ` to
//! `ν`, and estimates local scaling exponents of measures.
//!
//! Modules:
//! - [`measure`]: measures on the line, growth functions, UαH scans
//! - [`transform`]: Borel, Poisson and conjugate Poisson transforms
//! - [`operator`]: eigensolver, spectral measures, rank-one families
//! - [`averaging`]: the averaged measure `κ` and its identities
//! - [`continuity`]: scaling exponents and Hausdorff-continuity diagnostics
//! - [`cli`]: the experiment runner behind the `specavg` binary

// NaN-rejecting `!(x > 0.0)` guards are intentional.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod averaging;
pub mod cli;
pub mod config;
pub mod continuity;
pub mod error;
pub mod ladder;
pub mod measure;
pub mod numeric;
pub mod operator;
pub mod quadrature;
pub mod transform;

pub use error::{Error, Result};
