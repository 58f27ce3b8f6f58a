//! Reference-based kernels and mappings for one-class classification.
//!
//! A base RBF kernel is re-expressed through a set of reference vectors `R`:
//! samples are mapped to `φ(x) = Λ_r^{-1/2} U_rᵀ 𝓀_R(x)` from the truncated
//! eigendecomposition of the centered reference kernel, and the induced kernel
//! `𝓀_R(a)ᵀ 𝒦_RR⁺ 𝓀_R(b)` is fed to SVDD or the one-class SVM either as a
//! precomputed matrix or as explicit linear features.

pub mod cli;
pub mod data;
pub mod error;
pub mod experiment;
pub mod kernel;
pub mod linalg;
pub mod persist;
pub mod pipeline;
pub mod reference;
pub mod selfcheck;
pub mod solver;

pub use error::{Error, Result};
