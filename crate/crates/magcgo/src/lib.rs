//! Desk-scale numerics for complex geometrical optics (CGO) solutions of
//! magnetic Schrödinger operators on warped cylinders: discrete geometry,
//! mollification, the ∂̄ solve, remainder construction, Carleman checks,
//! integral identities and a regularized recovery of the electric potential.

pub mod carleman;
pub mod cgo;
pub mod config;
pub mod dbar;
pub mod error;
pub mod geometry;
pub mod identity;
pub mod linsolve;
pub mod mollify;
pub mod presets;
pub mod quad;
pub mod recover;
pub mod report;

pub use error::{LabError, Result};

pub type C64 = num_complex::Complex64;
