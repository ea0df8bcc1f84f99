#![cfg_attr(not(any(feature = "std", test)), no_std)]

//! Numerical potential theory for drift-perturbed isotropic stable
//! processes on balls.
//!
//! The toolkit computes the Green, Poisson and Martin kernels of the
//! operator `L = (fractional Laplacian)^(alpha/2) + b . grad` on balls in
//! dimension 2 and 3 from their unperturbed closed forms and an
//! integral-equation fixed point, cross-validates them against an
//! independent Monte Carlo simulation of the underlying jump process, and
//! drives boundary-limit experiments for ratios of singular harmonic
//! functions.
//!
//! Modules follow the pipeline: [`kernels`] (closed forms), [`drift`]
//! (vector fields and their Kato moduli), [`quad`] (grids and weakly
//! singular integration), [`perturb`] (the fixed-point solver and the
//! perturbed kernels), [`sim`] (the Monte Carlo oracle) and [`fatou`]
//! (boundary measures, Martin integrals and non-tangential limits).

extern crate alloc;

pub mod drift;
pub mod error;
pub mod fatou;
pub mod geometry;
pub mod kernels;
pub(crate) mod math;
pub mod par;
pub mod perturb;
pub mod quad;
pub mod sim;

pub use error::{Error, Result};
pub use geometry::{Ball, Point};
pub use kernels::StableIndex;
