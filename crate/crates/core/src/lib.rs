//! Discrete quasi-minimizers of anisotropic, non-uniformly elliptic energies
//! and level-set certificates of their local boundedness.
//!
//! The crate is `no_std` (it needs `alloc`). Everything here is a pure
//! function of its inputs; file formats, configuration and the command line
//! live in the `debound` crate.
//!
//! The pieces, bottom-up:
//!
//! * [`exponents`]: the exponent tuple `(p_i, q, γ, r_i, s)`, its derived
//!   quantities (σ_i, harmonic means, Sobolev exponents, conjugates), the
//!   admissibility predicate and every closed-form constant of the level-set
//!   iteration.
//! * [`fields`]: uniform grids on boxes, nodal functions, forward-difference
//!   gradients, discrete Lebesgue norms and super-level sets.
//! * [`integrand`]: the separable model integrand
//!   `Σ λ_i(x)|ξ_i|^{p_i} + c·μ(x)|u|^γ` and the discrete energy.
//! * [`minimize`]: Dirichlet minimization of the discrete energy and a
//!   quasi-minimality check.
//! * [`inequalities`]: empirical constants for the lower energy bound,
//!   anisotropic embedding, Poincaré–Sobolev and Caccioppoli inequalities.
//! * [`degiorgi`]: level/radius sequences, the `J_h` sequence, the two
//!   iteration lemmas, calibration and the L∞ certificate.
#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod degiorgi;
pub mod error;
pub mod exponents;
pub mod fields;
pub mod inequalities;
pub mod integrand;
pub mod minimize;
mod real;

pub use error::{Error, Result};
pub use exponents::{DerivedExponents, Exponent, Exponents, IterationConstants};
pub use fields::{Ball, Grid, GridFunction, Interval, SubBox};
pub use integrand::{ModelIntegrand, WeightField};
