//! Numerics for double-phase elliptic problems with variable exponents.
//!
//! The crate is `no_std` (it needs `alloc`). Enable the `std` feature to route
//! floating-point transcendental functions through the platform libm instead
//! of the pure-Rust `libm` crate; results agree to the last few ulps.
//!
//! Layout:
//!
//! - [`expr`]: the textual field language for exponents and coefficients.
//! - [`mesh`]: P1 triangulations, nodal functions and quadrature.
//! - [`field`]: fields sampled at quadrature points of a mesh.
//! - [`modular`]: Musielak-Orlicz modulars and Luxemburg norms.
//! - [`operator`]: discrete energies, their derivatives and inequality kernels.
//! - [`descent`]: steepest descent with Armijo backtracking.
//! - [`nonvar`]: the gradient-dependent (convective) problem.
//! - [`var`]: the parametric variational problem.
//! - [`analysis`]: hypothesis checks and analytic constants.
#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod analysis;
pub mod descent;
pub mod expr;
pub mod field;
pub mod mesh;
pub mod modular;
pub mod nonvar;
pub mod operator;
pub mod var;

mod math;

pub use expr::{parse_expr, DomainSpec, Expr, ScalarField};
pub use field::{DoublePhase, Reaction, SampledField};
pub use mesh::{DiscreteFunction, Mesh, Quadrature};
