//! Exact computer algebra for triangular polynomial automorphisms of affine
//! space and triangular derivations of the polynomial ring over the
//! rationals.
//!
//! - [`poly`]: sparse multivariate polynomials with `BigRational` coefficients
//! - [`triaut`]: triangular automorphisms, composition, inversion,
//!   commutators and elementary factorization
//! - [`deriv`]: triangular derivations, brackets, nilpotency indices and the
//!   exponential map
//! - [`liealg`]: bracket closure, lower central and derived series
//! - [`witness`]: word evaluation, property harnesses and the non-connected
//!   counterexample
//! - [`text`]: the text grammar shared with the command-line tool

pub mod deriv;
pub mod error;
pub mod liealg;
pub mod poly;
pub mod text;
pub mod triaut;
pub mod witness;

pub use deriv::TriangularDerivation;
pub use error::{Error, Result};
pub use liealg::{lie_closure, LieBasis};
pub use poly::{Degree, Monomial, Polynomial, Rational};
pub use triaut::{DegreeClass, Elementary, TriangularAutomorphism};
pub use witness::{GeneratorTable, GroupWord, Letter};
