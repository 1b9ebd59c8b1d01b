//! Numerical workbench for curvature-operator calculus on oriented
//! Riemannian 4-manifolds.
//!
//! The crate is organized around a small linear-algebra layer for
//! bivectors and curvature operators (`alg4`, `curvops`), a scalar
//! expression language with forward-mode jets (`exprfield`), chart-level
//! tensor calculus and quadrature (`chartgeom`), and on top of those the
//! geometric experiments: transgression forms for connections with
//! torsion (`transgression`), almost-complex angle functions
//! (`almost_complex`), residue extraction at metric singularities
//! (`residues`), and an 8-dimensional quaternionic module (`quat8`).
//!
//! Every numerical claim the crate makes is packaged as a [`checks::Check`]
//! so the command-line driver and the test suite report identical numbers.

pub mod alg4;
pub mod almost_complex;
pub mod chartgeom;
pub mod residues;
pub mod curvops;
pub mod exprfield;
pub mod quat8;
pub mod transgression;
