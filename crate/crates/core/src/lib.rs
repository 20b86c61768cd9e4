//! Construction and verification of singly-periodic Scherk-type minimal
//! surfaces of arbitrary genus.
//!
//! The pipeline runs from flat singular geometry to points in space:
//! periodic Schwarz-Christoffel developing maps ([`scmap`]) produce a pair
//! of conjugate zigzag boundaries ([`orthodisk`]); a Gauss-Newton solver
//! ([`solver`]) balances the pair's edge lengths and end angle; the solved
//! data feed the Weierstrass representation ([`weierstrass`]) which
//! integrates to an immersion.  The [`forces`] module carries the
//! node-configuration balance machinery that governs the small-angle limit
//! of the family, and [`beltrami`] the piecewise-affine deformation
//! calculus used to certify local rigidity identities.  Shared quadrature
//! and lattice-sum kernels live in [`numerics`].

pub mod beltrami;
pub mod forces;
pub mod numerics;
pub mod orthodisk;
pub mod scmap;
pub mod solver;
pub mod weierstrass;

pub use num_complex::Complex64;
