//! Operational shell around the surface construction: meshing of solved
//! surfaces, geometric diagnostics (discrete mean curvature, area growth,
//! symmetry-curve structure), OBJ export, result persistence, and the CLI.

pub mod cli;
pub mod csvout;
pub mod diag;
pub mod mesh;
pub mod obj;
pub mod persist;
