//! Resolvent-type mappings on CAT(0) spaces.
//!
//! The crate is organized bottom-up:
//!
//! - [`geometry`]: model spaces (Euclidean, Poincaré half-plane, k-spider),
//!   geodesic combination, quasi-linearization and segment projection.
//! - [`resolvents`]: catalog of families `γ ↦ T_γ` (proximal mappings,
//!   resolvents of nonexpansive maps and of monotone linear operators) with
//!   analytic fixed-point sets.
//! - [`checkers`]: sampled verification of mutual firm nonexpansiveness,
//!   mutual (P₂), the resolvent identity and the uniform (P₂) inequalities.
//! - [`rates`]: explicit metastability and convergence bounds together with
//!   brute-force witness finders.
//! - [`engine`]: proximal point iterations, resolvent curves, divergence
//!   moduli for step schedules and verification of the bounds on traces.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod checkers;
pub mod engine;
pub mod error;
pub mod geometry;
pub mod rates;
pub mod resolvents;
pub mod sampling;

pub use error::{Error, Result};
pub use geometry::{Point, Space};
