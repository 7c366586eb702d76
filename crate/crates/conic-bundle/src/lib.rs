//! Exact arithmetic for pencils of ternary quadratic forms.
//!
//! A pencil (Q0, Q1) of integral ternary quadratic forms cuts out a surface
//! y0 Q0(x) + y1 Q1(x) = 0 in P^2 x P^1, fibered in conics over P^1. This
//! crate classifies such surfaces (blow-up type of the base locus, Picard
//! rank, eligibility for the rank-2 case), computes every local ingredient
//! of the predicted leading constant for rational points of bounded
//! biprojective height (effective-cone constant, real density, p-adic
//! densities), and enumerates the points themselves exactly via the
//! hyperbola method.
//!
//! Integer arithmetic is exact everywhere: i128 with checked operations in
//! the enumeration cores, arbitrary precision (`num-bigint`) where resultants
//! and discriminants can grow. Floating point appears only in quadrature and
//! Monte Carlo estimates of archimedean quantities, always with reported
//! error estimates and deterministic seeding.

pub mod arith;
pub mod classify;
pub mod conic;
pub mod counting;
pub mod error;
pub mod forms;
pub mod lattice;
pub mod local;
pub mod realdensity;

pub use error::{Error, Result};
