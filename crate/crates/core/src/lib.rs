//! Numerical laboratory for Finsler spacetimes.
//!
//! Truncated Taylor jets in the chart variables `(x, ẋ)` carry a Finsler
//! Lagrangian `L` through the whole geometric pipeline (metric, spray,
//! connections, curvature, the vacuum scalar `E`) with exact derivatives.
//! On top of that sit geodesic integration, observer-space quadrature, kinetic
//! gases and a verification suite with independent oracles.

// `!(x > t)` rejects NaN on purpose, and index loops read like the formulas.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod catalog;
pub mod causal;
pub mod cli;
pub mod dynamics;
pub mod expr;
pub mod geodesics;
pub mod geometry;
pub mod jets;
pub mod quadrature;
pub mod report;
pub mod verify;
