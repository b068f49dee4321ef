//! Desk-scale numerics for Strichartz losses near gliding rays in a strictly convex model domain.

// `!(x > 0.0)` is the NaN-rejecting form used throughout.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod airy;
pub mod cli;
pub mod cusp;
pub mod field;
pub mod gallery;
pub mod normlab;
pub mod oscillatory;
pub mod params;
