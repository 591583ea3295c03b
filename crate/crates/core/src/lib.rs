//! Exact lattice-point correlation counts and Kac-Rice nodal-area variance
//! for arithmetic random waves on the three-dimensional torus.
//!
//! The crate is organised bottom-up:
//!
//! * [`lattice`] enumerates `E(m) = {mu in Z^3 : |mu|^2 = m}` and the pair-sum
//!   tables every correlation count is built from.
//! * [`correlations`] turns pair-sum tables into exact censuses of
//!   zero-sum tuples and the exponent monitors reported over ranges of `m`.
//! * [`moments`] evaluates angular moments and torus integrals of products of
//!   the covariance function and its derivatives as exact rationals, and
//!   assembles the leading variance constant.
//! * [`kacrice`] evaluates the two-point function pointwise and integrates it
//!   over the torus.
//! * [`montecarlo`] samples random waves and measures nodal area directly,
//!   giving an independent check of the Kac-Rice numbers.
//!
//! Data-parallel loops go through [`par`], which uses rayon when the
//! `parallel` feature is enabled and plain iterators otherwise. Every
//! floating-point reduction is performed in a fixed order so results do not
//! depend on the thread count.

pub mod correlations;
pub mod error;
pub mod kacrice;
pub mod lattice;
pub mod moments;
pub mod montecarlo;
pub mod par;
pub mod quadrature;
pub mod report;

pub use error::{Error, Result};
pub use lattice::{LatticePoint, LatticeSet, PairSumTable};
