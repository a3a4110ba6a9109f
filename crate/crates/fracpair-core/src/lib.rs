//! Fractional-order differentiation that actually commutes.
//!
//! The Riemann-Liouville differintegral `D^p` composes cleanly when
//! integrating, but `D^q D^p f` and `D^{p+q} f` differ by initial-value
//! terms once derivatives are involved. This crate splits a `C^k` function
//! into a pair: a remainder `f_a` whose leading Taylor data at the base
//! point vanishes, and a finitely supported coefficient sequence carrying
//! that Taylor data. On the pair, `D^p` acts componentwise — numerically on
//! the remainder, as an exact exponent shift on the sequence — and the
//! resulting operator commutes with itself while still evaluating like the
//! plain differintegral after reconstruction.
//!
//! Modules:
//!
//! - [`special`]: gamma and reciprocal gamma with exact zeros at the poles.
//! - [`quad`]: Gauss-Jacobi quadrature for the weakly singular kernel.
//! - [`sigma`]: coefficient sequences with real exponents and the shift
//!   operator.
//! - [`rlnum`]: function handles, fractional integrals/derivatives, the
//!   closed-form power rule and the Taylor map.
//! - [`pairspace`]: decomposition, reconstruction and the pair derivative.
//! - [`catalog`]: test functions with known smoothness and closed forms.
//! - [`verify`]: residual checks for every operator identity the pair
//!   construction claims, reported as [`verify::CheckReport`]s.
//!
//! The crate is `no_std` (with `alloc`); IO, serialization and the CLI live
//! in the companion `fracpair-cli` crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod catalog;
pub mod pairspace;
pub mod quad;
pub mod rlnum;
pub mod sigma;
pub mod special;
pub mod verify;

pub use pairspace::{DiffPair, TaylorOrder};
pub use rlnum::{FnHandle, QuadSpec, RlError, Smoothness};
pub use sigma::{ShiftConvention, SigmaSeq};
pub use verify::{CheckReport, Convention, GridSpec, Verdict};
