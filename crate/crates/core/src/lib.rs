//! Testing-based posterior contraction for Gaussian models with unknown variance.
//!
//! The crate is organised bottom-up:
//!
//! - [`stat`]: the metric on `(mean, sd)` pairs, Gaussian sampling, exact and
//!   bounded chi-squared tails, L1-norm concentration.
//! - [`hypothesis`]: the four-case local test, the max-combined global test over
//!   a sieve cover, and Monte Carlo error estimation.
//! - [`contraction`]: Kullback-Leibler quantities, variance-prior audits,
//!   prior-mass estimates and posterior contraction diagnostics.
//! - [`highdim`]: sparse regression with a spike-and-slab prior and unknown
//!   variance (enumeration and MCMC posteriors).
//! - [`spline`]: adaptive B-spline regression with a prior on the basis
//!   dimension.
//!
//! Every stochastic routine takes an explicit seed; see [`rng`].

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod contraction;
pub mod data;
pub mod error;
pub mod highdim;
pub mod hypothesis;
pub mod marginal;
pub mod quadrature;
pub mod rng;
pub mod spline;
pub mod stat;

pub use error::{Error, Result};
pub use stat::{metric_d, Observation, ParamPoint};
