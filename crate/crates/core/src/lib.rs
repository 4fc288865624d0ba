//! Duality toolkit for stochastic processes on finite filtered probability
//! spaces.
//!
//! The crate models a finite outcome set with a refining filtration, raw and
//! adapted processes, random measure pairs, three families of law-invariant
//! seminorms with their polars, quotient seminorms computed by linear
//! programming, and Doob decompositions. Every identity and inequality of the
//! theory has a checker in [`verify`] that reports a signed margin and a
//! witness.

pub mod audit;
pub mod doob;
pub mod duality;
pub mod error;
pub mod linalg;
pub mod lp;
pub mod measures;
pub mod norms;
pub mod process;
pub mod report;
pub mod sample;
pub mod scenario;
pub mod space;
pub mod verify;

pub use error::{Error, Result};
