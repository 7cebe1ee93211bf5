//! Exact arithmetic for heights, truncated counting functions and S-unit
//! sharing of polynomial value sets over the rationals.
//!
//! Every inequality is decided exactly: log quantities are carried as
//! positive integers ([`heightfn::Magnitude`]) and compared through integer
//! powers. Floating point only ever appears in display strings.

pub mod cli;
pub mod error;
pub mod heightfn;
pub mod polyring;
pub mod qsarith;
pub mod sharing;
pub mod subspace;
pub mod yitrace;

pub use error::{Error, Result};
