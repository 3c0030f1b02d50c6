//! Numerics for the Diamond-Halberstam-Richert weighted sieve applied to
//! products of polynomials at prime arguments.
//!
//! - [`sievefn`]: the Ankeny-Onishi function, sifting limits and the sieve
//!   functions F_g, f_g.
//! - [`bounds`]: the weighted-sum integrals, their closed-form bounds and
//!   the threshold an admissible r must exceed.
//! - [`optimizer`]: parameter search producing minimal admissible r.
//! - [`arith`]: root counts, density sums and empirical almost-prime counts.
//! - [`cli`]: the `dhr` command-line front end.

pub mod arith;
pub mod bounds;
pub mod cli;
pub mod error;
pub mod numeric;
pub mod optimizer;
pub mod sievefn;

pub use error::{Error, Result};
