//! Singular expansions of nested infrared integrals.
//!
//! The crate computes expansions of the form `Σ c · t^p · (log t)^m` for
//! families of iterated integrals whose integrand blows up as `t → 0`,
//! checks them against a direct numerical oracle, and provides the
//! piecewise log-power function algebra and Weierstrass-type normalization
//! used to move those results from `t` to a physical variable `φ`.

pub mod cli;
pub mod formf;
pub mod logpow;
pub mod nested;
pub mod oracle;
pub mod prep;
pub mod quad;
pub mod rational;

pub use logpow::{equal_leading, euler_solve, Coefficient, EulerOp, LogPowTerm, SingExpansion};
pub use rational::Rational;
