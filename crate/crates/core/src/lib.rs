//! Exact computation of the local and global Selmer Hilbert series attached to
//! a hyperbolic curve over Q, of the minimal weight at which the global
//! coefficient sum drops below the local one, and of the resulting explicit
//! upper bounds on rational and S-integral point counts. A separate set of
//! routines covers the sharper series and bounds available for punctured
//! CM elliptic curves and for the polylogarithmic quotient of the thrice
//! punctured line.
//!
//! Series arithmetic is exact: coefficients are arbitrary-precision rationals
//! and no floating point is used anywhere in the series pipeline. Irrational
//! constants (logarithms, pi, square roots) only ever enter through certified
//! interval arithmetic in [`interval`], and reported upper bounds are only
//! ever rounded up.
//!
//! All types are `Send + Sync`; callers may fan grid evaluations out across
//! threads as they see fit.

pub mod bounds;
pub mod cm;
pub mod hilbert;
pub mod interval;
pub mod lambda;
pub mod numth;
pub mod series;
