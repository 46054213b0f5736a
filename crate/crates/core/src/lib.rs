//! Combinatorics of algebraic zip data.
//!
//! * [`rootdata`]: root systems, Weyl groups, reduced words, lengths.
//! * [`parabolic`]: `^J W`, `^J W^K`, Bruhat order, double-coset fibers.
//! * [`zipcomb`]: zip data, the closure order on `^J W`, strata posets,
//!   Bruhat-stratum projection, and the smaller-datum recursion.
//! * [`finitezip`]: a brute-force `GL_n` oracle over small finite fields.

pub mod finitezip;
pub mod parabolic;
pub mod parallel;
pub mod rootdata;
pub mod zipcomb;

pub use parallel::Execution;
pub use rootdata::{CartanSpec, ElemId, NodeSet, RootSystem, Side, WeylElement, WeylGroup};
