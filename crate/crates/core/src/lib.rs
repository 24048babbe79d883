//! Decision theory over probabilistic answer set programs under the credal
//! semantics.
//!
//! Programs are parsed and grounded by [`lang`], answer sets come from
//! [`stable`], and lower/upper expected utilities are computed either by
//! exhaustive enumeration ([`dt`]) or by compiling the program to a
//! decision-DNNF and evaluating a three-level algebraic model count
//! ([`compile`], [`algebra`], [`treedecomp`]).

pub mod algebra;
pub mod bench;
pub mod cnf;
pub mod compile;
pub mod credal;
pub mod dt;
pub mod error;
pub mod lang;
pub mod stable;
pub mod treedecomp;

pub use error::{Error, ErrorKind, ParseError, Result};
