//! Exact homological toolkit for incidence rings of finite graded posets.
//!
//! The crate decides Koszulity of the incidence ring of a graded poset by
//! computing the bigraded Tor table of the normalized bar complex, checks
//! the verdict independently through the quadratic dual coring and the
//! exactness of the Koszul complex, and constructs new Koszul posets by
//! adjoining elements above or below frontiers subject to the pivot
//! conditions (†) and (‡).
//!
//! All arithmetic is exact: rationals via fraction-free elimination, or a
//! prime field selected at call time.

pub mod bar;
pub mod builder;
pub mod linalg;
pub mod poset;
pub mod shriek;
