//! Exact-arithmetic models of Cohn-Leavitt path algebras of separated
//! graphs.
//!
//! The crate builds, for any finite separated graph, a branching system of
//! half-open rational intervals; realizes the induced representation of the
//! algebra as operators on finitely supported rational-valued functions; and
//! decides operator vanishing exactly. On graphs with one common source,
//! injective range and no loops the representation is a faithful model of
//! the abelianized algebra, which the crate verifies with randomized trials,
//! exhaustive relation checks, and exact rank computations.
//!
//! Everything is computed over arbitrary-precision rationals; there is no
//! floating point and no tolerance anywhere.

pub mod algebra;
pub mod branching;
pub mod freeproduct;
pub mod graph;
pub mod interval;
pub mod rational;
pub mod representation;
