//! The chapters of the guide in `book/src`, compiled as doc-tests so every
//! snippet there keeps running against the current library.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/events-and-graphs.md")]
pub mod events_and_graphs {}

#[doc = include_str!("../../../book/src/graph-invariants.md")]
pub mod graph_invariants {}

#[doc = include_str!("../../../book/src/paradoxes.md")]
pub mod paradoxes {}

#[doc = include_str!("../../../book/src/construction.md")]
pub mod construction {}

#[doc = include_str!("../../../book/src/local-bound.md")]
pub mod local_bound {}

#[doc = include_str!("../../../book/src/inequalities.md")]
pub mod inequalities {}

#[doc = include_str!("../../../book/src/command-line.md")]
pub mod command_line {}

#[doc = include_str!("../../../README.md")]
pub mod readme {}
