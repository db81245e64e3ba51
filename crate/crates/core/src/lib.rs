//! Exclusivity graphs of measurement scenarios, Hardy-type paradoxes, and
//! their classical, local-quantum and contextual-quantum bounds.
//!
//! ```
//! use exclusivity::quantum::{chsh_construction, model_vertex_probabilities};
//!
//! let model = chsh_construction();
//! let p = model_vertex_probabilities(&model);
//! let first = p[&model.vertex_with_label(1).unwrap()].exact.unwrap();
//! let last = p[&model.vertex_with_label(8).unwrap()].exact.unwrap();
//! assert_eq!((first + last).to_string(), "1/6");
//! ```

// `!(x >= 0.0)` is used on purpose: it also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod behavior;
pub mod classical;
pub mod graphs;
pub mod inequalities;
pub mod optimize;
pub mod paradox;
pub mod quantum;
pub mod scenario;
pub mod vector;

pub use behavior::Behavior;
pub use paradox::ParadoxSpec;
pub use scenario::{Event, ExclusivityGraph, Scenario, VertexId};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
