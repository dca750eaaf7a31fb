//! Exact symmetric TSP solving by repeatedly solving integer 2-matching
//! models and adding subtour elimination constraints for the cycles found.

pub mod backend;
pub mod clustering;
pub mod engine;
pub mod error;
pub mod experiment;
pub mod heuristics;
pub mod instances;
pub mod metrics;
pub mod model;
pub mod subtours;

pub use error::{Error, Result};
