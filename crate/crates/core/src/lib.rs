pub mod error;
pub mod factor_complex;
pub mod folding;
pub mod free_group;
pub mod harness;
pub mod lipschitz;
pub mod marked_graph;
pub mod projections;
pub mod rational;
pub mod whitehead;

pub use error::{OskError, Result};
pub use rational::Q;
