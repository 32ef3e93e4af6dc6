//! Free factors, certified paths in the free factor complex, and exact rank-2 distances.

mod containment;
mod crossing;
mod factor;
pub mod farey;
mod path;
mod subgraph;

pub use containment::{contains, Immersion};
pub use factor::FreeFactor;
pub use farey::{farey_distance, slope_of, Slope};
pub use path::{certify_adjacent, verify_hop, FactorPath, Hop};
pub use subgraph::{project, proper_subgraphs, subgraph_chain, subgraph_factor};
pub use crossing::{
    crossing_bound_path, distance_bound_factor_to_graph, min_crossings, projection_distance_bound, BoundedPath,
    FactorGraphBound, GraphGraphBound,
};
