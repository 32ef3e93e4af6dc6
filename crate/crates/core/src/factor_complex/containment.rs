use std::collections::HashMap;

use serde::Serialize;

use super::FreeFactor;
use crate::marked_graph::{dir, CoreGraph, Dir};

/// Vertex map of one canonical core graph into another that carries every labelled
/// edge onto an edge with the same label. It exists iff a conjugate of the first factor
/// lies in the second.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Immersion {
    pub vertex_map: Vec<usize>,
}

/// `(vertex, rose direction) -> terminus` for a folded core graph.
fn transitions(c: &CoreGraph) -> HashMap<(usize, Dir), usize> {
    let mut t = HashMap::new();
    for i in 0..c.edges.len() {
        for rev in [false, true] {
            let d = dir(i, rev);
            t.insert((c.origin(d), c.label(d)), c.terminus(d));
        }
    }
    t
}

/// Searches for a label-preserving immersion of `a`'s core into `b`'s core. The target
/// is folded, so the image of one vertex determines the rest.
pub fn contains(a: &FreeFactor, b: &FreeFactor) -> Option<Immersion> {
    if a.ambient_rank() != b.ambient_rank() || a.rank() > b.rank() {
        return None;
    }
    let (ca, cb) = (a.core(), b.core());
    let tb = transitions(cb);
    let stars = ca.stars();
    'start: for t0 in 0..cb.num_vertices() {
        let mut map = vec![usize::MAX; ca.num_vertices()];
        map[0] = t0;
        let mut stack = vec![0];
        while let Some(v) = stack.pop() {
            for &d in &stars[v] {
                let Some(&w) = tb.get(&(map[v], ca.label(d))) else { continue 'start };
                let u = ca.terminus(d);
                if map[u] == usize::MAX {
                    map[u] = w;
                    stack.push(u);
                } else if map[u] != w {
                    continue 'start;
                }
            }
        }
        return Some(Immersion { vertex_map: map });
    }
    None
}

impl Immersion {
    /// Checks the map edge by edge against the two canonical cores.
    pub fn verify(&self, a: &FreeFactor, b: &FreeFactor) -> bool {
        let (ca, cb) = (a.core(), b.core());
        if self.vertex_map.len() != ca.num_vertices() || self.vertex_map.iter().any(|&v| v >= cb.num_vertices()) {
            return false;
        }
        let tb = transitions(cb);
        (0..ca.edges.len()).all(|i| {
            let d = dir(i, false);
            tb.get(&(self.vertex_map[ca.origin(d)], ca.label(d))) == Some(&self.vertex_map[ca.terminus(d)])
        })
    }
}
