//! The asymmetric Lipschitz metric: candidate loops, exact stretch factors,
//! optimal maps with their tension graphs and gate structures.

mod optimal;
mod simplex;
pub(crate) mod tree;

pub use optimal::{optimal_map, rescale_to_full_tension, GateStructure, GraphMap, TensionReport};
pub use simplex::{minimize, LpOutcome};

use serde::Serialize;

use crate::error::{OskError, Result};
use crate::free_group::CyclicWord;
use crate::marked_graph::{dir, edge_of, rev, Dir, EdgeLoop, MarkedGraph};
use crate::rational::{ln_q, Q};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Shape {
    Circle,
    FigureEight,
    Dumbbell,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Candidate {
    pub shape: Shape,
    pub path: EdgeLoop,
    pub class: CyclicWord,
}

struct Circle {
    dirs: Vec<Dir>,
    edges: u64,
    vertices: u64,
}

/// Embedded circle through the edges in `mask`, read from the origin of its least edge.
fn circle_from_mask(g: &MarkedGraph, mask: u64) -> Option<Circle> {
    let es: Vec<usize> = (0..g.num_edges()).filter(|e| mask >> e & 1 == 1).collect();
    let mut deg = vec![0usize; g.num_vertices()];
    for &e in &es {
        deg[g.edges()[e].from] += 1;
        deg[g.edges()[e].to] += 1;
    }
    if deg.iter().any(|&d| d != 0 && d != 2) {
        return None;
    }
    let mut dirs = vec![dir(es[0], false)];
    let mut used = 1u64 << es[0];
    let start = g.origin(dirs[0]);
    let mut at = g.terminus(dirs[0]);
    while at != start {
        let next = g.star(at).iter().copied().find(|&d| mask >> edge_of(d) & 1 == 1 && used >> edge_of(d) & 1 == 0)?;
        used |= 1 << edge_of(next);
        dirs.push(next);
        at = g.terminus(next);
    }
    if used != mask {
        return None;
    }
    let vertices = dirs.iter().fold(0u64, |m, &d| m | 1 << g.origin(d));
    Some(Circle { dirs, edges: mask, vertices })
}

fn rotate_to(g: &MarkedGraph, c: &[Dir], v: usize) -> Vec<Dir> {
    let i = c.iter().position(|&d| g.origin(d) == v).expect("vertex on circle");
    let mut out = c[i..].to_vec();
    out.extend_from_slice(&c[..i]);
    out
}

fn reversed(c: &[Dir]) -> Vec<Dir> {
    c.iter().rev().map(|&d| rev(d)).collect()
}

/// All embedded circles, figure-eights (both relative orientations) and dumbbells
/// (both relative orientations, one per connecting arc).
pub fn candidates(g: &MarkedGraph) -> Vec<Candidate> {
    let ne = g.num_edges();
    assert!(ne < 64, "candidate enumeration supports fewer than 64 edges");
    let circles: Vec<Circle> = (1u64..1 << ne).filter_map(|m| circle_from_mask(g, m)).collect();
    let mut out: Vec<(Shape, Vec<Dir>)> = circles.iter().map(|c| (Shape::Circle, c.dirs.clone())).collect();
    for (i, c1) in circles.iter().enumerate() {
        for c2 in &circles[i + 1..] {
            if c1.edges & c2.edges != 0 {
                continue;
            }
            let common = c1.vertices & c2.vertices;
            if common.count_ones() == 1 {
                let v = common.trailing_zeros() as usize;
                let a = rotate_to(g, &c1.dirs, v);
                let b = rotate_to(g, &c2.dirs, v);
                out.push((Shape::FigureEight, [a.clone(), b.clone()].concat()));
                out.push((Shape::FigureEight, [a, reversed(&b)].concat()));
            } else if common == 0 {
                for arc in arcs(g, c1, c2) {
                    let a = rotate_to(g, &c1.dirs, g.origin(arc[0]));
                    let b = rotate_to(g, &c2.dirs, g.terminus(*arc.last().unwrap()));
                    let back = reversed(&arc);
                    out.push((Shape::Dumbbell, [a.clone(), arc.clone(), b.clone(), back.clone()].concat()));
                    out.push((Shape::Dumbbell, [a, arc, reversed(&b), back].concat()));
                }
            }
        }
    }
    out.into_iter()
        .map(|(shape, dirs)| {
            let class = g.loop_class(&dirs).expect("embedded loops are essential");
            Candidate { shape, path: EdgeLoop { dirs }, class }
        })
        .collect()
}

/// Embedded arcs from `c1` to `c2` meeting the circles only at their endpoints.
fn arcs(g: &MarkedGraph, c1: &Circle, c2: &Circle) -> Vec<Vec<Dir>> {
    fn go(
        g: &MarkedGraph,
        at: usize,
        blocked: u64,
        c2: &Circle,
        used_edges: u64,
        path: &mut Vec<Dir>,
        out: &mut Vec<Vec<Dir>>,
    ) {
        for &d in g.star(at) {
            let e = edge_of(d);
            if (c2.edges | used_edges) >> e & 1 == 1 {
                continue;
            }
            let w = g.terminus(d);
            if c2.vertices >> w & 1 == 1 {
                path.push(d);
                out.push(path.clone());
                path.pop();
            } else if blocked >> w & 1 == 0 {
                path.push(d);
                go(g, w, blocked | 1 << w, c2, used_edges | 1 << e, path, out);
                path.pop();
            }
        }
    }
    let mut out = Vec::new();
    for v in 0..g.num_vertices() {
        if c1.vertices >> v & 1 == 1 {
            let mut path = Vec::new();
            go(g, v, c1.vertices, c2, c1.edges, &mut path, &mut out);
        }
    }
    out
}

/// Exact maximal stretch `λ` together with a candidate realizing it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Stretch {
    #[serde(with = "crate::rational::serde_q")]
    pub lambda: Q,
    pub witness: CyclicWord,
}

impl Stretch {
    pub fn distance(&self) -> f64 {
        ln_q(&self.lambda)
    }
}

/// Maximal ratio `ℓ(z|Γ′)/ℓ(z|Γ)` over candidates of `Γ`; no normalization required.
pub fn stretch_factor(g: &MarkedGraph, h: &MarkedGraph) -> Result<Stretch> {
    stretch_over(&candidates(g), g, h)
}

/// Stretch over precomputed candidates of `g`.
pub fn stretch_over(cands: &[Candidate], g: &MarkedGraph, h: &MarkedGraph) -> Result<Stretch> {
    if g.rank() != h.rank() {
        return Err(OskError::Rank { expected: g.rank().to_string(), actual: h.rank() });
    }
    let mut best: Option<Stretch> = None;
    for c in cands {
        let r = h.loop_length(&c.class)? / c.path.length(g);
        if best.as_ref().is_none_or(|b| r > b.lambda) {
            best = Some(Stretch { lambda: r, witness: c.class.clone() });
        }
    }
    best.ok_or_else(|| OskError::InvalidGraph("graph has no candidate loops".into()))
}

/// Distance between two volume-1 marked graphs: `λ` exactly and `d = ln λ`.
pub fn lipschitz_distance(g: &MarkedGraph, h: &MarkedGraph) -> Result<Stretch> {
    for x in [g, h] {
        if !x.is_normalized() {
            return Err(OskError::NotNormalized(format!("volume is {}; normalize first", x.volume())));
        }
    }
    stretch_factor(g, h)
}

#[cfg(test)]
mod tests;
