//! A graph together with an edge-isometric map to a fixed codomain, and its speed-1 fold.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::Zero;

use crate::error::{OskError, Result};
use crate::lipschitz::tree::Piece;
use crate::lipschitz::GateStructure;
use crate::marked_graph::{dir, edge_of, is_reversed, rev, tighten_path, Dir, Edge, MarkedGraph, UnionFind};
use crate::rational::Q;

/// Germ of a codomain path: its first direction and the offset it starts from.
pub(crate) type Germ = (Dir, Q);

#[derive(Debug, Clone)]
pub(crate) struct State {
    pub graph: MarkedGraph,
    /// Image of each edge read forward, as pieces of codomain directions.
    pub images: Vec<Vec<Piece>>,
}

pub(crate) fn reverse_pieces(p: &[Piece], codomain: &MarkedGraph) -> Vec<Piece> {
    p.iter()
        .rev()
        .map(|x| {
            let l = codomain.length(x.dir);
            Piece { dir: rev(x.dir), from: l - &x.to, to: l - &x.from }
        })
        .collect()
}

/// The part of a piece path between arclengths `a` and `b`.
fn slice(p: &[Piece], a: &Q, b: &Q) -> Vec<Piece> {
    let mut out = Vec::new();
    let mut at = Q::zero();
    for x in p {
        let next = &at + x.len();
        let lo = a.max(&at).clone();
        let hi = b.min(&next).clone();
        if lo < hi {
            out.push(Piece { dir: x.dir, from: &x.from + (&lo - &at), to: &x.from + (&hi - &at) });
        }
        at = next;
    }
    out
}

/// Length of the longest common initial subpath.
fn common_prefix(p: &[Piece], q: &[Piece]) -> Q {
    let mut total = Q::zero();
    for (x, y) in p.iter().zip(q) {
        if x.dir != y.dir || x.from != y.from {
            break;
        }
        total += x.to.clone().min(y.to.clone()) - &x.from;
        if x.to != y.to {
            break;
        }
    }
    total
}

/// Result of folding by some amount: the new state and each old edge as a path in it.
pub(crate) struct Folded {
    pub state: State,
    pub edge_map: Vec<Vec<Dir>>,
}

impl State {
    pub fn image_from(&self, d: Dir, codomain: &MarkedGraph) -> Vec<Piece> {
        let p = &self.images[edge_of(d)];
        if is_reversed(d) {
            reverse_pieces(p, codomain)
        } else {
            p.clone()
        }
    }

    pub fn germ(&self, d: Dir, codomain: &MarkedGraph) -> Germ {
        let p = self.image_from(d, codomain);
        (p[0].dir, p[0].from.clone())
    }

    pub fn gates(&self, codomain: &MarkedGraph) -> GateStructure {
        GateStructure::from_germs(&self.graph, |_| true, |d| Some(self.germ(d, codomain)))
    }

    /// Gates with at least two directions.
    pub fn folding_gates(&self, codomain: &MarkedGraph) -> Vec<Vec<Dir>> {
        self.gates(codomain).gates.into_iter().flatten().filter(|g| g.len() >= 2).collect()
    }

    /// Largest amount all illegal turns can fold before the combinatorics change.
    pub fn max_step(&self, codomain: &MarkedGraph) -> Option<Q> {
        let gates = self.folding_gates(codomain);
        if gates.is_empty() {
            return None;
        }
        let mut ends = vec![0u8; self.graph.num_edges()];
        for &d in gates.iter().flatten() {
            ends[edge_of(d)] += 1;
        }
        let mut best: Option<Q> = None;
        let mut offer = |x: Q| {
            if best.as_ref().is_none_or(|b| &x < b) {
                best = Some(x);
            }
        };
        for g in &gates {
            let first = self.image_from(g[0], codomain);
            for &d in &g[1..] {
                offer(common_prefix(&first, &self.image_from(d, codomain)));
            }
            for &d in g {
                let e = edge_of(d);
                offer(self.graph.edges()[e].length.clone() / Q::from_integer(ends[e].into()));
            }
        }
        best
    }

    /// Identifies the initial segments of length `r` of all directions in each gate.
    /// Requires `0 < r ≤ max_step`.
    pub fn fold(&self, r: &Q, codomain: &MarkedGraph) -> Result<Folded> {
        let g = &self.graph;
        let gates = self.folding_gates(codomain);
        let mut cuts: Vec<BTreeSet<Q>> = vec![BTreeSet::new(); g.num_edges()];
        for &d in gates.iter().flatten() {
            let l = g.length(d);
            if r < l {
                cuts[edge_of(d)].insert(if is_reversed(d) { l - r } else { r.clone() });
            } else if r > l {
                return Err(OskError::Folding("fold amount exceeds an edge".into()));
            }
        }
        // subdivide
        let mut nv = g.num_vertices();
        let mut pieces: Vec<Edge> = Vec::new();
        let mut piece_images: Vec<Vec<Piece>> = Vec::new();
        let mut of_edge: Vec<Vec<usize>> = Vec::with_capacity(g.num_edges());
        for (e, ed) in g.edges().iter().enumerate() {
            let mut ids = Vec::new();
            let mut prev_v = ed.from;
            let mut prev_o = Q::zero();
            let mut points: Vec<Q> = cuts[e].iter().cloned().collect();
            points.push(ed.length.clone());
            let last = points.len() - 1;
            for (i, o) in points.into_iter().enumerate() {
                let v = if i == last {
                    ed.to
                } else {
                    nv += 1;
                    nv - 1
                };
                ids.push(pieces.len());
                piece_images.push(slice(&self.images[e], &prev_o, &o));
                pieces.push(Edge { from: prev_v, to: v, length: &o - &prev_o });
                prev_v = v;
                prev_o = o;
            }
            of_edge.push(ids);
        }
        let expand = |d: Dir| -> Vec<Dir> {
            let ids = &of_edge[edge_of(d)];
            if is_reversed(d) {
                ids.iter().rev().map(|&i| dir(i, true)).collect()
            } else {
                ids.iter().map(|&i| dir(i, false)).collect()
            }
        };
        let p_terminus = |d: Dir| if is_reversed(d) { pieces[edge_of(d)].from } else { pieces[edge_of(d)].to };
        // identify
        let mut vu = UnionFind::new(nv);
        let mut du = UnionFind::new(2 * pieces.len());
        for gate in &gates {
            let firsts: Vec<Dir> = gate.iter().map(|&d| expand(d)[0]).collect();
            for &x in &firsts[1..] {
                let y = firsts[0];
                if pieces[edge_of(x)].length != pieces[edge_of(y)].length {
                    return Err(OskError::Folding("identified segments differ in length".into()));
                }
                du.union(x, y);
                du.union(rev(x), rev(y));
                vu.union(p_terminus(x), p_terminus(y));
            }
        }
        // quotient
        let mut rep: BTreeMap<usize, Dir> = BTreeMap::new();
        for x in 0..2 * pieces.len() {
            let root = du.find(x);
            rep.entry(root).or_insert(x);
        }
        let mut rep_of = |x: Dir| rep[&du.find(x)];
        let mut new_edge: BTreeMap<Dir, usize> = BTreeMap::new();
        let mut vid: BTreeMap<usize, usize> = BTreeMap::new();
        let vertex_id = |vu: &mut UnionFind, v: usize, vid: &mut BTreeMap<usize, usize>| {
            let root = vu.find(v);
            let n = vid.len();
            *vid.entry(root).or_insert(n)
        };
        for v in 0..nv {
            vertex_id(&mut vu, v, &mut vid);
        }
        let mut edges = Vec::new();
        let mut images = Vec::new();
        let mut piece_dir = vec![0; 2 * pieces.len()];
        for p in 0..pieces.len() {
            let (f, b) = (rep_of(dir(p, false)), rep_of(dir(p, true)));
            if f == b {
                return Err(OskError::Folding("a segment was identified with its reverse".into()));
            }
            let key = f.min(b);
            let id = match new_edge.get(&key) {
                Some(&id) => id,
                None => {
                    let id = edges.len();
                    new_edge.insert(key, id);
                    let src = key;
                    let pe = &pieces[edge_of(src)];
                    let (from, to) = if is_reversed(src) { (pe.to, pe.from) } else { (pe.from, pe.to) };
                    edges.push(Edge {
                        from: vertex_id(&mut vu, from, &mut vid),
                        to: vertex_id(&mut vu, to, &mut vid),
                        length: pe.length.clone(),
                    });
                    let img = &piece_images[edge_of(src)];
                    images.push(if is_reversed(src) { reverse_pieces(img, codomain) } else { img.clone() });
                    id
                }
            };
            piece_dir[dir(p, false)] = dir(id, f != key);
            piece_dir[dir(p, true)] = dir(id, b != key);
        }
        let translate = |d: Dir| -> Vec<Dir> { expand(d).into_iter().map(|x| piece_dir[x]).collect() };
        let marking = g
            .marking()
            .iter()
            .map(|p| tighten_path(&p.iter().flat_map(|&d| translate(d)).collect::<Vec<_>>()))
            .collect();
        let graph = MarkedGraph::new_relaxed(vid.len(), edges, marking)?;
        let edge_map = (0..g.num_edges()).map(|e| translate(dir(e, false))).collect();
        Ok(Folded { state: State { graph, images }, edge_map })
    }
}
