//! Marked metric graphs: points of unprojectivized Outer space.
//!
//! An oriented edge (a "direction" when read at its origin) is encoded as
//! `2e` for edge `e` traversed forward and `2e + 1` for its reverse.

mod core_graph;
mod json;

pub use core_graph::{girth, shortest_cycle, CoreEdge, CoreGraph};
pub use json::GraphJson;

use std::collections::VecDeque;

use num_traits::{One, Signed, Zero};

use crate::error::{OskError, Result};
use crate::free_group::{Automorphism, CyclicWord, Letter, Word};
use crate::rational::Q;

pub type Dir = usize;

pub fn dir(edge: usize, reversed: bool) -> Dir {
    2 * edge + usize::from(reversed)
}

pub fn edge_of(d: Dir) -> usize {
    d >> 1
}

pub fn rev(d: Dir) -> Dir {
    d ^ 1
}

pub fn is_reversed(d: Dir) -> bool {
    d & 1 == 1
}

/// Signed 1-based id used in the JSON interchange.
pub fn signed_id(d: Dir) -> i64 {
    let id = edge_of(d) as i64 + 1;
    if is_reversed(d) {
        -id
    } else {
        id
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Edge {
    pub from: usize,
    pub to: usize,
    pub length: Q,
}

/// Freely reduces a sequence of directions as a path.
pub fn tighten_path(dirs: &[Dir]) -> Vec<Dir> {
    let mut out: Vec<Dir> = Vec::with_capacity(dirs.len());
    for &d in dirs {
        if out.last() == Some(&rev(d)) {
            out.pop();
        } else {
            out.push(d);
        }
    }
    out
}

/// Freely and cyclically reduces a closed path.
pub fn tighten_loop(dirs: &[Dir]) -> Vec<Dir> {
    let mut v = tighten_path(dirs);
    let mut i = 0;
    let mut j = v.len();
    while j - i >= 2 && v[i] == rev(v[j - 1]) {
        i += 1;
        j -= 1;
    }
    v.truncate(j);
    v.drain(..i);
    v
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct Pi1 {
    /// Direction from the tree parent into each vertex; `None` at the base.
    parent: Vec<Option<Dir>>,
    /// Index of the free generator carried by each non-tree edge.
    generator: Vec<Option<usize>>,
    /// Each non-tree generator written in the marked basis.
    in_basis: Vec<Word>,
}

/// A connected metric graph with a marking: for each basis generator, a closed
/// edge path at `base` such that the induced map on fundamental groups is an isomorphism.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MarkedGraph {
    rank: usize,
    num_vertices: usize,
    edges: Vec<Edge>,
    marking: Vec<Vec<Dir>>,
    base: usize,
    star: Vec<Vec<Dir>>,
    pi1: Pi1,
}

impl MarkedGraph {
    /// Validated constructor: every vertex must have valence at least 3.
    pub fn new(num_vertices: usize, edges: Vec<Edge>, marking: Vec<Vec<Dir>>) -> Result<Self> {
        let g = Self::new_relaxed(num_vertices, edges, marking)?;
        if let Some(v) = (0..g.num_vertices).find(|&v| g.star[v].len() < 3) {
            return Err(OskError::InvalidGraph(format!(
                "vertex {v} has valence {}",
                g.star[v].len()
            )));
        }
        Ok(g)
    }

    /// Like [`MarkedGraph::new`] but allows vertices of valence 1 or 2.
    pub fn new_relaxed(
        num_vertices: usize,
        edges: Vec<Edge>,
        marking: Vec<Vec<Dir>>,
    ) -> Result<Self> {
        let rank = marking.len();
        if rank < 2 {
            return Err(OskError::Input(format!("rank must be at least 2, got {rank}")));
        }
        if num_vertices == 0 {
            return Err(OskError::InvalidGraph("no vertices".into()));
        }
        let mut star = vec![Vec::new(); num_vertices];
        for (i, e) in edges.iter().enumerate() {
            if e.from >= num_vertices || e.to >= num_vertices {
                return Err(OskError::InvalidGraph(format!("edge {i} has an unknown endpoint")));
            }
            if !e.length.is_positive() {
                return Err(OskError::InvalidGraph(format!("edge {i} has nonpositive length")));
            }
            star[e.from].push(dir(i, false));
            star[e.to].push(dir(i, true));
        }
        if edges.len() + 1 != num_vertices + rank {
            return Err(OskError::Rank {
                expected: format!("{rank}"),
                actual: (edges.len() + 1).saturating_sub(num_vertices),
            });
        }
        let origin = |d: Dir| if is_reversed(d) { edges[edge_of(d)].to } else { edges[edge_of(d)].from };
        let terminus = |d: Dir| origin(rev(d));
        let base = match marking.iter().find(|p| !p.is_empty()) {
            Some(p) => origin(p[0]),
            None => return Err(OskError::InvalidGraph("marking paths are empty".into())),
        };
        for (i, p) in marking.iter().enumerate() {
            if p.iter().any(|&d| edge_of(d) >= edges.len()) {
                return Err(OskError::InvalidGraph(format!("marking path {i} uses an unknown edge")));
            }
            let mut at = base;
            for &d in p {
                if origin(d) != at {
                    return Err(OskError::InvalidGraph(format!("marking path {i} is not a path")));
                }
                at = terminus(d);
            }
            if at != base {
                return Err(OskError::InvalidGraph(format!("marking path {i} is not closed at the base")));
            }
        }

        let mut parent: Vec<Option<Dir>> = vec![None; num_vertices];
        let mut seen = vec![false; num_vertices];
        let mut tree = vec![false; edges.len()];
        seen[base] = true;
        let mut queue = VecDeque::from([base]);
        while let Some(v) = queue.pop_front() {
            for &d in &star[v] {
                let w = terminus(d);
                if !seen[w] {
                    seen[w] = true;
                    parent[w] = Some(d);
                    tree[edge_of(d)] = true;
                    queue.push_back(w);
                }
            }
        }
        if seen.iter().any(|s| !s) {
            return Err(OskError::Disconnected);
        }
        let mut generator = vec![None; edges.len()];
        let mut k = 0;
        for (e, t) in tree.iter().enumerate() {
            if !t {
                generator[e] = Some(k);
                k += 1;
            }
        }
        let y_word = |p: &[Dir]| {
            Word::reduce(p.iter().filter_map(|&d| {
                generator[edge_of(d)].map(|j| {
                    let l = j as Letter + 1;
                    if is_reversed(d) {
                        -l
                    } else {
                        l
                    }
                })
            }))
        };
        let images: Vec<Word> = marking.iter().map(|p| y_word(p)).collect();
        let inv = Automorphism::from_images(images)
            .map_err(|_| OskError::InvalidGraph("marking is not a homotopy equivalence".into()))?
            .inverse()?;
        let pi1 = Pi1 { parent, generator, in_basis: inv.images().to_vec() };
        Ok(MarkedGraph { rank, num_vertices, edges, marking, base, star, pi1 })
    }

    pub fn rose(lengths: &[Q]) -> Result<Self> {
        if lengths.iter().any(|l| !l.is_positive()) {
            return Err(OskError::Input("rose petal lengths must be positive".into()));
        }
        let edges = lengths.iter().map(|l| Edge { from: 0, to: 0, length: l.clone() }).collect();
        let marking = (0..lengths.len()).map(|i| vec![dir(i, false)]).collect();
        Self::new(1, edges, marking)
    }

    /// Two vertices joined by three edges; `a = e0 ē2`, `b = e1 ē2`.
    pub fn theta(lengths: [Q; 3]) -> Result<Self> {
        let edges = lengths.into_iter().map(|length| Edge { from: 0, to: 1, length }).collect();
        let marking = vec![vec![dir(0, false), dir(2, true)], vec![dir(1, false), dir(2, true)]];
        Self::new(2, edges, marking)
    }

    /// Loop `e0` at vertex 0, bar `e1` from 0 to 1, loop `e2` at vertex 1; `a = e0`, `b = e1 e2 ē1`.
    pub fn barbell(lengths: [Q; 3]) -> Result<Self> {
        let [l0, l1, l2] = lengths;
        let edges = vec![
            Edge { from: 0, to: 0, length: l0 },
            Edge { from: 0, to: 1, length: l1 },
            Edge { from: 1, to: 1, length: l2 },
        ];
        let marking = vec![vec![dir(0, false)], vec![dir(1, false), dir(2, false), dir(1, true)]];
        Self::new(2, edges, marking)
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn num_vertices(&self) -> usize {
        self.num_vertices
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn marking(&self) -> &[Vec<Dir>] {
        &self.marking
    }

    pub fn base(&self) -> usize {
        self.base
    }

    pub fn length(&self, d: Dir) -> &Q {
        &self.edges[edge_of(d)].length
    }

    pub fn origin(&self, d: Dir) -> usize {
        let e = &self.edges[edge_of(d)];
        if is_reversed(d) {
            e.to
        } else {
            e.from
        }
    }

    pub fn terminus(&self, d: Dir) -> usize {
        self.origin(rev(d))
    }

    /// Directions with origin `v`; a loop contributes both of its ends.
    pub fn star(&self, v: usize) -> &[Dir] {
        &self.star[v]
    }

    pub fn valence(&self, v: usize) -> usize {
        self.star[v].len()
    }

    pub fn volume(&self) -> Q {
        self.edges.iter().map(|e| e.length.clone()).sum()
    }

    pub fn is_normalized(&self) -> bool {
        self.volume().is_one()
    }

    pub fn scaled(&self, factor: &Q) -> MarkedGraph {
        let mut g = self.clone();
        for e in &mut g.edges {
            e.length = &e.length * factor;
        }
        g
    }

    pub fn normalize(&self) -> MarkedGraph {
        self.scaled(&(Q::one() / self.volume()))
    }

    /// Same graph and marking with new edge lengths.
    pub fn with_lengths(&self, lengths: &[Q]) -> Result<MarkedGraph> {
        if lengths.len() != self.edges.len() || lengths.iter().any(|l| !l.is_positive()) {
            return Err(OskError::Input("need one positive length per edge".into()));
        }
        let mut g = self.clone();
        for (e, l) in g.edges.iter_mut().zip(lengths) {
            e.length = l.clone();
        }
        Ok(g)
    }

    pub fn path_length(&self, dirs: &[Dir]) -> Q {
        dirs.iter().map(|&d| self.length(d).clone()).sum()
    }

    /// Tree path from the base to `v`.
    pub fn tree_path(&self, mut v: usize) -> Vec<Dir> {
        let mut out = Vec::new();
        while let Some(d) = self.pi1.parent[v] {
            out.push(d);
            v = self.origin(d);
        }
        out.reverse();
        out
    }

    /// Element of the marked group read along a path; exact for closed paths at the base.
    pub fn path_word(&self, dirs: &[Dir]) -> Word {
        let mut ls = Vec::new();
        for &d in dirs {
            if let Some(j) = self.pi1.generator[edge_of(d)] {
                let w = &self.pi1.in_basis[j];
                if is_reversed(d) {
                    ls.extend(w.inverse().letters());
                } else {
                    ls.extend(w.letters());
                }
            }
        }
        Word::reduce(ls)
    }

    /// Conjugacy class of a closed path.
    pub fn loop_class(&self, dirs: &[Dir]) -> Result<CyclicWord> {
        CyclicWord::new(&self.path_word(dirs))
    }

    /// Unreduced concatenation of marking paths spelling `w`.
    pub fn spell(&self, w: &Word) -> Vec<Dir> {
        let mut out = Vec::new();
        for &l in w.letters() {
            let p = &self.marking[l.unsigned_abs() as usize - 1];
            if l > 0 {
                out.extend_from_slice(p);
            } else {
                out.extend(p.iter().rev().map(|&d| rev(d)));
            }
        }
        out
    }

    /// The immersed loop freely homotopic to the marking image of `z`.
    pub fn realize_loop(&self, z: &CyclicWord) -> Result<EdgeLoop> {
        if z.is_empty() {
            return Err(OskError::Trivial);
        }
        if z.max_generator() > self.rank {
            return Err(OskError::Rank { expected: format!("≥ {}", z.max_generator()), actual: self.rank });
        }
        let dirs = tighten_loop(&self.spell(&z.as_word()));
        debug_assert!(!dirs.is_empty());
        Ok(EdgeLoop { dirs })
    }

    pub fn loop_length(&self, z: &CyclicWord) -> Result<Q> {
        Ok(self.realize_loop(z)?.length(self))
    }

    /// Marking precomposed with `phi`: the new marking sends `a_i` to the path of `phi(a_i)`.
    pub fn precompose(&self, phi: &Automorphism) -> Result<MarkedGraph> {
        if phi.rank() != self.rank {
            return Err(OskError::Rank { expected: format!("{}", self.rank), actual: phi.rank() });
        }
        let marking = phi.images().iter().map(|w| tighten_path(&self.spell(w))).collect();
        Self::new_relaxed(self.num_vertices, self.edges.clone(), marking)
    }

    /// Shortest embedded loop length.
    pub fn injectivity_radius(&self) -> Result<Q> {
        let es: Vec<(usize, usize, Q)> =
            self.edges.iter().map(|e| (e.from, e.to, e.length.clone())).collect();
        girth(self.num_vertices, &es).ok_or(OskError::Tree)
    }

    /// Quotient by a forest; surviving edge lengths are unchanged.
    pub fn collapse_forest(&self, forest: &[usize]) -> Result<MarkedGraph> {
        Ok(self.collapse_forest_with_map(forest)?.0)
    }

    /// Like [`MarkedGraph::collapse_forest`], also returning the image of each old vertex.
    /// Surviving edges keep their relative order.
    pub fn collapse_forest_with_map(&self, forest: &[usize]) -> Result<(MarkedGraph, Vec<usize>)> {
        let mut uf = UnionFind::new(self.num_vertices);
        let mut in_forest = vec![false; self.edges.len()];
        for &e in forest {
            if e >= self.edges.len() {
                return Err(OskError::Input(format!("no edge {e}")));
            }
            if in_forest[e] {
                continue;
            }
            in_forest[e] = true;
            if !uf.union(self.edges[e].from, self.edges[e].to) {
                return Err(OskError::NotAForest);
            }
        }
        let mut vid = vec![usize::MAX; self.num_vertices];
        let mut nv = 0;
        for v in 0..self.num_vertices {
            let r = uf.find(v);
            if vid[r] == usize::MAX {
                vid[r] = nv;
                nv += 1;
            }
            vid[v] = vid[r];
        }
        let mut new_id = vec![usize::MAX; self.edges.len()];
        let mut edges = Vec::new();
        for (i, e) in self.edges.iter().enumerate() {
            if !in_forest[i] {
                new_id[i] = edges.len();
                edges.push(Edge { from: vid[e.from], to: vid[e.to], length: e.length.clone() });
            }
        }
        let marking = self
            .marking
            .iter()
            .map(|p| {
                let kept: Vec<Dir> = p
                    .iter()
                    .filter(|&&d| !in_forest[edge_of(d)])
                    .map(|&d| dir(new_id[edge_of(d)], is_reversed(d)))
                    .collect();
                tighten_path(&kept)
            })
            .collect();
        Ok((Self::new_relaxed(nv, edges, marking)?, vid))
    }

    /// Edges of a spanning tree rooted at the base.
    pub fn spanning_tree(&self) -> Vec<usize> {
        self.pi1.parent.iter().flatten().map(|&d| edge_of(d)).collect()
    }

    /// Collapses a maximal tree, giving a rose with the induced marking.
    pub fn to_rose(&self) -> Result<MarkedGraph> {
        self.collapse_forest(&self.spanning_tree())
    }

    /// Whether removing `e` keeps the graph connected.
    pub fn is_nonseparating(&self, e: usize) -> bool {
        let mut uf = UnionFind::new(self.num_vertices);
        for (i, f) in self.edges.iter().enumerate() {
            if i != e {
                uf.union(f.from, f.to);
            }
        }
        uf.find(self.edges[e].from) == uf.find(self.edges[e].to)
    }

    pub fn to_json(&self) -> GraphJson {
        GraphJson::from_graph(self)
    }

    pub fn from_json(j: &GraphJson) -> Result<MarkedGraph> {
        j.to_graph()
    }

    pub fn from_json_str(s: &str) -> Result<MarkedGraph> {
        let j: GraphJson = serde_json::from_str(s).map_err(|e| OskError::Input(e.to_string()))?;
        j.to_graph()
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&self.to_json()).expect("graph serializes")
    }

    /// Erases every vertex of valence 2 by joining its two edges; the marking is carried along
    /// (conjugated when the base is erased).
    pub fn smoothed(&self) -> Result<MarkedGraph> {
        Ok(self.smoothed_with_chains()?.0)
    }

    /// Like [`MarkedGraph::smoothed`], also returning each new edge as a path of old directions.
    pub fn smoothed_with_chains(&self) -> Result<(MarkedGraph, Vec<Vec<Dir>>)> {
        let mut g = self.clone();
        let mut chains: Vec<Vec<Dir>> = (0..g.edges.len()).map(|e| vec![dir(e, false)]).collect();
        let chain = |chains: &[Vec<Dir>], d: Dir| -> Vec<Dir> {
            let c = &chains[edge_of(d)];
            if is_reversed(d) {
                c.iter().rev().map(|&x| rev(x)).collect()
            } else {
                c.clone()
            }
        };
        while let Some(v) = (0..g.num_vertices).find(|&v| g.star[v].len() == 2) {
            let (d1, d2) = (g.star[v][0], g.star[v][1]);
            if edge_of(d1) == edge_of(d2) {
                return Err(OskError::InvalidGraph("graph is a circle".into()));
            }
            let (a, b) = (rev(d1), d2);
            let (e1, e2) = (edge_of(a), edge_of(b));
            let mut marking: Vec<Vec<Dir>> = g.marking.iter().map(|p| tighten_path(p)).collect();
            if v == g.base {
                for p in &mut marking {
                    let mut q = vec![a];
                    q.extend_from_slice(p);
                    q.push(rev(a));
                    *p = tighten_path(&q);
                }
            }
            let shift = |e: usize| if e > e2 { e - 1 } else { e };
            let vshift = |u: usize| if u > v { u - 1 } else { u };
            let map = |d: Dir| -> Option<Dir> {
                if d == a {
                    Some(dir(shift(e1), false))
                } else if d == rev(b) {
                    Some(dir(shift(e1), true))
                } else if edge_of(d) == e1 || edge_of(d) == e2 {
                    None
                } else {
                    Some(dir(shift(edge_of(d)), is_reversed(d)))
                }
            };
            let mut edges = Vec::new();
            let mut next_chains = Vec::new();
            for (i, e) in g.edges.iter().enumerate() {
                if i == e1 {
                    edges.push(Edge {
                        from: vshift(g.origin(a)),
                        to: vshift(g.terminus(b)),
                        length: &g.edges[e1].length + &g.edges[e2].length,
                    });
                    let mut c = chain(&chains, a);
                    c.extend(chain(&chains, b));
                    next_chains.push(c);
                } else if i != e2 {
                    edges.push(Edge { from: vshift(e.from), to: vshift(e.to), length: e.length.clone() });
                    next_chains.push(chains[i].clone());
                }
            }
            let marking = marking.iter().map(|p| p.iter().filter_map(|&d| map(d)).collect()).collect();
            g = Self::new_relaxed(g.num_vertices - 1, edges, marking)?;
            chains = next_chains;
        }
        Ok((g, chains))
    }

    pub fn is_zero_length_free(&self) -> bool {
        self.edges.iter().all(|e| !e.length.is_zero())
    }
}

/// A cyclic sequence of directions forming an immersed closed path.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct EdgeLoop {
    pub dirs: Vec<Dir>,
}

impl EdgeLoop {
    pub fn length(&self, g: &MarkedGraph) -> Q {
        g.path_length(&self.dirs)
    }

    /// Number of times the loop crosses edge `e` in either direction.
    pub fn crossings(&self, e: usize) -> usize {
        self.dirs.iter().filter(|&&d| edge_of(d) == e).count()
    }

    pub fn is_immersed(&self) -> bool {
        let n = self.dirs.len();
        n > 0 && (0..n).all(|i| self.dirs[(i + 1) % n] != rev(self.dirs[i]))
    }
}

#[derive(Debug, Clone)]
pub(crate) struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    pub(crate) fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect() }
    }

    pub(crate) fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Returns false if already joined.
    pub(crate) fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.parent[ra.max(rb)] = ra.min(rb);
        true
    }
}
