use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap, VecDeque};

use super::{dir, edge_of, is_reversed, rev, tighten_path, Dir, EdgeLoop, MarkedGraph, UnionFind};
use crate::error::{OskError, Result};
use crate::free_group::Word;
use crate::rational::Q;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CoreEdge {
    pub from: usize,
    pub to: usize,
    /// Direction of the ambient graph this edge maps onto.
    pub label: Dir,
}

/// A finite core graph immersed in a marked graph, with pulled-back lengths.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoreGraph {
    /// Ambient vertex under each core vertex.
    pub vertices: Vec<usize>,
    pub edges: Vec<CoreEdge>,
    pub lengths: Vec<Q>,
    pub generators: Vec<Word>,
}

impl CoreGraph {
    /// Folds the wedge of generator paths and prunes it to its core.
    pub fn new(generators: &[Word], g: &MarkedGraph) -> Result<CoreGraph> {
        let mut vertices = vec![g.base()];
        let mut edges: Vec<CoreEdge> = Vec::new();
        for w in generators {
            let p = tighten_path(&g.spell(w));
            let mut at = 0;
            for (i, &d) in p.iter().enumerate() {
                let next = if i + 1 == p.len() {
                    0
                } else {
                    vertices.push(g.terminus(d));
                    vertices.len() - 1
                };
                edges.push(CoreEdge { from: at, to: next, label: d });
                at = next;
            }
        }
        if edges.is_empty() {
            return Err(OskError::Trivial);
        }
        let (vertices, edges) = fold(vertices, edges);
        let (vertices, edges) = prune(vertices, edges);
        if edges.is_empty() {
            return Err(OskError::Trivial);
        }
        let lengths = edges.iter().map(|e| g.length(e.label).clone()).collect();
        Ok(CoreGraph { vertices, edges, lengths, generators: generators.to_vec() })
    }

    /// The circle traced by an immersed loop.
    pub fn from_loop(l: &EdgeLoop, g: &MarkedGraph) -> CoreGraph {
        let n = l.dirs.len();
        let vertices = l.dirs.iter().map(|&d| g.origin(d)).collect();
        let edges = (0..n).map(|i| CoreEdge { from: i, to: (i + 1) % n, label: l.dirs[i] }).collect();
        let lengths = l.dirs.iter().map(|&d| g.length(d).clone()).collect();
        let generators = vec![g.path_word(&l.dirs)];
        CoreGraph { vertices, edges, lengths, generators }
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn betti(&self) -> usize {
        self.edges.len() + 1 - self.vertices.len()
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

    /// Ambient direction under a core direction.
    pub fn label(&self, d: Dir) -> Dir {
        let l = self.edges[edge_of(d)].label;
        if is_reversed(d) {
            rev(l)
        } else {
            l
        }
    }

    pub fn stars(&self) -> Vec<Vec<Dir>> {
        let mut s = vec![Vec::new(); self.vertices.len()];
        for (i, e) in self.edges.iter().enumerate() {
            s[e.from].push(dir(i, false));
            s[e.to].push(dir(i, true));
        }
        s
    }

    pub fn injectivity_radius(&self) -> Result<Q> {
        Ok(self.shortest_loop()?.0)
    }

    /// A shortest embedded loop as a cycle of core directions.
    pub fn shortest_loop(&self) -> Result<(Q, Vec<Dir>)> {
        let es: Vec<(usize, usize, Q)> = self
            .edges
            .iter()
            .zip(&self.lengths)
            .map(|(e, l)| (e.from, e.to, l.clone()))
            .collect();
        shortest_cycle(self.vertices.len(), &es).ok_or(OskError::Tree)
    }

    /// Ambient directions along a core path.
    pub fn image(&self, dirs: &[Dir]) -> Vec<Dir> {
        dirs.iter().map(|&d| self.label(d)).collect()
    }

    /// Isomorphism-invariant code: least BFS encoding over all start vertices.
    pub fn canonical_code(&self) -> Vec<u32> {
        let out = self.out_table();
        (0..self.vertices.len()).map(|s| bfs_code(&out, s)).min().unwrap_or_default()
    }

    /// For each vertex, its outgoing labels mapped to target vertices.
    pub(crate) fn out_table(&self) -> Vec<BTreeMap<Dir, usize>> {
        let mut out = vec![BTreeMap::new(); self.vertices.len()];
        for (i, e) in self.edges.iter().enumerate() {
            out[e.from].insert(self.label(dir(i, false)), e.to);
            out[e.to].insert(self.label(dir(i, true)), e.from);
        }
        out
    }
}

fn bfs_code(out: &[BTreeMap<Dir, usize>], start: usize) -> Vec<u32> {
    let mut num = vec![u32::MAX; out.len()];
    num[start] = 0;
    let mut next = 1;
    let mut q = VecDeque::from([start]);
    let mut code = Vec::new();
    while let Some(v) = q.pop_front() {
        for (&l, &w) in &out[v] {
            if num[w] == u32::MAX {
                num[w] = next;
                next += 1;
                q.push_back(w);
            }
            code.push(l as u32);
            code.push(num[w]);
        }
        code.push(u32::MAX);
    }
    code
}

/// Identifies edges sharing an origin and a label until the labelling is an immersion.
fn fold(vertices: Vec<usize>, mut edges: Vec<CoreEdge>) -> (Vec<usize>, Vec<CoreEdge>) {
    let n = vertices.len();
    let mut uf = UnionFind::new(n);
    let mut alive = vec![true; edges.len()];
    loop {
        let mut seen: BTreeMap<(usize, Dir), usize> = BTreeMap::new();
        let mut merge = None;
        'scan: for (i, e) in edges.iter().enumerate() {
            if !alive[i] {
                continue;
            }
            let (f, t) = (uf.find(e.from), uf.find(e.to));
            for (v, l, other) in [(f, e.label, t), (t, rev(e.label), f)] {
                match seen.get(&(v, l)) {
                    Some(&j) if j != i => {
                        let ej = &edges[j];
                        let (fj, tj) = (uf.find(ej.from), uf.find(ej.to));
                        let other_j = if fj == v && ej.label == l { tj } else { fj };
                        merge = Some((i, other, other_j));
                        break 'scan;
                    }
                    _ => {
                        seen.insert((v, l), i);
                    }
                }
            }
        }
        match merge {
            Some((i, a, b)) => {
                alive[i] = false;
                uf.union(a, b);
            }
            None => break,
        }
    }
    let mut id = vec![usize::MAX; n];
    let mut vs = Vec::new();
    for v in 0..n {
        let r = uf.find(v);
        if id[r] == usize::MAX {
            id[r] = vs.len();
            vs.push(vertices[v]);
        }
    }
    for e in edges.iter_mut() {
        e.from = id[uf.find(e.from)];
        e.to = id[uf.find(e.to)];
    }
    let es = edges.into_iter().zip(alive).filter(|(_, a)| *a).map(|(e, _)| e).collect();
    (vs, es)
}

/// Repeatedly deletes valence-1 vertices with their edges, then drops isolated vertices.
fn prune(vertices: Vec<usize>, edges: Vec<CoreEdge>) -> (Vec<usize>, Vec<CoreEdge>) {
    let mut alive = vec![true; edges.len()];
    let mut valence = vec![0usize; vertices.len()];
    for e in &edges {
        valence[e.from] += 1;
        valence[e.to] += 1;
    }
    loop {
        let mut changed = false;
        for (i, e) in edges.iter().enumerate() {
            if alive[i] && e.from != e.to && (valence[e.from] == 1 || valence[e.to] == 1) {
                alive[i] = false;
                valence[e.from] -= 1;
                valence[e.to] -= 1;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    let mut id = vec![usize::MAX; vertices.len()];
    let mut vs = Vec::new();
    for (v, &img) in vertices.iter().enumerate() {
        if valence[v] > 0 {
            id[v] = vs.len();
            vs.push(img);
        }
    }
    let es = edges
        .into_iter()
        .zip(alive)
        .filter(|(_, a)| *a)
        .map(|(e, _)| CoreEdge { from: id[e.from], to: id[e.to], label: e.label })
        .collect();
    (vs, es)
}

/// Length of a shortest embedded cycle, or `None` for a forest.
pub fn girth(num_vertices: usize, edges: &[(usize, usize, Q)]) -> Option<Q> {
    shortest_cycle(num_vertices, edges).map(|(l, _)| l)
}

/// A shortest embedded cycle as directions `2e`/`2e+1` over the given edge list.
pub fn shortest_cycle(num_vertices: usize, edges: &[(usize, usize, Q)]) -> Option<(Q, Vec<Dir>)> {
    let mut star: Vec<Vec<Dir>> = vec![Vec::new(); num_vertices];
    for (i, (u, v, _)) in edges.iter().enumerate() {
        star[*u].push(dir(i, false));
        star[*v].push(dir(i, true));
    }
    let end = |d: Dir| {
        let (u, v, _) = &edges[edge_of(d)];
        if is_reversed(d) {
            *u
        } else {
            *v
        }
    };
    let mut best: Option<(Q, Vec<Dir>)> = None;
    for (i, (u, v, l)) in edges.iter().enumerate() {
        if best.as_ref().is_some_and(|(b, _)| l >= b) {
            continue;
        }
        if u == v {
            best = Some((l.clone(), vec![dir(i, false)]));
            continue;
        }
        // shortest path v -> u avoiding edge i
        let mut dist: Vec<Option<Q>> = vec![None; num_vertices];
        let mut via: Vec<Option<Dir>> = vec![None; num_vertices];
        let mut heap = BinaryHeap::new();
        dist[*v] = Some(Q::from_integer(0.into()));
        heap.push(Reverse((dist[*v].clone().unwrap(), *v)));
        while let Some(Reverse((d, x))) = heap.pop() {
            if dist[x].as_ref() != Some(&d) {
                continue;
            }
            if x == *u {
                break;
            }
            for &s in &star[x] {
                if edge_of(s) == i {
                    continue;
                }
                let y = end(s);
                let nd = &d + &edges[edge_of(s)].2;
                if dist[y].as_ref().is_none_or(|old| &nd < old) {
                    dist[y] = Some(nd.clone());
                    via[y] = Some(s);
                    heap.push(Reverse((nd, y)));
                }
            }
        }
        if let Some(d) = &dist[*u] {
            let total = d + l;
            if best.as_ref().is_none_or(|(b, _)| &total < b) {
                let mut path = vec![];
                let mut x = *u;
                while x != *v {
                    let s = via[x].unwrap();
                    path.push(s);
                    x = end(rev(s));
                }
                path.reverse();
                let mut cyc = vec![dir(i, false)];
                cyc.extend(path);
                best = Some((total, cyc));
            }
        }
    }
    best
}
