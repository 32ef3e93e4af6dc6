//! Seeded random inputs: marked graphs, classes, automorphisms.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::free_group::{Automorphism, CyclicWord, Letter, Word, WhiteheadAutomorphism};
use crate::marked_graph::{dir, Edge, MarkedGraph, UnionFind};
use crate::rational::Q;
use crate::whitehead::compose;

/// Random connected graph of the given rank with all valences at least 3, marked via a spanning tree.
pub fn random_topology<R: Rng>(rng: &mut R, rank: usize) -> MarkedGraph {
    loop {
        let nv = rng.gen_range(1..=2 * rank - 2);
        let ne = nv + rank - 1;
        let edges: Vec<(usize, usize)> = (0..ne).map(|_| (rng.gen_range(0..nv), rng.gen_range(0..nv))).collect();
        let mut deg = vec![0; nv];
        let mut uf = UnionFind::new(nv);
        for &(a, b) in &edges {
            deg[a] += 1;
            deg[b] += 1;
            uf.union(a, b);
        }
        let root = uf.find(0);
        if deg.iter().any(|&d| d < 3) || (0..nv).any(|v| uf.find(v) != root) {
            continue;
        }
        let edges: Vec<Edge> = edges.into_iter().map(|(from, to)| Edge { from, to, length: Q::from_integer(1.into()) }).collect();
        if let Ok(g) = tree_marked(nv, edges, rank) {
            return g;
        }
    }
}

/// Marks a graph by sending the generators to the non-tree edges of a BFS tree from vertex 0.
fn tree_marked(nv: usize, edges: Vec<Edge>, rank: usize) -> crate::Result<MarkedGraph> {
    let mut parent: Vec<Option<usize>> = vec![None; nv];
    let mut seen = vec![false; nv];
    seen[0] = true;
    let mut queue = std::collections::VecDeque::from([0]);
    let mut tree = vec![false; edges.len()];
    let mut up: Vec<Vec<usize>> = vec![Vec::new(); nv];
    while let Some(v) = queue.pop_front() {
        for (i, e) in edges.iter().enumerate() {
            for (a, b, rev) in [(e.from, e.to, false), (e.to, e.from, true)] {
                if a == v && !seen[b] {
                    seen[b] = true;
                    parent[b] = Some(dir(i, rev));
                    tree[i] = true;
                    queue.push_back(b);
                }
            }
        }
    }
    let origin = |d: usize| if d % 2 == 1 { edges[d / 2].to } else { edges[d / 2].from };
    for v in 0..nv {
        let mut w = v;
        while let Some(d) = parent[w] {
            up[v].push(d);
            w = origin(d);
        }
        up[v].reverse();
    }
    let mut marking = Vec::new();
    for (i, e) in edges.iter().enumerate() {
        if !tree[i] {
            let mut p = up[e.from].clone();
            p.push(dir(i, false));
            p.extend(up[e.to].iter().rev().map(|&d| d ^ 1));
            marking.push(p);
        }
    }
    debug_assert_eq!(marking.len(), rank);
    MarkedGraph::new(nv, edges, marking)
}

/// Random product of Whitehead moves and permutations of the given length.
pub fn random_automorphism<R: Rng>(rng: &mut R, rank: usize, depth: usize) -> Automorphism {
    let moves = WhiteheadAutomorphism::all_moves(rank);
    let perms = WhiteheadAutomorphism::all_permutations(rank);
    let mut seq = Vec::new();
    for _ in 0..depth {
        seq.push(moves.choose(rng).expect("moves exist").clone());
    }
    seq.push(perms.choose(rng).expect("permutations exist").clone());
    compose(&seq, rank)
}

/// Random positive integer lengths scaled to volume 1.
pub fn random_lengths<R: Rng>(rng: &mut R, count: usize, max: i64) -> Vec<Q> {
    let raw: Vec<i64> = (0..count).map(|_| rng.gen_range(1..=max)).collect();
    let total: i64 = raw.iter().sum();
    raw.into_iter().map(|x| Q::new(x.into(), total.into())).collect()
}

/// Volume-1 marked graph: random topology, marking twisted by `depth` Whitehead moves.
pub fn random_graph<R: Rng>(rng: &mut R, rank: usize, depth: usize, max_len: i64) -> MarkedGraph {
    let g = random_topology(rng, rank);
    let lengths = random_lengths(rng, g.num_edges(), max_len);
    let phi = random_automorphism(rng, rank, depth);
    g.with_lengths(&lengths).and_then(|g| g.precompose(&phi)).expect("valid random graph")
}

/// Random reduced word of exactly the given length.
pub fn random_word<R: Rng>(rng: &mut R, rank: usize, len: usize) -> Word {
    let mut ls: Vec<Letter> = Vec::with_capacity(len);
    while ls.len() < len {
        let g = rng.gen_range(1..=rank as Letter);
        let l = if rng.gen_bool(0.5) { g } else { -g };
        if ls.last() != Some(&-l) {
            ls.push(l);
        }
    }
    Word::reduce(ls)
}

/// Random nontrivial cyclically reduced class of length at most `max_len`.
pub fn random_class<R: Rng>(rng: &mut R, rank: usize, max_len: usize) -> CyclicWord {
    loop {
        let n = rng.gen_range(1..=max_len);
        if let Ok(z) = CyclicWord::new(&random_word(rng, rank, n)) {
            return z;
        }
    }
}

/// Random simple class: a word in a proper subset of the generators moved by a random
/// automorphism. At rank 2 the word is a single letter, so the class is primitive.
pub fn random_simple_class<R: Rng>(rng: &mut R, rank: usize, max_len: usize, depth: usize) -> CyclicWord {
    let sub = if rank == 2 { 1 } else { rng.gen_range(1..rank) };
    let w = if sub == 1 { Word::letter(1) } else { random_class(rng, sub, max_len).as_word() };
    random_automorphism(rng, rank, depth).apply_cyclic(&CyclicWord::new(&w).expect("nontrivial")).expect("automorphisms preserve nontriviality")
}

/// Random proper free factor of rank `1..rank`: the image of a standard one.
pub fn random_factor<R: Rng>(rng: &mut R, rank: usize, depth: usize) -> crate::factor_complex::FreeFactor {
    let r = rng.gen_range(1..rank);
    let phi = random_automorphism(rng, rank, depth);
    let gens = (1..=r as Letter).map(|g| phi.apply(&Word::letter(g))).collect();
    crate::factor_complex::FreeFactor::new(gens, rank).expect("images of a basis subset generate a factor")
}
