//! Certified paths from the smallest factor containing a simple class to the projection
//! of a marked graph, built by Whitehead reduction relative to an edge the class rarely
//! crosses.
//!
//! All graphs here carry markings in the original basis, so every factor is read off a
//! subgraph with [`subgraph_factor`] and no change of coordinates is ever tracked by hand.
//! A Whitehead move `φ` on the rose word of `x` is the rose whose marking is `φ ∘ M`.

use std::collections::{BTreeSet, VecDeque};

use num_traits::ToPrimitive;
use serde::Serialize;

use super::farey::{farey_path, primitive_of, slope_of, Slope};
use super::path::FactorPath;
use super::subgraph::{project, subgraph_chain, subgraph_factor};
use super::FreeFactor;
use crate::error::{OskError, Result};
use crate::free_group::{CyclicWord, Letter, WhiteheadAutomorphism, Word};
use crate::marked_graph::{dir, edge_of, is_reversed, rev, tighten_path, CoreGraph, Dir, Edge, MarkedGraph};
use crate::rational::{qi, Q};
use crate::whitehead::{smallest_factor, whitehead_moves, WhiteheadGraph};

const MAX_DEPTH: usize = 8;

/// A certified path together with the bound it is meant to respect.
#[derive(Debug, Clone, Serialize)]
pub struct BoundedPath {
    pub path: FactorPath,
    /// Least number of times the class crosses a single edge.
    pub crossings: usize,
    pub bound: usize,
}

fn letter_of(d: Dir) -> Letter {
    let g = edge_of(d) as Letter + 1;
    if is_reversed(d) {
        -g
    } else {
        g
    }
}

fn dir_of(l: Letter) -> Dir {
    dir(l.unsigned_abs() as usize - 1, l < 0)
}

fn rose_from_images(images: &[Word]) -> Result<MarkedGraph> {
    let edges = (0..images.len()).map(|_| Edge { from: 0, to: 0, length: qi(1) }).collect();
    let marking = images.iter().map(|w| w.letters().iter().map(|&l| dir_of(l)).collect()).collect();
    MarkedGraph::new(1, edges, marking)
}

fn rose_images(r: &MarkedGraph) -> Vec<Word> {
    r.marking().iter().map(|p| Word::reduce(p.iter().map(|&d| letter_of(d)))).collect()
}

fn rose_word(r: &MarkedGraph, x: &CyclicWord) -> Result<CyclicWord> {
    let l = r.realize_loop(x)?;
    CyclicWord::new(&Word::reduce(l.dirs.iter().map(|&d| letter_of(d))))
}

/// Least crossing count of `x` over the edges of `g`, with the edge attaining it.
pub fn min_crossings(x: &CyclicWord, g: &MarkedGraph) -> Result<(usize, usize)> {
    let l = g.realize_loop(x)?;
    Ok((0..g.num_edges()).map(|e| (l.crossings(e), e)).min().expect("graphs have edges"))
}

/// Rose obtained by collapsing `forest`; petal `i` is the `i`-th surviving edge.
fn collapse_to_rose(g: &MarkedGraph, forest: &[usize]) -> Result<(MarkedGraph, Vec<usize>)> {
    let petals: Vec<usize> = (0..g.num_edges()).filter(|e| !forest.contains(e)).collect();
    let (r, _) = g.collapse_forest_with_map(forest)?;
    Ok((rose_from_images(&rose_images(&r))?, petals))
}

/// Spanning forest of `g` without the edges in `avoid`, grown from every vertex.
fn spanning_forest(g: &MarkedGraph, avoid: &[usize]) -> Vec<usize> {
    let mut seen = vec![false; g.num_vertices()];
    let mut forest = Vec::new();
    for s in 0..g.num_vertices() {
        if seen[s] {
            continue;
        }
        seen[s] = true;
        let mut q = VecDeque::from([s]);
        while let Some(v) = q.pop_front() {
            for &d in g.star(v) {
                let w = g.terminus(d);
                if !avoid.contains(&edge_of(d)) && !seen[w] {
                    seen[w] = true;
                    forest.push(edge_of(d));
                    q.push_back(w);
                }
            }
        }
    }
    forest
}

/// Edges in the component of `g - e` that contains `start`.
fn component_without(g: &MarkedGraph, e: usize, start: usize) -> Vec<usize> {
    let mut seen = vec![false; g.num_vertices()];
    seen[start] = true;
    let mut q = VecDeque::from([start]);
    let mut edges = BTreeSet::new();
    while let Some(v) = q.pop_front() {
        for &d in g.star(v) {
            if edge_of(d) == e {
                continue;
            }
            edges.insert(edge_of(d));
            let w = g.terminus(d);
            if !seen[w] {
                seen[w] = true;
                q.push_back(w);
            }
        }
    }
    edges.into_iter().collect()
}

/// Blows the vertex of the rose with marking `images` up into `nv` vertices: the half-edge
/// where letter `l` starts goes to vertex `side(l)` and `tree` lists the new edges, which
/// become edges `n, n+1, ...`. Collapsing them gives back the rose.
fn blowup(images: &[Word], side: &dyn Fn(Letter) -> usize, nv: usize, tree: &[(usize, usize)]) -> Result<MarkedGraph> {
    let n = images.len();
    let mut edges: Vec<Edge> = (1..=n as Letter)
        .map(|i| Edge { from: side(i), to: side(-i), length: qi(1) })
        .collect();
    edges.extend(tree.iter().map(|&(u, w)| Edge { from: u, to: w, length: qi(1) }));
    // tree paths from vertex 0
    let mut to: Vec<Option<Vec<Dir>>> = vec![None; nv];
    to[0] = Some(Vec::new());
    let mut q = VecDeque::from([0]);
    while let Some(v) = q.pop_front() {
        for (j, &(u, w)) in tree.iter().enumerate() {
            for (a, b, d) in [(u, w, dir(n + j, false)), (w, u, dir(n + j, true))] {
                if a == v && to[b].is_none() {
                    let mut p = to[v].clone().unwrap();
                    p.push(d);
                    to[b] = Some(p);
                    q.push_back(b);
                }
            }
        }
    }
    let to: Vec<Vec<Dir>> = to
        .into_iter()
        .map(|p| p.ok_or_else(|| OskError::InvalidGraph("blowup tree is disconnected".into())))
        .collect::<Result<_>>()?;
    let petal_path = |l: Letter| -> Vec<Dir> {
        let i = l.unsigned_abs() as usize - 1;
        let (s, t) = (side(i as Letter + 1), side(-(i as Letter) - 1));
        let mut p = to[s].clone();
        p.push(dir(i, false));
        p.extend(to[t].iter().rev().map(|&d| rev(d)));
        if l > 0 {
            p
        } else {
            p.iter().rev().map(|&d| rev(d)).collect()
        }
    };
    let marking = images
        .iter()
        .map(|w| tighten_path(&w.letters().iter().flat_map(|&l| petal_path(l)).collect::<Vec<_>>()))
        .collect();
    MarkedGraph::new_relaxed(nv, edges, marking)
}

fn apply_to_rose(m: &WhiteheadAutomorphism, r: &MarkedGraph) -> Result<MarkedGraph> {
    let phi = m.to_automorphism(r.rank());
    let images: Vec<Word> = rose_images(r).iter().map(|w| phi.apply(w)).collect();
    rose_from_images(&images)
}

fn move_parts(m: &WhiteheadAutomorphism) -> (&BTreeSet<Letter>, Letter) {
    match m {
        WhiteheadAutomorphism::Move { set, mult } => (set, *mult),
        WhiteheadAutomorphism::Permutation(_) => unreachable!("reduction uses Whitehead moves only"),
    }
}

/// Length-reducing moves for `w`, each with its new length.
fn reducing_moves(w: &CyclicWord, n: usize) -> Vec<(WhiteheadAutomorphism, usize)> {
    whitehead_moves(n)
        .into_iter()
        .filter_map(|m| {
            let len = m.to_automorphism(n).apply_cyclic(w).ok()?.len();
            (len < w.len()).then_some((m, len))
        })
        .collect()
}

/// Finishes once the Whitehead graph of the rose word is disconnected: a one-edge blowup
/// along a component holds `x` off the new edge, and a subgraph chain in the blowup
/// reaches the factor of the petals in `target`.
fn finish_disconnected(
    x: &CyclicWord,
    rose: &MarkedGraph,
    wg: &WhiteheadGraph,
    target: &[usize],
) -> Result<FactorPath> {
    let n = rose.rank();
    let comps = wg.components();
    let zone: BTreeSet<Letter> = comps[0].iter().copied().collect();
    let g = blowup(&rose_images(rose), &|l| usize::from(!zone.contains(&l)), 2, &[(0, 1)])?;
    let l = g.realize_loop(x)?;
    if l.crossings(n) != 0 {
        return Err(OskError::Certificate("class crosses the blowup edge".into()));
    }
    let sx = component_without(&g, n, g.origin(l.dirs[0]));
    let mut t: Vec<usize> = target.to_vec();
    t.push(n);
    let mut path = FactorPath::through(vec![smallest_factor(x, n)?, subgraph_factor(&g, &sx)?])?;
    path.extend(&subgraph_chain(&g, &sx, &t)?)?;
    Ok(path)
}

/// Nonseparating edge `e`: reduce on the rose where `e` is the petal `c`; moves whose
/// special letter is `c^±` fix `<c>` and move the factor of the other petals by at most 6.
fn nonseparating(x: &CyclicWord, g: &MarkedGraph, e: usize) -> Result<FactorPath> {
    let n = g.rank();
    let (mut rose, petals) = collapse_to_rose(g, &spanning_forest(g, &[e]))?;
    let c = petals.iter().position(|&p| p == e).expect("e survives the collapse");
    let cl = c as Letter + 1;
    let others: Vec<usize> = (0..n).filter(|&i| i != c).collect();
    let a = others[0];
    // Roses at the ends of maximal runs of c-special moves.
    let mut run_ends: Vec<(MarkedGraph, MarkedGraph)> = Vec::new();
    let mut run_start: Option<MarkedGraph> = None;
    loop {
        let w = rose_word(&rose, x)?;
        let wg = WhiteheadGraph::of(&w, n);
        if !wg.is_connected() {
            if let Some(s) = run_start.take() {
                run_ends.push((s, rose.clone()));
            }
            let mut path = finish_disconnected(x, &rose, &wg, &others)?;
            for (start, end) in run_ends.iter().rev() {
                let f = |r: &MarkedGraph, s: &[usize]| subgraph_factor(r, s);
                for step in [
                    f(end, &[a])?,
                    f(end, &[a, c])?,
                    f(end, &[c])?,
                    f(start, &[a, c])?,
                    f(start, &[a])?,
                    f(start, &others)?,
                ] {
                    path.push(step)?;
                }
            }
            return Ok(path);
        }
        let mut moves = reducing_moves(&w, n);
        moves.sort_by_key(|(m, len)| (move_parts(m).1.abs() == cl, *len));
        let (m, _) = moves.into_iter().next().ok_or(OskError::NotSimple)?;
        let special = move_parts(&m).1.abs() == cl;
        if special && run_start.is_none() {
            run_start = Some(rose.clone());
        }
        if !special {
            if let Some(s) = run_start.take() {
                run_ends.push((s, rose.clone()));
            }
        }
        rose = apply_to_rose(&m, &rose)?;
    }
}

/// Separating edge `e`: `A` is the factor of the side `side_a`. Moves with special letter
/// in `A`, or in `B` with all of `A` on one side of the cut, keep `A`. A move splitting the
/// letters of `A` triggers a blowup of the `A` rose whose new edge is crossed at most as
/// often as `e`, and the construction recurses on it.
fn separating(x: &CyclicWord, g: &MarkedGraph, e: usize, side_a: &[usize], depth: usize) -> Result<FactorPath> {
    let n = g.rank();
    let mut forest = spanning_forest(g, &[e]);
    forest.push(e);
    let (mut rose, petals) = collapse_to_rose(g, &forest)?;
    let la: Vec<usize> = (0..n).filter(|&i| side_a.contains(&petals[i])).collect();
    let in_a = |l: Letter| la.contains(&(l.unsigned_abs() as usize - 1));
    let fa = subgraph_factor(&rose, &la)?;
    loop {
        let w = rose_word(&rose, x)?;
        let wg = WhiteheadGraph::of(&w, n);
        if !wg.is_connected() {
            return finish_disconnected(x, &rose, &wg, &la);
        }
        let moves = reducing_moves(&w, n);
        let a_letters: Vec<Letter> = la.iter().flat_map(|&i| [i as Letter + 1, -(i as Letter) - 1]).collect();
        let keeps_a = |m: &WhiteheadAutomorphism| {
            let (set, v) = move_parts(m);
            in_a(v) || a_letters.iter().all(|l| set.contains(l)) || a_letters.iter().all(|l| !set.contains(l))
        };
        if let Some((m, _)) = moves.iter().filter(|(m, _)| keeps_a(m)).min_by_key(|(_, len)| *len) {
            rose = apply_to_rose(m, &rose)?;
            if subgraph_factor(&rose, &la)? != fa {
                return Err(OskError::Certificate("an A-preserving move moved A".into()));
            }
            continue;
        }
        if moves.is_empty() {
            return Err(OskError::NotSimple);
        }
        return split_a(x, &rose, &wg, &la, depth);
    }
}

/// Blows up the `A` rose along a component of the Whitehead graph restricted to `A`.
fn split_a(x: &CyclicWord, rose: &MarkedGraph, wg: &WhiteheadGraph, la: &[usize], depth: usize) -> Result<FactorPath> {
    let n = rose.rank();
    let in_a = |l: Letter| la.contains(&(l.unsigned_abs() as usize - 1));
    let restricted = WhiteheadGraph {
        vertices: wg.vertices.iter().copied().filter(|&l| in_a(l)).collect(),
        edges: wg.edges.iter().copied().filter(|&(p, q)| in_a(p) && in_a(q)).collect(),
    };
    let comps = restricted.components();
    if comps.len() < 2 {
        return Err(OskError::Certificate("Whitehead graph restricted to A is connected".into()));
    }
    let zone: BTreeSet<Letter> = comps[0].iter().copied().collect();
    let images = rose_images(rose);
    let mut best: Option<FactorPath> = None;
    let mut last_err = None;
    for e_side in [0usize, 1] {
        let side = |l: Letter| {
            if !in_a(l) {
                2
            } else if zone.contains(&l) {
                0
            } else {
                1
            }
        };
        // edge n is the new edge e', edge n+1 is the old separating edge
        let g = blowup(&images, &side, 3, &[(0, 1), (e_side, 2)])?;
        let mut target: Vec<usize> = la.to_vec();
        target.push(n);
        let attempt = toward(x, &g, n, depth + 1).and_then(|(p, end)| {
            let mut p = p;
            p.extend(&subgraph_chain(&g, &end, &target)?)?;
            Ok(p)
        });
        match attempt {
            Ok(p) if best.as_ref().map_or(true, |b| p.len() < b.len()) => best = Some(p),
            Ok(_) => {}
            Err(err) => last_err = Some(err),
        }
    }
    best.ok_or_else(|| last_err.expect("some attempt ran"))
}

/// A path from the smallest factor containing `x` to the factor of a proper subgraph of
/// `g`, reducing relative to edge `e`. Returns the path and that subgraph.
fn toward(x: &CyclicWord, g: &MarkedGraph, e: usize, depth: usize) -> Result<(FactorPath, Vec<usize>)> {
    if depth > MAX_DEPTH {
        return Err(OskError::Budget(format!("blowup recursion deeper than {MAX_DEPTH}")));
    }
    let n = g.rank();
    let l = g.realize_loop(x)?;
    if l.crossings(e) == 0 {
        let s = component_without(g, e, g.origin(l.dirs[0]));
        let p = FactorPath::through(vec![smallest_factor(x, n)?, subgraph_factor(g, &s)?])?;
        return Ok((p, s));
    }
    if g.is_nonseparating(e) {
        let end: Vec<usize> = (0..g.num_edges()).filter(|&f| f != e).collect();
        return Ok((nonseparating(x, g, e)?.shortcut()?, end));
    }
    let (u, w) = (g.edges()[e].from, g.edges()[e].to);
    let mut best: Option<(FactorPath, Vec<usize>)> = None;
    let mut last_err = None;
    for root in [u, w] {
        let side = component_without(g, e, root);
        match separating(x, g, e, &side, depth).and_then(|p| p.shortcut()) {
            Ok(p) if best.as_ref().map_or(true, |b| p.len() < b.0.len()) => best = Some((p, side)),
            Ok(_) => {}
            Err(err) => last_err = Some(err),
        }
    }
    best.ok_or_else(|| last_err.expect("some side was tried"))
}

/// Rank-2 path along a Farey geodesic from `ff x` to the nearest factor of `π(g)`.
fn farey_route(from: Slope, targets: &BTreeSet<FreeFactor>) -> Result<FactorPath> {
    let mut best: Option<Vec<Slope>> = None;
    for t in targets {
        let p = farey_path(from, slope_of(t)?)?;
        if best.as_ref().map_or(true, |b| p.len() < b.len()) {
            best = Some(p);
        }
    }
    let slopes = best.ok_or_else(|| OskError::Input("empty projection".into()))?;
    let factors = slopes
        .iter()
        .map(|&s| FreeFactor::new(vec![primitive_of(s)?], 2))
        .collect::<Result<Vec<_>>>()?;
    FactorPath::through(factors)
}

/// A certified path from the smallest free factor containing the simple class `x` to a
/// factor in the projection of `g`, with length at most `6k + 13` where `k` is the least
/// number of times `x` crosses an edge.
pub fn crossing_bound_path(x: &CyclicWord, g: &MarkedGraph) -> Result<BoundedPath> {
    let n = g.rank();
    let ffx = smallest_factor(x, n)?;
    let (k, _) = min_crossings(x, g)?;
    let bound = 6 * k + 13;
    if n == 2 {
        let path = farey_route(slope_of(&ffx)?, &project(g)?)?;
        return Ok(BoundedPath { path, crossings: k, bound });
    }
    let l = g.realize_loop(x)?;
    let mut best: Option<FactorPath> = None;
    let mut last_err = None;
    for e in (0..g.num_edges()).filter(|&e| l.crossings(e) == k) {
        match toward(x, g, e, 0) {
            Ok((p, _)) if best.as_ref().map_or(true, |b| p.len() < b.len()) => best = Some(p),
            Ok(_) => {}
            Err(err) => last_err = Some(err),
        }
    }
    let path = best.ok_or_else(|| last_err.expect("some edge attains the minimum"))?;
    // stop at the first factor already in the projection
    let proj = project(g)?;
    let cut = path.factors.iter().position(|f| proj.contains(f)).expect("paths end in the projection");
    let path = FactorPath { factors: path.factors[..=cut].to_vec(), hops: path.hops[..cut].to_vec() };
    Ok(BoundedPath { path, crossings: k, bound })
}

/// Certified bound on the distance from `a` to the projection of `g` through the shortest
/// loop of the core of `a` over `g` scaled to volume 1: at most `6k + 14` when that
/// loop is shorter than `k + 1`.
#[derive(Debug, Clone, Serialize)]
pub struct FactorGraphBound {
    #[serde(with = "crate::rational::serde_q")]
    pub injectivity_radius: Q,
    /// The class of the shortest loop, which lies in `a`.
    pub class: CyclicWord,
    pub bound: usize,
    pub path: FactorPath,
}

pub fn distance_bound_factor_to_graph(a: &FreeFactor, g: &MarkedGraph) -> Result<FactorGraphBound> {
    if a.ambient_rank() != g.rank() {
        return Err(OskError::Rank { expected: format!("{}", a.ambient_rank()), actual: g.rank() });
    }
    let g = g.normalize();
    let core = CoreGraph::new(a.generators(), &g)?;
    let (injrad, cycle) = core.shortest_loop()?;
    let class = g.loop_class(&core.image(&cycle))?;
    let k = injrad.floor().to_integer().to_usize().ok_or_else(|| OskError::Input("injectivity radius out of range".into()))?;
    let inner = crossing_bound_path(&class, &g)?;
    let mut path = FactorPath::at(a.clone());
    path.push(inner.path.start().clone())?;
    path.extend(&inner.path)?;
    Ok(FactorGraphBound { injectivity_radius: injrad, class, bound: 6 * k + 14, path: path.shortcut()? })
}

/// Certified path between the projections of two graphs at Lipschitz distance `ln K`,
/// through the smallest factor of a candidate realizing the distance. Its length is at most
/// `12K + 32`.
#[derive(Debug, Clone, Serialize)]
pub struct GraphGraphBound {
    /// `K`, the maximal stretch from the first graph to the second.
    #[serde(with = "crate::rational::serde_q")]
    pub stretch: Q,
    pub witness: CyclicWord,
    /// `12K + 32`.
    #[serde(with = "crate::rational::serde_q")]
    pub bound: Q,
    /// Sum of the two crossing bounds met at the witness.
    pub crossing_bound: usize,
    pub path: FactorPath,
}

pub fn projection_distance_bound(g: &MarkedGraph, h: &MarkedGraph) -> Result<GraphGraphBound> {
    let (g, h) = (g.normalize(), h.normalize());
    let s = crate::lipschitz::stretch_factor(&g, &h)?;
    let to_g = crossing_bound_path(&s.witness, &g)?;
    let to_h = crossing_bound_path(&s.witness, &h)?;
    let mut path = to_g.path.reversed()?;
    path.extend(&to_h.path)?;
    Ok(GraphGraphBound {
        bound: &s.lambda * qi(12) + qi(32),
        stretch: s.lambda,
        witness: s.witness,
        crossing_bound: to_g.bound + to_h.bound,
        path,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::marked_graph::MarkedGraph;

    fn cw(s: &str) -> CyclicWord {
        CyclicWord::parse(s).unwrap()
    }

    fn check(x: &str, g: &MarkedGraph) -> BoundedPath {
        let b = crossing_bound_path(&cw(x), g).unwrap();
        b.path.verify().unwrap();
        assert_eq!(*b.path.start(), smallest_factor(&cw(x), g.rank()).unwrap());
        assert!(project(g).unwrap().contains(b.path.end()));
        assert!(b.path.len() <= b.bound, "{x}: {} > {}", b.path.len(), b.bound);
        b
    }

    #[test]
    fn blowup_collapses_back_to_the_rose() {
        let images = vec![Word::parse("ab").unwrap(), Word::parse("b").unwrap(), Word::parse("cA").unwrap()];
        let side = |l: Letter| usize::from(l == 2 || l == -3);
        let g = blowup(&images, &side, 2, &[(0, 1)]).unwrap();
        let (r, _) = collapse_to_rose(&g, &[3]).unwrap();
        assert_eq!(rose_images(&r), images);
    }

    #[test]
    fn crossing_examples() {
        let rose3 = MarkedGraph::rose(&[qi(1), qi(1), qi(1)]).unwrap();
        let b = check("a", &rose3);
        assert_eq!(b.crossings, 0);
        assert!(b.path.len() <= 1);
        check("abAB", &rose3);
        check("abcb", &rose3);
        check("abaab", &rose3);
        let rose2 = MarkedGraph::rose(&[qi(1), qi(1)]).unwrap();
        assert_eq!(check("abb", &rose2).path.len(), 1);
    }

    /// Loop `a` at vertex 0, bar to vertex 1, loops `b` and `c` there.
    fn dumbbell3() -> MarkedGraph {
        let e = |from, to| Edge { from, to, length: qi(1) };
        let marking = vec![vec![dir(0, false)], vec![dir(1, false), dir(2, false), dir(1, true)], vec![
            dir(1, false),
            dir(3, false),
            dir(1, true),
        ]];
        MarkedGraph::new(2, vec![e(0, 0), e(0, 1), e(1, 1), e(1, 1)], marking).unwrap()
    }

    #[test]
    fn separating_edge_reduction() {
        let g = dumbbell3();
        for x in ["aaabcbcbc", "aaBCBC", "abcAbc"] {
            let z = cw(x);
            let l = g.realize_loop(&z).unwrap();
            assert!(!g.is_nonseparating(1));
            let k = l.crossings(1);
            let (p, end) = toward(&z, &g, 1, 0).unwrap();
            p.verify().unwrap();
            assert_eq!(*p.start(), smallest_factor(&z, 3).unwrap());
            assert_eq!(*p.end(), subgraph_factor(&g, &end).unwrap());
            assert!(p.len() <= 6 * k + 13, "{x}: {} hops for {k} crossings", p.len());
        }
        assert_eq!(min_crossings(&cw("aaabcbcbc"), &g).unwrap(), (2, 1));
        check("aaabcbcbc", &g);
    }

    #[test]
    fn factor_to_graph_examples() {
        let rose3 = MarkedGraph::rose(&[qi(1), qi(1), qi(1)]).unwrap();
        let a = FreeFactor::parse("a", 3).unwrap();
        let r = distance_bound_factor_to_graph(&a, &rose3).unwrap();
        r.path.verify().unwrap();
        assert!(r.path.len() <= r.bound);
        assert_eq!(r.path.len(), 0);
        let f = FreeFactor::parse("abc,bc", 3).unwrap();
        let r = distance_bound_factor_to_graph(&f, &rose3).unwrap();
        r.path.verify().unwrap();
        assert!(r.path.len() <= r.bound);
    }
}
