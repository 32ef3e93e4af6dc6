//! Optimal difference-of-markings maps.
//!
//! Vertex images live in the universal cover of the target. Within a product of
//! closed cells every edge-image length is a maximum of affine forms, so the
//! max-slope objective is minimized exactly by linear programs; descending
//! through cell products reaches the global minimum because the objective is
//! convex on the product of trees.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::{One, Signed, Zero};
use serde_json::{json, Value};

use super::simplex::{minimize, LpOutcome};
use super::tree::{pieces_len, Affine, Cell, Cover, HPoint, Piece, Placed, TPoint};
use super::{candidates, stretch_factor, Candidate};
use crate::error::{OskError, Result};
use crate::marked_graph::{dir, edge_of, is_reversed, rev, signed_id, Dir, Edge, MarkedGraph};
use crate::rational::{fmt_q, Q};

const COMBINATION_BUDGET: usize = 50_000;
const STEP_BUDGET: usize = 10_000;

/// Partition of directions at each vertex into gates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GateStructure {
    pub gates: Vec<Vec<Vec<Dir>>>,
}

impl GateStructure {
    /// Groups directions whose edges pass `keep` by their germ.
    pub fn from_germs<K: Ord + Clone>(
        g: &MarkedGraph,
        keep: impl Fn(usize) -> bool,
        germ: impl Fn(Dir) -> Option<K>,
    ) -> Self {
        let gates = (0..g.num_vertices())
            .map(|v| {
                let mut by: BTreeMap<K, Vec<Dir>> = BTreeMap::new();
                for &d in g.star(v) {
                    if keep(edge_of(d)) {
                        if let Some(k) = germ(d) {
                            by.entry(k).or_default().push(d);
                        }
                    }
                }
                by.into_values().collect()
            })
            .collect();
        GateStructure { gates }
    }

    pub fn gate_of(&self, v: usize, d: Dir) -> Option<usize> {
        self.gates[v].iter().position(|gate| gate.contains(&d))
    }

    /// A turn `{d1, d2}` at `v` is illegal when both directions share a gate.
    pub fn is_illegal_turn(&self, v: usize, d1: Dir, d2: Dir) -> bool {
        d1 == d2 || matches!((self.gate_of(v, d1), self.gate_of(v, d2)), (Some(a), Some(b)) if a == b)
    }

    /// Every vertex carrying directions has at least two gates.
    pub fn is_train_track(&self) -> bool {
        self.gates.iter().all(|gs| gs.is_empty() || gs.len() >= 2)
    }

    /// Σ over gates of (size − 1).
    pub fn illegality(&self) -> usize {
        self.gates.iter().flatten().map(|g| g.len() - 1).sum()
    }

    /// Whether the cyclic direction sequence crosses only legal turns.
    pub fn is_legal_loop(&self, g: &MarkedGraph, dirs: &[Dir]) -> bool {
        let n = dirs.len();
        (0..n).all(|i| {
            let (a, b) = (dirs[i], dirs[(i + 1) % n]);
            !self.is_illegal_turn(g.terminus(a), rev(a), b)
        })
    }
}

/// A map from `domain` to `target`, recorded against `codomain`: the target
/// subdivided at vertex images so that images are edge paths.
#[derive(Debug, Clone)]
pub struct GraphMap {
    pub domain: MarkedGraph,
    pub target: MarkedGraph,
    pub codomain: MarkedGraph,
    /// For each codomain edge, the target edge it lies in and its forward offset interval.
    pub sub_edges: Vec<(usize, Q, Q)>,
    pub vertex_images: Vec<usize>,
    pub edge_images: Vec<Vec<Dir>>,
    pub slopes: Vec<Q>,
}

#[derive(Debug, Clone)]
pub struct TensionReport {
    pub lambda: Q,
    pub tension: Vec<usize>,
    pub gates: GateStructure,
    pub legal_candidate: Candidate,
}

impl GraphMap {
    fn build(domain: &MarkedGraph, target: &MarkedGraph, points: &[HPoint], images: &[Vec<Piece>]) -> Result<Self> {
        let mut cuts: Vec<BTreeSet<Q>> = vec![BTreeSet::new(); target.num_edges()];
        for p in points {
            if let HPoint::Interior(e, o) = p {
                cuts[*e].insert(o.clone());
            }
        }
        let mut nv = target.num_vertices();
        let mut edges = Vec::new();
        let mut sub_edges = Vec::new();
        let mut per_edge: Vec<Vec<usize>> = vec![Vec::new(); target.num_edges()];
        let mut cut_vertex: BTreeMap<(usize, Q), usize> = BTreeMap::new();
        for (e, te) in target.edges().iter().enumerate() {
            let mut prev_v = te.from;
            let mut prev_o = Q::zero();
            for o in &cuts[e] {
                let v = nv;
                nv += 1;
                cut_vertex.insert((e, o.clone()), v);
                per_edge[e].push(edges.len());
                edges.push(Edge { from: prev_v, to: v, length: o - &prev_o });
                sub_edges.push((e, prev_o.clone(), o.clone()));
                prev_v = v;
                prev_o = o.clone();
            }
            per_edge[e].push(edges.len());
            edges.push(Edge { from: prev_v, to: te.to, length: &te.length - &prev_o });
            sub_edges.push((e, prev_o, te.length.clone()));
        }
        let expand = |d: Dir| -> Vec<Dir> {
            let ids = &per_edge[edge_of(d)];
            if is_reversed(d) {
                ids.iter().rev().map(|&i| dir(i, true)).collect()
            } else {
                ids.iter().map(|&i| dir(i, false)).collect()
            }
        };
        let marking = target.marking().iter().map(|p| p.iter().flat_map(|&d| expand(d)).collect()).collect();
        let codomain = MarkedGraph::new_relaxed(nv, edges, marking)?;
        let vertex_images = points
            .iter()
            .map(|p| match p {
                HPoint::Vertex(v) => *v,
                HPoint::Interior(e, o) => cut_vertex[&(*e, o.clone())],
            })
            .collect();
        let mut edge_images = Vec::new();
        for pcs in images {
            let mut path = Vec::new();
            for pc in pcs {
                let e = edge_of(pc.dir);
                let l = &target.edges()[e].length;
                let (lo, hi) = if is_reversed(pc.dir) { (l - &pc.to, l - &pc.from) } else { (pc.from.clone(), pc.to.clone()) };
                let mut seg: Vec<Dir> = per_edge[e]
                    .iter()
                    .filter(|&&i| sub_edges[i].1 >= lo && sub_edges[i].2 <= hi)
                    .map(|&i| dir(i, false))
                    .collect();
                let covered: Q = seg.iter().map(|&d| codomain.length(d).clone()).sum();
                if covered != &hi - &lo {
                    return Err(OskError::Convergence("image piece does not align with the subdivision".into()));
                }
                if is_reversed(pc.dir) {
                    seg = seg.iter().rev().map(|&d| rev(d)).collect();
                }
                path.extend(seg);
            }
            edge_images.push(path);
        }
        let slopes = edge_images
            .iter()
            .zip(domain.edges())
            .map(|(p, e)| codomain.path_length(p) / &e.length)
            .collect();
        let m = GraphMap {
            domain: domain.clone(),
            target: target.clone(),
            codomain,
            sub_edges,
            vertex_images,
            edge_images,
            slopes,
        };
        m.check_paths()?;
        Ok(m)
    }

    fn check_paths(&self) -> Result<()> {
        for (i, (p, e)) in self.edge_images.iter().zip(self.domain.edges()).enumerate() {
            let mut at = self.vertex_images[e.from];
            for &d in p {
                if self.codomain.origin(d) != at {
                    return Err(OskError::Convergence(format!("image of edge {i} is not a path")));
                }
                at = self.codomain.terminus(d);
            }
            if at != self.vertex_images[e.to] {
                return Err(OskError::Convergence(format!("image of edge {i} ends at the wrong vertex")));
            }
        }
        Ok(())
    }

    pub fn lambda(&self) -> Q {
        self.slopes.iter().max().cloned().unwrap_or_else(Q::zero)
    }

    /// Edges of maximal slope.
    pub fn tension(&self) -> Vec<usize> {
        let l = self.lambda();
        (0..self.slopes.len()).filter(|&e| self.slopes[e] == l).collect()
    }

    /// Image of a domain path in the codomain, unreduced.
    pub fn image_path(&self, dirs: &[Dir]) -> Vec<Dir> {
        let mut out = Vec::new();
        for &d in dirs {
            let p = &self.edge_images[edge_of(d)];
            if is_reversed(d) {
                out.extend(p.iter().rev().map(|&x| rev(x)));
            } else {
                out.extend_from_slice(p);
            }
        }
        out
    }

    /// Initial codomain direction of the image of `d`, if nondegenerate.
    pub fn germ(&self, d: Dir) -> Option<Dir> {
        let p = &self.edge_images[edge_of(d)];
        if is_reversed(d) {
            p.last().map(|&x| rev(x))
        } else {
            p.first().copied()
        }
    }

    pub fn gates_on(&self, edges: &[usize]) -> GateStructure {
        let set: BTreeSet<usize> = edges.iter().copied().collect();
        GateStructure::from_germs(&self.domain, |e| set.contains(&e), |d| self.germ(d))
    }

    pub fn gates(&self) -> GateStructure {
        GateStructure::from_germs(&self.domain, |_| true, |d| self.germ(d))
    }

    /// Checks that the map induces the change of marking on generators and their pairwise products.
    pub fn verify_homotopy(&self) -> Result<()> {
        let n = self.domain.rank();
        let mut words = Vec::new();
        for i in 1..=n as i32 {
            words.push(vec![i]);
            for j in (i + 1)..=n as i32 {
                words.push(vec![i, j]);
                words.push(vec![i, -j]);
            }
        }
        for w in words {
            let w = crate::free_group::Word::reduce(w);
            let z = crate::free_group::CyclicWord::new(&w)?;
            let img = self.image_path(&self.domain.spell(&w));
            let cls = self.codomain.loop_class(&img)?;
            if cls != z {
                return Err(OskError::Convergence(format!("map sends {z} to {cls}")));
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> Value {
        let gates = self.gates();
        let tension = self.tension();
        let describe = |v: usize| -> Value {
            if v < self.target.num_vertices() {
                json!({ "vertex": v })
            } else {
                let i = (0..self.sub_edges.len()).find(|&i| self.codomain.edges()[i].to == v).expect("cut vertex");
                let (e, _, o) = &self.sub_edges[i];
                json!({ "edge": e + 1, "offset": fmt_q(o) })
            }
        };
        json!({
            "lambda": fmt_q(&self.lambda()),
            "domain": self.domain.to_json(),
            "target": self.target.to_json(),
            "codomain": self.codomain.to_json(),
            "vertex_images": self.vertex_images.iter().map(|&v| json!({ "codomain_vertex": v, "target_point": describe(v) })).collect::<Vec<_>>(),
            "edge_paths": self.edge_images.iter().map(|p| p.iter().map(|&d| signed_id(d)).collect::<Vec<_>>()).collect::<Vec<_>>(),
            "slopes": self.slopes.iter().map(fmt_q).collect::<Vec<_>>(),
            "tension": tension.iter().map(|e| e + 1).collect::<Vec<_>>(),
            "gates": gates.gates.iter().map(|gs| gs.iter().map(|g| g.iter().map(|&d| signed_id(d)).collect::<Vec<_>>()).collect::<Vec<_>>()).collect::<Vec<_>>(),
        })
    }
}

struct Problem<'a> {
    g: &'a MarkedGraph,
    cover: Cover<'a>,
    trans: Vec<Vec<Dir>>,
}

#[derive(Clone)]
struct Slot {
    cell: Cell,
    lo: Q,
    hi: Q,
}

enum Objective<'a> {
    MaxSlope,
    /// Sum of image lengths over edges not flagged, each capped at `λ ℓ(e)`.
    SumOutside { fixed: &'a [bool], lambda: &'a Q },
}

impl<'a> Problem<'a> {
    fn new(g: &'a MarkedGraph, h: &'a MarkedGraph) -> Self {
        let cover = Cover::new(h);
        let trans = (0..g.num_edges()).map(|e| cover.translation(&g.path_word(&[dir(e, false)]))).collect();
        Problem { g, cover, trans }
    }

    fn image(&self, pos: &[TPoint], e: usize) -> Vec<Piece> {
        let ed = &self.g.edges()[e];
        let far = self.cover.translate(&self.trans[e], &pos[ed.to]);
        self.cover.geodesic(&pos[ed.from], &far)
    }

    /// Image pieces read from the end of `d` at its origin.
    fn image_from(&self, pos: &[TPoint], d: Dir) -> Vec<Piece> {
        let e = edge_of(d);
        let ed = &self.g.edges()[e];
        if is_reversed(d) {
            let far = self.cover.translate(&self.trans[e], &pos[ed.to]);
            self.cover.geodesic(&far, &pos[ed.from])
        } else {
            self.image(pos, e)
        }
    }

    fn lengths(&self, pos: &[TPoint]) -> Vec<Q> {
        (0..self.g.num_edges()).map(|e| pieces_len(&self.image(pos, e))).collect()
    }

    fn max_slope(&self, lens: &[Q]) -> Q {
        lens.iter().zip(self.g.edges()).map(|(l, e)| l / &e.length).max().expect("graph has edges")
    }

    fn fixed_slot(&self, p: &TPoint) -> Slot {
        let (cell, s) = self.cover.some_cell(p);
        Slot { cell, lo: s.clone(), hi: s }
    }

    fn free_slot(&self, p: &TPoint, germ: Dir) -> Slot {
        let (cell, _) = self.cover.cell_toward(p, germ);
        let hi = self.cover.h.length(cell.edge).clone();
        Slot { cell, lo: Q::zero(), hi }
    }

    /// Cells a vertex may explore: one per listed germ, or its own edge when interior.
    fn slots(&self, p: &TPoint, germs: &BTreeSet<Dir>) -> Vec<Slot> {
        if p.partial.is_some() {
            return vec![self.free_slot(p, 0)];
        }
        if germs.is_empty() {
            return vec![self.fixed_slot(p)];
        }
        germs.iter().map(|&d| self.free_slot(p, d)).collect()
    }

    fn solve(&self, slots: &[Slot], obj: &Objective) -> Option<(Q, Vec<Q>)> {
        let nv = slots.len();
        let ne = self.g.num_edges();
        let placed: Vec<Placed> =
            slots.iter().enumerate().map(|(v, s)| Placed { cell: s.cell.clone(), var: v, flipped: false }).collect();
        let mut extra = Vec::new();
        match obj {
            Objective::MaxSlope => extra.push(None),
            Objective::SumOutside { fixed, .. } => extra.extend((0..ne).filter(|&e| !fixed[e]).map(Some)),
        }
        let width = nv + extra.len();
        let mut a: Vec<Vec<Q>> = Vec::new();
        let mut b: Vec<Q> = Vec::new();
        let mut push = |f: &Affine, slack_var: usize, slack_coef: Q| {
            let mut row = vec![Q::zero(); width];
            for (i, c) in &f.coef {
                row[*i] += c;
            }
            row[slack_var] = -slack_coef;
            a.push(row);
            b.push(-&f.constant);
        };
        for e in 0..ne {
            let ed = &self.g.edges()[e];
            let (cell, flipped) = self.cover.translate_cell(&self.trans[e], &placed[ed.to].cell);
            let far = Placed { cell, var: ed.to, flipped };
            let forms = self.cover.distance_forms(&placed[ed.from], &far);
            match obj {
                Objective::MaxSlope => {
                    for f in &forms {
                        push(f, nv, ed.length.clone());
                    }
                }
                Objective::SumOutside { fixed, .. } => {
                    if let Some(k) = extra.iter().position(|x| *x == Some(e)) {
                        let _ = fixed;
                        for f in &forms {
                            push(f, nv + k, Q::one());
                        }
                    }
                }
            }
        }
        if let Objective::SumOutside { lambda, .. } = obj {
            for (k, e) in extra.iter().enumerate() {
                let mut row = vec![Q::zero(); width];
                row[nv + k] = Q::one();
                a.push(row);
                b.push(*lambda * &self.g.edges()[e.unwrap()].length);
            }
        }
        for (v, s) in slots.iter().enumerate() {
            let mut row = vec![Q::zero(); width];
            row[v] = Q::one();
            a.push(row.clone());
            b.push(s.hi.clone());
            row[v] = -Q::one();
            a.push(row);
            b.push(-&s.lo);
        }
        let mut c = vec![Q::zero(); width];
        for x in c.iter_mut().skip(nv) {
            *x = Q::one();
        }
        match minimize(&c, &a, &b) {
            LpOutcome::Optimal { x, value } => Some((value, x[..nv].to_vec())),
            _ => None,
        }
    }

    /// Tries every combination of slots; returns the best strict improvement on `current`.
    fn best_move(&self, options: &[Vec<Slot>], obj: &Objective, current: &Q) -> Result<Option<Vec<TPoint>>> {
        let total = options.iter().try_fold(1usize, |acc, o| acc.checked_mul(o.len()).filter(|&x| x <= COMBINATION_BUDGET));
        if total.is_none() {
            return Err(OskError::Budget("too many cell combinations".into()));
        }
        let mut idx = vec![0usize; options.len()];
        let mut best: Option<(Q, Vec<Slot>, Vec<Q>)> = None;
        loop {
            let slots: Vec<Slot> = idx.iter().zip(options).map(|(&i, o)| o[i].clone()).collect();
            if let Some((val, t)) = self.solve(&slots, obj) {
                if &val < current && best.as_ref().is_none_or(|(bv, _, _)| &val < bv) {
                    best = Some((val, slots, t));
                }
            }
            let mut k = 0;
            loop {
                if k == idx.len() {
                    return Ok(best.map(|(_, slots, t)| {
                        slots.iter().zip(&t).map(|(s, x)| self.cover.cell_point(&s.cell, x)).collect()
                    }));
                }
                idx[k] += 1;
                if idx[k] < options[k].len() {
                    break;
                }
                idx[k] = 0;
                k += 1;
            }
        }
    }

    /// Germs at each vertex of the images of the listed edges.
    fn germs(&self, pos: &[TPoint], keep: impl Fn(usize) -> bool) -> Vec<BTreeSet<Dir>> {
        (0..self.g.num_vertices())
            .map(|v| {
                self.g
                    .star(v)
                    .iter()
                    .filter(|&&d| keep(edge_of(d)))
                    .filter_map(|&d| self.image_from(pos, d).first().map(|p| p.dir))
                    .collect()
            })
            .collect()
    }

    fn minimize_max_slope(&self, pos: &mut Vec<TPoint>) -> Result<Q> {
        for _ in 0..STEP_BUDGET {
            let lens = self.lengths(pos);
            let mu = self.max_slope(&lens);
            let active: Vec<bool> = (0..lens.len()).map(|e| &lens[e] / &self.g.edges()[e].length == mu).collect();
            let germs = self.germs(pos, |e| active[e]);
            let options: Vec<Vec<Slot>> = (0..pos.len()).map(|v| self.slots(&pos[v], &germs[v])).collect();
            match self.best_move(&options, &Objective::MaxSlope, &mu)? {
                Some(p) => *pos = p,
                None => return Ok(mu),
            }
        }
        Err(OskError::Convergence("descent step budget exhausted".into()))
    }

    /// Moves one-gate tension vertices until every vertex of the tension graph has two gates.
    fn legalize(&self, pos: &mut [TPoint], mu: &Q) -> Result<()> {
        for _ in 0..STEP_BUDGET {
            let lens = self.lengths(pos);
            let active: Vec<bool> = (0..lens.len()).map(|e| &lens[e] / &self.g.edges()[e].length == *mu).collect();
            let mut target = None;
            for v in 0..pos.len() {
                let ends: Vec<(Dir, Vec<Piece>)> = self
                    .g
                    .star(v)
                    .iter()
                    .filter(|&&d| active[edge_of(d)])
                    .map(|&d| (d, self.image_from(pos, d)))
                    .collect();
                let gs: BTreeSet<Dir> = ends.iter().map(|(_, p)| p[0].dir).collect();
                if gs.len() == 1 {
                    target = Some((v, ends));
                    break;
                }
            }
            let Some((v, ends)) = target else { return Ok(()) };
            let first = &ends[0].1[0];
            let mut eps = first.len();
            for (d, p) in &ends {
                let l = pieces_len(p);
                let ends_here = usize::from(self.g.edges()[edge_of(*d)].from == v) + usize::from(self.g.edges()[edge_of(*d)].to == v);
                eps = eps.min(l / Q::from_integer((ends_here as i64).into()));
            }
            for &d in self.g.star(v) {
                let e = edge_of(d);
                if !active[e] {
                    let slack = mu * &self.g.edges()[e].length - &lens[e];
                    eps = eps.min(slack / Q::from_integer(4.into()));
                }
            }
            if !eps.is_positive() {
                return Err(OskError::Convergence("legalization stalled".into()));
            }
            pos[v] = self.cover.advance(&pos[v], &ends[0].1, &eps);
        }
        Err(OskError::Convergence("legalization step budget exhausted".into()))
    }

    fn map_from(&self, pos: &[TPoint]) -> Result<GraphMap> {
        let points: Vec<HPoint> = pos.iter().map(|p| self.cover.project(p)).collect();
        let images: Vec<Vec<Piece>> = (0..self.g.num_edges()).map(|e| self.image(pos, e)).collect();
        GraphMap::build(self.g, self.cover.h, &points, &images)
    }

    fn report(&self, map: &GraphMap, lambda: &Q) -> Result<TensionReport> {
        let tension = map.tension();
        let gates = map.gates_on(&tension);
        let inside: BTreeSet<usize> = tension.iter().copied().collect();
        let legal = candidates(self.g)
            .into_iter()
            .find(|c| c.path.dirs.iter().all(|&d| inside.contains(&edge_of(d))) && gates.is_legal_loop(self.g, &c.path.dirs))
            .ok_or_else(|| OskError::Convergence("tension graph has no legal candidate".into()))?;
        Ok(TensionReport { lambda: lambda.clone(), tension, gates, legal_candidate: legal })
    }
}

fn optimal_positions<'a>(g: &'a MarkedGraph, h: &'a MarkedGraph) -> Result<(Problem<'a>, Vec<TPoint>, Q)> {
    let lambda = stretch_factor(g, h)?.lambda;
    let problem = Problem::new(g, h);
    let mut pos = vec![problem.cover.root(); g.num_vertices()];
    let mu = problem.minimize_max_slope(&mut pos)?;
    if mu != lambda {
        return Err(OskError::Convergence(format!("descent reached {mu}, candidates give {lambda}")));
    }
    problem.legalize(&mut pos, &lambda)?;
    Ok((problem, pos, lambda))
}

/// An optimal map between volume-1 graphs with a train-track structure on its tension graph.
pub fn optimal_map(g: &MarkedGraph, h: &MarkedGraph) -> Result<(GraphMap, TensionReport)> {
    for x in [g, h] {
        if !x.is_normalized() {
            return Err(OskError::NotNormalized(format!("volume is {}; normalize first", x.volume())));
        }
    }
    let (problem, pos, lambda) = optimal_positions(g, h)?;
    let map = problem.map_from(&pos)?;
    let report = problem.report(&map, &lambda)?;
    Ok((map, report))
}

/// Shrinks edges outside the tension graph as far as possible, giving an unnormalized
/// `Γ″` in the closed simplex of `g` and a map `Γ″ → h` stretching every edge by `λ`.
pub fn rescale_to_full_tension(g: &MarkedGraph, h: &MarkedGraph) -> Result<(MarkedGraph, GraphMap)> {
    for x in [g, h] {
        if !x.is_normalized() {
            return Err(OskError::NotNormalized(format!("volume is {}; normalize first", x.volume())));
        }
    }
    let (problem, mut pos, lambda) = optimal_positions(g, h)?;
    let lens = problem.lengths(&pos);
    let tense: Vec<bool> = (0..lens.len()).map(|e| &lens[e] / &g.edges()[e].length == lambda).collect();
    let pinned: Vec<bool> = (0..g.num_vertices()).map(|v| g.star(v).iter().any(|&d| tense[edge_of(d)])).collect();
    let obj = Objective::SumOutside { fixed: &tense, lambda: &lambda };
    for _ in 0..STEP_BUDGET {
        let lens = problem.lengths(&pos);
        let current: Q = (0..lens.len()).filter(|&e| !tense[e]).map(|e| lens[e].clone()).sum();
        let germs = problem.germs(&pos, |e| !tense[e]);
        let mut opts = germs.clone();
        // vertices sharing an image point may need to move together
        loop {
            let mut changed = false;
            for (e, ed) in g.edges().iter().enumerate() {
                if !tense[e] && lens[e].is_zero() && !pinned[ed.from] && !pinned[ed.to] {
                    let u: BTreeSet<Dir> = opts[ed.from].union(&opts[ed.to]).copied().collect();
                    for v in [ed.from, ed.to] {
                        if opts[v] != u {
                            opts[v] = u.clone();
                            changed = true;
                        }
                    }
                }
            }
            if !changed {
                break;
            }
        }
        let options: Vec<Vec<Slot>> = (0..pos.len())
            .map(|v| if pinned[v] { vec![problem.fixed_slot(&pos[v])] } else { problem.slots(&pos[v], &opts[v]) })
            .collect();
        match problem.best_move(&options, &obj, &current)? {
            Some(p) => pos = p,
            None => return finish_rescale(&problem, &pos, &tense, &lambda),
        }
    }
    Err(OskError::Convergence("rescaling step budget exhausted".into()))
}

fn finish_rescale(problem: &Problem, pos: &[TPoint], tense: &[bool], lambda: &Q) -> Result<(MarkedGraph, GraphMap)> {
    let g = problem.g;
    let h = problem.cover.h;
    let lens = problem.lengths(pos);
    let mut lengths = Vec::new();
    let mut zero = Vec::new();
    for e in 0..g.num_edges() {
        if tense[e] {
            lengths.push(g.edges()[e].length.clone());
        } else if lens[e].is_zero() {
            zero.push(e);
            lengths.push(Q::one());
        } else {
            lengths.push(&lens[e] / lambda);
        }
    }
    let (g2, vmap) = g.with_lengths(&lengths)?.collapse_forest_with_map(&zero)?;
    let mut points = vec![None; g2.num_vertices()];
    for (v, p) in pos.iter().enumerate() {
        points[vmap[v]].get_or_insert_with(|| problem.cover.project(p));
    }
    let points: Vec<HPoint> = points.into_iter().map(|p| p.expect("every vertex has a preimage")).collect();
    let images: Vec<Vec<Piece>> =
        (0..g.num_edges()).filter(|e| !zero.contains(e)).map(|e| problem.image(pos, e)).collect();
    let map = GraphMap::build(&g2, h, &points, &images)?;
    map.verify_homotopy()?;
    if map.slopes.iter().any(|s| s != lambda) {
        return Err(OskError::Convergence("rescaled map is not fully tense".into()));
    }
    if !map.gates().is_train_track() {
        return Err(OskError::Convergence("rescaled map has a one-gate vertex".into()));
    }
    let s1 = stretch_factor(g, &g2)?.lambda;
    let s2 = stretch_factor(&g2, h)?.lambda;
    if &(&s1 * &s2) != lambda {
        return Err(OskError::Convergence(format!("rescaling is not geodesic: {s1}·{s2} ≠ {lambda}")));
    }
    Ok((g2, map))
}
