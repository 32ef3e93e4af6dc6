//! Legal and illegal segments of immersed loops and core graphs, and exact threshold times.

use std::cmp::{Ordering, Reverse};
use std::collections::{BTreeSet, BinaryHeap};

use num_traits::{One, Signed, Zero};

use crate::error::{OskError, Result};
use crate::lipschitz::GateStructure;
use crate::marked_graph::{edge_of, rev, CoreGraph, Dir, EdgeLoop, MarkedGraph};
use crate::rational::Q;

const RUN_BUDGET: usize = 2_000_000;

/// `value + slope·r`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Affine1 {
    pub value: Q,
    pub slope: Q,
}

impl Affine1 {
    pub fn constant(value: Q) -> Self {
        Affine1 { value, slope: Q::zero() }
    }

    pub fn zero() -> Self {
        Self::constant(Q::zero())
    }

    pub fn eval(&self, r: &Q) -> Q {
        &self.value + &self.slope * r
    }

    pub fn add(&self, o: &Affine1) -> Affine1 {
        Affine1 { value: &self.value + &o.value, slope: &self.slope + &o.slope }
    }

    pub fn sub(&self, o: &Affine1) -> Affine1 {
        Affine1 { value: &self.value - &o.value, slope: &self.slope - &o.slope }
    }

    pub fn scale(&self, c: &Q) -> Affine1 {
        Affine1 { value: &self.value * c, slope: &self.slope * c }
    }
}

/// Which one-sided derivative breaks ties between pieces active at the evaluation point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Side {
    Left,
    Right,
}

/// A value at a point together with the slope of the piece active on `side`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct Germ1 {
    pub value: Q,
    pub slope: Q,
}

/// Cycle reachable within the subgraph on `nodes` of a successor relation.
fn has_cycle(next: &[Vec<usize>], nodes: &BTreeSet<usize>) -> bool {
    let mut state = vec![0u8; next.len()];
    for &s in nodes {
        if state[s] != 0 {
            continue;
        }
        let mut stack = vec![(s, 0usize)];
        state[s] = 1;
        while let Some((d, i)) = stack.pop() {
            if i < next[d].len() {
                stack.push((d, i + 1));
                let x = next[d][i];
                match state[x] {
                    0 => {
                        state[x] = 1;
                        stack.push((x, 0));
                    }
                    1 => return true,
                    _ => {}
                }
            } else {
                state[d] = 2;
            }
        }
    }
    false
}

impl Germ1 {
    fn add(&self, o: &Germ1) -> Germ1 {
        Germ1 { value: &self.value + &o.value, slope: &self.slope + &o.slope }
    }

    /// Order for taking maxima: on the left the smaller slope wins a tie, on the right the larger.
    fn cmp_max(&self, o: &Germ1, side: Side) -> Ordering {
        self.value.cmp(&o.value).then_with(|| match side {
            Side::Left => o.slope.cmp(&self.slope),
            Side::Right => self.slope.cmp(&o.slope),
        })
    }

    fn max(self, o: Germ1, side: Side) -> Germ1 {
        if o.cmp_max(&self, side) == Ordering::Greater {
            o
        } else {
            self
        }
    }
}

type Oracle<'a> = dyn FnMut(&Q, Side) -> Result<Germ1> + 'a;

/// From a point where `f ≥ 0`, walks left along tangents to the nearest zero; `None` if `f`
/// stops increasing first or the walk leaves `(lo, ·]`.
fn newton_left(f: &mut Oracle, mut r: Q, lo: &Q) -> Result<Option<Q>> {
    for _ in 0..RUN_BUDGET {
        let g = f(&r, Side::Left)?;
        if g.value.is_zero() {
            return Ok(Some(r));
        }
        if !g.slope.is_positive() {
            return Ok(None);
        }
        r = &r - &g.value / &g.slope;
        if &r <= lo {
            return Ok(None);
        }
    }
    Err(OskError::Budget("root search did not terminate".into()))
}

/// Mirror of [`newton_left`].
fn newton_right(f: &mut Oracle, mut r: Q, hi: &Q) -> Result<Option<Q>> {
    for _ in 0..RUN_BUDGET {
        let g = f(&r, Side::Right)?;
        if g.value.is_zero() {
            return Ok(Some(r));
        }
        if !g.slope.is_negative() {
            return Ok(None);
        }
        r = &r - &g.value / &g.slope;
        if &r >= hi {
            return Ok(None);
        }
    }
    Err(OskError::Budget("root search did not terminate".into()))
}

/// Smallest `r ∈ [lo, hi]` with `f(r) ≥ 0`, for `f` convex and piecewise affine.
pub(crate) fn first_root(f: &mut Oracle, lo: &Q, hi: &Q) -> Result<Option<Q>> {
    if !f(lo, Side::Right)?.value.is_negative() {
        return Ok(Some(lo.clone()));
    }
    if f(hi, Side::Left)?.value.is_negative() {
        return Ok(None);
    }
    newton_left(f, hi.clone(), lo)
}

/// Largest `r ∈ [lo, hi]` with `f(r) ≥ 0`, for `f` convex and piecewise affine.
pub(crate) fn last_root(f: &mut Oracle, lo: &Q, hi: &Q) -> Result<Option<Q>> {
    if !f(hi, Side::Left)?.value.is_negative() {
        return Ok(Some(hi.clone()));
    }
    if f(lo, Side::Right)?.value.is_negative() {
        return Ok(None);
    }
    newton_right(f, lo.clone(), hi)
}

/// Points of `(lo, hi)` where a convex piecewise-affine function changes sign.
fn crossings(f: &mut Oracle, lo: &Q, hi: &Q) -> Result<Vec<Q>> {
    let start = !f(lo, Side::Right)?.value.is_negative();
    let end = !f(hi, Side::Left)?.value.is_negative();
    let mut out = Vec::new();
    match (start, end) {
        (true, true) => {
            if let Some(a) = newton_right(f, lo.clone(), hi)? {
                if let Some(b) = newton_left(f, hi.clone(), &a)? {
                    if &a > lo && a < b && &b < hi {
                        out.push(a);
                        out.push(b);
                    }
                }
            }
        }
        (true, false) => out.extend(newton_right(f, lo.clone(), hi)?.filter(|a| a > lo)),
        (false, true) => out.extend(newton_left(f, hi.clone(), lo)?.filter(|b| b < hi)),
        (false, false) => {}
    }
    Ok(out)
}

/// An immersed graph with turns classified by a gate structure on the ambient graph.
#[derive(Debug, Clone)]
pub(crate) struct TurnGraph {
    len: Vec<Affine1>,
    /// Successor directions across a legal turn.
    legal: Vec<Vec<Dir>>,
    /// Successor directions across an illegal, non-backtracking turn.
    illegal: Vec<Vec<Dir>>,
    legal_cycle: bool,
    /// Legal successors in an order where every direction precedes its successors.
    order: Vec<Dir>,
}

impl TurnGraph {
    pub fn new(core: &CoreGraph, ambient: &MarkedGraph, gates: &GateStructure, len: Vec<Affine1>) -> Self {
        let stars = core.stars();
        let nd = 2 * core.edges.len();
        let mut legal = vec![Vec::new(); nd];
        let mut illegal = vec![Vec::new(); nd];
        for d in 0..nd {
            let v = core.terminus(d);
            for &x in &stars[v] {
                if x == rev(d) {
                    continue;
                }
                let (a, b) = (core.label(rev(d)), core.label(x));
                if gates.is_illegal_turn(ambient.origin(a), a, b) {
                    illegal[d].push(x);
                } else {
                    legal[d].push(x);
                }
            }
        }
        // reverse postorder of the legal successor graph, detecting cycles
        let mut state = vec![0u8; nd];
        let mut post = Vec::with_capacity(nd);
        let mut legal_cycle = false;
        for s in 0..nd {
            if state[s] != 0 {
                continue;
            }
            let mut stack = vec![(s, 0usize)];
            state[s] = 1;
            while let Some((d, i)) = stack.pop() {
                if i < legal[d].len() {
                    stack.push((d, i + 1));
                    let x = legal[d][i];
                    match state[x] {
                        0 => {
                            state[x] = 1;
                            stack.push((x, 0));
                        }
                        1 => legal_cycle = true,
                        _ => {}
                    }
                } else {
                    state[d] = 2;
                    post.push(d);
                }
            }
        }
        post.reverse();
        TurnGraph { len, legal, illegal, legal_cycle, order: post }
    }

    pub fn has_legal_cycle(&self) -> bool {
        self.legal_cycle
    }

    pub fn has_illegal_turn(&self) -> bool {
        self.illegal.iter().any(|x| !x.is_empty())
    }

    fn at(&self, d: Dir, r: &Q) -> Germ1 {
        let a = &self.len[edge_of(d)];
        Germ1 { value: a.eval(r), slope: a.slope.clone() }
    }

    /// Longest legal path starting with each direction; requires no legal cycle.
    fn legal_from(&self, r: &Q, side: Side) -> Vec<Germ1> {
        let mut best: Vec<Option<Germ1>> = vec![None; self.legal.len()];
        for &d in self.order.iter().rev() {
            let mut b = self.at(d, r);
            let mut tail: Option<Germ1> = None;
            for &x in &self.legal[d] {
                let v = best[x].clone().expect("successors come first");
                tail = Some(match tail {
                    None => v,
                    Some(t) => t.max(v, side),
                });
            }
            if let Some(t) = tail {
                b = b.add(&t);
            }
            best[d] = Some(b);
        }
        best.into_iter().map(|b| b.expect("all visited")).collect()
    }

    /// Longest legal path ending with each direction; requires no legal cycle.
    fn legal_into(&self, r: &Q, side: Side) -> Vec<Germ1> {
        // a path ending with d reversed is a path starting with rev d
        let from = self.legal_from(r, side);
        (0..self.legal.len()).map(|d| from[rev(d)].clone()).collect()
    }

    /// Longest legal path, or `None` when a legal cycle makes it unbounded.
    pub fn longest_legal(&self, r: &Q, side: Side) -> Option<Germ1> {
        if self.legal_cycle {
            return None;
        }
        self.legal_from(r, side).into_iter().reduce(|a, b| a.max(b, side))
    }

    /// Path realizing [`TurnGraph::longest_legal`].
    pub fn longest_legal_path(&self, r: &Q) -> Option<Vec<Dir>> {
        if self.legal_cycle {
            return None;
        }
        let best = self.legal_from(r, Side::Right);
        let mut d = (0..best.len()).max_by(|&a, &b| best[a].value.cmp(&best[b].value))?;
        let mut path = vec![d];
        while !self.legal[d].is_empty() {
            let want = &best[d].value - &self.at(d, r).value;
            d = *self.legal[d].iter().find(|&&x| best[x].value == want).expect("a successor attains the maximum");
            path.push(d);
        }
        Some(path)
    }

    /// Number of illegal turns, counted as ordered (incoming, outgoing) pairs.
    pub fn illegal_turn_total(&self) -> usize {
        self.illegal.iter().map(Vec::len).sum()
    }

    /// Shortest legal paths starting with `b`, indexed by their last direction; lengths
    /// include both end edges. Ties follow the one-sided order of `side`.
    fn shortest_legal_from(&self, b: Dir, r: &Q, side: Side) -> Vec<Option<Germ1>> {
        let key = |g: &Germ1| -> (Q, Q) {
            match side {
                Side::Right => (g.value.clone(), g.slope.clone()),
                Side::Left => (g.value.clone(), -&g.slope),
            }
        };
        let nd = self.legal.len();
        let mut best: Vec<Option<Germ1>> = vec![None; nd];
        let mut done = vec![false; nd];
        let mut heap = BinaryHeap::new();
        let start = self.at(b, r);
        heap.push(Reverse((key(&start), b)));
        best[b] = Some(start);
        while let Some(Reverse((_, d))) = heap.pop() {
            if done[d] {
                continue;
            }
            done[d] = true;
            let here = best[d].clone().expect("queued directions have a length");
            for &x in &self.legal[d] {
                let cand = here.add(&self.at(x, r));
                if best[x].as_ref().is_none_or(|o| key(&cand) < key(o)) {
                    heap.push(Reverse((key(&cand), x)));
                    best[x] = Some(cand);
                }
            }
        }
        best
    }

    /// Whether some periodic immersed path crosses an illegal turn and has every legal
    /// stretch shorter than `cap`: a cycle among illegal turns joined by short legal runs.
    pub fn has_short_run_cycle(&self, cap: &Affine1, r: &Q, side: Side) -> bool {
        let capv = Germ1 { value: cap.eval(r), slope: cap.slope.clone() };
        let nd = self.legal.len();
        let sources: BTreeSet<Dir> = self.illegal.iter().flatten().copied().collect();
        let mut next: Vec<Vec<Dir>> = vec![Vec::new(); nd];
        for &b in &sources {
            let dist = self.shortest_legal_from(b, r, side);
            for c in 0..nd {
                if let Some(g) = &dist[c] {
                    if g.cmp_max(&capv, side) == Ordering::Less {
                        next[b].extend(self.illegal[c].iter().copied());
                    }
                }
            }
        }
        has_cycle(&next, &sources)
    }

    /// Points of `(lo, hi)` where some shortest legal run between illegal turns crosses `cap`.
    pub fn short_run_breakpoints(&self, cap: &Affine1, lo: &Q, hi: &Q) -> Result<Vec<Q>> {
        let nd = self.legal.len();
        let sources: BTreeSet<Dir> = self.illegal.iter().flatten().copied().collect();
        let mut out = Vec::new();
        for &b in &sources {
            for c in (0..nd).filter(|&c| !self.illegal[c].is_empty()) {
                // cap minus a concave minimum of affine lengths is convex
                let mut f = |r: &Q, side: Side| -> Result<Germ1> {
                    Ok(match &self.shortest_legal_from(b, r, side)[c] {
                        Some(g) => Germ1 { value: cap.eval(r) - &g.value, slope: &cap.slope - &g.slope },
                        None => Germ1 { value: -Q::one(), slope: Q::zero() },
                    })
                };
                if self.shortest_legal_from(b, lo, Side::Right)[c].is_none() {
                    continue;
                }
                out.extend(crossings(&mut f, lo, hi)?);
            }
        }
        out.sort();
        out.dedup();
        Ok(out)
    }

    /// Legal runs from the outgoing direction of an illegal turn to the incoming direction of
    /// the next, kept when `keep` holds of their affine length.
    fn runs(&self, keep: &dyn Fn(&Affine1) -> bool) -> Result<Vec<(Dir, Dir, Affine1)>> {
        let mut out = Vec::new();
        let mut steps = 0usize;
        let starts: Vec<Dir> = {
            let mut s: Vec<Dir> = self.illegal.iter().flatten().copied().collect();
            s.sort_unstable();
            s.dedup();
            s
        };
        for b in starts {
            let mut stack = vec![(b, self.len[edge_of(b)].clone())];
            while let Some((d, l)) = stack.pop() {
                steps += 1;
                if steps > RUN_BUDGET {
                    return Err(OskError::Budget("too many legal runs".into()));
                }
                if !keep(&l) {
                    continue;
                }
                if !self.illegal[d].is_empty() {
                    out.push((b, d, l.clone()));
                }
                for &x in &self.legal[d] {
                    stack.push((x, l.add(&self.len[edge_of(x)])));
                }
            }
        }
        Ok(out)
    }
}

/// Illegal-segment supremum under fixed combinatorial choices: which runs are short and
/// which end caps are bounded by the legal extension rather than the cap itself.
pub(crate) struct IllegalModel {
    /// (from outgoing dir, to incoming dir, length) of each short run.
    runs: Vec<(Dir, Dir, Affine1)>,
    /// Illegal turns as (incoming, outgoing).
    turns: Vec<(Dir, Dir)>,
    ext_in_capped: Vec<bool>,
    ext_out_capped: Vec<bool>,
}

/// `None` means unbounded; `Some(0)` means no illegal turn at all.
pub(crate) fn illegal_sup(t: &TurnGraph, model: &IllegalModel, cap: &Affine1, r: &Q, side: Side) -> Option<Germ1> {
    let capv = Germ1 { value: cap.eval(r), slope: cap.slope.clone() };
    if model.turns.is_empty() {
        return Some(Germ1 { value: Q::zero(), slope: Q::zero() });
    }
    // run graph over illegal turns; a turn (a, b) is followed by runs starting at b
    let idx = |x: (Dir, Dir)| model.turns.binary_search(&x).ok();
    let mut next: Vec<Vec<(usize, Affine1)>> = vec![Vec::new(); model.turns.len()];
    for (b, c, l) in &model.runs {
        for (i, &(_, ob)) in model.turns.iter().enumerate() {
            if ob == *b {
                for &d in &t.illegal[*c] {
                    if let Some(j) = idx((*c, d)) {
                        next[i].push((j, l.clone()));
                    }
                }
            }
        }
    }
    let n = model.turns.len();
    // cycle check and topological order
    let mut indeg = vec![0usize; n];
    for v in &next {
        for (j, _) in v {
            indeg[*j] += 1;
        }
    }
    let mut queue: Vec<usize> = (0..n).filter(|&i| indeg[i] == 0).collect();
    let mut order = Vec::new();
    while let Some(i) = queue.pop() {
        order.push(i);
        for (j, _) in &next[i] {
            indeg[*j] -= 1;
            if indeg[*j] == 0 {
                queue.push(*j);
            }
        }
    }
    if order.len() < n {
        return None;
    }
    let (from, into) = if t.legal_cycle { (None, None) } else { (Some(t.legal_from(r, side)), Some(t.legal_into(r, side))) };
    let end_cap = |capped: bool, ext: Option<&Germ1>| -> Germ1 {
        match (capped, ext) {
            (false, Some(e)) => e.clone(),
            _ => capv.clone(),
        }
    };
    let mut best: Vec<Option<Germ1>> = vec![None; n];
    for &i in order.iter().rev() {
        let (_, b) = model.turns[i];
        let mut v = end_cap(model.ext_out_capped[i], from.as_ref().map(|f| &f[b]));
        for (j, l) in &next[i] {
            let w = Germ1 { value: l.eval(r), slope: l.slope.clone() }.add(best[*j].as_ref().expect("ordered"));
            v = v.max(w, side);
        }
        best[i] = Some(v);
    }
    let mut total: Option<Germ1> = None;
    for i in 0..n {
        let (a, _) = model.turns[i];
        let back = end_cap(model.ext_in_capped[i], into.as_ref().map(|f| &f[a]));
        let v = back.add(best[i].as_ref().expect("visited"));
        total = Some(match total {
            None => v,
            Some(t) => t.max(v, side),
        });
    }
    total
}

impl IllegalModel {
    /// Chooses runs and caps as they are at `r` (strictly inside an interval of fixed choices).
    pub fn at(t: &TurnGraph, cap: &Affine1, r: &Q) -> Result<IllegalModel> {
        let capr = cap.eval(r);
        let runs = t.runs(&|l: &Affine1| l.eval(r) < capr)?;
        let mut turns: Vec<(Dir, Dir)> =
            (0..t.illegal.len()).flat_map(|a| t.illegal[a].iter().map(move |&b| (a, b))).collect();
        turns.sort_unstable();
        let (from, into) =
            if t.legal_cycle { (None, None) } else { (Some(t.legal_from(r, Side::Right)), Some(t.legal_into(r, Side::Right))) };
        let capped = |e: Option<&Germ1>| e.is_none_or(|e| e.value >= capr);
        let ext_out_capped = turns.iter().map(|&(_, b)| capped(from.as_ref().map(|f| &f[b]))).collect();
        let ext_in_capped = turns.iter().map(|&(a, _)| capped(into.as_ref().map(|f| &f[a]))).collect();
        Ok(IllegalModel { runs, turns, ext_in_capped, ext_out_capped })
    }

    /// Times in `(lo, hi)` where some run or some legal extension crosses the cap.
    pub fn breakpoints(t: &TurnGraph, cap: &Affine1, lo: &Q, hi: &Q) -> Result<Vec<Q>> {
        let mut out = Vec::new();
        let keep = |l: &Affine1| l.eval(lo) < cap.eval(lo) || l.eval(hi) < cap.eval(hi);
        for (_, _, l) in t.runs(&keep)? {
            let d = l.sub(cap);
            if !d.slope.is_zero() {
                let x = -&d.value / &d.slope;
                if &x > lo && &x < hi {
                    out.push(x);
                }
            }
        }
        if !t.legal_cycle {
            let nd = t.legal.len();
            for d in 0..nd {
                for into in [false, true] {
                    let mut g = |r: &Q, side: Side| -> Result<Germ1> {
                        let v = if into { t.legal_into(r, side) } else { t.legal_from(r, side) };
                        let e = &v[d];
                        Ok(Germ1 { value: &e.value - cap.eval(r), slope: &e.slope - &cap.slope })
                    };
                    out.extend(crossings(&mut g, lo, hi)?);
                }
            }
        }
        out.sort();
        out.dedup();
        Ok(out)
    }
}

/// Maximal legal and illegal segment lengths of an immersed graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScanResult {
    /// Longest legal path; `None` when a legal cycle exists (wrapping allowed).
    pub max_legal: Option<Q>,
    /// Supremum of paths with an illegal turn and no legal subpath of length `cap`;
    /// `None` when unbounded, zero when there is no illegal turn.
    pub max_illegal: Option<Q>,
    pub legal_segments: Vec<Segment>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Segment {
    /// Directions of the immersed graph.
    pub dirs: Vec<Dir>,
    pub length: Q,
}

/// Number of cyclic positions of `l` whose turn lies inside one gate.
pub fn illegal_turn_count(g: &MarkedGraph, l: &EdgeLoop, gates: &GateStructure) -> usize {
    let n = l.dirs.len();
    (0..n)
        .filter(|&i| {
            let (a, b) = (l.dirs[i], l.dirs[(i + 1) % n]);
            gates.is_illegal_turn(g.terminus(a), rev(a), b)
        })
        .count()
}

/// Scans a core graph immersed in `g` with pulled-back gates; illegal segments are those
/// without a legal subpath of length `cap`.
pub fn legal_illegal_scan(core: &CoreGraph, g: &MarkedGraph, gates: &GateStructure, cap: &Q) -> Result<ScanResult> {
    let len: Vec<Affine1> = core.lengths.iter().map(|x| Affine1::constant(x.clone())).collect();
    let t = TurnGraph::new(core, g, gates, len);
    let r = Q::zero();
    let capa = Affine1::constant(cap.clone());
    let model = IllegalModel::at(&t, &capa, &r)?;
    let max_illegal = if t.has_illegal_turn() {
        illegal_sup(&t, &model, &capa, &r, Side::Right).map(|x| x.value)
    } else {
        Some(Q::zero())
    };
    let max_legal = t.longest_legal(&r, Side::Right).map(|x| x.value);
    let legal_segments = maximal_legal_segments(core, &t, &r);
    Ok(ScanResult { max_legal, max_illegal, legal_segments })
}

/// For circles, the maximal legal segments between illegal turns; otherwise one longest legal path.
fn maximal_legal_segments(core: &CoreGraph, t: &TurnGraph, r: &Q) -> Vec<Segment> {
    let n = core.edges.len();
    let is_circle = core.stars().iter().all(|s| s.len() == 2) && (0..n).all(|i| core.edges[i].to == core.edges[(i + 1) % n].from);
    let length = |dirs: &[Dir]| dirs.iter().map(|&d| t.len[edge_of(d)].eval(r)).sum::<Q>();
    if is_circle {
        let fwd: Vec<Dir> = (0..n).map(|i| 2 * i).collect();
        let cut: Vec<usize> = (0..n).filter(|&i| !t.illegal[fwd[i]].is_empty()).collect();
        if cut.is_empty() {
            return vec![Segment { length: length(&fwd), dirs: fwd }];
        }
        let mut out = Vec::new();
        for (k, &c) in cut.iter().enumerate() {
            let end = cut[(k + 1) % cut.len()];
            let mut dirs = Vec::new();
            let mut i = (c + 1) % n;
            loop {
                dirs.push(fwd[i]);
                if i == end {
                    break;
                }
                i = (i + 1) % n;
            }
            out.push(Segment { length: length(&dirs), dirs });
        }
        return out;
    }
    match t.longest_legal_path(r) {
        Some(dirs) => vec![Segment { length: length(&dirs), dirs }],
        None => Vec::new(),
    }
}
