//! Left and right projections of factors and simple classes to folding paths.
//!
//! All thresholds are solved exactly per fold interval: lengths there are affine in the
//! natural parameter `r`, the longest legal segment and the illegal-segment supremum are
//! convex piecewise-affine, and the normalized comparisons become comparisons against
//! multiples of the volume `V − m·r`.

use std::collections::BTreeSet;

use num_traits::Zero;
use serde::Serialize;

use crate::error::{OskError, Result};
use crate::factor_complex::{project, FreeFactor};
use crate::folding::{
    first_root, illegal_sup, last_root, legal_illegal_scan, Affine1, FoldEvent, FoldingPath, Germ1, IllegalModel,
    Side, Snapshot, Time, TurnGraph,
};
use crate::free_group::CyclicWord;
use crate::marked_graph::{edge_of, CoreGraph, MarkedGraph};
use crate::rational::{qi, Q};
use crate::whitehead::is_simple;

/// Normalized length a legal segment must reach to pin the left projection.
pub const LEGAL_THRESHOLD: i64 = 3;

/// The illegal-segment length threshold `(18·m̂·(3n−3) + 6)(2n−1)` with `m̂ = 2n−2`,
/// the largest illegality at rank `n`.
pub fn constant_i(n: usize) -> Result<u64> {
    if n < 2 {
        return Err(OskError::Rank { expected: "≥ 2".into(), actual: n });
    }
    let n = n as u64;
    Ok((18 * (2 * n - 2) * (3 * n - 3) + 6) * (2 * n - 1))
}

/// What gets projected: a free factor (through its core graph) or a simple class (its loop).
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Subject {
    Factor(FreeFactor),
    Class(CyclicWord),
}

impl Subject {
    /// A class is accepted only when it is simple.
    pub fn class(z: CyclicWord, rank: usize) -> Result<Subject> {
        if !is_simple(&z, rank)?.is_simple() {
            return Err(OskError::NotSimple);
        }
        Ok(Subject::Class(z))
    }

    fn core(&self, g: &MarkedGraph) -> Result<CoreGraph> {
        match self {
            Subject::Factor(f) => CoreGraph::new(f.generators(), g),
            Subject::Class(z) => Ok(CoreGraph::from_loop(&g.realize_loop(z)?, g)),
        }
    }

    fn ambient_rank(&self) -> Option<usize> {
        match self {
            Subject::Factor(f) => Some(f.ambient_rank()),
            Subject::Class(_) => None,
        }
    }
}

/// A time on the path where a threshold is attained, and the normalized length attained.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Witness {
    /// Fold interval in which the threshold is attained.
    pub interval: usize,
    #[serde(with = "crate::rational::serde_q")]
    pub natural: Q,
    pub arclength: f64,
    /// Normalized length of the witnessing segment; `None` when segments of every length exist.
    #[serde(serialize_with = "serialize_opt_q")]
    pub length: Option<Q>,
}

fn serialize_opt_q<S: serde::Serializer>(x: &Option<Q>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match x {
        Some(q) => crate::rational::serde_q::serialize(q, s),
        None => s.serialize_none(),
    }
}

/// `lt` is the infimum of times with a legal segment of normalized length 3, `rt` the
/// supremum of times with an illegal segment of normalized length `I`; the empty infimum
/// is the path length and the empty supremum is 0.
#[derive(Debug, Clone)]
pub struct ProjectionResult {
    pub lt_natural: Q,
    pub rt_natural: Q,
    pub lt: f64,
    pub rt: f64,
    pub left: MarkedGraph,
    pub right: MarkedGraph,
    pub left_witness: Option<Witness>,
    pub right_witness: Option<Witness>,
}

fn check_rank(subject: &Subject, path: &FoldingPath) -> Result<()> {
    match subject.ambient_rank() {
        Some(r) if r != path.rank() => Err(OskError::Rank { expected: path.rank().to_string(), actual: r }),
        _ => Ok(()),
    }
}

/// Core of the subject in the interior graph of one interval, with affine lengths.
fn turn_graph(subject: &Subject, snap: &Snapshot) -> Result<TurnGraph> {
    let g = &snap.state.graph;
    let core = subject.core(g)?;
    let len = core.edges.iter().map(|e| snap.length(edge_of(e.label))).collect();
    Ok(TurnGraph::new(&core, g, &snap.gates, len))
}

fn volume(e: &FoldEvent) -> Affine1 {
    Affine1 { value: e.volume.clone(), slope: -Q::from_integer(e.illegality.into()) }
}

fn witness(path: &FoldingPath, k: usize, r: &Q, length: Option<Q>) -> Result<Witness> {
    let natural = &path.events()[k].start + r;
    let vol = volume(&path.events()[k]).eval(r);
    Ok(Witness { interval: k, arclength: path.arclength_of(&natural)?, natural, length: length.map(|l| l / vol) })
}

/// Exact left projection time in the natural parameter.
pub fn left_time(subject: &Subject, path: &FoldingPath) -> Result<(Q, Option<Witness>)> {
    check_rank(subject, path)?;
    let need = qi(LEGAL_THRESHOLD);
    for (k, (e, snap)) in path.events().iter().zip(path.snapshots()).enumerate() {
        let t = turn_graph(subject, snap)?;
        if t.has_legal_cycle() {
            return Ok((e.start.clone(), Some(witness(path, k, &Q::zero(), None)?)));
        }
        let cap = volume(e).scale(&need);
        let mut f = |r: &Q, side: Side| -> Result<Germ1> {
            let g = t.longest_legal(r, side).expect("no legal cycle");
            Ok(Germ1 { value: g.value - cap.eval(r), slope: g.slope - &cap.slope })
        };
        if let Some(r) = first_root(&mut f, &Q::zero(), &e.duration)? {
            let len = t.longest_legal(&r, Side::Right).map(|g| g.value);
            return Ok((&e.start + &r, Some(witness(path, k, &r, len)?)));
        }
    }
    Ok((path.omega(), None))
}

/// How the illegal-segment threshold is decided inside an interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum IllegalScan {
    /// Short-run cycles when every finite supremum is provably below `I`, else the full model.
    Auto,
    #[cfg(test)]
    /// Always evaluate the exact supremum by enumerating short legal runs.
    Model,
}

/// Exact right projection time in the natural parameter.
pub fn right_time(subject: &Subject, path: &FoldingPath) -> Result<(Q, Option<Witness>)> {
    right_time_with(subject, path, IllegalScan::Auto)
}

pub(crate) fn right_time_with(subject: &Subject, path: &FoldingPath, how: IllegalScan) -> Result<(Q, Option<Witness>)> {
    check_rank(subject, path)?;
    let big_i = Q::from_integer(constant_i(path.rank())?.into());
    let need = qi(LEGAL_THRESHOLD);
    for (k, (e, snap)) in path.events().iter().zip(path.snapshots()).enumerate().rev() {
        let t = turn_graph(subject, snap)?;
        if !t.has_illegal_turn() {
            continue;
        }
        let cap = volume(e).scale(&need);
        let zero = Q::zero();
        // an illegal segment visits each illegal turn once unless it can repeat forever, and
        // each of its legal stretches is shorter than the cap
        let finite_bound = &need * qi(t.illegal_turn_total() as i64 + 1);
        if how == IllegalScan::Auto && finite_bound < big_i {
            let mut cuts = vec![zero.clone()];
            cuts.extend(t.short_run_breakpoints(&cap, &zero, &e.duration)?);
            cuts.push(e.duration.clone());
            for w in cuts.windows(2).rev() {
                let mid = (&w[0] + &w[1]) / qi(2);
                if t.has_short_run_cycle(&cap, &mid, Side::Right) {
                    return Ok((&e.start + &w[1], Some(witness(path, k, &w[1], None)?)));
                }
            }
            continue;
        }
        let target = volume(e).scale(&big_i);
        let mut cuts = vec![zero.clone()];
        cuts.extend(IllegalModel::breakpoints(&t, &cap, &zero, &e.duration)?);
        cuts.push(e.duration.clone());
        // runs and caps are fixed between consecutive cuts
        for w in cuts.windows(2).rev() {
            let (lo, hi) = (&w[0], &w[1]);
            let mid = (lo + hi) / qi(2);
            let model = IllegalModel::at(&t, &cap, &mid)?;
            if illegal_sup(&t, &model, &cap, &mid, Side::Right).is_none() {
                return Ok((&e.start + hi, Some(witness(path, k, hi, None)?)));
            }
            let mut f = |r: &Q, side: Side| -> Result<Germ1> {
                let g = illegal_sup(&t, &model, &cap, r, side).expect("bounded on this piece");
                Ok(Germ1 { value: g.value - target.eval(r), slope: g.slope - &target.slope })
            };
            if let Some(r) = last_root(&mut f, lo, hi)? {
                let len = illegal_sup(&t, &model, &cap, &r, Side::Left).map(|g| g.value);
                return Ok((&e.start + &r, Some(witness(path, k, &r, len)?)));
            }
        }
    }
    Ok((Q::zero(), None))
}

fn result(path: &FoldingPath, lt: (Q, Option<Witness>), rt: (Q, Option<Witness>)) -> Result<ProjectionResult> {
    let left = path.graph_at(&Time::Natural(lt.0.clone()))?.graph.normalize();
    let right = path.graph_at(&Time::Natural(rt.0.clone()))?.graph.normalize();
    Ok(ProjectionResult {
        lt: path.arclength_of(&lt.0)?,
        rt: path.arclength_of(&rt.0)?,
        lt_natural: lt.0,
        rt_natural: rt.0,
        left,
        right,
        left_witness: lt.1,
        right_witness: rt.1,
    })
}

/// Both projection times of a factor or simple class, with the graphs there.
pub fn projection(subject: &Subject, path: &FoldingPath) -> Result<ProjectionResult> {
    result(path, left_time(subject, path)?, right_time(subject, path)?)
}

/// Factors of the coarse projection `π(Left(A))`.
pub fn projection_to_f(subject: &Subject, path: &FoldingPath) -> Result<BTreeSet<FreeFactor>> {
    let (lt, _) = left_time(subject, path)?;
    project(&path.graph_at(&Time::Natural(lt))?.graph)
}

/// Projection of a marked graph: `lt` minimizes and `rt` maximizes over the factors of `π(H)`.
#[derive(Debug, Clone)]
pub struct GraphProjection {
    pub result: ProjectionResult,
    /// Factor attaining `lt`.
    pub left_factor: FreeFactor,
    /// Factor attaining `rt`.
    pub right_factor: FreeFactor,
}

pub fn graph_projection(h: &MarkedGraph, path: &FoldingPath) -> Result<GraphProjection> {
    let mut best_l: Option<(Q, Option<Witness>, FreeFactor)> = None;
    let mut best_r: Option<(Q, Option<Witness>, FreeFactor)> = None;
    for f in project(h)? {
        let s = Subject::Factor(f.clone());
        let (l, lw) = left_time(&s, path)?;
        let (r, rw) = right_time(&s, path)?;
        if best_l.as_ref().is_none_or(|b| l < b.0) {
            best_l = Some((l, lw, f.clone()));
        }
        if best_r.as_ref().is_none_or(|b| r > b.0) {
            best_r = Some((r, rw, f));
        }
    }
    let (Some(l), Some(r)) = (best_l, best_r) else {
        return Err(OskError::InvalidGraph("graph has an empty projection".into()));
    };
    Ok(GraphProjection { result: result(path, (l.0, l.1), (r.0, r.1))?, left_factor: l.2, right_factor: r.2 })
}

/// `π(Left(H))`.
pub fn graph_projection_to_f(h: &MarkedGraph, path: &FoldingPath) -> Result<BTreeSet<FreeFactor>> {
    let p = graph_projection(h, path)?;
    project(&path.graph_at(&Time::Natural(p.result.lt_natural))?.graph)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Side3 {
    Left,
    Right,
    Inconclusive,
}

/// Which hypothesis of the projection criterion holds for `z` against `H` at time `tau`:
/// left when `z` is legal there or has no illegal segment of length `I`, right when `z` is
/// simple and has one. Both require `ℓ(z|Γ_τ) ≥ ℓ(z|H)` in normalized metrics.
pub fn criterion_side(z: &CyclicWord, h: &MarkedGraph, path: &FoldingPath, tau: &Time) -> Result<Side3> {
    let p = path.graph_at(tau)?;
    let g = &p.graph;
    let scale = g.volume();
    let lz = g.loop_length(z)? / &scale;
    if lz < h.normalize().loop_length(z)? {
        return Ok(Side3::Inconclusive);
    }
    let l = g.realize_loop(z)?;
    if p.gates.is_legal_loop(g, &l.dirs) {
        return Ok(Side3::Left);
    }
    let core = CoreGraph::from_loop(&l, g);
    let scan = legal_illegal_scan(&core, g, &p.gates, &(qi(LEGAL_THRESHOLD) * &scale))?;
    let big_i = Q::from_integer(constant_i(path.rank())?.into()) * &scale;
    let long_illegal = scan.max_illegal.is_none_or(|x| x >= big_i);
    if !long_illegal {
        return Ok(Side3::Left);
    }
    if is_simple(z, path.rank())?.is_simple() {
        Ok(Side3::Right)
    } else {
        Ok(Side3::Inconclusive)
    }
}
