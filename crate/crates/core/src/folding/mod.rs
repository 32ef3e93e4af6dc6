//! Speed-1 folding paths driven by a fully tense train-track map.
//!
//! The path is computed event by event in exact arithmetic: between events every
//! gate with at least two directions folds at unit speed, so all edge lengths are
//! affine in the natural parameter `s` and the volume drops at rate `m`, the illegality.

mod json;
mod scan;
mod state;

use num_traits::{One, Signed, Zero};

pub use json::{EventJson, PathJson};
pub use scan::{illegal_turn_count, legal_illegal_scan, ScanResult, Segment};
pub(crate) use scan::{first_root, illegal_sup, last_root, Affine1, Germ1, IllegalModel, Side, TurnGraph};
pub(crate) use state::State;

use crate::error::{OskError, Result};
use crate::free_group::CyclicWord;
use crate::lipschitz::tree::Piece;
use crate::lipschitz::{lipschitz_distance, rescale_to_full_tension, GateStructure, GraphMap};
use crate::marked_graph::{edge_of, is_reversed, rev, Dir, MarkedGraph};
use crate::rational::{from_f64, ln_q, to_f64, Q};

const EVENT_BUDGET: usize = 20_000;

/// A point on a path, in either parametrization.
#[derive(Debug, Clone, PartialEq)]
pub enum Time {
    /// Natural parameter: total fold amount, exact.
    Natural(Q),
    /// Arclength `t = ln(vol₀ / vol_s)`; converted to the natural parameter by rounding.
    Arclength(f64),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoldEvent {
    /// Natural time at which this interval of constant combinatorics starts.
    pub start: Q,
    pub duration: Q,
    /// Illegality throughout the interval; the volume slope is `−illegality`.
    pub illegality: usize,
    /// Unnormalized volume at `start`.
    pub volume: Q,
}

impl FoldEvent {
    pub fn end(&self) -> Q {
        &self.start + &self.duration
    }
}

/// The interior of an interval: one combinatorial graph whose edge lengths are `base + rate·r`.
#[derive(Debug, Clone)]
pub(crate) struct Snapshot {
    pub state: State,
    pub base: Vec<Q>,
    pub rate: Vec<Q>,
    pub gates: GateStructure,
}

impl Snapshot {
    pub fn length(&self, e: usize) -> Affine1 {
        Affine1 { value: self.base[e].clone(), slope: self.rate[e].clone() }
    }
}

#[derive(Debug, Clone)]
pub struct FoldingPath {
    codomain: MarkedGraph,
    states: Vec<State>,
    events: Vec<FoldEvent>,
    edge_maps: Vec<Vec<Vec<Dir>>>,
    snapshots: Vec<Snapshot>,
}

/// A graph on the path with the train-track structure induced by the map to the terminal graph.
#[derive(Debug, Clone)]
pub struct PathPoint {
    pub natural: Q,
    pub arclength: f64,
    pub graph: MarkedGraph,
    pub gates: GateStructure,
}

/// One exponential piece of a length function: on `[t0, t1]`, `ℓ(t) = a·e^(t−t0) + b`.
#[derive(Debug, Clone, PartialEq)]
pub struct LengthPiece {
    pub s0: Q,
    pub s1: Q,
    pub t0: f64,
    pub t1: f64,
    /// Unnormalized length at `s0`; it decreases at rate `2·kappa` in the natural parameter.
    pub length: Q,
    pub kappa: usize,
    pub illegality: usize,
    pub a: f64,
    pub b: f64,
}

impl LengthPiece {
    pub fn eval(&self, t: f64) -> f64 {
        self.a * (t - self.t0).exp() + self.b
    }
}

/// The folding path from `g` towards `h`, starting at the fully tense rescaling of `g`.
pub fn fold_path(g: &MarkedGraph, h: &MarkedGraph) -> Result<FoldingPath> {
    let (_, map) = rescale_to_full_tension(g, h)?;
    let path = FoldingPath::from_map(&map)?;
    let end = path.terminal().normalize();
    let target = h.smoothed()?;
    if !lipschitz_distance(&end, &target)?.lambda.is_one() || !lipschitz_distance(&target, &end)?.lambda.is_one() {
        return Err(OskError::Folding("terminal graph is not the target".into()));
    }
    Ok(path)
}

impl FoldingPath {
    /// Folds the domain of a map whose slopes all equal `λ`, after scaling it by `λ`.
    pub fn from_map(map: &GraphMap) -> Result<Self> {
        let lambda = map.lambda();
        if map.slopes.iter().any(|s| *s != lambda) {
            return Err(OskError::Folding("map is not fully tense; rescale it first".into()));
        }
        let codomain = map.codomain.clone();
        let graph = map.domain.scaled(&lambda);
        let images: Vec<Vec<Piece>> = map
            .edge_images
            .iter()
            .map(|p| {
                p.iter()
                    .map(|&d| Piece { dir: d, from: Q::zero(), to: codomain.length(d).clone() })
                    .collect()
            })
            .collect();
        let start = State { graph, images };
        if !start.gates(&codomain).is_train_track() {
            return Err(OskError::Folding("a vertex has a single gate".into()));
        }
        Self::from_state(start, codomain)
    }

    pub(crate) fn from_state(start: State, codomain: MarkedGraph) -> Result<Self> {
        let mut states = vec![start];
        let mut events = Vec::new();
        let mut edge_maps = Vec::new();
        let mut snapshots = Vec::new();
        let mut s = Q::zero();
        while let Some(tau) = states.last().expect("nonempty").max_step(&codomain) {
            if events.len() >= EVENT_BUDGET {
                return Err(OskError::Budget("too many fold events".into()));
            }
            let cur = states.last().expect("nonempty");
            let m = cur.gates(&codomain).illegality();
            let volume = cur.graph.volume();
            let folded = cur.fold(&tau, &codomain)?;
            let expected = &volume - &tau * Q::from_integer(m.into());
            if folded.state.graph.volume() != expected {
                return Err(OskError::Folding("volume does not drop at the illegality rate".into()));
            }
            snapshots.push(snapshot(cur, &tau, &codomain)?);
            events.push(FoldEvent { start: s.clone(), duration: tau.clone(), illegality: m, volume });
            edge_maps.push(folded.edge_map);
            states.push(folded.state);
            s += tau;
        }
        Ok(FoldingPath { codomain, states, events, edge_maps, snapshots })
    }

    /// The same path restarted at natural time `s`; its natural times are shifted by `s`.
    pub fn suffix(&self, s: &Q) -> Result<FoldingPath> {
        let st = self.state_at(&self.natural(&Time::Natural(s.clone()))?)?;
        Self::from_state(st, self.codomain.clone())
    }

    pub fn events(&self) -> &[FoldEvent] {
        &self.events
    }

    /// The subdivided terminal graph all maps point into.
    pub fn codomain(&self) -> &MarkedGraph {
        &self.codomain
    }

    pub fn rank(&self) -> usize {
        self.codomain.rank()
    }

    /// Total natural length `ω`.
    pub fn omega(&self) -> Q {
        self.events.last().map(|e| e.end()).unwrap_or_else(Q::zero)
    }

    pub fn initial_volume(&self) -> Q {
        self.states[0].graph.volume()
    }

    pub fn final_volume(&self) -> Q {
        self.terminal_state().graph.volume()
    }

    /// Total arclength `L`.
    pub fn length(&self) -> f64 {
        ln_q(&(self.initial_volume() / self.final_volume()))
    }

    pub fn initial(&self) -> MarkedGraph {
        self.states[0].graph.smoothed().expect("path graphs smooth")
    }

    pub fn terminal(&self) -> MarkedGraph {
        self.terminal_state().graph.smoothed().expect("path graphs smooth")
    }

    pub(crate) fn terminal_state(&self) -> &State {
        self.states.last().expect("nonempty")
    }

    pub(crate) fn snapshots(&self) -> &[Snapshot] {
        &self.snapshots
    }

    /// Each edge of the graph at event `k` as a path in the graph at event `k + 1`.
    pub fn edge_map(&self, k: usize) -> &[Vec<Dir>] {
        &self.edge_maps[k]
    }

    /// Index of the interval containing `s`, preferring the one starting at `s`.
    pub(crate) fn interval_of(&self, s: &Q) -> Option<usize> {
        let k = self.events.partition_point(|e| &e.start <= s);
        if k == 0 {
            return None;
        }
        (s <= &self.events[k - 1].end()).then_some(k - 1)
    }

    pub fn volume_at(&self, s: &Q) -> Result<Q> {
        if s.is_zero() {
            return Ok(self.initial_volume());
        }
        let k = self.interval_of(s).ok_or_else(|| self.out_of_range(&to_f64(s).to_string()))?;
        let e = &self.events[k];
        Ok(&e.volume - (s - &e.start) * Q::from_integer(e.illegality.into()))
    }

    pub fn arclength_of(&self, s: &Q) -> Result<f64> {
        Ok(ln_q(&(self.initial_volume() / self.volume_at(s)?)))
    }

    /// Natural parameter at arclength `t`, rounded to the nearest double.
    pub fn natural_of(&self, t: f64) -> Result<Q> {
        let len = self.length();
        if !(0.0..=len * (1.0 + 1e-12) + 1e-15).contains(&t) {
            return Err(self.out_of_range(&t.to_string()));
        }
        if t == 0.0 {
            return Ok(Q::zero());
        }
        let v0 = self.initial_volume();
        let target = to_f64(&v0) * (-t).exp();
        for e in &self.events {
            let end_vol = &e.volume - &e.duration * Q::from_integer(e.illegality.into());
            if to_f64(&end_vol) <= target {
                let ds = (to_f64(&e.volume) - target) / e.illegality as f64;
                let s = &e.start + from_f64(ds.max(0.0));
                return Ok(s.min(e.end()));
            }
        }
        Ok(self.omega())
    }

    fn out_of_range(&self, t: &str) -> OskError {
        OskError::TimeOutOfRange(format!("{t} is outside the path"))
    }

    fn natural(&self, t: &Time) -> Result<Q> {
        match t {
            Time::Natural(s) => {
                if s.is_negative() || s > &self.omega() {
                    return Err(self.out_of_range(&to_f64(s).to_string()));
                }
                Ok(s.clone())
            }
            Time::Arclength(t) => self.natural_of(*t),
        }
    }

    /// Unsmoothed state at natural time `s`.
    pub(crate) fn state_at(&self, s: &Q) -> Result<State> {
        if s.is_zero() || self.events.is_empty() {
            return Ok(self.states[0].clone());
        }
        let k = self.interval_of(s).ok_or_else(|| self.out_of_range(&to_f64(s).to_string()))?;
        let e = &self.events[k];
        let r = s - &e.start;
        if r.is_zero() {
            return Ok(self.states[k].clone());
        }
        if r == e.duration {
            return Ok(self.states[k + 1].clone());
        }
        Ok(self.states[k].fold(&r, &self.codomain)?.state)
    }

    /// The graph at time `t`, normalized exactly when `t` is an arclength.
    pub fn graph_at(&self, t: &Time) -> Result<PathPoint> {
        let s = self.natural(t)?;
        let st = self.state_at(&s)?;
        let (smooth, chains) = st.graph.smoothed_with_chains()?;
        let germs: Vec<_> = chains.iter().map(|c| (st.germ(c[0], &self.codomain), st.germ(rev(*c.last().expect("chain")), &self.codomain))).collect();
        let gates = GateStructure::from_germs(&smooth, |_| true, |d| {
            let (f, b) = &germs[edge_of(d)];
            Some(if is_reversed(d) { b.clone() } else { f.clone() })
        });
        let graph = match t {
            Time::Natural(_) => smooth,
            Time::Arclength(_) => smooth.normalize(),
        };
        Ok(PathPoint { arclength: self.arclength_of(&s)?, natural: s, graph, gates })
    }

    /// Piecewise description of the normalized length of `z` along the path.
    pub fn length_function(&self, z: &CyclicWord) -> Result<Vec<LengthPiece>> {
        let v0 = self.initial_volume();
        let mut out = Vec::new();
        for (k, e) in self.events.iter().enumerate() {
            let snap = &self.snapshots[k];
            let l = snap.state.graph.realize_loop(z)?;
            let kappa = illegal_turn_count(&snap.state.graph, &l, &snap.gates);
            let len: Affine1 = l.dirs.iter().map(|&d| snap.length(edge_of(d))).fold(Affine1::zero(), |a, b| a.add(&b));
            if len.slope != -Q::from_integer((2 * kappa).into()) {
                return Err(OskError::Folding("loop does not shorten at twice its illegal turn count".into()));
            }
            let t0 = ln_q(&(&v0 / &e.volume));
            let t1 = ln_q(&(&v0 / (&e.volume - &e.duration * Q::from_integer(e.illegality.into()))));
            let lhat = to_f64(&(&len.value / &e.volume));
            let b = 2.0 * kappa as f64 / e.illegality as f64;
            out.push(LengthPiece {
                s0: e.start.clone(),
                s1: e.end(),
                t0,
                t1,
                length: len.value,
                kappa,
                illegality: e.illegality,
                a: lhat - b,
                b,
            });
        }
        Ok(out)
    }

    /// Normalized length of `z` at arclength `t`, from the piecewise formula.
    pub fn length_formula(&self, z: &CyclicWord, t: f64) -> Result<f64> {
        let pieces = self.length_function(z)?;
        match pieces.iter().find(|p| t <= p.t1) {
            Some(p) => Ok(p.eval(t)),
            None => {
                let g = self.terminal_state();
                Ok(to_f64(&(g.graph.loop_length(z)? / g.graph.volume())))
            }
        }
    }
}

/// Interior combinatorics of an interval, with lengths affine in the fold amount.
fn snapshot(st: &State, tau: &Q, codomain: &MarkedGraph) -> Result<Snapshot> {
    let three = Q::from_integer(3.into());
    let (r1, r2) = (tau / &three, tau * Q::from_integer(2.into()) / &three);
    let a = st.fold(&r1, codomain)?.state;
    let b = st.fold(&r2, codomain)?.state;
    let same = a.graph.num_vertices() == b.graph.num_vertices()
        && a.graph.edges().iter().zip(b.graph.edges()).all(|(x, y)| x.from == y.from && x.to == y.to)
        && a.graph.num_edges() == b.graph.num_edges();
    if !same {
        return Err(OskError::Folding("combinatorics change inside an interval".into()));
    }
    let mut base = Vec::new();
    let mut rate = Vec::new();
    for (x, y) in a.graph.edges().iter().zip(b.graph.edges()) {
        let slope = (&y.length - &x.length) / (&r2 - &r1);
        base.push(&x.length - &slope * &r1);
        rate.push(slope);
    }
    let gates = a.gates(codomain);
    Ok(Snapshot { state: a, base, rate, gates })
}

#[cfg(test)]
mod tests;
