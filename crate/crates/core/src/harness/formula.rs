//! Checks of the length and volume formulas along folding paths against direct evaluation.

use num_traits::Zero;
use rand::Rng;
use serde::Serialize;

use crate::error::Result;
use crate::folding::{illegal_turn_count, legal_illegal_scan, FoldingPath, Time};
use crate::free_group::CyclicWord;
use crate::marked_graph::{edge_of, rev, CoreGraph};
use crate::rational::{qi, to_f64, Q};

/// Normalized length of `z` at natural time `s`, exact.
pub fn normalized_length(path: &FoldingPath, z: &CyclicWord, s: &Q) -> Result<Q> {
    let g = path.graph_at(&Time::Natural(s.clone()))?.graph;
    Ok(g.loop_length(z)? / g.volume())
}

/// One finite-difference sample: the forward difference quotient of the normalized length
/// against the predicted right derivative `ℓ − 2κ/m`, with `κ` and `m` read off the graph.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DerivativeSample {
    pub t: f64,
    pub h: f64,
    pub quotient: f64,
    pub predicted: f64,
    pub residual: f64,
}

pub fn derivative_sample(path: &FoldingPath, z: &CyclicWord, t: f64, h: f64) -> Result<DerivativeSample> {
    let at = |t: f64| -> Result<(f64, usize, usize)> {
        let p = path.graph_at(&Time::Arclength(t))?;
        let l = p.graph.realize_loop(z)?;
        let len = to_f64(&(p.graph.loop_length(z)? / p.graph.volume()));
        Ok((len, illegal_turn_count(&p.graph, &l, &p.gates), p.gates.illegality()))
    };
    let (l0, kappa, m) = at(t)?;
    let (l1, _, _) = at(t + h)?;
    let quotient = (l1 - l0) / h;
    let predicted = if m == 0 { l0 } else { l0 - 2.0 * kappa as f64 / m as f64 };
    Ok(DerivativeSample { t, h, quotient, predicted, residual: (quotient - predicted).abs() })
}

/// Forward differences at `count` random times whose window `[t, t + h]` avoids fold events.
pub fn derivative_samples<R: Rng>(
    rng: &mut R,
    path: &FoldingPath,
    z: &CyclicWord,
    h: f64,
    count: usize,
) -> Result<Vec<DerivativeSample>> {
    let pieces = path.length_function(z)?;
    let usable: Vec<_> = pieces.iter().filter(|p| p.t1 - p.t0 > 4.0 * h).collect();
    let mut out = Vec::new();
    if usable.is_empty() {
        return Ok(out);
    }
    for _ in 0..count {
        let p = usable[rng.gen_range(0..usable.len())];
        let t = rng.gen_range(p.t0 + h..p.t1 - 2.0 * h);
        out.push(derivative_sample(path, z, t, h)?);
    }
    Ok(out)
}

/// Largest relative gap between the piecewise formula `a·e^(t−t0) + b` and the exact
/// normalized length, at `per_piece` interior rationals of every piece.
pub fn reconstruction_error(path: &FoldingPath, z: &CyclicWord, per_piece: usize) -> Result<f64> {
    let mut worst = 0.0f64;
    for p in path.length_function(z)? {
        for i in 1..=per_piece {
            let s = &p.s0 + (&p.s1 - &p.s0) * Q::new((i as i64).into(), ((per_piece + 1) as i64).into());
            let direct = to_f64(&normalized_length(path, z, &s)?);
            let formula = p.eval(path.arclength_of(&s)?);
            worst = worst.max((formula - direct).abs() / direct.abs());
        }
    }
    Ok(worst)
}

/// Whether the volume drops at exactly the illegality of the graph at the start of each
/// interval, read at its start, midpoint and end.
pub fn volume_slopes_exact(path: &FoldingPath) -> Result<bool> {
    for e in path.events() {
        let a = path.graph_at(&Time::Natural(e.start.clone()))?;
        let mid = &e.start + &e.duration / qi(2);
        let b = path.graph_at(&Time::Natural(mid))?;
        let c = path.graph_at(&Time::Natural(e.end()))?;
        let m = Q::from_integer(a.gates.illegality().into());
        let half = &e.duration / qi(2);
        if a.graph.volume() - b.graph.volume() != &half * &m || b.graph.volume() - c.graph.volume() != &half * &m {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Normalized longest legal segment of `z` at natural time `s`; `None` when `z` is legal.
fn longest_legal(path: &FoldingPath, z: &CyclicWord, s: &Q) -> Result<Option<Q>> {
    let p = path.graph_at(&Time::Natural(s.clone()))?;
    let l = p.graph.realize_loop(z)?;
    if illegal_turn_count(&p.graph, &l, &p.gates) == 0 {
        return Ok(None);
    }
    let core = CoreGraph::from_loop(&l, &p.graph);
    let scan = legal_illegal_scan(&core, &p.graph, &p.gates, &qi(3))?;
    let best = scan.legal_segments.iter().map(|x| x.length.clone()).max().unwrap_or_else(Q::zero);
    Ok(Some(best / p.graph.volume()))
}

/// Smallest slack of `L_t ≥ 2 + (L_0 − 2)·e^(t−t0)` for the longest legal segment of `z`
/// between natural times `s0 < s1`, or of `ℓ_t = ℓ_0·e^(t−t0)` (as a signed relative
/// error) when `z` is legal at `s0`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum GrowthCheck {
    Segment { slack: f64 },
    LegalLoop { relative_error: f64 },
}

pub fn legal_growth(path: &FoldingPath, z: &CyclicWord, s0: &Q, s1: &Q) -> Result<GrowthCheck> {
    let dt = path.arclength_of(s1)? - path.arclength_of(s0)?;
    match longest_legal(path, z, s0)? {
        None => {
            let l0 = to_f64(&normalized_length(path, z, s0)?);
            let l1 = to_f64(&normalized_length(path, z, s1)?);
            Ok(GrowthCheck::LegalLoop { relative_error: (l1 - l0 * dt.exp()).abs() / l1 })
        }
        Some(l0) => {
            let l1 = match longest_legal(path, z, s1)? {
                Some(x) => to_f64(&x),
                None => return Ok(GrowthCheck::Segment { slack: f64::INFINITY }),
            };
            Ok(GrowthCheck::Segment { slack: l1 - (2.0 + (to_f64(&l0) - 2.0) * dt.exp()) })
        }
    }
}

/// Largest relative deviation from `L_t = L_0·e^(t−t0)` over edges not touched by folding
/// (no gate with two directions at either endpoint) within each interval.
/// Returns the number of (interval, edge) pairs checked and the worst error.
pub fn uninvolved_edge_error(path: &FoldingPath) -> Result<(usize, f64)> {
    let mut worst = 0.0f64;
    let mut checked = 0;
    for (e, snap) in path.events().iter().zip(path.snapshots()) {
        let g = &snap.state.graph;
        // a vertex with a gate of two or more directions moves as that gate folds
        let still = |d: usize| snap.gates.gates[g.origin(d)].iter().all(|gate| gate.len() == 1);
        let m = Q::from_integer(e.illegality.into());
        let (t0, t1) = (path.arclength_of(&e.start)?, path.arclength_of(&e.end())?);
        for d in (0..g.num_edges()).map(|i| 2 * i) {
            if !(still(d) && still(rev(d))) {
                continue;
            }
            let len = snap.length(edge_of(d));
            let l0 = to_f64(&(len.eval(&Q::zero()) / &e.volume));
            let l1 = to_f64(&(len.eval(&e.duration) / (&e.volume - &m * &e.duration)));
            worst = worst.max((l1 - l0 * (t1 - t0).exp()).abs() / l1);
            checked += 1;
        }
    }
    Ok((checked, worst))
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::folding::fold_path;
    use crate::harness::random::{random_class, random_graph};

    #[test]
    fn formulas_hold_on_random_paths() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let mut checked = 0;
        while checked < 6 {
            let (g, h) = (random_graph(&mut rng, 2, 3, 6), random_graph(&mut rng, 2, 3, 6));
            let Ok(path) = fold_path(&g, &h) else { continue };
            checked += 1;
            let z = random_class(&mut rng, 2, 5);
            for h in [1e-3, 1e-4] {
                for s in derivative_samples(&mut rng, &path, &z, h, 5).unwrap() {
                    assert!(s.residual <= 10.0 * h, "{s:?}");
                }
            }
            assert!(reconstruction_error(&path, &z, 3).unwrap() <= 1e-12);
            assert!(volume_slopes_exact(&path).unwrap());
            assert!(uninvolved_edge_error(&path).unwrap().1 <= 1e-9);
            let om = path.omega();
            match legal_growth(&path, &z, &(&om / qi(3)), &om).unwrap() {
                GrowthCheck::Segment { slack } => assert!(slack >= -1e-9),
                GrowthCheck::LegalLoop { relative_error } => assert!(relative_error <= 1e-9),
            }
        }
    }
}
