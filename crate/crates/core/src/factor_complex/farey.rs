//! Rank-2 free factors as slopes: the complex is the Farey graph, vertices are coprime
//! pairs up to sign and edges join pairs of determinant ±1.

use std::collections::{HashMap, VecDeque};

use super::FreeFactor;
use crate::error::{OskError, Result};
use crate::free_group::{CyclicWord, Letter, Word};
use crate::whitehead::is_primitive;

/// Coprime pair `(p, q)` normalized so that `p > 0`, or `p = 0` and `q = 1`.
pub type Slope = (i64, i64);

const LADDER_BUDGET: usize = 1_000_000;

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

/// `(g, x, y)` with `a·x + b·y = g = gcd(a, b)`.
fn ext_gcd(a: i64, b: i64) -> (i64, i64, i64) {
    if b == 0 {
        (a, 1, 0)
    } else {
        let (g, x, y) = ext_gcd(b, a.rem_euclid(b));
        (g, y, x - a.div_euclid(b) * y)
    }
}

pub fn normalize_slope(p: i64, q: i64) -> Result<Slope> {
    if gcd(p, q) != 1 {
        return Err(OskError::Input(format!("({p}, {q}) is not a coprime pair")));
    }
    Ok(if p < 0 || (p == 0 && q < 0) { (-p, -q) } else { (p, q) })
}

pub fn det(s: Slope, t: Slope) -> i64 {
    s.0 * t.1 - s.1 * t.0
}

pub fn farey_adjacent(s: Slope, t: Slope) -> bool {
    det(s, t).abs() == 1
}

/// Abelianized slope of a rank-1 factor generated by a primitive element of rank 2.
pub fn slope_of(f: &FreeFactor) -> Result<Slope> {
    if f.ambient_rank() != 2 {
        return Err(OskError::Rank { expected: "2".into(), actual: f.ambient_rank() });
    }
    let g = &f.generators()[0];
    if f.rank() != 1 || !is_primitive(&CyclicWord::new(g)?, 2) {
        return Err(OskError::NotPrimitive);
    }
    let v = g.abelianize(2);
    normalize_slope(v[0], v[1])
}

/// Shortest path of slopes from `s` to `t`. Geodesics stay among the vertices of the
/// triangles crossed by the hyperbolic geodesic, which after moving `s` to `1/0` are
/// the two integers around `t` and its Stern-Brocot ancestors.
pub fn farey_path(s: Slope, t: Slope) -> Result<Vec<Slope>> {
    let (s, t) = (normalize_slope(s.0, s.1)?, normalize_slope(t.0, t.1)?);
    if s == t {
        return Ok(vec![s]);
    }
    // m sends s to (1, 0) with determinant 1; inv is its inverse.
    let (_, x, y) = ext_gcd(s.0, s.1);
    let m = |v: Slope| (x * v.0 + y * v.1, -s.1 * v.0 + s.0 * v.1);
    let inv = |v: Slope| (s.0 * v.0 - y * v.1, s.1 * v.0 + x * v.1);
    let (mut num, mut den) = m(t);
    if den < 0 {
        num = -num;
        den = -den;
    }
    let target = (num, den);
    let n = num.div_euclid(den);
    let mut lo = (n, 1);
    let mut hi = (n + 1, 1);
    let mut ladder = vec![(1, 0), lo, hi];
    while target != lo && target != hi {
        let mid = (lo.0 + hi.0, lo.1 + hi.1);
        ladder.push(mid);
        if mid == target {
            break;
        }
        if (num as i128) * (mid.1 as i128) < (mid.0 as i128) * (den as i128) {
            hi = mid;
        } else {
            lo = mid;
        }
        if ladder.len() > LADDER_BUDGET {
            return Err(OskError::Budget(format!("Farey ladder exceeds {LADDER_BUDGET} vertices")));
        }
    }
    let start = 0;
    let goal = ladder.iter().position(|&v| v == target).expect("target is on the ladder");
    let mut prev: HashMap<usize, usize> = HashMap::from([(start, start)]);
    let mut q = VecDeque::from([start]);
    while let Some(i) = q.pop_front() {
        if i == goal {
            break;
        }
        for j in 0..ladder.len() {
            if !prev.contains_key(&j) && farey_adjacent(ladder[i], ladder[j]) {
                prev.insert(j, i);
                q.push_back(j);
            }
        }
    }
    let mut path = vec![goal];
    while *path.last().unwrap() != start {
        path.push(prev[path.last().unwrap()]);
    }
    path.reverse();
    path.into_iter().map(|i| {
        let v = inv(ladder[i]);
        normalize_slope(v.0, v.1)
    })
    .collect()
}

pub fn farey_distance_slopes(s: Slope, t: Slope) -> Result<usize> {
    Ok(farey_path(s, t)?.len() - 1)
}

/// Exact distance between two vertices of the rank-2 free factor complex.
pub fn farey_distance(a: &FreeFactor, b: &FreeFactor) -> Result<usize> {
    farey_distance_slopes(slope_of(a)?, slope_of(b)?)
}

/// A basis `(u, v)` of the rank-2 free group whose abelianizations are `±s` and `±t`,
/// built by running the Euclidean algorithm on the pair and replaying it on words.
pub fn basis_pair(s: Slope, t: Slope) -> Result<(Word, Word)> {
    if !farey_adjacent(s, t) {
        return Err(OskError::Input(format!("slopes {s:?} and {t:?} are not Farey neighbours")));
    }
    let l1 = |v: Slope| v.0.abs() + v.1.abs();
    let (mut s, mut t) = (s, t);
    // (reduce_first, sign): the reduced vector became `x - sign·y`.
    let mut ops: Vec<(bool, i64)> = Vec::new();
    while l1(s) + l1(t) > 2 {
        let mut best: Option<(i64, bool, i64)> = None;
        for first in [true, false] {
            for sign in [1, -1] {
                let (x, y) = if first { (s, t) } else { (t, s) };
                let r = (x.0 - sign * y.0, x.1 - sign * y.1);
                let total = l1(r) + l1(y);
                if total < l1(s) + l1(t) && best.map_or(true, |b| total < b.0) {
                    best = Some((total, first, sign));
                }
            }
        }
        let (_, first, sign) =
            best.ok_or_else(|| OskError::Input("unimodular pair admits no reduction".into()))?;
        if first {
            s = (s.0 - sign * t.0, s.1 - sign * t.1);
        } else {
            t = (t.0 - sign * s.0, t.1 - sign * s.1);
        }
        ops.push((first, sign));
    }
    let letter = |v: Slope| -> Word {
        let l: Letter = if v.0 != 0 { v.0.signum() as Letter } else { 2 * v.1.signum() as Letter };
        Word::letter(l)
    };
    let (mut u, mut v) = (letter(s), letter(t));
    for &(first, sign) in ops.iter().rev() {
        if first {
            u = u.mul(&v.pow(sign));
        } else {
            v = v.mul(&u.pow(sign));
        }
    }
    Ok((u, v))
}

/// A primitive word with slope `s`.
pub fn primitive_of(s: Slope) -> Result<Word> {
    let (_, x, y) = ext_gcd(s.0, s.1);
    // (-y, x) has determinant 1 with s
    Ok(basis_pair(s, (-y, x))?.0)
}
