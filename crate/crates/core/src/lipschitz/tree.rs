//! Points and geodesics in the universal cover of a marked graph.
//!
//! A point is a tight edge path from the base followed by an optional partial
//! edge `(d, o)` with `0 < o < ℓ(d)`, where `d` never backtracks the path.

use num_traits::Zero;

use crate::free_group::Word;
use crate::marked_graph::{edge_of, is_reversed, rev, tighten_path, Dir, MarkedGraph};
use crate::rational::Q;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub(crate) struct TPoint {
    pub path: Vec<Dir>,
    pub partial: Option<(Dir, Q)>,
}

/// A traversal of part of a directed edge, offsets measured from the edge's origin.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct Piece {
    pub dir: Dir,
    pub from: Q,
    pub to: Q,
}

impl Piece {
    pub fn len(&self) -> Q {
        &self.to - &self.from
    }
}

/// A point of the graph itself: a vertex, or an interior point given by a forward offset.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub(crate) enum HPoint {
    Vertex(usize),
    Interior(usize, Q),
}

/// A closed edge of the cover: `prefix · edge`, parametrized by `s ∈ [0, ℓ]` from the prefix end.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub(crate) struct Cell {
    pub prefix: Vec<Dir>,
    pub edge: Dir,
}

/// `coef · vars + constant`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct Affine {
    pub coef: Vec<(usize, Q)>,
    pub constant: Q,
}

impl Affine {
    #[cfg(test)]
    pub fn eval(&self, vars: &[Q]) -> Q {
        self.coef.iter().fold(self.constant.clone(), |acc, (i, c)| acc + c * &vars[*i])
    }

    fn neg(&self) -> Affine {
        Affine { coef: self.coef.iter().map(|(i, c)| (*i, -c)).collect(), constant: -&self.constant }
    }
}

/// Cell position of a variable: `s = t` or, when flipped, `s = ℓ - t`.
#[derive(Debug, Clone)]
pub(crate) struct Placed {
    pub cell: Cell,
    pub var: usize,
    pub flipped: bool,
}

pub(crate) struct Cover<'a> {
    pub h: &'a MarkedGraph,
}

impl<'a> Cover<'a> {
    pub fn new(h: &'a MarkedGraph) -> Self {
        Cover { h }
    }

    fn len(&self, d: Dir) -> &Q {
        self.h.length(d)
    }

    pub fn root(&self) -> TPoint {
        TPoint { path: Vec::new(), partial: None }
    }

    /// Tight loop at the base spelling `c`.
    pub fn translation(&self, c: &Word) -> Vec<Dir> {
        tighten_path(&self.h.spell(c))
    }

    /// Builds the canonical point `path` then `o` along `d`.
    pub fn point(&self, mut path: Vec<Dir>, d: Dir, mut o: Q) -> TPoint {
        let mut d = d;
        if path.last() == Some(&rev(d)) {
            let last = path.pop().unwrap();
            o = self.len(last) - &o;
            d = last;
        }
        if o.is_zero() {
            TPoint { path, partial: None }
        } else if &o == self.len(d) {
            path.push(d);
            TPoint { path, partial: None }
        } else {
            TPoint { path, partial: Some((d, o)) }
        }
    }

    pub fn translate(&self, t: &[Dir], p: &TPoint) -> TPoint {
        let mut path = t.to_vec();
        path.extend_from_slice(&p.path);
        let path = tighten_path(&path);
        match &p.partial {
            None => TPoint { path, partial: None },
            Some((d, o)) => self.point(path, *d, o.clone()),
        }
    }

    fn items(&self, p: &TPoint) -> Vec<(Dir, Q)> {
        let mut v: Vec<(Dir, Q)> = p.path.iter().map(|&d| (d, self.len(d).clone())).collect();
        if let Some((d, o)) = &p.partial {
            v.push((*d, o.clone()));
        }
        v
    }

    pub fn geodesic(&self, p: &TPoint, q: &TPoint) -> Vec<Piece> {
        let a = self.items(p);
        let b = self.items(q);
        let mut j = 0;
        while j < a.len() && j < b.len() && a[j].0 == b[j].0 {
            let full = self.len(a[j].0);
            if a[j].1 == *full && b[j].1 == *full {
                j += 1;
                continue;
            }
            let d = a[j].0;
            return if a[j].1 <= b[j].1 && j + 1 == a.len() {
                // p lies on the way to q
                let mut out = vec![];
                if a[j].1 < b[j].1 {
                    out.push(Piece { dir: d, from: a[j].1.clone(), to: b[j].1.clone() });
                }
                out.extend(b[j + 1..].iter().map(|(d, x)| Piece { dir: *d, from: Q::zero(), to: x.clone() }));
                out
            } else {
                let mut out: Vec<Piece> = a[j + 1..]
                    .iter()
                    .rev()
                    .map(|(d, x)| Piece { dir: rev(*d), from: self.len(*d) - x, to: self.len(*d).clone() })
                    .collect();
                let l = self.len(d);
                out.push(Piece { dir: rev(d), from: l - &a[j].1, to: l - &b[j].1 });
                out
            };
        }
        let mut out: Vec<Piece> = a[j..]
            .iter()
            .rev()
            .map(|(d, x)| Piece { dir: rev(*d), from: self.len(*d) - x, to: self.len(*d).clone() })
            .collect();
        out.extend(b[j..].iter().map(|(d, x)| Piece { dir: *d, from: Q::zero(), to: x.clone() }));
        out
    }

    #[cfg(test)]
    pub fn distance(&self, p: &TPoint, q: &TPoint) -> Q {
        self.geodesic(p, q).iter().map(|x| x.len()).sum()
    }

    /// The point at distance `eps` from `p` along `pieces` (a geodesic starting at `p`).
    pub fn advance(&self, p: &TPoint, pieces: &[Piece], eps: &Q) -> TPoint {
        let mut rem = eps.clone();
        let mut cur = p.clone();
        for pc in pieces {
            let l = pc.len();
            let base = match &cur.partial {
                Some((d, _)) if *d != pc.dir => {
                    let mut b = cur.path.clone();
                    b.push(*d);
                    b
                }
                _ => cur.path.clone(),
            };
            if rem <= l {
                return self.point(base, pc.dir, &pc.from + &rem);
            }
            rem -= &l;
            cur = self.point(base, pc.dir, pc.to.clone());
        }
        cur
    }

    pub fn project(&self, p: &TPoint) -> HPoint {
        match &p.partial {
            None => HPoint::Vertex(match p.path.last() {
                Some(&d) => self.h.terminus(d),
                None => self.h.base(),
            }),
            Some((d, o)) => {
                let fwd = if is_reversed(*d) { self.len(*d) - o } else { o.clone() };
                HPoint::Interior(edge_of(*d), fwd)
            }
        }
    }

    /// Cells containing `p` and leaving it along each listed direction (pieces' first directions).
    pub fn cell_toward(&self, p: &TPoint, germ_dir: Dir) -> (Cell, Q) {
        match &p.partial {
            Some((d, o)) => (Cell { prefix: p.path.clone(), edge: *d }, o.clone()),
            None => {
                if p.path.last() == Some(&rev(germ_dir)) {
                    let mut prefix = p.path.clone();
                    let last = prefix.pop().unwrap();
                    (Cell { prefix, edge: last }, self.len(last).clone())
                } else {
                    (Cell { prefix: p.path.clone(), edge: germ_dir }, Q::zero())
                }
            }
        }
    }

    /// Any cell containing `p`, with its parameter.
    pub fn some_cell(&self, p: &TPoint) -> (Cell, Q) {
        match (&p.partial, p.path.last()) {
            (Some(_), _) => self.cell_toward(p, 0),
            (None, Some(&last)) => self.cell_toward(p, rev(last)),
            (None, None) => self.cell_toward(p, self.h.star(self.h.base())[0]),
        }
    }

    pub fn cell_point(&self, c: &Cell, s: &Q) -> TPoint {
        self.point(c.prefix.clone(), c.edge, s.clone())
    }

    /// Translate of a cell, and whether its parametrization is reversed.
    pub fn translate_cell(&self, t: &[Dir], c: &Cell) -> (Cell, bool) {
        let mut path = t.to_vec();
        path.extend_from_slice(&c.prefix);
        let mut path = tighten_path(&path);
        if path.last() == Some(&rev(c.edge)) {
            let last = path.pop().unwrap();
            (Cell { prefix: path, edge: last }, true)
        } else {
            (Cell { prefix: path, edge: c.edge }, false)
        }
    }

    fn vertex_distance(&self, x: &[Dir], y: &[Dir]) -> Q {
        let common = x.iter().zip(y).take_while(|(a, b)| a == b).count();
        x[common..].iter().chain(&y[common..]).map(|&d| self.len(d).clone()).sum()
    }

    /// Distance between placed points as a maximum of affine forms in the variables.
    pub fn distance_forms(&self, a: &Placed, b: &Placed) -> Vec<Affine> {
        let s_form = |p: &Placed| -> Affine {
            let l = self.len(p.cell.edge).clone();
            if p.flipped {
                Affine { coef: vec![(p.var, -Q::from_integer(1.into()))], constant: l }
            } else {
                Affine { coef: vec![(p.var, Q::from_integer(1.into()))], constant: Q::zero() }
            }
        };
        let (sa, sb) = (s_form(a), s_form(b));
        if a.cell == b.cell {
            let diff = add(&sa, &sb.neg());
            return vec![diff.clone(), diff.neg()];
        }
        let upper = |c: &Cell| {
            let mut v = c.prefix.clone();
            v.push(c.edge);
            v
        };
        let exit = |from: &Placed, s: &Affine, other: &Cell| -> (Vec<Dir>, Affine) {
            let up = upper(&from.cell);
            let ou = upper(other);
            if ou.len() > up.len() && ou[..up.len()] == up[..] {
                let l = self.len(from.cell.edge).clone();
                let mut f = s.neg();
                f.constant += l;
                (up, f)
            } else {
                (from.cell.prefix.clone(), s.clone())
            }
        };
        let (xa, fa) = exit(a, &sa, &b.cell);
        let (xb, fb) = exit(b, &sb, &a.cell);
        let mut f = add(&fa, &fb);
        f.constant += self.vertex_distance(&xa, &xb);
        vec![f]
    }
}

pub(crate) fn add(a: &Affine, b: &Affine) -> Affine {
    let mut coef = a.coef.clone();
    for (i, c) in &b.coef {
        match coef.iter_mut().find(|(j, _)| j == i) {
            Some((_, x)) => *x += c,
            None => coef.push((*i, c.clone())),
        }
    }
    coef.retain(|(_, c)| !c.is_zero());
    Affine { coef, constant: &a.constant + &b.constant }
}

pub(crate) fn pieces_len(p: &[Piece]) -> Q {
    p.iter().map(|x| x.len()).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::marked_graph::dir;
    use crate::rational::{q, qi};

    #[test]
    fn distances_on_rose_cover() {
        let h = MarkedGraph::rose(&[q(1, 3), q(2, 3)]).unwrap();
        let c = Cover::new(&h);
        let a = dir(0, false);
        let b = dir(1, false);
        let p = c.point(vec![a], b, q(1, 3));
        let r = c.root();
        assert_eq!(c.distance(&r, &p), q(2, 3));
        let back = c.point(vec![a, b], rev(b), q(1, 3));
        assert_eq!(back, p);
        let t = c.translation(&Word::parse("A").unwrap());
        let moved = c.translate(&t, &p);
        assert_eq!(moved, c.point(vec![], b, q(1, 3)));
        // back along b, back over a, then out along b
        assert_eq!(c.distance(&p, &moved), q(1, 1));
        let g = c.geodesic(&p, &moved);
        assert_eq!(pieces_len(&g), q(1, 1));
        assert_eq!(g[0].dir, rev(b));
        assert_eq!(g[1].dir, rev(a));
        let mid = c.advance(&p, &g, &q(1, 2));
        assert_eq!(c.distance(&mid, &moved), q(1, 2));
        assert_eq!(c.distance(&mid, &r), q(1, 6));
        let _ = qi(0);
    }

    #[test]
    fn affine_forms_match_distances() {
        let h = MarkedGraph::theta([q(1, 4), q(1, 4), q(1, 2)]).unwrap();
        let c = Cover::new(&h);
        let cells = [
            Cell { prefix: vec![], edge: dir(0, false) },
            Cell { prefix: vec![dir(0, false)], edge: dir(1, true) },
            Cell { prefix: vec![dir(2, false), dir(1, true)], edge: dir(0, false) },
            Cell { prefix: vec![], edge: dir(2, false) },
        ];
        let samples = [q(0, 1), q(1, 16), q(1, 8), q(1, 4)];
        for (i, ci) in cells.iter().enumerate() {
            for (j, cj) in cells.iter().enumerate() {
                for si in &samples {
                    for sj in &samples {
                        let si = si.min(h.length(ci.edge)).clone();
                        let sj = sj.min(h.length(cj.edge)).clone();
                        let pa = Placed { cell: ci.clone(), var: 0, flipped: false };
                        let pb = Placed { cell: cj.clone(), var: 1, flipped: false };
                        let vars = [si.clone(), sj.clone()];
                        let f = c.distance_forms(&pa, &pb).iter().map(|f| f.eval(&vars)).max().unwrap();
                        let d = c.distance(&c.cell_point(ci, &si), &c.cell_point(cj, &sj));
                        assert_eq!(f, d, "cells {i} {j} at {si} {sj}");
                    }
                }
            }
        }
    }
}
