use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::{letter_char, letter_key, CyclicWord, Letter, Word};
use crate::error::{OskError, Result};

/// An endomorphism of the free group of rank `images.len()`, given by generator images.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Automorphism {
    images: Vec<Word>,
}

impl Automorphism {
    pub fn identity(rank: usize) -> Self {
        Automorphism { images: (1..=rank as Letter).map(Word::letter).collect() }
    }

    /// Builds a map from generator images; fails unless it is invertible.
    pub fn from_images(images: Vec<Word>) -> Result<Self> {
        let a = Automorphism { images };
        a.inverse()?;
        Ok(a)
    }

    pub fn rank(&self) -> usize {
        self.images.len()
    }

    pub fn images(&self) -> &[Word] {
        &self.images
    }

    pub fn image_of(&self, l: Letter) -> Word {
        let w = &self.images[l.unsigned_abs() as usize - 1];
        if l > 0 {
            w.clone()
        } else {
            w.inverse()
        }
    }

    pub fn apply(&self, w: &Word) -> Word {
        let mut out = Vec::new();
        for &l in w.letters() {
            out.extend_from_slice(self.image_of(l).letters());
        }
        Word::reduce(out)
    }

    pub fn apply_cyclic(&self, c: &CyclicWord) -> Result<CyclicWord> {
        CyclicWord::new(&self.apply(&c.as_word()))
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &Automorphism) -> Automorphism {
        Automorphism { images: other.images.iter().map(|w| self.apply(w)).collect() }
    }

    /// Inverse computed by folding the graph spelled by the images, tracking which
    /// image each folded edge came from.
    pub fn inverse(&self) -> Result<Automorphism> {
        let n = self.rank();
        let mut g = CarryGraph::default();
        g.vertices = 1;
        for (j, w) in self.images.iter().enumerate() {
            if w.is_empty() {
                return Err(OskError::Input("generator image is trivial".into()));
            }
            let ls = w.letters();
            let mut prev = 0;
            for (i, &l) in ls.iter().enumerate() {
                let next = if i + 1 == ls.len() {
                    0
                } else {
                    g.vertices += 1;
                    g.vertices - 1
                };
                let carry = if i == 0 { Word::letter(j as Letter + 1) } else { Word::identity() };
                g.edges.push(Some(CEdge { from: prev, to: next, label: l, carry }));
                prev = next;
            }
        }
        g.fold_all()?;
        let live: Vec<&CEdge> = g.edges.iter().flatten().collect();
        if live.len() != n {
            return Err(OskError::Input("images do not form a basis".into()));
        }
        let mut images = vec![Word::identity(); n];
        let mut seen = vec![false; n];
        for e in live {
            if e.from != 0 || e.to != 0 {
                return Err(OskError::Input("images do not form a basis".into()));
            }
            let (idx, c) = if e.label > 0 {
                (e.label as usize - 1, e.carry.clone())
            } else {
                ((-e.label) as usize - 1, e.carry.inverse())
            };
            if idx >= n || seen[idx] {
                return Err(OskError::Input("images do not form a basis".into()));
            }
            seen[idx] = true;
            images[idx] = c;
        }
        Ok(Automorphism { images })
    }
}

impl fmt::Display for Automorphism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .images
            .iter()
            .enumerate()
            .map(|(i, w)| format!("{}->{}", letter_char(i as Letter + 1), w))
            .collect();
        write!(f, "{}", parts.join(","))
    }
}

#[derive(Debug, Clone)]
struct CEdge {
    from: usize,
    to: usize,
    label: Letter,
    carry: Word,
}

impl CEdge {
    fn reversed(&self) -> CEdge {
        CEdge { from: self.to, to: self.from, label: -self.label, carry: self.carry.inverse() }
    }
}

/// Labelled graph whose edges also carry words in the image alphabet.
/// Invariant: reading carries along any closed path at vertex 0 gives a preimage of its label.
#[derive(Debug, Default)]
struct CarryGraph {
    vertices: usize,
    edges: Vec<Option<CEdge>>,
}

impl CarryGraph {
    fn find_fold(&self) -> Option<(usize, Letter, usize, usize)> {
        use std::collections::HashMap;
        let mut seen: HashMap<(usize, Letter), usize> = HashMap::new();
        for (i, e) in self.edges.iter().enumerate() {
            let Some(e) = e else { continue };
            for (v, l) in [(e.from, e.label), (e.to, -e.label)] {
                if let Some(&j) = seen.get(&(v, l)) {
                    if j != i {
                        return Some((v, l, j, i));
                    }
                }
                seen.insert((v, l), i);
            }
        }
        None
    }

    fn oriented_out(&mut self, i: usize, p: usize, x: Letter) {
        let e = self.edges[i].as_ref().unwrap();
        if !(e.from == p && e.label == x) {
            let r = e.reversed();
            self.edges[i] = Some(r);
        }
    }

    fn fold_all(&mut self) -> Result<()> {
        while let Some((p, x, i1, i2)) = self.find_fold() {
            self.oriented_out(i1, p, x);
            self.oriented_out(i2, p, x);
            let (mut i1, mut i2) = (i1, i2);
            if self.edges[i2].as_ref().unwrap().to == 0 {
                std::mem::swap(&mut i1, &mut i2);
            }
            let e1 = self.edges[i1].clone().unwrap();
            let e2 = self.edges[i2].clone().unwrap();
            let (u, v) = (e1.to, e2.to);
            if u == v {
                return Err(OskError::Input("images do not form a basis".into()));
            }
            let d = e1.carry.inverse().mul(&e2.carry);
            for e in self.edges.iter_mut().flatten() {
                if e.from == v {
                    e.carry = d.mul(&e.carry);
                }
                if e.to == v {
                    e.carry = e.carry.mul(&d.inverse());
                }
            }
            debug_assert_eq!(
                self.edges[i1].as_ref().unwrap().carry,
                self.edges[i2].as_ref().unwrap().carry
            );
            self.edges[i2] = None;
            for e in self.edges.iter_mut().flatten() {
                if e.from == v {
                    e.from = u;
                }
                if e.to == v {
                    e.to = u;
                }
            }
        }
        Ok(())
    }
}

/// Whitehead generators: signed permutations and the moves `(S, x)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum WhiteheadAutomorphism {
    /// Generator `i` maps to letter `perm[i]`.
    Permutation(Vec<Letter>),
    /// Letters in `set` (which contains `mult` but not its inverse) are multiplied by `mult`.
    Move { set: BTreeSet<Letter>, mult: Letter },
}

impl WhiteheadAutomorphism {
    pub fn new_move(set: BTreeSet<Letter>, mult: Letter) -> Result<Self> {
        if !set.contains(&mult) || set.contains(&-mult) {
            return Err(OskError::Input(format!(
                "Whitehead set must contain {} and not its inverse",
                letter_char(mult)
            )));
        }
        Ok(WhiteheadAutomorphism::Move { set, mult })
    }

    pub fn to_automorphism(&self, rank: usize) -> Automorphism {
        match self {
            WhiteheadAutomorphism::Permutation(p) => {
                Automorphism { images: p.iter().map(|&l| Word::letter(l)).collect() }
            }
            WhiteheadAutomorphism::Move { set, mult } => {
                let x = *mult;
                let images = (1..=rank as Letter)
                    .map(|y| {
                        if y == x || y == -x {
                            return Word::letter(y);
                        }
                        let (a, b) = (set.contains(&y), set.contains(&-y));
                        let xw = Word::letter(x);
                        let yw = Word::letter(y);
                        match (a, b) {
                            (true, false) => yw.mul(&xw),
                            (false, true) => xw.inverse().mul(&yw),
                            (true, true) => xw.inverse().mul(&yw).mul(&xw),
                            (false, false) => yw,
                        }
                    })
                    .collect();
                Automorphism { images }
            }
        }
    }

    pub fn inverse(&self) -> WhiteheadAutomorphism {
        match self {
            WhiteheadAutomorphism::Permutation(p) => {
                let mut inv = vec![0; p.len()];
                for (i, &l) in p.iter().enumerate() {
                    let g = i as Letter + 1;
                    inv[l.unsigned_abs() as usize - 1] = if l > 0 { g } else { -g };
                }
                WhiteheadAutomorphism::Permutation(inv)
            }
            WhiteheadAutomorphism::Move { set, mult } => {
                let mut s = set.clone();
                s.remove(mult);
                s.insert(-mult);
                WhiteheadAutomorphism::Move { set: s, mult: -mult }
            }
        }
    }

    /// All moves `(S, x)` at rank `n` that are not inner automorphisms or the identity.
    pub fn all_moves(rank: usize) -> Vec<WhiteheadAutomorphism> {
        let letters: Vec<Letter> = (0..2 * rank as u32).map(super::key_letter).collect();
        let mut out = Vec::new();
        for &x in &letters {
            let others: Vec<Letter> = letters.iter().copied().filter(|&l| l != x && l != -x).collect();
            let m = others.len();
            for mask in 1u64..(1u64 << m) - 1 {
                let mut set: BTreeSet<Letter> = (0..m)
                    .filter(|i| mask >> i & 1 == 1)
                    .map(|i| others[i])
                    .collect();
                set.insert(x);
                out.push(WhiteheadAutomorphism::Move { set, mult: x });
            }
        }
        out
    }

    /// All `2^n n!` signed permutations of the generators.
    pub fn all_permutations(rank: usize) -> Vec<WhiteheadAutomorphism> {
        fn perms(n: usize) -> Vec<Vec<usize>> {
            if n == 0 {
                return vec![vec![]];
            }
            let mut out = Vec::new();
            for p in perms(n - 1) {
                for pos in 0..=p.len() {
                    let mut q = p.clone();
                    q.insert(pos, n - 1);
                    out.push(q);
                }
            }
            out
        }
        let mut out = Vec::new();
        for p in perms(rank) {
            for signs in 0u32..(1 << rank) {
                let v = p
                    .iter()
                    .enumerate()
                    .map(|(i, &g)| {
                        let l = g as Letter + 1;
                        if signs >> i & 1 == 1 {
                            -l
                        } else {
                            l
                        }
                    })
                    .collect();
                out.push(WhiteheadAutomorphism::Permutation(v));
            }
        }
        out
    }
}

impl fmt::Display for WhiteheadAutomorphism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WhiteheadAutomorphism::Permutation(p) => {
                let s: String = p.iter().map(|&l| letter_char(l)).collect();
                write!(f, "perm({s})")
            }
            WhiteheadAutomorphism::Move { set, mult } => {
                let mut v: Vec<Letter> = set.iter().copied().collect();
                v.sort_by_key(|&l| letter_key(l));
                let s: String = v.iter().map(|&l| letter_char(l)).collect();
                write!(f, "({s},{})", letter_char(*mult))
            }
        }
    }
}
