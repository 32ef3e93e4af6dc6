use std::fmt;

use serde::{Deserialize, Serialize};

use super::{cyclic_reduce, letter_key, Letter, Word};
use crate::error::Result;

/// A nontrivial conjugacy class, stored as its least rotation under the symbol order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CyclicWord(Vec<Letter>);

impl CyclicWord {
    pub fn new(w: &Word) -> Result<Self> {
        Ok(cyclic_reduce(w)?.0)
    }

    pub fn parse(s: &str) -> Result<Self> {
        CyclicWord::new(&Word::parse(s)?)
    }

    /// Least rotation of a cyclically reduced sequence, with the starting offset.
    pub(crate) fn canonical_with_shift(ls: &[Letter]) -> (CyclicWord, usize) {
        let n = ls.len();
        let key = |i: usize| letter_key(ls[i % n]);
        let mut best = 0;
        for cand in 1..n {
            for k in 0..n {
                let (x, y) = (key(cand + k), key(best + k));
                if x != y {
                    if x < y {
                        best = cand;
                    }
                    break;
                }
            }
        }
        let mut v = ls[best..].to_vec();
        v.extend_from_slice(&ls[..best]);
        (CyclicWord(v), best)
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_word(&self) -> Word {
        Word(self.0.clone())
    }

    pub fn inverse(&self) -> CyclicWord {
        CyclicWord::canonical_with_shift(self.as_word().inverse().letters()).0
    }

    /// Cyclically adjacent letter pairs `(x_i, x_{i+1})`, including the wrap-around pair.
    pub fn cyclic_pairs(&self) -> impl Iterator<Item = (Letter, Letter)> + '_ {
        let n = self.0.len();
        (0..n).map(move |i| (self.0[i], self.0[(i + 1) % n]))
    }

    /// Returns `(r, k)` with this class equal to `r^k` and `r` not a proper power.
    pub fn root(&self) -> (CyclicWord, usize) {
        let n = self.0.len();
        for p in 1..=n {
            if n % p == 0 && (0..n).all(|i| self.0[i] == self.0[i % p]) {
                let (r, _) = CyclicWord::canonical_with_shift(&self.0[..p]);
                return (r, n / p);
            }
        }
        unreachable!()
    }

    pub fn max_generator(&self) -> usize {
        self.0.iter().map(|l| l.unsigned_abs() as usize).max().unwrap_or(0)
    }
}

impl fmt::Display for CyclicWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_word())
    }
}

impl Serialize for CyclicWord {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for CyclicWord {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        CyclicWord::parse(&s).map_err(serde::de::Error::custom)
    }
}
