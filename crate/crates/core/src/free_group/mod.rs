//! Words, cyclic words and automorphisms of a free group of finite rank.
//!
//! Letters are nonzero integers: `k` is the k-th generator (1-based) and `-k`
//! its inverse. The text syntax uses `a, b, c, ...` for generators and the
//! uppercase letters for inverses.

mod automorphism;
mod cyclic;

pub use automorphism::{Automorphism, WhiteheadAutomorphism};
pub use cyclic::CyclicWord;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{OskError, Result};

pub type Letter = i32;

pub fn letter_char(l: Letter) -> char {
    let base = (b'a' + (l.unsigned_abs() as u8 - 1)) as char;
    if l > 0 {
        base
    } else {
        base.to_ascii_uppercase()
    }
}

pub fn parse_letter(c: char) -> Result<Letter> {
    if c.is_ascii_lowercase() {
        Ok((c as u8 - b'a') as Letter + 1)
    } else if c.is_ascii_uppercase() {
        Ok(-((c.to_ascii_lowercase() as u8 - b'a') as Letter + 1))
    } else {
        Err(OskError::UnknownSymbol(c))
    }
}

/// Position of a letter in the fixed symbol order `a < A < b < B < ...`.
pub fn letter_key(l: Letter) -> u32 {
    2 * (l.unsigned_abs() - 1) + u32::from(l < 0)
}

pub fn key_letter(k: u32) -> Letter {
    let g = (k / 2 + 1) as Letter;
    if k % 2 == 0 {
        g
    } else {
        -g
    }
}

/// The standard basis of a free group of rank `n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Basis {
    pub rank: usize,
}

impl Basis {
    pub fn new(rank: usize) -> Result<Self> {
        if !(2..=26).contains(&rank) {
            return Err(OskError::Input(format!("rank must be in 2..=26, got {rank}")));
        }
        Ok(Basis { rank })
    }

    /// All 2n signed letters in symbol order.
    pub fn letters(&self) -> Vec<Letter> {
        (0..2 * self.rank as u32).map(key_letter).collect()
    }

    pub fn contains(&self, l: Letter) -> bool {
        l != 0 && l.unsigned_abs() as usize <= self.rank
    }

    pub fn parse(&self, s: &str) -> Result<Word> {
        let w = Word::parse(s)?;
        if let Some(&bad) = w.letters().iter().find(|&&l| !self.contains(l)) {
            return Err(OskError::UnknownSymbol(letter_char(bad)));
        }
        Ok(w)
    }
}

/// A freely reduced word.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Word(Vec<Letter>);

impl Word {
    pub fn identity() -> Self {
        Word(Vec::new())
    }

    /// Freely reduces an arbitrary letter sequence.
    pub fn reduce<I: IntoIterator<Item = Letter>>(letters: I) -> Self {
        let mut out: Vec<Letter> = Vec::new();
        for l in letters {
            debug_assert!(l != 0);
            if out.last() == Some(&-l) {
                out.pop();
            } else {
                out.push(l);
            }
        }
        Word(out)
    }

    pub fn letter(l: Letter) -> Self {
        Word(vec![l])
    }

    pub fn parse(s: &str) -> Result<Self> {
        let mut ls = Vec::new();
        for c in s.chars() {
            if c.is_whitespace() || c == '1' && s.trim() == "1" {
                continue;
            }
            ls.push(parse_letter(c)?);
        }
        Ok(Word::reduce(ls))
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

    pub fn inverse(&self) -> Self {
        Word(self.0.iter().rev().map(|&l| -l).collect())
    }

    pub fn mul(&self, other: &Word) -> Word {
        Word::reduce(self.0.iter().chain(other.0.iter()).copied())
    }

    pub fn pow(&self, k: i64) -> Word {
        let base = if k < 0 { self.inverse() } else { self.clone() };
        let mut out = Word::identity();
        for _ in 0..k.unsigned_abs() {
            out = out.mul(&base);
        }
        out
    }

    pub fn conjugate_by(&self, u: &Word) -> Word {
        u.inverse().mul(self).mul(u)
    }

    /// Largest generator index used.
    pub fn max_generator(&self) -> usize {
        self.0.iter().map(|l| l.unsigned_abs() as usize).max().unwrap_or(0)
    }

    /// Exponent sums, i.e. the image in the abelianization.
    pub fn abelianize(&self, rank: usize) -> Vec<i64> {
        let mut v = vec![0i64; rank];
        for &l in &self.0 {
            v[l.unsigned_abs() as usize - 1] += l.signum() as i64;
        }
        v
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "1");
        }
        for &l in &self.0 {
            write!(f, "{}", letter_char(l))?;
        }
        Ok(())
    }
}

impl Serialize for Word {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Word {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Word::parse(&s).map_err(serde::de::Error::custom)
    }
}

/// Cyclically reduces `w`, returning the cyclic word and a conjugator `u`
/// with `u⁻¹ · c · u = w`, where `c` is the cyclic word read from its canonical rotation.
pub fn cyclic_reduce(w: &Word) -> Result<(CyclicWord, Word)> {
    if w.is_empty() {
        return Err(OskError::Trivial);
    }
    let ls = w.letters();
    let mut i = 0;
    let mut j = ls.len();
    while j - i >= 2 && ls[i] == -ls[j - 1] {
        i += 1;
        j -= 1;
    }
    // w = p · core · p⁻¹ with p = ls[..i]
    let p = Word(ls[..i].to_vec());
    let core = Word(ls[i..j].to_vec());
    let (cw, shift) = CyclicWord::canonical_with_shift(core.letters());
    // core = r · c · r⁻¹ where c is the rotation starting at `shift`: core = x y, c = y x, r = x
    let r = Word(core.letters()[..shift].to_vec());
    // w = p r c r⁻¹ p⁻¹, so conjugator u = (p r)⁻¹
    let u = p.mul(&r).inverse();
    Ok((cw, u))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(s: &str) -> Word {
        Word::parse(s).unwrap()
    }

    #[test]
    fn reduce_examples() {
        assert!(w("a b B A").is_empty());
        assert_eq!(w("a a b").to_string(), "aab");
        assert_eq!(w("a B b A a").to_string(), "a");
        assert!(matches!(Word::parse("a?"), Err(OskError::UnknownSymbol('?'))));
        let b = Basis::new(2).unwrap();
        assert!(b.parse("ac").is_err());
    }

    /// Independent oracle: delete one adjacent cancelling pair at a time until none remain.
    fn naive_reduce(mut v: Vec<Letter>) -> Vec<Letter> {
        loop {
            let pos = v.windows(2).position(|p| p[0] == -p[1]);
            match pos {
                Some(i) => {
                    v.drain(i..i + 2);
                }
                None => return v,
            }
        }
    }

    #[test]
    fn reduce_matches_naive_oracle() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..500 {
            let n = rng.gen_range(0..20);
            let v: Vec<Letter> = (0..n)
                .map(|_| {
                    let g = rng.gen_range(1..=3);
                    if rng.gen_bool(0.5) { g } else { -g }
                })
                .collect();
            assert_eq!(Word::reduce(v.clone()).letters(), naive_reduce(v).as_slice());
        }
    }

    #[test]
    fn cyclic_reduce_examples() {
        let (c, u) = cyclic_reduce(&w("b a B")).unwrap();
        assert_eq!(c.to_string(), "a");
        assert_eq!(u.to_string(), "B");
        let (c, u) = cyclic_reduce(&w("a b")).unwrap();
        assert_eq!(c.to_string(), "ab");
        assert!(u.is_empty());
        assert!(cyclic_reduce(&Word::identity()).is_err());
    }

    #[test]
    fn cyclic_reduce_conjugator_identity() {
        for s in ["A b a b A a", "bbaBAB", "abcACB", "aaBBAAbb", "cabAC"] {
            let x = w(s);
            let (c, u) = cyclic_reduce(&x).unwrap();
            let back = c.as_word().conjugate_by(&u);
            assert_eq!(back, x, "{s}");
        }
    }

    /// Oracle: strip cancelling ends one pair at a time, then take the least rotation by symbol key.
    fn naive_cyclic(v: &[Letter]) -> Vec<Letter> {
        let mut v = naive_reduce(v.to_vec());
        while v.len() >= 2 && v[0] == -v[v.len() - 1] {
            v.remove(0);
            v.pop();
        }
        (0..v.len())
            .map(|i| {
                let mut r = v[i..].to_vec();
                r.extend_from_slice(&v[..i]);
                r
            })
            .min_by_key(|r| r.iter().map(|&l| letter_key(l)).collect::<Vec<_>>())
            .unwrap()
    }

    #[test]
    fn cyclic_reduce_matches_oracle() {
        let x = w("A b a b A a");
        let (c, _) = cyclic_reduce(&x).unwrap();
        assert_eq!(c.letters(), naive_cyclic(x.letters()).as_slice());
        assert_eq!(c.to_string(), "abAb");
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..500 {
            let n = rng.gen_range(1..14);
            let v: Vec<Letter> = (0..n)
                .map(|_| {
                    let g = rng.gen_range(1..=3);
                    if rng.gen_bool(0.5) { g } else { -g }
                })
                .collect();
            let x = Word::reduce(v);
            if x.is_empty() {
                continue;
            }
            let (c, u) = cyclic_reduce(&x).unwrap();
            assert_eq!(c.letters(), naive_cyclic(x.letters()).as_slice());
            assert_eq!(c.as_word().conjugate_by(&u), x);
        }
    }

    mod props {
        use super::super::*;
        use proptest::prelude::*;

        fn arb_word(rank: i32, max: usize) -> impl Strategy<Value = Word> {
            prop::collection::vec((1..=rank, any::<bool>()), 0..max)
                .prop_map(|v| Word::reduce(v.into_iter().map(|(g, s)| if s { g } else { -g })))
        }

        proptest! {
            #[test]
            fn reduce_idempotent(w in arb_word(3, 20)) {
                prop_assert_eq!(Word::reduce(w.letters().to_vec()), w.clone());
            }

            #[test]
            fn conjugation_preserves_class(w in arb_word(3, 12), u in arb_word(3, 8)) {
                prop_assume!(!w.is_empty());
                let a = cyclic_reduce(&w).unwrap().0;
                let b = cyclic_reduce(&w.conjugate_by(&u)).unwrap().0;
                prop_assert_eq!(a, b);
            }

            #[test]
            fn whitehead_inverse_roundtrip(w in arb_word(3, 12), i in 0usize..84) {
                let m = WhiteheadAutomorphism::all_moves(3)[i].clone();
                let phi = m.to_automorphism(3);
                let back = m.inverse().to_automorphism(3).apply(&phi.apply(&w));
                prop_assert_eq!(back, w);
            }
        }
    }
}
