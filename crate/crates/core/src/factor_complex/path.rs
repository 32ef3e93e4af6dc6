use serde::Serialize;

use super::containment::{contains, Immersion};
use super::farey::{basis_pair, slope_of};
use super::FreeFactor;
use crate::error::{OskError, Result};
use crate::free_group::{Automorphism, Word};

/// Why two consecutive factors span an edge of the complex.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Hop {
    /// The earlier factor is conjugate into the later one.
    Up { immersion: Immersion },
    /// The later factor is conjugate into the earlier one.
    Down { immersion: Immersion },
    /// Rank 2: `u` generates the earlier factor, `v` the later, and `{u, v}` is a basis.
    Basis { u: Word, v: Word },
}

/// A walk in the free factor complex with a replayable certificate for every step.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FactorPath {
    pub factors: Vec<FreeFactor>,
    pub hops: Vec<Hop>,
}

/// Certificate that `a` and `b` are distinct adjacent vertices, if they are.
pub fn certify_adjacent(a: &FreeFactor, b: &FreeFactor) -> Option<Hop> {
    if a == b || a.ambient_rank() != b.ambient_rank() {
        return None;
    }
    if a.ambient_rank() == 2 {
        let (s, t) = (slope_of(a).ok()?, slope_of(b).ok()?);
        let (u, v) = basis_pair(s, t).ok()?;
        return Some(Hop::Basis { u, v });
    }
    if a.rank() < b.rank() {
        contains(a, b).map(|immersion| Hop::Up { immersion })
    } else if b.rank() < a.rank() {
        contains(b, a).map(|immersion| Hop::Down { immersion })
    } else {
        None
    }
}

/// Replays a single hop from its certificate alone.
pub fn verify_hop(a: &FreeFactor, b: &FreeFactor, hop: &Hop) -> bool {
    if a == b {
        return false;
    }
    match hop {
        Hop::Up { immersion } => immersion.verify(a, b),
        Hop::Down { immersion } => immersion.verify(b, a),
        Hop::Basis { u, v } => {
            a.ambient_rank() == 2
                && Automorphism::from_images(vec![u.clone(), v.clone()]).is_ok()
                && FreeFactor::new(vec![u.clone()], 2).as_ref() == Ok(a)
                && FreeFactor::new(vec![v.clone()], 2).as_ref() == Ok(b)
        }
    }
}

impl FactorPath {
    pub fn at(f: FreeFactor) -> Self {
        FactorPath { factors: vec![f], hops: Vec::new() }
    }

    /// Certifies each consecutive pair; repeated factors are dropped.
    pub fn through(factors: Vec<FreeFactor>) -> Result<Self> {
        let mut it = factors.into_iter();
        let first = it.next().ok_or_else(|| OskError::Input("empty factor path".into()))?;
        let mut p = FactorPath::at(first);
        for f in it {
            p.push(f)?;
        }
        Ok(p)
    }

    /// Number of hops.
    pub fn len(&self) -> usize {
        self.hops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.hops.is_empty()
    }

    pub fn start(&self) -> &FreeFactor {
        &self.factors[0]
    }

    pub fn end(&self) -> &FreeFactor {
        self.factors.last().expect("paths are nonempty")
    }

    /// Appends `f`, certifying the new hop; a repeat of the endpoint is a no-op.
    pub fn push(&mut self, f: FreeFactor) -> Result<()> {
        if *self.end() == f {
            return Ok(());
        }
        let hop = certify_adjacent(self.end(), &f)
            .ok_or_else(|| OskError::Certificate(format!("{} and {} are not adjacent", self.end(), f)))?;
        self.factors.push(f);
        self.hops.push(hop);
        Ok(())
    }

    /// Concatenates paths that share an endpoint.
    pub fn extend(&mut self, other: &FactorPath) -> Result<()> {
        if self.end() != other.start() {
            return Err(OskError::Input(format!("{} does not start at {}", other.start(), self.end())));
        }
        self.factors.extend(other.factors[1..].iter().cloned());
        self.hops.extend(other.hops.iter().cloned());
        Ok(())
    }

    pub fn reversed(&self) -> Result<FactorPath> {
        FactorPath::through(self.factors.iter().rev().cloned().collect())
    }

    /// Replaces the walk by a shortest walk in the subgraph of the complex induced on its
    /// own vertices, so the result is never longer.
    pub fn shortcut(&self) -> Result<FactorPath> {
        let n = self.factors.len();
        let mut dist = vec![usize::MAX; n];
        let mut prev = vec![0; n];
        dist[0] = 0;
        for j in 1..n {
            for i in 0..j {
                let f = &self.factors;
                if dist[i] == usize::MAX || dist[i] >= dist[j] {
                    continue;
                }
                if f[i] == f[j] {
                    dist[j] = dist[i];
                    prev[j] = i;
                } else if dist[i] + 1 < dist[j] && certify_adjacent(&f[i], &f[j]).is_some() {
                    dist[j] = dist[i] + 1;
                    prev[j] = i;
                }
            }
        }
        let mut idx = vec![n - 1];
        while *idx.last().unwrap() != 0 {
            idx.push(prev[*idx.last().unwrap()]);
        }
        FactorPath::through(idx.into_iter().rev().map(|i| self.factors[i].clone()).collect())
    }

    /// Checks every hop from its certificate.
    pub fn verify(&self) -> Result<()> {
        if self.factors.len() != self.hops.len() + 1 {
            return Err(OskError::Certificate("hop count does not match factor count".into()));
        }
        for (i, h) in self.hops.iter().enumerate() {
            if !verify_hop(&self.factors[i], &self.factors[i + 1], h) {
                return Err(OskError::Certificate(format!(
                    "hop {i} from {} to {} does not replay",
                    self.factors[i],
                    self.factors[i + 1]
                )));
            }
        }
        Ok(())
    }
}
