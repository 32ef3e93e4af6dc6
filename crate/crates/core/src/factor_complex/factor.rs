use std::fmt;
use std::hash::{Hash, Hasher};

use serde::{Serialize, Serializer};

use crate::error::{OskError, Result};
use crate::free_group::Word;
use crate::marked_graph::{CoreGraph, MarkedGraph};
use crate::rational::qi;

/// Conjugacy class of a proper free factor, compared by the canonical code of its core
/// graph over the standard rose.
#[derive(Debug, Clone)]
pub struct FreeFactor {
    ambient_rank: usize,
    generators: Vec<Word>,
    core: CoreGraph,
    code: Vec<u32>,
}

impl FreeFactor {
    pub fn new(generators: Vec<Word>, ambient_rank: usize) -> Result<Self> {
        let rose = MarkedGraph::rose(&vec![qi(1); ambient_rank])?;
        if generators.iter().any(|w| w.max_generator() > ambient_rank) {
            return Err(OskError::Input("generator uses a letter beyond the rank".into()));
        }
        let gens: Vec<Word> = generators.into_iter().filter(|w| !w.is_empty()).collect();
        let core = CoreGraph::new(&gens, &rose)?;
        let r = core.betti();
        if r != gens.len() {
            return Err(OskError::Input(format!(
                "{} generators span a subgroup of rank {r}",
                gens.len()
            )));
        }
        if r >= ambient_rank {
            return Err(OskError::Input("free factor must be proper".into()));
        }
        let code = core.canonical_code();
        Ok(FreeFactor { ambient_rank, generators: gens, core, code })
    }

    /// Parses comma-separated generators such as `"ab,c"`.
    pub fn parse(s: &str, ambient_rank: usize) -> Result<Self> {
        let gens = s.split(',').map(Word::parse).collect::<Result<Vec<_>>>()?;
        Self::new(gens, ambient_rank)
    }

    pub fn rank(&self) -> usize {
        self.generators.len()
    }

    pub fn ambient_rank(&self) -> usize {
        self.ambient_rank
    }

    pub fn generators(&self) -> &[Word] {
        &self.generators
    }

    pub fn core(&self) -> &CoreGraph {
        &self.core
    }

    pub fn code(&self) -> &[u32] {
        &self.code
    }
}

impl PartialEq for FreeFactor {
    fn eq(&self, other: &Self) -> bool {
        self.ambient_rank == other.ambient_rank && self.code == other.code
    }
}

impl Eq for FreeFactor {}

impl Hash for FreeFactor {
    fn hash<H: Hasher>(&self, h: &mut H) {
        self.ambient_rank.hash(h);
        self.code.hash(h);
    }
}

impl PartialOrd for FreeFactor {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for FreeFactor {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.ambient_rank, self.rank(), &self.code).cmp(&(other.ambient_rank, other.rank(), &other.code))
    }
}

impl fmt::Display for FreeFactor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let gens: Vec<String> = self.generators.iter().map(|w| w.to_string()).collect();
        write!(f, "<{}>", gens.join(","))
    }
}

impl Serialize for FreeFactor {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}
