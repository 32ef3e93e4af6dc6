//! Whitehead graphs, greedy Whitehead reduction, and primitivity/simplicity tests.

use std::collections::{BTreeSet, HashMap, VecDeque};

use serde::Serialize;

use crate::error::{OskError, Result};
use crate::factor_complex::FreeFactor;
use crate::free_group::{key_letter, letter_key, Automorphism, CyclicWord, Letter, WhiteheadAutomorphism, Word};
use crate::marked_graph::{edge_of, is_reversed, MarkedGraph};

/// Undirected multigraph on signed letters.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WhiteheadGraph {
    pub vertices: Vec<Letter>,
    pub edges: Vec<(Letter, Letter)>,
}

impl WhiteheadGraph {
    /// One edge `{x⁻¹, y}` for each cyclic occurrence of `xy`.
    pub fn of(z: &CyclicWord, rank: usize) -> Self {
        let vertices = (0..2 * rank as u32).map(key_letter).collect();
        let edges = z.cyclic_pairs().map(|(x, y)| (-x, y)).collect();
        WhiteheadGraph { vertices, edges }
    }

    pub fn degree(&self, v: Letter) -> usize {
        self.edges.iter().map(|&(a, b)| usize::from(a == v) + usize::from(b == v)).sum()
    }

    /// Connected components, each sorted by symbol order.
    pub fn components(&self) -> Vec<Vec<Letter>> {
        self.components_without(None)
    }

    fn components_without(&self, removed: Option<Letter>) -> Vec<Vec<Letter>> {
        let idx: HashMap<Letter, usize> = self.vertices.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let mut adj = vec![Vec::new(); self.vertices.len()];
        for &(a, b) in &self.edges {
            if Some(a) == removed || Some(b) == removed {
                continue;
            }
            adj[idx[&a]].push(idx[&b]);
            adj[idx[&b]].push(idx[&a]);
        }
        let mut comp = vec![usize::MAX; self.vertices.len()];
        let mut out = Vec::new();
        for s in 0..self.vertices.len() {
            if comp[s] != usize::MAX || Some(self.vertices[s]) == removed {
                continue;
            }
            let mut members = vec![];
            comp[s] = out.len();
            let mut q = VecDeque::from([s]);
            while let Some(v) = q.pop_front() {
                members.push(self.vertices[v]);
                for &w in &adj[v] {
                    if comp[w] == usize::MAX {
                        comp[w] = out.len();
                        q.push_back(w);
                    }
                }
            }
            members.sort_by_key(|&l| letter_key(l));
            out.push(members);
        }
        out
    }

    pub fn is_connected(&self) -> bool {
        self.components().len() <= 1
    }

    /// Least letter whose removal disconnects the graph.
    pub fn cut_vertex(&self) -> Result<Option<Letter>> {
        if !self.is_connected() {
            return Err(OskError::Disconnected);
        }
        let mut vs = self.vertices.clone();
        vs.sort_by_key(|&l| letter_key(l));
        Ok(vs.into_iter().find(|&v| self.components_without(Some(v)).len() > 1))
    }

    /// Connected with every vertex of degree 2.
    pub fn is_circle(&self) -> bool {
        self.is_connected() && self.vertices.iter().all(|&v| self.degree(v) == 2)
    }
}

fn moves_cache(rank: usize) -> &'static [WhiteheadAutomorphism] {
    use std::sync::OnceLock;
    static CACHE: OnceLock<Vec<Vec<WhiteheadAutomorphism>>> = OnceLock::new();
    let all = CACHE.get_or_init(|| (0..=6).map(WhiteheadAutomorphism::all_moves).collect());
    &all[rank]
}

/// All non-inner Whitehead moves at `rank`, in the fixed tie-break order.
pub fn whitehead_moves(rank: usize) -> Vec<WhiteheadAutomorphism> {
    if rank <= 6 {
        moves_cache(rank).to_vec()
    } else {
        WhiteheadAutomorphism::all_moves(rank)
    }
}

fn apply_move(m: &WhiteheadAutomorphism, z: &CyclicWord, rank: usize) -> CyclicWord {
    m.to_automorphism(rank).apply_cyclic(z).expect("automorphisms preserve nontriviality")
}

/// Greedy steepest descent; ties go to the first move in [`whitehead_moves`] order.
pub fn whitehead_minimize(z: &CyclicWord, rank: usize) -> (CyclicWord, Vec<WhiteheadAutomorphism>) {
    let moves = whitehead_moves(rank);
    let mut cur = z.clone();
    let mut seq = Vec::new();
    loop {
        let mut best: Option<(usize, CyclicWord)> = None;
        for (i, m) in moves.iter().enumerate() {
            let img = apply_move(m, &cur, rank);
            if img.len() < best.as_ref().map_or(cur.len(), |(_, b)| b.len()) {
                best = Some((i, img));
            }
        }
        match best {
            Some((i, img)) => {
                seq.push(moves[i].clone());
                cur = img;
            }
            None => return (cur, seq),
        }
    }
}

pub fn is_primitive(z: &CyclicWord, rank: usize) -> bool {
    whitehead_minimize(z, rank).0.len() == 1
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", rename_all = "kebab-case")]
pub enum SimplicityCertificate {
    Simple {
        /// Moves taking the input class to `reduced`.
        moves: Vec<WhiteheadAutomorphism>,
        reduced: CyclicWord,
        /// Generators of a proper free factor containing a conjugate of the input.
        factor: Vec<Word>,
    },
    NotSimple {
        /// Orbit-minimal representative whose Whitehead graph is connected with no cut vertex,
        /// or one from an exhausted search of the length-minimal orbit.
        minimal: CyclicWord,
    },
}

impl SimplicityCertificate {
    pub fn is_simple(&self) -> bool {
        matches!(self, SimplicityCertificate::Simple { .. })
    }

    /// Checks that replaying the moves from `z` reproduces the reduced class and that
    /// the reduced class uses only letters of a proper subset of the basis.
    pub fn verify(&self, z: &CyclicWord, rank: usize) -> bool {
        match self {
            SimplicityCertificate::Simple { moves, reduced, factor } => {
                let mut cur = z.clone();
                for m in moves {
                    cur = apply_move(m, &cur, rank);
                }
                let support = support(reduced);
                let phi = compose(moves, rank);
                cur == *reduced
                    && support.len() < rank
                    && factor.len() == support.len()
                    && match phi.inverse() {
                        Ok(inv) => support.iter().zip(factor).all(|(&g, w)| inv.apply(&Word::letter(g)) == *w),
                        Err(_) => false,
                    }
            }
            SimplicityCertificate::NotSimple { minimal } => {
                whitehead_minimize(minimal, rank).0.len() == minimal.len()
                    && support(minimal).len() == rank
                    && WhiteheadGraph::of(minimal, rank).is_connected()
            }
        }
    }
}

/// Generators (positive letters) appearing in `z`.
fn support(z: &CyclicWord) -> Vec<Letter> {
    let s: BTreeSet<Letter> = z.letters().iter().map(|l| l.abs()).collect();
    s.into_iter().collect()
}

/// Composite automorphism `m_k ∘ … ∘ m_1`.
pub fn compose(moves: &[WhiteheadAutomorphism], rank: usize) -> Automorphism {
    moves
        .iter()
        .fold(Automorphism::identity(rank), |acc, m| m.to_automorphism(rank).compose(&acc))
}

const ORBIT_BUDGET: usize = 200_000;

/// Decides whether `z` lies in a proper free factor.
pub fn is_simple(z: &CyclicWord, rank: usize) -> Result<SimplicityCertificate> {
    let (min, mut moves) = whitehead_minimize(z, rank);
    let simple_cert = |moves: Vec<WhiteheadAutomorphism>, reduced: CyclicWord| -> Result<SimplicityCertificate> {
        let inv = compose(&moves, rank).inverse()?;
        let factor = support(&reduced).iter().map(|&g| inv.apply(&Word::letter(g))).collect();
        Ok(SimplicityCertificate::Simple { moves, reduced, factor })
    };
    if support(&min).len() < rank {
        return simple_cert(moves, min);
    }
    let g = WhiteheadGraph::of(&min, rank);
    if g.cut_vertex()?.is_none() {
        return Ok(SimplicityCertificate::NotSimple { minimal: min });
    }
    // Search the minimal-length orbit for a representative missing a letter.
    let all = whitehead_moves(rank);
    let mut parent: HashMap<CyclicWord, Option<(CyclicWord, usize)>> = HashMap::new();
    parent.insert(min.clone(), None);
    let mut q = VecDeque::from([min.clone()]);
    while let Some(cur) = q.pop_front() {
        for (i, m) in all.iter().enumerate() {
            let img = apply_move(m, &cur, rank);
            if img.len() != cur.len() || parent.contains_key(&img) {
                continue;
            }
            parent.insert(img.clone(), Some((cur.clone(), i)));
            if support(&img).len() < rank {
                let mut tail = Vec::new();
                let mut at = img.clone();
                while let Some(Some((prev, i))) = parent.get(&at) {
                    tail.push(all[*i].clone());
                    at = prev.clone();
                }
                tail.reverse();
                moves.extend(tail);
                return simple_cert(moves, img);
            }
            if parent.len() > ORBIT_BUDGET {
                return Err(OskError::Budget(format!("minimal orbit of {z} exceeds {ORBIT_BUDGET}")));
            }
            q.push_back(img);
        }
    }
    Ok(SimplicityCertificate::NotSimple { minimal: min })
}

/// Smallest free factor containing `z`, read off the letter support after reduction.
pub fn smallest_factor(z: &CyclicWord, rank: usize) -> Result<FreeFactor> {
    match is_simple(z, rank)? {
        SimplicityCertificate::Simple { reduced, moves, .. } => {
            // A power of a letter lies in the cyclic factor of its root.
            let inv = compose(&moves, rank).inverse()?;
            let factor = support(&reduced).iter().map(|&g| inv.apply(&Word::letter(g))).collect();
            FreeFactor::new(factor, rank)
        }
        SimplicityCertificate::NotSimple { .. } => Err(OskError::NotSimple),
    }
}

/// Collapses a maximal tree of `g` and tests whether `z` crosses every petal exactly twice
/// with a single circle as Whitehead graph.
pub fn is_surface_relation(z: &CyclicWord, g: &MarkedGraph) -> Result<bool> {
    let rose = g.to_rose()?;
    let l = rose.realize_loop(z)?;
    let rank = rose.rank();
    if (0..rank).any(|e| l.crossings(e) != 2) {
        return Ok(false);
    }
    let letters: Vec<Letter> = l
        .dirs
        .iter()
        .map(|&d| {
            let x = edge_of(d) as Letter + 1;
            if is_reversed(d) {
                -x
            } else {
                x
            }
        })
        .collect();
    let w = CyclicWord::new(&Word::reduce(letters))?;
    Ok(WhiteheadGraph::of(&w, rank).is_circle())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;

    fn cw(s: &str) -> CyclicWord {
        CyclicWord::parse(s).unwrap()
    }

    #[test]
    fn graph_examples() {
        let g = WhiteheadGraph::of(&cw("abAB"), 2);
        let mut e: Vec<_> = g.edges.iter().map(|&(a, b)| (a.min(b), a.max(b))).collect();
        e.sort();
        // a–B, B–A, A–b, b–a
        assert_eq!(e, vec![(-2, -1), (-2, 1), (-1, 2), (1, 2)]);
        assert!(g.is_circle());
        assert_eq!(g.cut_vertex().unwrap(), None);
        assert_eq!(WhiteheadGraph::of(&cw("a"), 2).edges, vec![(-1, 1)]);
        assert_eq!(WhiteheadGraph::of(&cw("aa"), 2).edges, vec![(-1, 1), (-1, 1)]);
        assert!(WhiteheadGraph::of(&cw("a"), 2).cut_vertex().is_err());
    }

    #[test]
    fn cut_vertex_shapes() {
        let path = WhiteheadGraph { vertices: vec![1, 2, 3], edges: vec![(1, 2), (2, 3)] };
        assert_eq!(path.cut_vertex().unwrap(), Some(2));
        let bowtie = WhiteheadGraph {
            vertices: vec![1, 2, 3, 4, 5],
            edges: vec![(1, 2), (2, 3), (3, 1), (3, 4), (4, 5), (5, 3)],
        };
        assert_eq!(bowtie.cut_vertex().unwrap(), Some(3));
    }

    #[test]
    fn minimize_examples() {
        let (m, s) = whitehead_minimize(&cw("ab"), 2);
        assert_eq!(m.len(), 1);
        assert!(!s.is_empty());
        let (m, s) = whitehead_minimize(&cw("a"), 2);
        assert_eq!((m, s.len()), (cw("a"), 0));
        let (m, _) = whitehead_minimize(&cw("abAB"), 2);
        assert_eq!(m.len(), 4);
    }

    #[test]
    fn primitivity_and_simplicity() {
        assert!(is_primitive(&cw("a"), 2));
        assert!(is_primitive(&cw("aab"), 2));
        assert!(!is_primitive(&cw("abAB"), 2));
        assert!(!is_simple(&cw("abAB"), 2).unwrap().is_simple());
        let c = is_simple(&cw("abAB"), 3).unwrap();
        assert!(c.is_simple());
        assert!(c.verify(&cw("abAB"), 3));
        let f = smallest_factor(&cw("abAB"), 3).unwrap();
        assert_eq!(f, FreeFactor::parse("a,b", 3).unwrap());
        assert_eq!(smallest_factor(&cw("ab"), 2).unwrap(), FreeFactor::parse("ab", 2).unwrap());
        assert_eq!(smallest_factor(&cw("a"), 2).unwrap(), FreeFactor::parse("a", 2).unwrap());
        assert!(matches!(smallest_factor(&cw("abAB"), 2), Err(OskError::NotSimple)));
    }

    #[test]
    fn surface_relations() {
        let r = MarkedGraph::rose(&[q(1, 2), q(1, 2)]).unwrap();
        assert!(is_surface_relation(&cw("abAB"), &r).unwrap());
        assert!(!is_surface_relation(&cw("a"), &r).unwrap());
        // a²b² bounds a punctured Klein bottle: each petal twice, graph A–a–B–b–A
        assert!(is_surface_relation(&cw("aabb"), &r).unwrap());
        // crosses twice but the graph is two double edges
        assert!(!is_surface_relation(&cw("abab"), &r).unwrap());
    }

    #[test]
    fn primitivity_is_invariant() {
        let moves = whitehead_moves(3);
        for s in ["abc", "aabAB", "abAcB", "abbc", "aCbAB"] {
            let z = cw(s);
            let p = is_primitive(&z, 3);
            for m in moves.iter().step_by(4).take(20) {
                assert_eq!(is_primitive(&apply_move(m, &z, 3), 3), p, "{s} {m}");
            }
        }
    }
}
