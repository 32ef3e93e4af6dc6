use std::collections::{BTreeSet, VecDeque};

use super::path::FactorPath;
use super::FreeFactor;
use crate::error::{OskError, Result};
use crate::marked_graph::{edge_of, rev, shortest_cycle, Dir, MarkedGraph};
use crate::rational::qi;

const SUBSET_EDGE_LIMIT: usize = 20;

/// Free factor carried by the connected subgraph spanned by `edges`.
pub fn subgraph_factor(g: &MarkedGraph, edges: &[usize]) -> Result<FreeFactor> {
    let mut inside = vec![false; g.num_edges()];
    for &e in edges {
        if e >= g.num_edges() {
            return Err(OskError::Input(format!("edge {e} is not in the graph")));
        }
        inside[e] = true;
    }
    let Some(&first) = edges.first() else {
        return Err(OskError::Input("empty subgraph".into()));
    };
    let root = g.edges()[first].from;
    let mut to_root: Vec<Option<Vec<Dir>>> = vec![None; g.num_vertices()];
    to_root[root] = Some(Vec::new());
    let mut tree = vec![false; g.num_edges()];
    let mut q = VecDeque::from([root]);
    while let Some(v) = q.pop_front() {
        for &d in g.star(v) {
            let w = g.terminus(d);
            if inside[edge_of(d)] && to_root[w].is_none() {
                let mut p = to_root[v].clone().unwrap();
                p.push(d);
                to_root[w] = Some(p);
                tree[edge_of(d)] = true;
                q.push_back(w);
            }
        }
    }
    let mut gens = Vec::new();
    for (e, &inn) in inside.iter().enumerate() {
        if !inn {
            continue;
        }
        let (u, w) = (g.edges()[e].from, g.edges()[e].to);
        let (Some(pu), Some(pw)) = (&to_root[u], &to_root[w]) else {
            return Err(OskError::Input("subgraph is disconnected".into()));
        };
        if tree[e] {
            continue;
        }
        let mut l = pu.clone();
        l.push(crate::marked_graph::dir(e, false));
        l.extend(pw.iter().rev().map(|&d| rev(d)));
        gens.push(g.path_word(&l));
    }
    if gens.is_empty() {
        return Err(OskError::Tree);
    }
    FreeFactor::new(gens, g.rank())
}

fn is_connected(g: &MarkedGraph, edges: &[usize]) -> bool {
    let mut uf = crate::marked_graph::UnionFind::new(g.num_vertices());
    let mut comps = 0usize;
    let mut seen = vec![false; g.num_vertices()];
    for &e in edges {
        for v in [g.edges()[e].from, g.edges()[e].to] {
            if !seen[v] {
                seen[v] = true;
                comps += 1;
            }
        }
        if uf.union(g.edges()[e].from, g.edges()[e].to) {
            comps -= 1;
        }
    }
    comps == 1
}

/// Betti number of the subgraph spanned by `edges`, assumed connected.
fn subgraph_rank(g: &MarkedGraph, edges: &[usize]) -> usize {
    let vs: BTreeSet<usize> = edges.iter().flat_map(|&e| [g.edges()[e].from, g.edges()[e].to]).collect();
    edges.len() + 1 - vs.len()
}

/// Edge sets of the proper connected noncontractible subgraphs.
pub fn proper_subgraphs(g: &MarkedGraph) -> Result<Vec<Vec<usize>>> {
    let m = g.num_edges();
    if m > SUBSET_EDGE_LIMIT {
        return Err(OskError::Budget(format!("{m} edges exceed the subgraph enumeration limit")));
    }
    let mut out = Vec::new();
    for mask in 1u32..(1u32 << m) - 1 {
        let edges: Vec<usize> = (0..m).filter(|&e| mask >> e & 1 == 1).collect();
        if is_connected(g, &edges) {
            let r = subgraph_rank(g, &edges);
            if r >= 1 && r < g.rank() {
                out.push(edges);
            }
        }
    }
    Ok(out)
}

/// The coarse projection of a marked graph: factors of its proper connected
/// noncontractible subgraphs, deduplicated.
pub fn project(g: &MarkedGraph) -> Result<BTreeSet<FreeFactor>> {
    proper_subgraphs(g)?.iter().map(|s| subgraph_factor(g, s)).collect()
}

/// Complement of one nonseparating edge outside `p`, outside `other` too when possible.
fn enlarge(g: &MarkedGraph, p: &[usize], other: &[usize]) -> Result<(usize, Vec<usize>)> {
    let ok = |e: &usize| !p.contains(e) && g.is_nonseparating(*e);
    let e = (0..g.num_edges())
        .find(|e| ok(e) && !other.contains(e))
        .or_else(|| (0..g.num_edges()).find(ok))
        .ok_or_else(|| OskError::Input("subgraph is not proper".into()))?;
    Ok((e, (0..g.num_edges()).filter(|&f| f != e).collect()))
}

/// A path of length at most 4 from `ff P` to `ff Q`: enlarge both to the complement of a
/// nonseparating edge and pass through a circle avoiding both removed edges.
pub fn subgraph_chain(g: &MarkedGraph, p: &[usize], q: &[usize]) -> Result<FactorPath> {
    if g.rank() < 3 {
        return Err(OskError::Rank { expected: "≥ 3 (use the Farey distance at rank 2)".into(), actual: g.rank() });
    }
    let (fp, fq) = (subgraph_factor(g, p)?, subgraph_factor(g, q)?);
    if fp == fq {
        return Ok(FactorPath::at(fp));
    }
    let (e, p1) = enlarge(g, p, q)?;
    let (f, q1) = enlarge(g, q, p)?;
    let keep: Vec<usize> = (0..g.num_edges()).filter(|&x| x != e && x != f).collect();
    let es: Vec<_> = keep.iter().map(|&x| (g.edges()[x].from, g.edges()[x].to, qi(1))).collect();
    let (_, cyc) = shortest_cycle(g.num_vertices(), &es)
        .ok_or_else(|| OskError::InvalidGraph("no circle avoids two edges".into()))?;
    let circle: Vec<usize> = cyc.iter().map(|&d| keep[edge_of(d)]).collect();
    let chain = vec![fp, subgraph_factor(g, &p1)?, subgraph_factor(g, &circle)?, subgraph_factor(g, &q1)?, fq];
    FactorPath::through(chain)?.shortcut()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::qi;

    fn set(fs: &[&str], n: usize) -> BTreeSet<FreeFactor> {
        fs.iter().map(|s| FreeFactor::parse(s, n).unwrap()).collect()
    }

    #[test]
    fn projection_examples() {
        let rose2 = MarkedGraph::rose(&[qi(1), qi(1)]).unwrap();
        assert_eq!(project(&rose2).unwrap(), set(&["a", "b"], 2));
        let rose3 = MarkedGraph::rose(&[qi(1), qi(1), qi(1)]).unwrap();
        assert_eq!(project(&rose3).unwrap(), set(&["a", "b", "c", "a,b", "a,c", "b,c"], 3));
        let theta = MarkedGraph::theta([qi(1), qi(1), qi(1)]).unwrap();
        let p = project(&theta).unwrap();
        assert_eq!(p.len(), 3);
        // each factor is the circle through two of the three edges
        for pair in [[0, 1], [0, 2], [1, 2]] {
            assert!(p.contains(&subgraph_factor(&theta, &pair).unwrap()));
        }
    }

    #[test]
    fn chain_examples() {
        let rose3 = MarkedGraph::rose(&[qi(1), qi(1), qi(1)]).unwrap();
        assert_eq!(subgraph_chain(&rose3, &[0], &[0]).unwrap().len(), 0);
        assert_eq!(subgraph_chain(&rose3, &[0], &[0, 1]).unwrap().len(), 1);
        let c = subgraph_chain(&rose3, &[0], &[1]).unwrap();
        assert_eq!(c.len(), 2);
        c.verify().unwrap();
        assert!(subgraph_chain(&MarkedGraph::rose(&[qi(1), qi(1)]).unwrap(), &[0], &[1]).is_err());
    }
}
