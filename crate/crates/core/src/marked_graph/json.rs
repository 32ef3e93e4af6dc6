use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use super::{dir, signed_id, Edge, MarkedGraph};
use crate::error::{OskError, Result};
use crate::free_group::{letter_char, parse_letter};
use crate::rational::{serde_q, Q};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum VertexId {
    Int(i64),
    Name(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeJson {
    pub id: i64,
    pub from: VertexId,
    pub to: VertexId,
    #[serde(with = "serde_q")]
    pub length: Q,
}

/// Interchange form: `{rank, vertices, edges: [{id, from, to, length}], marking: {a: [signed ids]}}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphJson {
    pub rank: usize,
    pub vertices: Vec<VertexId>,
    pub edges: Vec<EdgeJson>,
    pub marking: BTreeMap<String, Vec<i64>>,
}

impl GraphJson {
    pub fn from_graph(g: &MarkedGraph) -> Self {
        let vertices = (0..g.num_vertices()).map(|v| VertexId::Int(v as i64)).collect();
        let edges = g
            .edges()
            .iter()
            .enumerate()
            .map(|(i, e)| EdgeJson {
                id: i as i64 + 1,
                from: VertexId::Int(e.from as i64),
                to: VertexId::Int(e.to as i64),
                length: e.length.clone(),
            })
            .collect();
        let marking = g
            .marking()
            .iter()
            .enumerate()
            .map(|(i, p)| (letter_char(i as i32 + 1).to_string(), p.iter().map(|&d| signed_id(d)).collect()))
            .collect();
        GraphJson { rank: g.rank(), vertices, edges, marking }
    }

    pub fn to_graph(&self) -> Result<MarkedGraph> {
        let vindex: HashMap<String, usize> = self
            .vertices
            .iter()
            .enumerate()
            .map(|(i, v)| (vertex_key(v), i))
            .collect();
        if vindex.len() != self.vertices.len() {
            return Err(OskError::InvalidGraph("duplicate vertex id".into()));
        }
        let lookup = |v: &VertexId| {
            vindex
                .get(&vertex_key(v))
                .copied()
                .ok_or_else(|| OskError::InvalidGraph(format!("unknown vertex {}", vertex_key(v))))
        };
        let mut eindex: HashMap<i64, usize> = HashMap::new();
        let mut edges = Vec::new();
        for (i, e) in self.edges.iter().enumerate() {
            if e.id <= 0 || eindex.insert(e.id, i).is_some() {
                return Err(OskError::InvalidGraph(format!("edge id {} must be positive and unique", e.id)));
            }
            edges.push(Edge { from: lookup(&e.from)?, to: lookup(&e.to)?, length: e.length.clone() });
        }
        if self.marking.len() != self.rank {
            return Err(OskError::Rank { expected: format!("{}", self.rank), actual: self.marking.len() });
        }
        let mut marking = vec![Vec::new(); self.rank];
        for (name, path) in &self.marking {
            let mut cs = name.chars();
            let l = match (cs.next(), cs.next()) {
                (Some(c), None) if c.is_ascii_lowercase() => parse_letter(c)?,
                _ => return Err(OskError::Input(format!("bad marking key {name:?}"))),
            };
            let idx = l as usize - 1;
            if idx >= self.rank {
                return Err(OskError::Input(format!("marking key {name:?} exceeds the rank")));
            }
            marking[idx] = path
                .iter()
                .map(|&s| {
                    eindex
                        .get(&s.abs())
                        .map(|&e| dir(e, s < 0))
                        .ok_or_else(|| OskError::InvalidGraph(format!("unknown edge id {s}")))
                })
                .collect::<Result<_>>()?;
        }
        MarkedGraph::new(self.vertices.len(), edges, marking)
    }
}

fn vertex_key(v: &VertexId) -> String {
    match v {
        VertexId::Int(i) => i.to_string(),
        VertexId::Name(s) => s.clone(),
    }
}
