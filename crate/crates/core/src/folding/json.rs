//! On-disk form of a folding path: its endpoints and the event table.
//!
//! Folding is deterministic, so loading re-folds from the endpoints and rejects the file
//! unless the recomputed events agree exactly with the stored ones.

use serde::{Deserialize, Serialize};

use super::{fold_path, FoldEvent, FoldingPath};
use crate::error::{OskError, Result};
use crate::marked_graph::GraphJson;
use crate::rational::Q;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventJson {
    #[serde(with = "crate::rational::serde_q")]
    pub start: Q,
    #[serde(with = "crate::rational::serde_q")]
    pub duration: Q,
    pub illegality: usize,
    #[serde(with = "crate::rational::serde_q")]
    pub volume: Q,
    /// Arclength at `start`, informational.
    pub arclength: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathJson {
    pub from: GraphJson,
    pub to: GraphJson,
    #[serde(with = "crate::rational::serde_q")]
    pub omega: Q,
    /// Total arclength, informational.
    pub length: f64,
    pub events: Vec<EventJson>,
}

impl PathJson {
    pub fn new(from: &crate::marked_graph::MarkedGraph, to: &crate::marked_graph::MarkedGraph, path: &FoldingPath) -> Result<Self> {
        let events = path
            .events()
            .iter()
            .map(|e| {
                Ok(EventJson {
                    start: e.start.clone(),
                    duration: e.duration.clone(),
                    illegality: e.illegality,
                    volume: e.volume.clone(),
                    arclength: path.arclength_of(&e.start)?,
                })
            })
            .collect::<Result<_>>()?;
        Ok(PathJson { from: from.to_json(), to: to.to_json(), omega: path.omega(), length: path.length(), events })
    }

    /// Re-folds the endpoints and checks the stored events.
    pub fn load(&self) -> Result<FoldingPath> {
        let path = fold_path(&self.from.to_graph()?, &self.to.to_graph()?)?;
        let stored: Vec<FoldEvent> = self
            .events
            .iter()
            .map(|e| FoldEvent {
                start: e.start.clone(),
                duration: e.duration.clone(),
                illegality: e.illegality,
                volume: e.volume.clone(),
            })
            .collect();
        if stored != path.events() || self.omega != path.omega() {
            return Err(OskError::Input("stored events do not match the recomputed path".into()));
        }
        Ok(path)
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| OskError::Input(e.to_string()))
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("path json serializes")
    }
}
