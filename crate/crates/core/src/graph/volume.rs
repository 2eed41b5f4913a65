use super::WeightedGraph;
use crate::error::{invalid, Result};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Free,
    Wired,
}

/// Description of the infinite model a volume truncates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Parent {
    pub family: String,
    pub params: Vec<(String, String)>,
    pub radius: usize,
}

impl Parent {
    pub fn new(family: &str, params: &[(&str, String)], radius: usize) -> Self {
        Parent {
            family: family.to_string(),
            params: params.iter().map(|(k, v)| (k.to_string(), v.clone())).collect(),
            radius,
        }
    }

    pub fn describe(&self) -> String {
        let p: Vec<String> = self.params.iter().map(|(k, v)| format!("{k}={v}")).collect();
        format!("{}[{}] r={}", self.family, p.join(","), self.radius)
    }
}

/// A finite truncation of an infinite graph with free or wired boundary.
#[derive(Clone, Debug, PartialEq)]
pub struct FiniteVolume {
    pub graph: WeightedGraph,
    pub mode: Mode,
    pub parent: Parent,
    /// Distinguished centre vertex of the truncation.
    pub origin: usize,
}

impl FiniteVolume {
    pub fn new(graph: WeightedGraph, mode: Mode, parent: Parent, origin: usize) -> Result<Self> {
        match (mode, graph.boundary()) {
            (Mode::Wired, None) => return invalid("wired volume needs a boundary vertex"),
            (Mode::Free, Some(_)) => return invalid("free volume must not carry a boundary vertex"),
            _ => {}
        }
        if origin >= graph.vertex_count() || Some(origin) == graph.boundary() {
            return invalid("origin must be an interior vertex");
        }
        Ok(FiniteVolume { graph, mode, parent, origin })
    }

    /// Wraps a plain graph; wired iff it has a boundary vertex.
    pub fn from_graph(graph: WeightedGraph, family: &str, origin: usize) -> Result<Self> {
        let mode = if graph.boundary().is_some() { Mode::Wired } else { Mode::Free };
        FiniteVolume::new(graph, mode, Parent::new(family, &[], 0), origin)
    }

    pub fn interior_vertices(&self) -> impl Iterator<Item = usize> + '_ {
        let b = self.graph.boundary();
        (0..self.graph.vertex_count()).filter(move |&v| Some(v) != b)
    }
}
