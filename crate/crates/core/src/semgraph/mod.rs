//! The ordered semantic graph.
//!
//! Vertices are the nine semantic classes, each carrying a set of prompt
//! templates. A directed edge `a -> b` with weight `w` records that class `a`
//! is on average `w` brighter (albedo-compensated mean luminance) than class
//! `b` across a reference HDR dataset. The graph is kept acyclic, and its
//! edges decide which clipped class gets inpainted first.

mod build;
mod json;
mod order;
mod potential;
mod prompt;

use std::collections::BTreeSet;
use std::path::PathBuf;

pub use self::build::{build_graph, GraphBuilder};
pub use self::json::{load_graph, save_graph};
pub use self::order::inpaint_order;
pub use self::potential::{image_graph, vertex_potential, AlbedoTable, PairDifference, VertexPotential};
pub use self::prompt::{sample_prompt, PromptConfig, PromptTemplate, WILDCARD};

use crate::masking::{SemanticClass, CLASS_COUNT};

#[derive(Debug, thiserror::Error)]
pub enum GraphError {
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("no prompts configured for class {0}, which occurs in the dataset")]
    MissingPrompts(SemanticClass),
    #[error("class {0} has no prompts to sample from")]
    EmptyPromptSet(SemanticClass),
    #[error("invalid prompt template {0:?}: {1}")]
    InvalidPrompt(String, &'static str),
    #[error("invalid albedo {value} for {class}; expected (0, 1]")]
    InvalidAlbedo { class: SemanticClass, value: f64 },
    #[error("graph schema violation: {0}")]
    Schema(String),
    #[error("graph contains a cycle through {0:?}")]
    Cycle(Vec<SemanticClass>),
    #[error("dimension mismatch between radiance map {image:?} and labeling {labels:?}")]
    DimensionMismatch {
        image: (usize, usize),
        labels: (usize, usize),
    },
    #[error("JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    pub from: SemanticClass,
    pub to: SemanticClass,
    pub weight: f64,
    /// Number of dataset images that contributed to this edge.
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrderedSemanticGraph {
    prompts: [Vec<PromptTemplate>; CLASS_COUNT],
    edges: Vec<Edge>,
}

impl OrderedSemanticGraph {
    /// Validates edges (positive finite weight, non-zero count, one edge per
    /// unordered pair, no cycles) and stores them sorted by `(from, to)`.
    pub fn new(
        prompts: [Vec<PromptTemplate>; CLASS_COUNT],
        mut edges: Vec<Edge>,
    ) -> Result<Self, GraphError> {
        let mut pairs = BTreeSet::new();
        for e in &edges {
            if !(e.weight.is_finite() && e.weight > 0.0) {
                return Err(GraphError::Schema(format!(
                    "edge {} -> {} has non-positive weight {}",
                    e.from, e.to, e.weight
                )));
            }
            if e.count == 0 {
                return Err(GraphError::Schema(format!(
                    "edge {} -> {} has zero sample count",
                    e.from, e.to
                )));
            }
            if e.from == e.to {
                return Err(GraphError::Schema(format!("self loop on {}", e.from)));
            }
            if !pairs.insert((e.from.min(e.to), e.from.max(e.to))) {
                return Err(GraphError::Schema(format!(
                    "duplicate edge between {} and {}",
                    e.from, e.to
                )));
            }
        }
        if let Some(cycle) = find_cycle(&edges) {
            return Err(GraphError::Cycle(cycle));
        }
        edges.sort_by_key(|e| (e.from, e.to));
        Ok(OrderedSemanticGraph { prompts, edges })
    }

    /// Graph without edges; every class keeps its configured prompts.
    pub fn unconnected(prompts: &PromptConfig) -> Self {
        OrderedSemanticGraph {
            prompts: prompts.to_array(),
            edges: Vec::new(),
        }
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn prompts(&self, class: SemanticClass) -> &[PromptTemplate] {
        &self.prompts[class.id()]
    }

    /// Weight of the edge `from -> to`, if present.
    pub fn weight(&self, from: SemanticClass, to: SemanticClass) -> Option<f64> {
        self.edges
            .iter()
            .find(|e| e.from == from && e.to == to)
            .map(|e| e.weight)
    }
}

/// Returns the classes along some directed cycle, or `None` for a DAG.
pub(crate) fn find_cycle(edges: &[Edge]) -> Option<Vec<SemanticClass>> {
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        New,
        Active,
        Done,
    }
    fn visit(
        v: usize,
        adj: &[Vec<usize>],
        mark: &mut [Mark],
        stack: &mut Vec<usize>,
    ) -> Option<Vec<usize>> {
        mark[v] = Mark::Active;
        stack.push(v);
        for &u in &adj[v] {
            match mark[u] {
                Mark::Active => {
                    let start = stack.iter().position(|&s| s == u).unwrap();
                    return Some(stack[start..].to_vec());
                }
                Mark::New => {
                    if let Some(c) = visit(u, adj, mark, stack) {
                        return Some(c);
                    }
                }
                Mark::Done => {}
            }
        }
        stack.pop();
        mark[v] = Mark::Done;
        None
    }

    let mut adj = vec![Vec::new(); CLASS_COUNT];
    for e in edges {
        adj[e.from.id()].push(e.to.id());
    }
    let mut mark = [Mark::New; CLASS_COUNT];
    for v in 0..CLASS_COUNT {
        if mark[v] == Mark::New {
            let mut stack = Vec::new();
            if let Some(c) = visit(v, &adj, &mut mark, &mut stack) {
                return Some(c.into_iter().map(|i| SemanticClass::ALL[i]).collect());
            }
        }
    }
    None
}
