use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Edge, GraphError, OrderedSemanticGraph, PromptTemplate};
use crate::masking::{SemanticClass, CLASS_COUNT};

const VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GraphFile {
    version: u32,
    classes: Vec<ClassEntry>,
    edges: Vec<EdgeEntry>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ClassEntry {
    id: usize,
    name: String,
    prompts: Vec<PromptTemplate>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EdgeEntry {
    from: usize,
    to: usize,
    weight: f64,
    count: usize,
}

impl OrderedSemanticGraph {
    /// Canonical JSON: classes by id, edges by `(from, to)`.
    pub fn to_json(&self) -> String {
        let file = GraphFile {
            version: VERSION,
            classes: SemanticClass::ALL
                .iter()
                .map(|&c| ClassEntry {
                    id: c.id(),
                    name: c.name().to_string(),
                    prompts: self.prompts(c).to_vec(),
                })
                .collect(),
            edges: self
                .edges()
                .iter()
                .map(|e| EdgeEntry {
                    from: e.from.id(),
                    to: e.to.id(),
                    weight: e.weight,
                    count: e.count,
                })
                .collect(),
        };
        let mut s = serde_json::to_string_pretty(&file).expect("graph serializes");
        s.push('\n');
        s
    }

    pub fn from_json(s: &str) -> Result<Self, GraphError> {
        let file: GraphFile = serde_json::from_str(s)?;
        if file.version != VERSION {
            return Err(GraphError::Schema(format!(
                "unsupported version {}",
                file.version
            )));
        }
        if file.classes.len() != CLASS_COUNT {
            return Err(GraphError::Schema(format!(
                "expected {CLASS_COUNT} classes, found {}",
                file.classes.len()
            )));
        }
        let mut prompts: [Option<Vec<PromptTemplate>>; CLASS_COUNT] = Default::default();
        for entry in file.classes {
            let class = class_of(entry.id)?;
            if entry.name != class.name() {
                return Err(GraphError::Schema(format!(
                    "class {} is named {:?}, expected {:?}",
                    entry.id,
                    entry.name,
                    class.name()
                )));
            }
            if prompts[entry.id].replace(entry.prompts).is_some() {
                return Err(GraphError::Schema(format!("class {} listed twice", entry.id)));
            }
        }
        let prompts = prompts.map(|p| p.expect("all nine ids seen"));
        let edges = file
            .edges
            .into_iter()
            .map(|e| {
                Ok(Edge {
                    from: class_of(e.from)?,
                    to: class_of(e.to)?,
                    weight: e.weight,
                    count: e.count,
                })
            })
            .collect::<Result<Vec<_>, GraphError>>()?;
        OrderedSemanticGraph::new(prompts, edges)
    }
}

fn class_of(id: usize) -> Result<SemanticClass, GraphError> {
    SemanticClass::from_id(id).map_err(|_| GraphError::Schema(format!("unknown class id {id}")))
}

pub fn save_graph(g: &OrderedSemanticGraph, path: impl AsRef<Path>) -> Result<(), GraphError> {
    let path = path.as_ref();
    std::fs::write(path, g.to_json()).map_err(|source| GraphError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn load_graph(path: impl AsRef<Path>) -> Result<OrderedSemanticGraph, GraphError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| GraphError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    OrderedSemanticGraph::from_json(&text)
}
