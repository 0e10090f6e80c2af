use std::fs;
use std::path::{Path, PathBuf};

use super::{AtStage, PipelineError, Stage};
use crate::imgcore::read_hdr;
use crate::masking::SemanticLabeling;
use crate::semgraph::{save_graph, AlbedoTable, Edge, GraphBuilder, PromptConfig};

#[derive(Debug, Clone)]
pub struct GraphBuildReport {
    pub used: Vec<PathBuf>,
    /// Entries that could not be read, with the reason.
    pub skipped: Vec<(PathBuf, String)>,
    pub edges: Vec<Edge>,
}

fn is_hdr(p: &Path) -> bool {
    p.extension().is_some_and(|e| e.eq_ignore_ascii_case("hdr"))
}

/// Builds the ordering graph from every `.hdr` in `dataset` (sorted by name)
/// with its `<stem>.labels.png` sidecar and writes it to `out`.
pub fn graph_build(
    dataset: &Path,
    albedo: Option<&Path>,
    prompts: Option<&Path>,
    out: &Path,
) -> Result<GraphBuildReport, PipelineError> {
    let albedo = match albedo {
        Some(p) => AlbedoTable::read(p).at(Stage::Config)?,
        None => AlbedoTable::default(),
    };
    let prompts = match prompts {
        Some(p) => PromptConfig::read(p).at(Stage::Config)?,
        None => PromptConfig::builtin(),
    };
    let entries = fs::read_dir(dataset).map_err(|e| PipelineError::io(Stage::Dataset, dataset, e))?;
    let mut files: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && is_hdr(p))
        .collect();
    files.sort();

    let mut builder = GraphBuilder::new(albedo);
    let mut used = Vec::new();
    let mut skipped = Vec::new();
    for path in files {
        let result = (|| -> Result<(), String> {
            let hdr = read_hdr(&path).map_err(|e| e.to_string())?;
            let labels = SemanticLabeling::read_label_png(super::sidecar_path(&path))
                .map_err(|e| format!("labels: {e}"))?;
            builder.add_image(&hdr, &labels).map_err(|e| e.to_string())
        })();
        match result {
            Ok(()) => used.push(path),
            Err(reason) => {
                log::warn!("skipping {}: {reason}", path.display());
                skipped.push((path, reason));
            }
        }
    }
    let graph = builder.finish(&prompts).at(Stage::Dataset)?;
    save_graph(&graph, out).at(Stage::Output)?;
    Ok(GraphBuildReport {
        used,
        skipped,
        edges: graph.edges().to_vec(),
    })
}
