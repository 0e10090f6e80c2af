use super::potential::{pair_differences, vertex_potential, AlbedoTable};
use super::{find_cycle, Edge, GraphError, OrderedSemanticGraph, PromptConfig};
use crate::imgcore::LinearImage;
use crate::masking::{SemanticClass, SemanticLabeling, CLASS_COUNT};

/// Streaming accumulator for dataset graph construction.
///
/// Signed differences are summed per unordered class pair over the images in
/// which both classes are present; the final edge weight is the magnitude of
/// their mean and its direction the sign.
#[derive(Debug, Clone)]
pub struct GraphBuilder {
    albedo: AlbedoTable,
    sum: [[f64; CLASS_COUNT]; CLASS_COUNT],
    count: [[usize; CLASS_COUNT]; CLASS_COUNT],
    seen: [bool; CLASS_COUNT],
    images: usize,
}

impl GraphBuilder {
    pub fn new(albedo: AlbedoTable) -> Self {
        GraphBuilder {
            albedo,
            sum: [[0.0; CLASS_COUNT]; CLASS_COUNT],
            count: [[0; CLASS_COUNT]; CLASS_COUNT],
            seen: [false; CLASS_COUNT],
            images: 0,
        }
    }

    pub fn add_image(
        &mut self,
        hdr: &LinearImage,
        labels: &SemanticLabeling,
    ) -> Result<(), GraphError> {
        let potentials = SemanticClass::ALL
            .iter()
            .map(|&c| vertex_potential(hdr, labels, &self.albedo, c))
            .collect::<Result<Vec<_>, _>>()?;
        for p in potentials.iter().filter(|p| p.is_present()) {
            self.seen[p.class.id()] = true;
        }
        for d in pair_differences(&potentials) {
            let (a, b) = (d.low.id(), d.high.id());
            self.sum[a][b] += d.diff;
            self.count[a][b] += 1;
        }
        self.images += 1;
        Ok(())
    }

    pub fn images(&self) -> usize {
        self.images
    }

    pub fn finish(&self, prompts: &PromptConfig) -> Result<OrderedSemanticGraph, GraphError> {
        if self.images == 0 {
            return Err(GraphError::EmptyDataset);
        }
        for class in SemanticClass::ALL {
            if self.seen[class.id()] && prompts.get(class).is_empty() {
                return Err(GraphError::MissingPrompts(class));
            }
        }
        let mut edges = Vec::new();
        for a in 0..CLASS_COUNT {
            for b in a + 1..CLASS_COUNT {
                let n = self.count[a][b];
                if n == 0 {
                    continue;
                }
                let mean = self.sum[a][b] / n as f64;
                if mean == 0.0 {
                    // cancelling or equal potentials carry no ordering information
                    continue;
                }
                let (from, to) = if mean > 0.0 { (a, b) } else { (b, a) };
                edges.push(Edge {
                    from: SemanticClass::ALL[from],
                    to: SemanticClass::ALL[to],
                    weight: mean.abs(),
                    count: n,
                });
            }
        }
        break_cycles(&mut edges);
        OrderedSemanticGraph::new(prompts.to_array(), edges)
    }
}

/// Means over differing image subsets can disagree around a loop; drop the
/// weakest edge of each cycle until the graph is acyclic.
fn break_cycles(edges: &mut Vec<Edge>) {
    while let Some(cycle) = find_cycle(edges) {
        let on_cycle = |e: &Edge| {
            cycle
                .iter()
                .zip(cycle.iter().cycle().skip(1))
                .any(|(&f, &t)| e.from == f && e.to == t)
        };
        let weakest = edges
            .iter()
            .enumerate()
            .filter(|(_, e)| on_cycle(e))
            .min_by(|(_, a), (_, b)| {
                a.weight
                    .total_cmp(&b.weight)
                    .then((a.from, a.to).cmp(&(b.from, b.to)))
            })
            .map(|(i, _)| i)
            .expect("cycle has edges");
        let e = edges.remove(weakest);
        log::warn!(
            "dropping edge {} -> {} (weight {}) to break a cycle",
            e.from,
            e.to,
            e.weight
        );
    }
}

/// Builds the graph from `(radiance map, labeling)` pairs.
pub fn build_graph<'a>(
    dataset: impl IntoIterator<Item = (&'a LinearImage, &'a SemanticLabeling)>,
    albedo: &AlbedoTable,
    prompts: &PromptConfig,
) -> Result<OrderedSemanticGraph, GraphError> {
    let mut builder = GraphBuilder::new(*albedo);
    for (hdr, labels) in dataset {
        builder.add_image(hdr, labels)?;
    }
    builder.finish(prompts)
}
