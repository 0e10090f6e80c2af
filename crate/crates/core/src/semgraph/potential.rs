use std::collections::BTreeMap;
use std::path::Path;

use serde::Serialize;

use super::GraphError;
use crate::imgcore::{luminance, LinearImage};
use crate::masking::{SemanticClass, SemanticLabeling, CLASS_COUNT};

/// Per-class albedo used to compensate luminance. Defaults to 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlbedoTable([f64; CLASS_COUNT]);

impl Default for AlbedoTable {
    fn default() -> Self {
        AlbedoTable([1.0; CLASS_COUNT])
    }
}

impl AlbedoTable {
    pub fn new(values: [f64; CLASS_COUNT]) -> Result<Self, GraphError> {
        for class in SemanticClass::ALL {
            let value = values[class.id()];
            if !(value > 0.0 && value <= 1.0) {
                return Err(GraphError::InvalidAlbedo { class, value });
            }
        }
        Ok(AlbedoTable(values))
    }

    pub fn get(&self, class: SemanticClass) -> f64 {
        self.0[class.id()]
    }

    /// Parses `{"sky": 0.9, ...}`; unlisted classes keep albedo 1.
    pub fn from_json(s: &str) -> Result<Self, GraphError> {
        let map: BTreeMap<SemanticClass, f64> = serde_json::from_str(s)?;
        let mut values = [1.0; CLASS_COUNT];
        for (class, v) in map {
            values[class.id()] = v;
        }
        Self::new(values)
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self, GraphError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| GraphError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json(&text)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VertexPotential {
    pub class: SemanticClass,
    /// Label-weighted mean of albedo-scaled luminance; 0 when absent.
    pub value: f64,
    pub weight_sum: f64,
}

impl VertexPotential {
    pub fn is_present(&self) -> bool {
        self.value > 0.0
    }
}

/// `sum_x w(x) a L(x) / sum_x w(x)` for one class of one radiance map.
pub fn vertex_potential(
    hdr: &LinearImage,
    labels: &SemanticLabeling,
    albedo: &AlbedoTable,
    class: SemanticClass,
) -> Result<VertexPotential, GraphError> {
    if hdr.dimensions() != labels.dimensions() {
        return Err(GraphError::DimensionMismatch {
            image: hdr.dimensions(),
            labels: labels.dimensions(),
        });
    }
    let k = class.id();
    let (mut num, mut den) = (0.0f64, 0.0f64);
    for (px, w) in hdr.pixels().iter().zip(labels.weights()) {
        let wi = w[k] as f64;
        if wi > 0.0 {
            num += wi * luminance(*px);
            den += wi;
        }
    }
    let value = if den > 0.0 {
        albedo.get(class) * num / den
    } else {
        0.0
    };
    Ok(VertexPotential {
        class,
        value,
        weight_sum: den,
    })
}

/// Signed potential difference between two present classes, `low < high` by id.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairDifference {
    pub low: SemanticClass,
    pub high: SemanticClass,
    /// `V_low - V_high`.
    pub diff: f64,
}

impl PairDifference {
    /// `(from, to, weight)` pointing from the brighter class; equal
    /// potentials point from the lower class id.
    pub fn oriented(&self) -> (SemanticClass, SemanticClass, f64) {
        if self.diff >= 0.0 {
            (self.low, self.high, self.diff)
        } else {
            (self.high, self.low, -self.diff)
        }
    }
}

/// Pairwise differences between all classes with non-zero potential.
pub fn image_graph(
    hdr: &LinearImage,
    labels: &SemanticLabeling,
    albedo: &AlbedoTable,
) -> Result<Vec<PairDifference>, GraphError> {
    let potentials = SemanticClass::ALL
        .iter()
        .map(|&c| vertex_potential(hdr, labels, albedo, c))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(pair_differences(&potentials))
}

pub(crate) fn pair_differences(potentials: &[VertexPotential]) -> Vec<PairDifference> {
    let present: Vec<&VertexPotential> = potentials.iter().filter(|p| p.is_present()).collect();
    let mut out = Vec::new();
    for (i, a) in present.iter().enumerate() {
        for b in &present[i + 1..] {
            out.push(PairDifference {
                low: a.class,
                high: b.class,
                diff: a.value - b.value,
            });
        }
    }
    out
}
