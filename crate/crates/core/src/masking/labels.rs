use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{BinaryMask, MaskError};
use crate::imgcore::{decode_gray8_png, encode_gray8_png, ImageError};

pub const CLASS_COUNT: usize = 9;

/// The nine coarse semantic classes, in their fixed index order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SemanticClass {
    Sky,
    Ground,
    Vegetation,
    Water,
    HumanSubject,
    NonHumanSubject,
    Cityscape,
    Indoor,
    Others,
}

impl SemanticClass {
    pub const ALL: [SemanticClass; CLASS_COUNT] = [
        SemanticClass::Sky,
        SemanticClass::Ground,
        SemanticClass::Vegetation,
        SemanticClass::Water,
        SemanticClass::HumanSubject,
        SemanticClass::NonHumanSubject,
        SemanticClass::Cityscape,
        SemanticClass::Indoor,
        SemanticClass::Others,
    ];

    pub fn id(self) -> usize {
        self as usize
    }

    pub fn from_id(id: usize) -> Result<Self, MaskError> {
        Self::ALL
            .get(id)
            .copied()
            .ok_or(MaskError::ClassOutOfRange(id))
    }

    pub fn name(self) -> &'static str {
        match self {
            SemanticClass::Sky => "sky",
            SemanticClass::Ground => "ground",
            SemanticClass::Vegetation => "vegetation",
            SemanticClass::Water => "water",
            SemanticClass::HumanSubject => "human-subject",
            SemanticClass::NonHumanSubject => "non-human-subject",
            SemanticClass::Cityscape => "cityscape",
            SemanticClass::Indoor => "indoor",
            SemanticClass::Others => "others",
        }
    }
}

impl fmt::Display for SemanticClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SemanticClass {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .iter()
            .copied()
            .find(|c| c.name() == s)
            .ok_or_else(|| format!("unknown semantic class {s:?}"))
    }
}

/// Per-pixel soft membership over the nine classes.
#[derive(Debug, Clone, PartialEq)]
pub struct SemanticLabeling {
    width: usize,
    height: usize,
    weights: Vec<[f32; CLASS_COUNT]>,
}

impl SemanticLabeling {
    pub fn new(
        width: usize,
        height: usize,
        weights: Vec<[f32; CLASS_COUNT]>,
    ) -> Result<Self, MaskError> {
        if width == 0 || height == 0 || width * height != weights.len() {
            return Err(MaskError::InvalidDimensions {
                width,
                height,
                len: weights.len(),
            });
        }
        for (index, w) in weights.iter().enumerate() {
            if let Some(&value) = w.iter().find(|v| !(0.0..=1.0).contains(*v)) {
                return Err(MaskError::InvalidWeight { index, value });
            }
        }
        Ok(SemanticLabeling {
            width,
            height,
            weights,
        })
    }

    /// Weight 1 for `class` everywhere.
    pub fn uniform(width: usize, height: usize, class: SemanticClass) -> Self {
        let mut w = [0.0; CLASS_COUNT];
        w[class.id()] = 1.0;
        SemanticLabeling {
            width,
            height,
            weights: vec![w; width * height],
        }
    }

    /// One-hot expansion of hard labels `0..=8`.
    pub fn from_hard_labels(width: usize, height: usize, labels: &[u8]) -> Result<Self, MaskError> {
        let mut weights = Vec::with_capacity(labels.len());
        for (index, &value) in labels.iter().enumerate() {
            if value as usize >= CLASS_COUNT {
                return Err(MaskError::InvalidLabel { index, value });
            }
            let mut w = [0.0; CLASS_COUNT];
            w[value as usize] = 1.0;
            weights.push(w);
        }
        Self::new(width, height, weights)
    }

    /// Arg-max labels; ties resolve to the lower class id.
    pub fn to_hard_labels(&self) -> Vec<u8> {
        self.weights
            .iter()
            .map(|w| {
                let mut best = 0;
                for (i, &v) in w.iter().enumerate() {
                    if v > w[best] {
                        best = i;
                    }
                }
                best as u8
            })
            .collect()
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dimensions(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn weights(&self) -> &[[f32; CLASS_COUNT]] {
        &self.weights
    }

    pub fn weight(&self, x: usize, y: usize, class: SemanticClass) -> f32 {
        self.weights[y * self.width + x][class.id()]
    }

    /// Decodes an 8-bit grayscale label map.
    pub fn from_label_png(bytes: &[u8]) -> Result<Self, MaskError> {
        let (w, h, values) = decode_gray8_png(bytes)?;
        Self::from_hard_labels(w, h, &values)
    }

    pub fn to_label_png(&self) -> Result<Vec<u8>, ImageError> {
        encode_gray8_png(self.width, self.height, &self.to_hard_labels())
    }

    pub fn read_label_png(path: impl AsRef<Path>) -> Result<Self, MaskError> {
        let path = path.as_ref();
        let bytes = std::fs::read(path).map_err(|e| ImageError::io(path, e))?;
        Self::from_label_png(&bytes)
    }
}

/// Pixels whose weight for `class_id` is at least `threshold`.
pub fn class_mask(
    labels: &SemanticLabeling,
    class_id: usize,
    threshold: f32,
) -> Result<BinaryMask, MaskError> {
    let class = SemanticClass::from_id(class_id)?;
    let bits = labels
        .weights
        .iter()
        .map(|w| w[class.id()] >= threshold)
        .collect();
    BinaryMask::from_bits(labels.width, labels.height, bits)
}
