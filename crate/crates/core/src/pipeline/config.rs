use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::PipelineError;
use crate::exposure::{StackSettings, DEFAULT_MERGE_TOLERANCE, DEFAULT_PERCENTILE};
use crate::imgcore::ResponseCurve;
use crate::inpaint::{Backend, HttpBackend, MockBackend, DEFAULT_RHO_MIN};
use crate::masking::{SemanticClass, DEFAULT_CLASS_THRESHOLD, DEFAULT_SAT_THRESHOLD, MAX_RADIUS, MIN_RADIUS};
use crate::merge::WeightFunction;
use crate::semgraph::PromptTemplate;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OpeningParams {
    pub alpha: u32,
    pub beta: u32,
}

/// Opening radii for a class whose clipped region borders the other class.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairOpening {
    pub classes: [SemanticClass; 2],
    pub alpha: u32,
    pub beta: u32,
}

/// Erosion/dilation radii per class. High-frequency boundaries (foliage
/// against sky, skylines) need a much stronger erosion than dilation so the
/// backend does not hallucinate into the fine structure.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OpeningTable {
    pub default: OpeningParams,
    pub pairs: Vec<PairOpening>,
    /// Overrides every table entry when set.
    pub alpha: Option<u32>,
    pub beta: Option<u32>,
}

impl Default for OpeningTable {
    fn default() -> Self {
        use SemanticClass::*;
        let pair = |a, b| PairOpening {
            classes: [a, b],
            alpha: 10,
            beta: 5,
        };
        OpeningTable {
            default: OpeningParams { alpha: 3, beta: 2 },
            pairs: vec![pair(Sky, Vegetation), pair(Sky, Ground), pair(Cityscape, Vegetation)],
            alpha: None,
            beta: None,
        }
    }
}

impl OpeningTable {
    /// First pair entry linking `class` to one of `neighbors`, else the default.
    pub fn select(&self, class: SemanticClass, neighbors: &BTreeSet<SemanticClass>) -> OpeningParams {
        let base = self
            .pairs
            .iter()
            .find(|p| {
                let [a, b] = p.classes;
                (a == class && neighbors.contains(&b)) || (b == class && neighbors.contains(&a))
            })
            .map(|p| OpeningParams {
                alpha: p.alpha,
                beta: p.beta,
            })
            .unwrap_or(self.default);
        OpeningParams {
            alpha: self.alpha.unwrap_or(base.alpha),
            beta: self.beta.unwrap_or(base.beta),
        }
    }

    fn validate(&self) -> Result<(), String> {
        let check = |name: &str, v: u32| {
            if (MIN_RADIUS..=MAX_RADIUS).contains(&v) {
                Ok(())
            } else {
                Err(format!("{name} = {v} outside [{MIN_RADIUS}, {MAX_RADIUS}]"))
            }
        };
        check("alpha", self.default.alpha)?;
        check("beta", self.default.beta)?;
        for p in &self.pairs {
            check("alpha", p.alpha)?;
            check("beta", p.beta)?;
        }
        if let Some(a) = self.alpha {
            check("alpha", a)?;
        }
        if let Some(b) = self.beta {
            check("beta", b)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum BackendConfig {
    Mock {
        #[serde(default = "default_rho_min")]
        rho_min: f32,
    },
    Http {
        url: String,
        #[serde(default = "default_timeout_secs")]
        timeout_secs: u64,
        #[serde(default)]
        retries: u32,
    },
}

fn default_rho_min() -> f32 {
    DEFAULT_RHO_MIN
}

fn default_timeout_secs() -> u64 {
    120
}

impl Default for BackendConfig {
    fn default() -> Self {
        BackendConfig::Mock {
            rho_min: DEFAULT_RHO_MIN,
        }
    }
}

impl BackendConfig {
    pub fn http(url: impl Into<String>) -> Self {
        BackendConfig::Http {
            url: url.into(),
            timeout_secs: default_timeout_secs(),
            retries: 0,
        }
    }
}

/// Everything that determines a run, given fixed backend behaviour.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub sat_threshold: f32,
    pub class_threshold: f32,
    pub opening: OpeningTable,
    /// Feather radius of the mask refinement (kept for debug output).
    pub refine_radius: u32,
    /// Feather radius of the compositing guide.
    pub guide_radius: u32,
    pub exposure_percentile: f64,
    pub merge_tolerance: f64,
    /// Classes with fewer clipped pixels after opening are left alone.
    pub min_region_pixels: usize,
    pub crf: ResponseCurve,
    pub weight: WeightFunction,
    pub backend: BackendConfig,
    pub seed: u64,
    pub prompt_overrides: BTreeMap<SemanticClass, String>,
    pub graph: Option<PathBuf>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            sat_threshold: DEFAULT_SAT_THRESHOLD,
            class_threshold: DEFAULT_CLASS_THRESHOLD,
            opening: OpeningTable::default(),
            refine_radius: 2,
            guide_radius: 10,
            exposure_percentile: DEFAULT_PERCENTILE,
            merge_tolerance: DEFAULT_MERGE_TOLERANCE,
            min_region_pixels: 16,
            crf: ResponseCurve::default(),
            weight: WeightFunction::default(),
            backend: BackendConfig::default(),
            seed: 0,
            prompt_overrides: BTreeMap::new(),
            graph: None,
        }
    }
}

impl PipelineConfig {
    pub fn from_json(s: &str) -> Result<Self, PipelineError> {
        let cfg: PipelineConfig =
            serde_json::from_str(s).map_err(|e| PipelineError::config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), PipelineError> {
        let open_unit = |name: &str, v: f64| {
            if v > 0.0 && v < 1.0 {
                Ok(())
            } else {
                Err(format!("{name} = {v} outside (0, 1)"))
            }
        };
        let result = (|| -> Result<(), String> {
            open_unit("sat_threshold", self.sat_threshold as f64)?;
            open_unit("class_threshold", self.class_threshold as f64)?;
            self.opening.validate()?;
            if self.refine_radius < 1 || self.guide_radius < 1 {
                return Err("feather radii must be at least 1".into());
            }
            if !(self.exposure_percentile > 0.0 && self.exposure_percentile <= 1.0) {
                return Err(format!(
                    "exposure_percentile = {} outside (0, 1]",
                    self.exposure_percentile
                ));
            }
            if !(self.merge_tolerance >= 0.0 && self.merge_tolerance < 1.0) {
                return Err(format!("merge_tolerance = {} outside [0, 1)", self.merge_tolerance));
            }
            self.crf.validate().map_err(|e| e.to_string())?;
            self.weight.validate().map_err(|e| e.to_string())?;
            for (class, text) in &self.prompt_overrides {
                PromptTemplate::new(text.as_str()).map_err(|e| format!("override for {class}: {e}"))?;
            }
            Ok(())
        })();
        result.map_err(PipelineError::config)?;
        self.make_backend(None)?;
        Ok(())
    }

    pub fn stack_settings(&self) -> StackSettings {
        StackSettings {
            percentile: self.exposure_percentile,
            crf: self.crf,
            merge_tolerance: self.merge_tolerance,
        }
    }

    /// Instantiates the configured backend; `mock` optionally serves a
    /// sidecar labeling from segmentation.
    pub fn make_backend(
        &self,
        labels: Option<crate::masking::SemanticLabeling>,
    ) -> Result<Box<dyn Backend>, PipelineError> {
        let bad = |e: crate::inpaint::BackendError| PipelineError::config(e.to_string());
        Ok(match &self.backend {
            BackendConfig::Mock { rho_min } => {
                let mut b = MockBackend::new().with_rho_min(*rho_min).map_err(bad)?;
                if let Some(l) = labels {
                    b = b.with_labels(l);
                }
                Box::new(b)
            }
            BackendConfig::Http {
                url,
                timeout_secs,
                retries,
            } => Box::new(
                HttpBackend::with_timeout(url, Duration::from_secs(*timeout_secs))
                    .map_err(bad)?
                    .retries(*retries),
            ),
        })
    }
}
