use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::config::{BackendConfig, OpeningParams, PipelineConfig};
use super::{AtStage, PipelineError, Stage};
use crate::exposure::{build_stack, ClassJob, StackBuild};
use crate::imgcore::{delinearize, encode_hdr, read_ldr, write_ldr_png, SdrImage};
use crate::inpaint::{Backend, SegmentRequest};
use crate::masking::{
    class_mask, dilate, feather, inpaint_mask, saturation_mask, BinaryMask, DiskKernel, SemanticClass,
    SemanticLabeling, SoftMask,
};
use crate::merge::{dynamic_range, merge, HdrImage};
use crate::semgraph::{inpaint_order, load_graph, sample_prompt, OrderedSemanticGraph, PromptConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassStatus {
    Inpainted,
    /// Too few pixels survived the opening.
    TooSmall,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassReport {
    pub class: SemanticClass,
    pub status: ClassStatus,
    pub clipped_pixels: usize,
    pub inpaint_pixels: usize,
    pub guide_pixels: usize,
    pub alpha: u32,
    pub beta: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub prompt: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub estimated_ev: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bracket_ev: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub working_ev: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BracketEntry {
    pub ev: f64,
    pub classes: Vec<SemanticClass>,
}

/// Audit record of one run. Contains no timings or paths, so identical runs
/// produce identical manifests.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub width: usize,
    pub height: usize,
    pub backend: String,
    pub seed: u64,
    pub saturated_pixels: usize,
    /// Every class with clipped pixels, in label order.
    pub classes: Vec<ClassReport>,
    /// Inpainting order of the classes that were filled.
    pub order: Vec<SemanticClass>,
    pub brackets: Vec<BracketEntry>,
    pub input_dynamic_range: Option<f64>,
    pub dynamic_range: Option<f64>,
}

/// Masks derived for one clipped class.
#[derive(Debug, Clone)]
pub struct ClassMasks {
    pub class: SemanticClass,
    pub clipped: BinaryMask,
    pub inpaint: BinaryMask,
    pub refined: SoftMask,
    pub guide: SoftMask,
    pub opening: OpeningParams,
}

/// Everything [`process`] computed, for callers that want more than the file.
#[derive(Debug, Clone)]
pub struct Processed {
    pub hdr: HdrImage,
    pub manifest: Manifest,
    pub labels: SemanticLabeling,
    pub saturated: BinaryMask,
    pub masks: Vec<ClassMasks>,
    pub build: StackBuild,
}

impl Processed {
    /// Compositing weight of `class` (zero if it was not filled).
    pub fn guide(&self, class: SemanticClass) -> Option<&SoftMask> {
        self.masks.iter().find(|m| m.class == class).map(|m| &m.guide)
    }
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub dump_debug: Option<PathBuf>,
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub output: PathBuf,
    pub manifest_path: PathBuf,
    pub manifest: Manifest,
}

/// Labeling sidecar the mock backend serves for `input`: `<stem>.labels.png`.
pub fn sidecar_path(input: &Path) -> PathBuf {
    let stem = input.file_stem().unwrap_or_default().to_string_lossy();
    input.with_file_name(format!("{stem}.labels.png"))
}

/// Classes other than `class` directly outside its mask.
fn neighbors(mask: &BinaryMask, hard: &[u8], class: SemanticClass) -> BTreeSet<SemanticClass> {
    let ring = dilate(mask, DiskKernel::new(1).expect("radius 1 is valid"));
    ring.bits()
        .iter()
        .zip(mask.bits())
        .zip(hard)
        .filter(|((&r, &m), _)| r && !m)
        .filter_map(|(_, &l)| SemanticClass::from_id(l as usize).ok())
        .filter(|&c| c != class)
        .collect()
}

fn class_masks(
    labels: &SemanticLabeling,
    saturated: &BinaryMask,
    config: &PipelineConfig,
) -> Result<Vec<ClassMasks>, PipelineError> {
    let hard = labels.to_hard_labels();
    let sat_feather = feather(saturated, config.guide_radius);
    let mut out = Vec::new();
    for class in SemanticClass::ALL {
        let cm = class_mask(labels, class.id(), config.class_threshold).at(Stage::Masking)?;
        let clipped = crate::masking::intersect(saturated, &cm).at(Stage::Masking)?;
        if clipped.is_empty() {
            continue;
        }
        let opening = config.opening.select(class, &neighbors(&cm, &hard, class));
        let inpaint = inpaint_mask(&clipped, opening.alpha, opening.beta).at(Stage::Masking)?;
        let support = crate::masking::intersect(&inpaint, saturated).at(Stage::Masking)?;
        let guide = sat_feather.restrict(&support).at(Stage::Masking)?;
        let refined = feather(&inpaint, config.refine_radius);
        out.push(ClassMasks {
            class,
            clipped,
            inpaint,
            refined,
            guide,
            opening,
        });
    }
    Ok(out)
}

fn job_seed(seed: u64, class: SemanticClass) -> u64 {
    seed ^ (class.id() as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

/// Runs the whole pipeline in memory.
pub fn process(
    input: &SdrImage,
    graph: &OrderedSemanticGraph,
    backend: &dyn Backend,
    config: &PipelineConfig,
) -> Result<Processed, PipelineError> {
    config.validate()?;
    let (width, height) = input.dimensions();
    let labels = backend
        .segment(&SegmentRequest::new(input))
        .at(Stage::Segment)?;
    if labels.dimensions() != (width, height) {
        return Err(PipelineError::new(
            Stage::Segment,
            crate::inpaint::BackendError::DimensionMismatch {
                expected: (width, height),
                found: labels.dimensions(),
            },
        ));
    }
    let saturated = saturation_mask(input, config.sat_threshold);
    let masks = class_masks(&labels, &saturated, config)?;

    let eligible: Vec<SemanticClass> = masks
        .iter()
        .filter(|m| m.inpaint.count() >= config.min_region_pixels)
        .map(|m| m.class)
        .collect();
    let order = inpaint_order(graph, &eligible);

    let mut history: Vec<String> = Vec::new();
    let mut jobs = Vec::with_capacity(order.len());
    for &class in &order {
        let m = masks.iter().find(|m| m.class == class).expect("ordered class has masks");
        let prompt = sample_prompt(
            graph,
            class,
            config.seed,
            &history,
            config.prompt_overrides.get(&class).map(String::as_str),
        )
        .at(Stage::Prompt)?;
        history.push(prompt.clone());
        jobs.push(ClassJob {
            class,
            mask: m.inpaint.clone(),
            guide: m.guide.clone(),
            prompt,
            seed: job_seed(config.seed, class),
        });
    }

    let build = build_stack(input, &jobs, backend, &config.stack_settings()).at(Stage::Inpaint)?;
    let hdr = merge(&build.stack, &config.weight);

    let classes = masks
        .iter()
        .map(|m| {
            let outcome = build.outcomes.iter().find(|o| o.class == m.class);
            ClassReport {
                class: m.class,
                status: if outcome.is_some() {
                    ClassStatus::Inpainted
                } else {
                    ClassStatus::TooSmall
                },
                clipped_pixels: m.clipped.count(),
                inpaint_pixels: m.inpaint.count(),
                guide_pixels: m.guide.alpha().iter().filter(|&&a| a > 0.0).count(),
                alpha: m.opening.alpha,
                beta: m.opening.beta,
                prompt: outcome.map(|o| o.prompt.clone()),
                estimated_ev: outcome.map(|o| o.estimate.ev),
                bracket_ev: outcome.map(|o| o.ev),
                working_ev: outcome.map(|o| o.working_ev),
            }
        })
        .collect();
    let manifest = Manifest {
        width,
        height,
        backend: backend.name().to_string(),
        seed: config.seed,
        saturated_pixels: saturated.count(),
        classes,
        order,
        brackets: bracket_entries(&build),
        input_dynamic_range: dynamic_range(build.stack.base()).ok(),
        dynamic_range: dynamic_range(&hdr).ok(),
    };
    Ok(Processed {
        hdr,
        manifest,
        labels,
        saturated,
        masks,
        build,
    })
}

fn bracket_entries(build: &StackBuild) -> Vec<BracketEntry> {
    build
        .stack
        .brackets()
        .iter()
        .map(|b| BracketEntry {
            ev: b.ev(),
            classes: b.classes().to_vec(),
        })
        .collect()
}

fn load_or_default_graph(config: &PipelineConfig) -> Result<OrderedSemanticGraph, PipelineError> {
    match &config.graph {
        Some(path) => load_graph(path).at(Stage::Graph),
        None => Ok(OrderedSemanticGraph::unconnected(&PromptConfig::builtin())),
    }
}

/// Writes `bytes` next to `path` and returns the temporary file.
fn stage_file(path: &Path, bytes: &[u8]) -> Result<PathBuf, PipelineError> {
    let name = path.file_name().unwrap_or_default().to_string_lossy();
    let tmp = path.with_file_name(format!(".{name}.{}.tmp", std::process::id()));
    fs::write(&tmp, bytes).map_err(|e| PipelineError::io(Stage::Output, &tmp, e))?;
    Ok(tmp)
}

fn commit(staged: &[(PathBuf, &Path)]) -> Result<(), PipelineError> {
    for (tmp, dest) in staged {
        if let Err(e) = fs::rename(tmp, dest) {
            for (t, _) in staged {
                let _ = fs::remove_file(t);
            }
            return Err(PipelineError::io(Stage::Output, *dest, e));
        }
    }
    Ok(())
}

/// Manifest path for an output file: `out.hdr` -> `out.manifest.json`.
pub fn manifest_path(output: &Path) -> PathBuf {
    output.with_extension("manifest.json")
}

/// Reads `input`, processes it and writes the HDR result plus manifest.
/// Nothing is written unless every stage succeeds.
pub fn run(
    input: &Path,
    output: &Path,
    config: &PipelineConfig,
    options: &RunOptions,
) -> Result<RunReport, PipelineError> {
    config.validate()?;
    let sdr = read_ldr(input).at(Stage::Input)?;
    let graph = load_or_default_graph(config)?;
    let sidecar = sidecar_path(input);
    let labels = match config.backend {
        BackendConfig::Mock { .. } if sidecar.is_file() => {
            log::info!("using labeling sidecar {}", sidecar.display());
            Some(SemanticLabeling::read_label_png(&sidecar).at(Stage::Input)?)
        }
        _ => None,
    };
    let backend = config.make_backend(labels)?;
    let processed = process(&sdr, &graph, backend.as_ref(), config)?;

    let mut hdr_bytes = Vec::new();
    encode_hdr(&processed.hdr, &mut hdr_bytes).map_err(|e| PipelineError::io(Stage::Output, output, e))?;
    let mut json = serde_json::to_string_pretty(&processed.manifest).expect("manifest serializes");
    json.push('\n');
    let manifest_path = manifest_path(output);

    if let Some(dir) = &options.dump_debug {
        dump_debug(dir, &processed, config)?;
    }
    let hdr_tmp = stage_file(output, &hdr_bytes)?;
    let manifest_tmp = match stage_file(&manifest_path, json.as_bytes()) {
        Ok(t) => t,
        Err(e) => {
            let _ = fs::remove_file(&hdr_tmp);
            return Err(e);
        }
    };
    commit(&[(hdr_tmp, output), (manifest_tmp, &manifest_path)])?;
    Ok(RunReport {
        output: output.to_path_buf(),
        manifest_path,
        manifest: processed.manifest,
    })
}

fn ev_tag(ev: f64) -> String {
    format!("{ev:+.3}").replace('.', "_")
}

/// Masks, inpainted content and every bracket as PNG, plus `brackets.json`.
///
/// `<class>.patch.png` with `<class>.inpaint.png` reproduces the manifest's
/// estimated ev through `estimate_exposure`.
pub fn dump_debug(dir: &Path, p: &Processed, config: &PipelineConfig) -> Result<(), PipelineError> {
    let out = Stage::Output;
    fs::create_dir_all(dir).map_err(|e| PipelineError::io(out, dir, e))?;
    let labels = p.labels.to_label_png().at(out)?;
    let path = dir.join("labels.png");
    fs::write(&path, labels).map_err(|e| PipelineError::io(out, &path, e))?;
    p.saturated.write_png(dir.join("saturated.png")).at(out)?;
    for m in &p.masks {
        let c = m.class.name();
        m.clipped.write_png(dir.join(format!("{c}.clipped.png"))).at(out)?;
        m.inpaint.write_png(dir.join(format!("{c}.inpaint.png"))).at(out)?;
        m.refined.write_png(dir.join(format!("{c}.refined.png"))).at(out)?;
        m.guide.write_png(dir.join(format!("{c}.guide.png"))).at(out)?;
    }
    for o in &p.build.outcomes {
        write_ldr_png(&o.content, dir.join(format!("{}.patch.png", o.class.name()))).at(out)?;
    }
    for (i, b) in p.build.stack.brackets().iter().enumerate() {
        let img = delinearize(b.image(), config.crf).at(out)?;
        write_ldr_png(&img, dir.join(format!("bracket_{i}_ev{}.png", ev_tag(b.ev())))).at(out)?;
    }
    #[derive(Serialize)]
    struct Brackets<'a> {
        brackets: &'a [BracketEntry],
    }
    let entries = bracket_entries(&p.build);
    let mut json = serde_json::to_string_pretty(&Brackets { brackets: &entries }).expect("serializes");
    json.push('\n');
    let path = dir.join("brackets.json");
    fs::write(&path, json).map_err(|e| PipelineError::io(out, &path, e))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::imgcore::linearize;
    use crate::inpaint::MockBackend;

    fn sky_scene() -> (SdrImage, SemanticLabeling) {
        let (w, h) = (64, 48);
        let img = SdrImage::from_fn(w, h, |x, y| {
            if y < 24 {
                [1.0; 3]
            } else {
                [0.2 + 0.3 * x as f32 / w as f32; 3]
            }
        })
        .unwrap();
        let hard: Vec<u8> = (0..w * h)
            .map(|i| if i / w < 26 { SemanticClass::Sky.id() as u8 } else { SemanticClass::Ground.id() as u8 })
            .collect();
        (img, SemanticLabeling::from_hard_labels(w, h, &hard).unwrap())
    }

    fn graph() -> OrderedSemanticGraph {
        OrderedSemanticGraph::unconnected(&PromptConfig::builtin())
    }

    #[test]
    fn no_saturation_is_identity() {
        let img = SdrImage::filled(8, 8, [0.4; 3]).unwrap();
        let p = process(&img, &graph(), &MockBackend::new(), &PipelineConfig::default()).unwrap();
        assert!(p.manifest.classes.is_empty());
        assert_eq!(p.manifest.brackets.len(), 1);
        assert_eq!(p.hdr, linearize(&img, Default::default()));
    }

    #[test]
    fn sky_gets_a_darker_bracket() {
        let (img, labels) = sky_scene();
        let backend = MockBackend::new().with_labels(labels);
        let p = process(&img, &graph(), &backend, &PipelineConfig::default()).unwrap();
        assert_eq!(p.manifest.order, vec![SemanticClass::Sky]);
        let sky = &p.manifest.classes[0];
        assert_eq!(sky.status, ClassStatus::Inpainted);
        assert!(sky.bracket_ev.unwrap() < 0.0);
        assert_eq!(sky.clipped_pixels, 64 * 24);
        assert_eq!(p.manifest.brackets.len(), 2);
        assert!(p.manifest.dynamic_range.unwrap() > p.manifest.input_dynamic_range.unwrap());
    }

    #[test]
    fn ring_neighbors() {
        let (_, labels) = sky_scene();
        let hard = labels.to_hard_labels();
        let sky = class_mask(&labels, SemanticClass::Sky.id(), 0.5).unwrap();
        let n = neighbors(&sky, &hard, SemanticClass::Sky);
        assert_eq!(n.into_iter().collect::<Vec<_>>(), vec![SemanticClass::Ground]);
    }

    #[test]
    fn small_regions_are_skipped() {
        let img = SdrImage::from_fn(32, 32, |x, y| if x < 3 && y < 3 { [1.0; 3] } else { [0.3; 3] }).unwrap();
        let p = process(&img, &graph(), &MockBackend::new(), &PipelineConfig::default()).unwrap();
        assert_eq!(p.manifest.classes.len(), 1);
        assert_eq!(p.manifest.classes[0].status, ClassStatus::TooSmall);
        assert!(p.manifest.order.is_empty());
    }

    #[test]
    fn sidecar_naming() {
        assert_eq!(sidecar_path(Path::new("/a/b/img.jpg")), PathBuf::from("/a/b/img.labels.png"));
        assert_eq!(manifest_path(Path::new("out.hdr")), PathBuf::from("out.manifest.json"));
    }
}
