use super::{
    estimate_exposure, BracketStack, ExposureError, ExposureEstimate, Patch,
    DEFAULT_MERGE_TOLERANCE, DEFAULT_PERCENTILE,
};
use crate::imgcore::{delinearize, linearize, ResponseCurve, SdrImage};
use crate::inpaint::{Backend, InpaintRequest};
use crate::masking::{BinaryMask, SemanticClass, SoftMask};

/// One clipped class to fill, in inpainting order.
#[derive(Debug, Clone)]
pub struct ClassJob {
    pub class: SemanticClass,
    /// Pixels handed to the backend.
    pub mask: BinaryMask,
    /// Blend weights for compositing the result into the brackets.
    pub guide: SoftMask,
    pub prompt: String,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StackSettings {
    pub percentile: f64,
    pub crf: ResponseCurve,
    /// Estimates within this many stops of an existing bracket join it.
    pub merge_tolerance: f64,
}

impl Default for StackSettings {
    fn default() -> Self {
        StackSettings {
            percentile: DEFAULT_PERCENTILE,
            crf: ResponseCurve::default(),
            merge_tolerance: DEFAULT_MERGE_TOLERANCE,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ClassOutcome {
    pub class: SemanticClass,
    pub prompt: String,
    /// Exposure of the bracket the class was inpainted on.
    pub working_ev: f64,
    pub estimate: ExposureEstimate,
    /// Bracket the content landed in; differs from `estimate.ev` when snapped.
    pub ev: f64,
    /// Backend output, with the working image restored outside the mask.
    pub content: SdrImage,
}

#[derive(Debug, Clone)]
pub struct StackBuild {
    pub stack: BracketStack,
    pub outcomes: Vec<ClassOutcome>,
}

/// Inpaints each job in turn and grows the bracket stack.
///
/// The first class is inpainted on the input itself; later ones on the
/// display rendering of the darkest bracket so far, so content generated
/// earlier (a bright sky, say) is visible to the model when it fills, for
/// example, a reflecting water surface.
pub fn build_stack(
    input: &SdrImage,
    jobs: &[ClassJob],
    backend: &dyn Backend,
    settings: &StackSettings,
) -> Result<StackBuild, ExposureError> {
    settings.crf.validate()?;
    let mut stack = BracketStack::new(linearize(input, settings.crf))?;
    let mut outcomes = Vec::with_capacity(jobs.len());
    for (i, job) in jobs.iter().enumerate() {
        let (working, working_ev) = if i == 0 {
            (input.clone(), 0.0)
        } else {
            let dark = stack.darkest();
            (delinearize(dark.image(), settings.crf)?, dark.ev())
        };
        let backend_err = |source| ExposureError::Backend {
            class: job.class,
            source,
        };
        let req = InpaintRequest::new(&working, &job.mask, &job.prompt, job.seed)
            .map_err(backend_err)?;
        let raw = backend.inpaint(&req).map_err(backend_err)?;
        let content = req.accept(raw).map_err(backend_err)?;

        let estimate = estimate_exposure(&content, &job.mask, settings.percentile, settings.crf)?;
        let ev = match stack.nearest_within(estimate.ev, settings.merge_tolerance) {
            Some(existing) => existing,
            None => {
                stack.insert(estimate.ev)?;
                estimate.ev
            }
        };
        log::info!(
            "{}: \"{}\" -> ev {:.3} (bracket {:.3})",
            job.class,
            job.prompt,
            estimate.ev,
            ev
        );
        let patch = Patch::new(Some(job.class), &content, job.guide.clone(), ev, settings.crf)?;
        stack.apply(patch)?;
        outcomes.push(ClassOutcome {
            class: job.class,
            prompt: job.prompt.clone(),
            working_ev,
            estimate,
            ev,
            content,
        });
    }
    Ok(StackBuild { stack, outcomes })
}
