use super::ExposureError;
use crate::imgcore::{linearize, LinearImage, ResponseCurve, Rgb, SdrImage};
use crate::masking::{SemanticClass, SoftMask};

/// `clamp(x * 2^ev, 0, 1)`, the value a linear radiance `x` takes in the
/// bracket at `ev`. The product is formed in double precision; merge relies on
/// this exact expression to recognise untouched pixels.
pub fn expose(x: f32, ev: f64) -> f32 {
    ((x as f64 * ev.exp2()) as f32).min(1.0)
}

/// Generated content placed into the stack at the exposure it was estimated
/// for. Its scene radiance is `content * 2^-ev`.
#[derive(Debug, Clone, PartialEq)]
pub struct Patch {
    class: Option<SemanticClass>,
    content: LinearImage,
    guide: SoftMask,
    ev: f64,
}

impl Patch {
    pub fn new(
        class: Option<SemanticClass>,
        content: &SdrImage,
        guide: SoftMask,
        ev: f64,
        crf: ResponseCurve,
    ) -> Result<Self, ExposureError> {
        content.ensure_same_size(guide.dimensions())?;
        if !(ev.is_finite() && ev <= 0.0) {
            return Err(ExposureError::InvalidEv(ev));
        }
        Ok(Patch {
            class,
            content: linearize(content, crf),
            guide,
            ev,
        })
    }

    pub fn class(&self) -> Option<SemanticClass> {
        self.class
    }

    /// Linearized content.
    pub fn content(&self) -> &LinearImage {
        &self.content
    }

    pub fn guide(&self) -> &SoftMask {
        &self.guide
    }

    pub fn ev(&self) -> f64 {
        self.ev
    }

    /// Class to record on a bracket at `ev`: only the bracket the content was
    /// estimated for, and only if the guide selects anything.
    fn tag_at(&self, ev: f64) -> Option<SemanticClass> {
        self.class
            .filter(|_| self.ev == ev && self.guide.alpha().iter().any(|&a| a > 0.0))
    }

    /// Blends the re-exposed content over `pixels` (a bracket at `ev`).
    fn composite(&self, pixels: &mut [Rgb], ev: f64) {
        let shift = ev - self.ev;
        for ((out, src), &a) in pixels
            .iter_mut()
            .zip(self.content.pixels())
            .zip(self.guide.alpha())
        {
            if a <= 0.0 {
                continue;
            }
            let a = a as f64;
            for c in 0..3 {
                let v = expose(src[c], shift) as f64;
                out[c] = ((1.0 - a) * out[c] as f64 + a * v) as f32;
            }
        }
    }
}

/// One exposure of the stack: linear values in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Bracket {
    ev: f64,
    image: LinearImage,
    classes: Vec<SemanticClass>,
}

impl Bracket {
    pub fn new(ev: f64, image: LinearImage) -> Result<Self, ExposureError> {
        if !ev.is_finite() {
            return Err(ExposureError::InvalidEv(ev));
        }
        if image.pixels().iter().flatten().any(|&c| c > 1.0) {
            return Err(ExposureError::InvalidStack(format!(
                "bracket at ev {ev} has values above 1"
            )));
        }
        Ok(Bracket {
            ev,
            image,
            classes: Vec::new(),
        })
    }

    pub fn ev(&self) -> f64 {
        self.ev
    }

    pub fn image(&self) -> &LinearImage {
        &self.image
    }

    /// Classes whose content was composited at this bracket's own exposure.
    pub fn classes(&self) -> &[SemanticClass] {
        &self.classes
    }
}

/// `clamp(base * 2^ev)` with every patch blended in, re-exposed to `ev`.
pub fn synthesize_bracket(
    base: &LinearImage,
    ev: f64,
    patches: &[Patch],
) -> Result<Bracket, ExposureError> {
    if !ev.is_finite() {
        return Err(ExposureError::InvalidEv(ev));
    }
    for p in patches {
        base.ensure_same_size(p.guide.dimensions())?;
    }
    let mut pixels: Vec<Rgb> = base.pixels().iter().map(|px| px.map(|c| expose(c, ev))).collect();
    let mut classes = Vec::new();
    for p in patches {
        p.composite(&mut pixels, ev);
        if let Some(class) = p.tag_at(ev) {
            if !classes.contains(&class) {
                classes.push(class);
            }
        }
    }
    Ok(Bracket {
        ev,
        image: LinearImage::from_valid(base.width(), base.height(), pixels),
        classes,
    })
}

/// Brackets sorted from the base (ev 0) down, plus the patches composited so
/// far and the unpatched base they are synthesized from.
#[derive(Debug, Clone, PartialEq)]
pub struct BracketStack {
    base: LinearImage,
    brackets: Vec<Bracket>,
    patches: Vec<Patch>,
}

impl BracketStack {
    /// Single-bracket stack around a linearized input in `[0, 1]`.
    pub fn new(base: LinearImage) -> Result<Self, ExposureError> {
        let bracket = Bracket::new(0.0, base.clone())?;
        Ok(BracketStack {
            base,
            brackets: vec![bracket],
            patches: Vec::new(),
        })
    }

    /// Assembles externally produced brackets. Exactly one must sit at ev 0;
    /// the others must have distinct evs and the same size.
    pub fn from_brackets(mut brackets: Vec<Bracket>) -> Result<Self, ExposureError> {
        brackets.sort_by(|a, b| b.ev.total_cmp(&a.ev));
        if brackets.first().map(|b| b.ev) != Some(0.0) {
            return Err(ExposureError::InvalidStack(
                "no base bracket at ev 0, or a bracket above it".into(),
            ));
        }
        for pair in brackets.windows(2) {
            if pair[0].ev == pair[1].ev {
                return Err(ExposureError::InvalidStack(format!(
                    "duplicate ev {}",
                    pair[0].ev
                )));
            }
            pair[1].image.ensure_same_size(pair[0].image.dimensions())?;
        }
        Ok(BracketStack {
            base: brackets[0].image.clone(),
            brackets,
            patches: Vec::new(),
        })
    }

    pub fn base(&self) -> &LinearImage {
        &self.base
    }

    pub fn brackets(&self) -> &[Bracket] {
        &self.brackets
    }

    pub fn patches(&self) -> &[Patch] {
        &self.patches
    }

    pub fn evs(&self) -> Vec<f64> {
        self.brackets.iter().map(|b| b.ev).collect()
    }

    pub fn dimensions(&self) -> (usize, usize) {
        self.base.dimensions()
    }

    pub fn bracket(&self, ev: f64) -> Option<&Bracket> {
        self.brackets.iter().find(|b| b.ev == ev)
    }

    pub fn darkest(&self) -> &Bracket {
        self.brackets.last().expect("stack always holds the base")
    }

    /// Existing ev closest to `ev` within `tolerance`; on a tie the brighter.
    pub fn nearest_within(&self, ev: f64, tolerance: f64) -> Option<f64> {
        self.brackets
            .iter()
            .map(|b| b.ev)
            .filter(|e| (e - ev).abs() <= tolerance)
            .min_by(|a, b| (a - ev).abs().total_cmp(&(b - ev).abs()))
    }

    /// Adds a bracket at `ev` (no-op if present), with all patches so far.
    pub fn insert(&mut self, ev: f64) -> Result<(), ExposureError> {
        if !(ev.is_finite() && ev <= 0.0) {
            return Err(ExposureError::InvalidEv(ev));
        }
        if self.bracket(ev).is_some() {
            return Ok(());
        }
        let bracket = synthesize_bracket(&self.base, ev, &self.patches)?;
        let at = self.brackets.partition_point(|b| b.ev > ev);
        self.brackets.insert(at, bracket);
        Ok(())
    }

    /// In-place form of [`propagate`].
    pub fn apply(&mut self, patch: Patch) -> Result<(), ExposureError> {
        if self.bracket(patch.ev).is_none() {
            return Err(ExposureError::UnknownEv(patch.ev));
        }
        self.base.ensure_same_size(patch.guide.dimensions())?;
        if self.patches.contains(&patch) {
            return Ok(());
        }
        for b in &mut self.brackets {
            patch.composite(b.image.pixels_mut(), b.ev);
            if let Some(class) = patch.tag_at(b.ev) {
                if !b.classes.contains(&class) {
                    b.classes.push(class);
                }
            }
        }
        self.patches.push(patch);
        Ok(())
    }
}

/// Composites `patch` at its own bracket and, re-exposed by
/// `2^(ev_b - ev_src)`, into every other bracket. Applying the same patch a
/// second time changes nothing.
pub fn propagate(stack: &BracketStack, patch: Patch) -> Result<BracketStack, ExposureError> {
    let mut out = stack.clone();
    out.apply(patch)?;
    Ok(out)
}
